//! Acceptance suite for `jlres`.
//!
//! Each criterion checks the library against brute-force oracles from
//! [`oracle`] and reports pass/fail with timing. [`run_all`] drives the
//! nine criteria; [`Mutation`] injects a known bug to confirm the suite
//! catches it.

use std::fmt;
use std::time::Instant;

use jlres::Execution;
use serde::{Deserialize, Serialize};

mod criteria;
pub mod oracle;

pub use criteria::tame_shapes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Small,
    Full,
}

impl std::str::FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "small" => Ok(Scale::Small),
            "full" => Ok(Scale::Full),
            other => Err(format!("unknown scale '{other}' (small|full)")),
        }
    }
}

/// Deliberate defects for checking that the suite has teeth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Flip the rectifier used as the closed form in the descent replay.
    RectifierSignBug,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Config {
    pub scale: Scale,
    pub exec: Execution,
    pub mutation: Option<Mutation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    pub failure_count: u64,
    /// First few failures.
    pub failures: Vec<String>,
    pub elapsed_ms: f64,
    pub limit_ms: u64,
    pub within_limit: bool,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} ({} checks, {:.1} ms / limit {} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            self.elapsed_ms,
            self.limit_ms
        )?;
        if !self.within_limit {
            write!(f, " over time limit")?;
        }
        if let Some(first) = self.failures.first() {
            write!(f, ": {} failure(s), first: {first}", self.failure_count)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub scale: Scale,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

const KEEP_FAILURES: usize = 8;

/// Accumulates checks for one criterion.
#[derive(Debug, Default)]
pub struct Tally {
    checks: u64,
    failure_count: u64,
    failures: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(msg());
        }
    }

    pub fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < KEEP_FAILURES {
            self.failures.push(msg);
        }
    }

    /// Records an error as a failure and yields the value otherwise.
    pub fn ok<T>(&mut self, r: jlres::Result<T>, ctx: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.fail(format!("{}: {} ({})", ctx(), e, e.kind()));
                None
            }
        }
    }
}

type Check = fn(&Config, &mut Tally);

struct Criterion {
    id: u8,
    name: &'static str,
    limit_s: u64,
    run: Check,
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        name: "1-zsigmondy-oracle",
        limit_s: 10,
        run: criteria::zsigmondy,
    },
    Criterion {
        id: 2,
        name: "2-ell-regular-uniqueness",
        limit_s: 30,
        run: criteria::ell_regular,
    },
    Criterion {
        id: 3,
        name: "3-linking-completeness",
        limit_s: 30,
        run: criteria::linking,
    },
    Criterion {
        id: 4,
        name: "4-regularization-contract",
        limit_s: 60,
        run: criteria::regularization,
    },
    Criterion {
        id: 5,
        name: "5-rectifier-formula",
        limit_s: 5,
        run: criteria::rectifier,
    },
    Criterion {
        id: 6,
        name: "6-transfer-via-descent",
        limit_s: 120,
        run: criteria::descent_replay,
    },
    Criterion {
        id: 7,
        name: "7-pair-dictionary",
        limit_s: 30,
        run: criteria::pairs,
    },
    Criterion {
        id: 8,
        name: "8-transfer-invariants",
        limit_s: 10,
        run: criteria::transfer_invariants,
    },
    Criterion {
        id: 9,
        name: "9-green-traces",
        limit_s: 5,
        run: criteria::green,
    },
];

/// Names of all criteria, in report order.
pub fn criterion_names() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.name).collect()
}

fn run_one(c: &Criterion, cfg: &Config) -> CriterionResult {
    let mut tally = Tally::default();
    let start = Instant::now();
    (c.run)(cfg, &mut tally);
    let elapsed = start.elapsed();
    // extended sweeps get ten times the budget
    let limit_ms = c.limit_s * 1000 * if cfg.scale == Scale::Full { 10 } else { 1 };
    let within_limit = elapsed.as_millis() < limit_ms as u128;
    if tally.checks == 0 {
        tally.fail("no checks were run".into());
    }
    CriterionResult {
        id: c.id,
        name: c.name.to_string(),
        passed: tally.failure_count == 0 && within_limit,
        checks: tally.checks,
        failure_count: tally.failure_count,
        failures: tally.failures,
        elapsed_ms: elapsed.as_secs_f64() * 1000.0,
        limit_ms,
        within_limit,
    }
}

/// Runs one criterion by id (1 to 9).
pub fn run_criterion(id: u8, cfg: &Config) -> Option<CriterionResult> {
    CRITERIA
        .iter()
        .find(|c| c.id == id)
        .map(|c| run_one(c, cfg))
}

/// Runs every criterion, concurrently when `cfg.exec` allows. Results are
/// sorted by name.
pub fn run_all(cfg: &Config) -> SuiteReport {
    let mut criteria = jlres::par::map(&CRITERIA, cfg.exec, |c| run_one(c, cfg));
    criteria.sort_by(|a, b| a.name.cmp(&b.name));
    SuiteReport {
        scale: cfg.scale,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}
