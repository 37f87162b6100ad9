use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use jlres::characters::{self, orbit_of, CharExp};
use jlres::regularize::{self, RegularizeOptions};
use jlres::{
    factor, green_traces, limits, linking, tame_transfer, Execution, FieldLevel, TowerParams,
};
use jlres_conformance::{Mutation, Scale};
use num_bigint::BigUint;
use serde_json::{json, Value};

mod config;

use config::ConfigFile;

#[derive(Parser, Debug)]
#[command(
    name = "jlres",
    version,
    about = "Residual Jacquet–Langlands transfer computations, JSON output"
)]
struct Cli {
    /// key = value file supplying any flag; flags take precedence.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ShapeArgs {
    /// Comma-separated p,q,eEF,fEF,m,d.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long = "eEF", value_name = "E")]
    e_ef: Option<u64>,
    #[arg(long = "fEF", value_name = "F")]
    f_ef: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
}

#[derive(Args, Debug)]
struct LevelArgs {
    #[arg(long = "Q", value_name = "Q")]
    big_q: Option<u64>,
    #[arg(long)]
    nprime: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived tower invariants of a shape.
    Tower(ShapeArgs),
    /// Galois orbit of a character.
    Orbit {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, visible_alias = "alpha")]
        a: Option<BigUint>,
    },
    /// Order of a character.
    Order {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, visible_alias = "alpha")]
        a: Option<BigUint>,
    },
    /// ℓ-regular and ℓ-primary parts.
    RegularPart {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, visible_alias = "alpha")]
        a: Option<BigUint>,
        #[arg(long)]
        ell: Option<BigUint>,
    },
    /// ℓ-linking chain between two characters of order M.
    Chain {
        #[arg(long = "M", value_name = "M")]
        big_m: Option<BigUint>,
        #[arg(long)]
        from: Option<BigUint>,
        #[arg(long)]
        to: Option<BigUint>,
        #[arg(long = "Q", value_name = "Q")]
        big_q: Option<u64>,
        #[arg(long)]
        nprime: Option<u64>,
    },
    /// Linking blocks of all orbits at a level.
    Partition(LevelArgs),
    /// Regularizing lift of a character.
    Regularize {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, visible_alias = "a")]
        alpha: Option<BigUint>,
        /// Fixed blow-up factor (odd, at least 7); no retries.
        #[arg(long = "blow-up")]
        blow_up: Option<u64>,
    },
    /// Smallest primitive prime divisor of b^r − 1.
    Zsigmondy {
        #[arg(long)]
        b: Option<BigUint>,
        #[arg(long)]
        r: Option<u64>,
    },
    /// Rectifier character of an essentially tame shape.
    Rectifier(ShapeArgs),
    /// Transfer of one orbit.
    Transfer {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, visible_alias = "a")]
        alpha: Option<BigUint>,
    },
    /// Transfer of one orbit through the regular lift, checked against the
    /// rectifier.
    TransferDescent {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, visible_alias = "a")]
        alpha: Option<BigUint>,
    },
    /// Pair class and its orbit, from (f, β) or from an orbit.
    Pair {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        f: Option<u64>,
        #[arg(long)]
        beta: Option<BigUint>,
        #[arg(long, visible_alias = "a")]
        alpha: Option<BigUint>,
    },
    /// Transfer of a pair class.
    PairTransfer {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        f: Option<u64>,
        #[arg(long)]
        beta: Option<BigUint>,
    },
    /// Trace of Green's representation at a regular elliptic element.
    Green {
        /// Cardinality of the base field d.
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        u: Option<u64>,
        #[arg(long)]
        alpha0: Option<BigUint>,
        #[arg(long)]
        g: Option<BigUint>,
    },
    /// The full transfer permutation.
    Table(ShapeArgs),
    /// Run the acceptance suite.
    Selftest {
        #[arg(long)]
        scale: Option<Scale>,
        /// Inject a known defect: rectifier-sign-bug.
        #[arg(long)]
        mutate: Option<String>,
    },
}

enum Failure {
    Usage(String),
    Domain(jlres::Error),
}

impl From<jlres::Error> for Failure {
    fn from(e: jlres::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<Value, Failure>;

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

struct Ctx {
    cfg: ConfigFile,
    exec: Execution,
}

impl Ctx {
    fn shape(&self, s: ShapeArgs) -> Result<TowerParams, Failure> {
        let packed = self.cfg.get(s.shape, "shape")?;
        let given = [s.p, s.q, s.e_ef, s.f_ef, s.m, s.d];
        let fields = if let Some(packed) = packed.filter(|_| given.iter().all(Option::is_none)) {
            let parts: Vec<u64> = packed
                .split(',')
                .map(|x| x.trim().parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("--shape {packed}: {e}"))?;
            <[u64; 6]>::try_from(parts)
                .map_err(|_| format!("--shape expects p,q,eEF,fEF,m,d, got {packed}"))?
        } else {
            [
                self.cfg.require(s.p, "p")?,
                self.cfg.require(s.q, "q")?,
                self.cfg.require(s.e_ef, "eEF")?,
                self.cfg.require(s.f_ef, "fEF")?,
                self.cfg.require(s.m, "m")?,
                self.cfg.require(s.d, "d")?,
            ]
        };
        let [p, q, e, f, m, d] = fields;
        Ok(TowerParams::new(p, q, e, f, m, d)?)
    }

    fn level(&self, l: LevelArgs) -> Result<FieldLevel, Failure> {
        let q = self.cfg.require(l.big_q, "Q")?;
        let n = self.cfg.require(l.nprime, "nprime")?;
        Ok(FieldLevel::new(q, n)?)
    }

    fn character(
        &self,
        level: FieldLevel,
        a: Option<BigUint>,
        key: &str,
    ) -> Result<CharExp, Failure> {
        let a: BigUint = self.cfg.require(a, key)?;
        if &a >= level.order() {
            return Err(jlres::Error::OutOfRange(format!(
                "exponent {a} is not reduced mod {}",
                level.order()
            ))
            .into());
        }
        Ok(CharExp::new(level, a))
    }
}

/// `(Q, n')` with `Q^n' − 1 = M`, `Q` a prime power and `n'` largest.
fn infer_level(m: &BigUint) -> Option<(u64, u64)> {
    let target = m + 1u32;
    (1..=limits::max_level_degree()).rev().find_map(|n| {
        let q = target.nth_root(n as u32);
        let q64 = u64::try_from(&q).ok()?;
        let prime_power = factor::factorize(&q).is_ok_and(|f| f.len() == 1);
        (q64 >= 2 && num_traits::pow(q.clone(), n as usize) == target && prime_power)
            .then_some((q64, n))
    })
}

fn run(ctx: &Ctx, command: Command) -> Outcome {
    let cfg = &ctx.cfg;
    match command {
        Command::Tower(s) => Ok(to_json(&ctx.shape(s)?)),
        Command::Orbit { level, a } => {
            let alpha = ctx.character(ctx.level(level)?, a, "a")?;
            Ok(to_json(&orbit_of(&alpha)))
        }
        Command::Order { level, a } => {
            let alpha = ctx.character(ctx.level(level)?, a, "a")?;
            Ok(json!({
                "a": alpha.exponent().to_string(),
                "M": alpha.modulus().to_string(),
                "order": alpha.order().to_string(),
                "parametric_degree": characters::parametric_degree(&alpha),
            }))
        }
        Command::RegularPart { level, a, ell } => {
            let alpha = ctx.character(ctx.level(level)?, a, "a")?;
            let ell: BigUint = cfg.require(ell, "ell")?;
            let reg = characters::ell_regular_part(&alpha, &ell)?;
            let primary = characters::ell_primary_part(&alpha, &ell)?;
            Ok(json!({
                "ell": ell.to_string(),
                "regular": to_json(&reg),
                "primary": to_json(&primary),
                "regular_orbit": to_json(&orbit_of(&reg)),
            }))
        }
        Command::Chain {
            big_m,
            from,
            to,
            big_q,
            nprime,
        } => {
            let m: BigUint = cfg.require(big_m, "M")?;
            let (q, n) = match (cfg.get(big_q, "Q")?, cfg.get(nprime, "nprime")?) {
                (Some(q), Some(n)) => (q, n),
                (None, None) => infer_level(&m).ok_or_else(|| {
                    jlres::Error::OutOfRange(format!("{m} is not Q^n − 1 for a prime power Q"))
                })?,
                _ => {
                    return Err(Failure::Usage(
                        "--Q and --nprime must be given together".into(),
                    ))
                }
            };
            let level = FieldLevel::new(q, n)?;
            if level.order() != &m {
                return Err(jlres::Error::LevelMismatch(format!(
                    "{q}^{n} − 1 = {} ≠ M = {m}",
                    level.order()
                ))
                .into());
            }
            let from = ctx.character(level.clone(), from, "from")?;
            let to = ctx.character(level, to, "to")?;
            let chain = linking::build_link_chain(&from, &to)?;
            let verified = chain.verify()?;
            let mut v = to_json(&chain);
            v["verified"] = json!(verified);
            Ok(v)
        }
        Command::Partition(l) => {
            let blocks = linking::linked_partition(&ctx.level(l)?, ctx.exec)?;
            Ok(json!({ "block_count": blocks.len(), "blocks": to_json(&blocks) }))
        }
        Command::Regularize {
            shape,
            alpha,
            blow_up,
        } => {
            let params = ctx.shape(shape)?;
            let alpha = ctx.character(params.top_level()?, alpha, "alpha")?;
            let opts = RegularizeOptions {
                a_override: cfg.get(blow_up, "blow-up")?,
                ..Default::default()
            };
            Ok(to_json(&regularize::regularize(&alpha, &params, opts)?))
        }
        Command::Zsigmondy { b, r } => {
            let b: BigUint = cfg.require(b, "b")?;
            let r: u64 = cfg.require(r, "r")?;
            match regularize::zsigmondy_prime(&b, r)? {
                Some((ell, cert)) => {
                    Ok(json!({ "ell": ell.to_string(), "certificate": to_json(&cert) }))
                }
                None => Err(jlres::Error::ZsigmondyException { b, r }.into()),
            }
        }
        Command::Rectifier(s) => {
            let spec = tame_transfer::rectifier(&ctx.shape(s)?)?;
            Ok(json!({
                "w": spec.terms.w,
                "v": spec.terms.v,
                "u": spec.terms.u,
                "y": spec.terms.y,
                "M": spec.mu.modulus().to_string(),
                "mu_exp": spec.mu.exponent().to_string(),
                "nontrivial": spec.nontrivial,
            }))
        }
        Command::Transfer { shape, alpha } => {
            let params = ctx.shape(shape)?;
            let spec = tame_transfer::rectifier(&params)?;
            let alpha = ctx.character(params.top_level()?, alpha, "alpha")?;
            let source = orbit_of(&alpha);
            let image = tame_transfer::apply_transfer(&source, &spec)?;
            Ok(json!({
                "source": to_json(&source),
                "image": to_json(&image),
                "mu_exp": spec.mu.exponent().to_string(),
            }))
        }
        Command::TransferDescent { shape, alpha } => {
            let params = ctx.shape(shape)?;
            let alpha = ctx.character(params.top_level()?, alpha, "alpha")?;
            Ok(to_json(&tame_transfer::transfer_via_descent(
                &alpha, &params,
            )?))
        }
        Command::Pair {
            shape,
            f,
            beta,
            alpha,
        } => {
            let params = ctx.shape(shape)?;
            let pair = match (cfg.get(f, "f")?, cfg.get::<BigUint>(beta, "beta")?, alpha) {
                (Some(f), Some(beta), None) => tame_transfer::TamePairClass::new(&params, f, beta)?,
                (None, None, Some(a)) => {
                    let alpha = ctx.character(params.top_level()?, Some(a), "alpha")?;
                    tame_transfer::orbit_to_pair(&orbit_of(&alpha), &params)?
                }
                _ => {
                    return Err(Failure::Usage(
                        "give either --f and --beta, or --alpha".into(),
                    ))
                }
            };
            let orbit = tame_transfer::pair_to_orbit(&pair, &params)?;
            let shape = tame_transfer::discrete_series_shape(&orbit, &params)?;
            Ok(
                json!({ "pair": to_json(&pair), "orbit": to_json(&orbit), "series_shape": to_json(&shape) }),
            )
        }
        Command::PairTransfer { shape, f, beta } => {
            let params = ctx.shape(shape)?;
            let pair = tame_transfer::TamePairClass::new(
                &params,
                cfg.require(f, "f")?,
                cfg.require(beta, "beta")?,
            )?;
            Ok(to_json(&tame_transfer::transfer_pair(&pair, &params)?))
        }
        Command::Green { d, u, alpha0, g } => {
            let u: u64 = cfg.require(u, "u")?;
            let level = FieldLevel::new(cfg.require(d, "d")?, u)?;
            let alpha0 = ctx.character(level, alpha0, "alpha0")?;
            let g: BigUint = cfg.require(g, "g")?;
            let sum = green_traces::green_trace(&alpha0, &g, u)?;
            let z = sum.evaluate();
            let terms: Vec<Value> = sum
                .terms()
                .map(|(e, c)| json!([e.to_string(), c]))
                .collect();
            Ok(json!({ "M": sum.modulus().to_string(), "terms": terms, "numeric": [z.re, z.im] }))
        }
        Command::Table(s) => {
            let table = tame_transfer::transfer_table(&ctx.shape(s)?, ctx.exec)?;
            let rows: Vec<Value> = table
                .iter()
                .map(|(src, img)| json!({ "source": to_json(src), "image": to_json(img) }))
                .collect();
            Ok(Value::Array(rows))
        }
        Command::Selftest { scale, mutate } => {
            let scale = cfg.get(scale, "scale")?.unwrap_or_default();
            let mutation = match cfg.get::<String>(mutate, "mutate")?.as_deref() {
                None => None,
                Some("rectifier-sign-bug") => Some(Mutation::RectifierSignBug),
                Some(other) => {
                    return Err(Failure::Usage(format!(
                        "unknown mutation '{other}' (rectifier-sign-bug)"
                    )))
                }
            };
            let report = jlres_conformance::run_all(&jlres_conformance::Config {
                scale,
                exec: ctx.exec,
                mutation,
            });
            for c in &report.criteria {
                eprintln!("{c}");
            }
            Ok(to_json(&report))
        }
    }
}

fn emit(v: &Value) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(v).expect("serializable")
    );
}

/// Valid flags of the subcommand named in `argv`, or the subcommand list.
fn valid_flags(argv: &[String]) -> String {
    let cmd = Cli::command();
    let sub = argv.iter().skip(1).find_map(|a| cmd.find_subcommand(a));
    match sub {
        Some(sub) => {
            let flags: Vec<String> = sub
                .get_arguments()
                .chain(cmd.get_arguments())
                .filter_map(|a| a.get_long().map(|l| format!("--{l}")))
                .collect();
            format!("valid flags for {}: {}", sub.get_name(), flags.join(" "))
        }
        None => {
            let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
            format!("valid commands: {}", names.join(" "))
        }
    }
}

fn main() -> ExitCode {
    limits::apply_env_overrides();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = format!(
                "{}\n{}",
                e.render().to_string().trim_end(),
                valid_flags(&argv)
            );
            emit(&json!({ "status": "error", "error_kind": "UsageError", "message": message }));
            return ExitCode::from(1);
        }
    };
    let result = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Err(msg) => Err(Failure::Usage(msg)),
        Ok(cfg) => {
            let exec = if cli.sequential {
                Execution::Sequential
            } else {
                Execution::Auto
            };
            run(
                &Ctx {
                    cfg: cfg.unwrap_or_default(),
                    exec,
                },
                cli.command,
            )
        }
    };
    match result {
        Ok(payload) => {
            emit(&json!({ "status": "ok", "payload": payload }));
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            emit(&json!({ "status": "error", "error_kind": "UsageError", "message": msg }));
            ExitCode::from(1)
        }
        Err(Failure::Domain(e)) => {
            emit(&json!({ "status": "error", "error_kind": e.kind(), "message": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
