//! Every acceptance criterion at small scale, one line per criterion, then
//! the mutation and scheduling checks.

use std::process::ExitCode;

use jlres::Execution;
use jlres_conformance::{run_all, run_criterion, Config, Mutation, Scale};

fn main() -> ExitCode {
    let cfg = Config {
        scale: Scale::Small,
        exec: Execution::Sequential,
        mutation: None,
    };
    let report = run_all(&cfg);
    let mut ok = report.criteria.len() == 9;
    for c in &report.criteria {
        println!("{c}");
        for f in &c.failures {
            println!("    {f}");
        }
        ok &= c.passed;
    }

    let mutated = Config {
        mutation: Some(Mutation::RectifierSignBug),
        ..cfg
    };
    let replay = run_criterion(6, &mutated).unwrap();
    let caught =
        !replay.passed && replay.failure_count > 0 && run_criterion(5, &mutated).unwrap().passed;
    println!(
        "[{}] injected rectifier bug is caught by the descent replay",
        if caught { "PASS" } else { "FAIL" }
    );
    ok &= caught;

    let par = Config {
        exec: Execution::Parallel,
        ..cfg
    };
    let agree = [3, 8].into_iter().all(|id| {
        let (a, b) = (
            run_criterion(id, &cfg).unwrap(),
            run_criterion(id, &par).unwrap(),
        );
        (a.passed, a.checks) == (b.passed, b.checks)
    });
    println!(
        "[{}] sequential and parallel sweeps agree",
        if agree { "PASS" } else { "FAIL" }
    );
    ok &= agree;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
