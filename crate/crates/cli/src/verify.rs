use std::fs;
use std::time::Instant;

use hetdiff::verify::{run_suite, GofReport, Suite, SuiteParams};

use crate::args::{SuiteArg, VerifyArgs};
use crate::manifest::{resolve_seed, RunManifest};
use crate::{CliResult, Status};

fn suite(s: SuiteArg) -> Suite {
    match s {
        SuiteArg::Density => Suite::Density,
        SuiteArg::Exit => Suite::Exit,
        SuiteArg::Skew => Suite::Skew,
        SuiteArg::Trap => Suite::Trap,
        SuiteArg::Occupation => Suite::Occupation,
        SuiteArg::Balance => Suite::Balance,
        SuiteArg::All => Suite::All,
    }
}

pub fn run(a: &VerifyArgs, threads: Option<usize>) -> CliResult<Status> {
    let start = Instant::now();
    let (seed, from_flag) = resolve_seed(a.seed);
    let params = SuiteParams {
        alpha: a.alpha,
        lambda: a.lambda,
        theta: a.theta,
        delta: a.delta,
        x0: a.x0,
        paths: a.paths,
        steps: a.steps,
        seed,
        threads,
    };
    let reports = run_suite(suite(a.suite), &params)?;
    for r in &reports {
        println!("{}", serde_json::to_string(r)?);
    }
    let failed = reports.iter().filter(|r| r.is_failure()).count();
    if let Some(out) = &a.out {
        fs::write(out, serde_json::to_string_pretty(&reports)? + "\n")?;
        RunManifest::new("verify", a, Some((seed, from_flag)), start.elapsed())?
            .with_output(out)
            .with_summary(summary(&reports, failed))
            .write_beside(out)?;
    }
    Ok(if failed == 0 { Status::Ok } else { Status::VerificationFailed })
}

fn summary(reports: &[GofReport], failed: usize) -> serde_json::Value {
    serde_json::json!({
        "tests": reports.len(),
        "failed": failed,
        "inconclusive": reports.iter().filter(|r| r.inconclusive).count(),
    })
}
