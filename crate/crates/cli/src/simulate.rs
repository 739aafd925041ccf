use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use hetdiff::model::{h_inverse, h_transform, ModelParams, Regime, SkewSpec};
use hetdiff::simulate::{bessel_from_besq_path, het_path, sde_direct_path, PathGrid, SimConfig};

use crate::args::{Construction, SimulateArgs};
use crate::manifest::{resolve_seed, RunManifest};
use crate::{CliError, CliResult};

const CHUNK: usize = 512;

type PathFn = Box<dyn Fn(&SimConfig<f64>, u64) -> hetdiff::Result<PathGrid<f64>> + Sync + Send>;

/// Checks that `construction` applies to these parameters and returns the
/// per-path generator.
fn generator(
    a: &SimulateArgs,
    params: ModelParams<f64>,
) -> CliResult<PathFn> {
    let (x0, theta, alpha) = (a.x0, a.theta, params.alpha());
    let delta = params.delta();
    let spec = SkewSpec::new(delta, theta)?;
    let valid = |why: &str| {
        let mut ok = vec!["timechange"];
        if delta >= 2.0 || (delta > 0.0 && theta.abs() == 1.0 && x0 * theta >= 0.0) {
            ok.push("besq");
        }
        if delta >= 1.0 {
            ok.push("direct");
        }
        CliError::Usage(format!("{why}; valid constructions here: {}", ok.join(", ")))
    };
    Ok(match a.construction {
        Construction::Timechange => Box::new(move |c, i| het_path(x0, &params, theta, c, i)),
        Construction::Besq => {
            if params.regime() == Regime::Transient {
                Box::new(move |c, i| het_path(x0, &params, theta, c, i))
            } else if delta > 0.0 && theta.abs() == 1.0 && x0 * theta >= 0.0 {
                let z0 = h_transform(x0, alpha).abs();
                Box::new(move |c, i| {
                    Ok(bessel_from_besq_path(z0, delta, c, i)?.map_values(|z| h_inverse(theta * z, alpha)))
                })
            } else {
                return Err(valid(&format!(
                    "besq needs delta >= 2, or delta > 0 with theta = +-1 and x0 on that side (delta = {delta})"
                )));
            }
        }
        Construction::Direct => {
            if delta < 1.0 {
                return Err(valid(&format!("direct needs delta >= 1, got {delta}")));
            }
            let z0 = h_transform(x0, alpha);
            Box::new(move |c, i| Ok(sde_direct_path(z0, &spec, c, i)?.map_values(|z| h_inverse(z, alpha))))
        }
    })
}

pub fn run(a: &SimulateArgs, threads: Option<usize>) -> CliResult<()> {
    let start = Instant::now();
    if a.thin == 0 {
        return Err(CliError::Usage("--thin must be at least 1".into()));
    }
    let params = ModelParams::new(a.alpha, a.lambda)?;
    let (seed, from_flag) = resolve_seed(a.seed);
    let cfg = SimConfig::new(a.t, a.steps, a.paths, seed)?;
    let generate = generator(a, params)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&a.out)?));
    w.write_record(["path_id", "t", "x"])?;
    let keep = |k: usize| k.is_multiple_of(a.thin) || k == a.steps;
    let mut absorbed = 0usize;
    for lo in (0..a.paths).step_by(CHUNK) {
        let hi = (lo + CHUNK).min(a.paths);
        let chunk: Vec<PathGrid<f64>> =
            pool.install(|| (lo..hi).into_par_iter().map(|i| generate(&cfg, i as u64)).collect::<Result<_, _>>())?;
        for (j, p) in chunk.iter().enumerate() {
            absorbed += usize::from(p.absorbed_at().is_some());
            let id = (lo + j).to_string();
            for (k, (t, x)) in p.times().iter().zip(p.values()).enumerate() {
                if keep(k) {
                    w.write_record([id.as_str(), &t.to_string(), &x.to_string()])?;
                }
            }
        }
    }
    w.flush()?;

    RunManifest::new("simulate", a, Some((seed, from_flag)), start.elapsed())?
        .with_output(&a.out)
        .with_summary(json!({
            "paths": a.paths,
            "absorbed": absorbed,
            "delta": params.delta(),
            "regime": params.regime().to_string(),
        }))
        .write_beside(&a.out)?;
    Ok(())
}
