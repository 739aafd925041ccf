use std::fs::File;
use std::io::{self, Write};
use std::time::Instant;

use hetdiff::densities::{
    bessel_density, het_density, integrate_with_breaks, killed_density, skew_density, DensityQuery,
    QuadSettings,
};
use hetdiff::model::{ModelParams, SkewSpec};

use crate::args::{DensityArgs, Family};
use crate::manifest::RunManifest;
use crate::{CliError, CliResult};

fn usage<T>(m: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(m.into()))
}

fn parse_grid(s: &str) -> CliResult<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Usage(format!("--ygrid expects lo:hi:n, got {s}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo < hi) || n < 2 {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

/// Density of the chosen family as a function of `y`. `None` marks a point
/// where the density is not defined.
type Density = Box<dyn Fn(f64) -> hetdiff::Result<Option<f64>>>;

fn family(a: &DensityArgs) -> CliResult<(Density, bool)> {
    let (t, x) = (a.t, a.x);
    DensityQuery::new(t, x, x)?;
    let need_delta = || match a.delta {
        Some(d) => Ok(d),
        None => usage(format!("--family {:?} needs --delta", a.family).to_lowercase()),
    };
    Ok(match a.family {
        Family::Bessel => {
            let delta = need_delta()?;
            if !(delta > 0.0) || x < 0.0 {
                return usage("bessel family needs delta > 0 and x >= 0");
            }
            (Box::new(move |y| Ok(Some(bessel_density(&DensityQuery::new(t, x, y)?, delta)?))), true)
        }
        Family::Killed => {
            let delta = need_delta()?;
            if !(delta < 2.0) || !(x > 0.0) {
                return usage("killed family needs delta < 2 and x > 0");
            }
            (
                Box::new(move |y| {
                    if y == 0.0 {
                        return Ok(Some(0.0));
                    }
                    Ok(Some(killed_density(&DensityQuery::new(t, x, y)?, delta)?))
                }),
                true,
            )
        }
        Family::Skew => {
            let spec = SkewSpec::new(need_delta()?, a.theta)?;
            if !(spec.delta > 0.0) {
                return usage("skew family needs delta > 0");
            }
            (Box::new(move |y| Ok(Some(skew_density(&DensityQuery::new(t, x, y)?, &spec)?))), false)
        }
        Family::Het => {
            let (Some(alpha), Some(lambda)) = (a.alpha, a.lambda) else {
                return usage("het family needs --alpha and --lambda");
            };
            if a.delta.is_some() {
                return usage("het family takes --alpha and --lambda, not --delta");
            }
            let params = ModelParams::new(alpha, lambda)?;
            let theta = a.theta;
            SkewSpec::new(params.delta(), theta)?;
            (
                Box::new(move |y| {
                    if y == 0.0 {
                        Ok(None)
                    } else {
                        het_density(t, x, y, &params, theta).map(Some)
                    }
                }),
                false,
            )
        }
    })
}

pub fn run(a: &DensityArgs) -> CliResult<()> {
    let start = Instant::now();
    let (f, half_line) = family(a)?;
    let grid = a.ygrid.clone().unwrap_or_else(|| if half_line { "0:5:101" } else { "-5:5:201" }.to_string());
    let (lo, hi, n) = parse_grid(&grid)?;
    if half_line && lo < 0.0 {
        return usage("this family lives on y >= 0");
    }

    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let y = if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
        rows.push((y, f(y)?));
    }
    let mut pts = vec![lo, hi];
    pts.extend([0.0, a.x, -a.x].into_iter().filter(|p| *p > lo && *p < hi));
    pts.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    pts.dedup();
    let mass = integrate_with_breaks(
        |y| f(y).ok().flatten().unwrap_or(0.0),
        &pts,
        &QuadSettings::default(),
    )?;

    let out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["y", "p"])?;
    for (y, p) in &rows {
        match p {
            Some(p) => w.write_record([y.to_string(), p.to_string()])?,
            None => w.write_record([y.to_string(), String::new()])?,
        }
    }
    w.write_record(["# normalization".to_string(), mass.value.to_string()])?;
    w.flush()?;
    drop(w);

    if let Some(p) = &a.out {
        RunManifest::new("density", a, None, start.elapsed())?
            .with_output(p)
            .with_summary(serde_json::json!({
                "normalization": mass.value,
                "quadrature_error": mass.abs_error,
                "grid": grid,
            }))
            .write_beside(p)?;
    }
    Ok(())
}
