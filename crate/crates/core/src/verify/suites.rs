use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::densities::cdf::{cdf_from_density_with, CdfOptions};
use crate::densities::{
    bessel_density, het_density, skew_density, survival_probability, CdfTable, DensityQuery,
};
use crate::error::{domain, Error, Result};
use crate::model::{h_inverse, h_transform, ModelParams, Regime, SkewSpec};
use crate::simulate::{
    bessel_from_besq_path, bessel_time_changed_path, het_path, map_paths, terminal_values,
    time_changed_path, SimConfig,
};

use super::{
    estimate_exit_probability, exit_eps_independence, ks_against_table, log_log_slope,
    occupation_near_zero, ratio_or_none, balance_terms, skewness_from_terminals, two_sample_ks,
    ExitQuery, GofReport,
};

/// Groups of checks run together by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Density,
    Exit,
    Skew,
    Trap,
    Occupation,
    Balance,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "density" => Suite::Density,
            "exit" => Suite::Exit,
            "skew" => Suite::Skew,
            "trap" => Suite::Trap,
            "occupation" => Suite::Occupation,
            "balance" => Suite::Balance,
            "all" => Suite::All,
            other => return domain(format!("unknown suite {other}")),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Density => "density",
            Suite::Exit => "exit",
            Suite::Skew => "skew",
            Suite::Trap => "trap",
            Suite::Occupation => "occupation",
            Suite::Balance => "balance",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

/// Parameters shared by the suites. Each suite reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub alpha: f64,
    pub lambda: f64,
    pub theta: f64,
    /// Dimension for the Bessel-level suites (density, exit, skew, occupation).
    pub delta: f64,
    /// Start point for the density and trap suites.
    pub x0: f64,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            lambda: 0.5,
            theta: 0.5,
            delta: 1.5,
            x0: 1.0,
            paths: 10_000,
            steps: 4096,
            seed: 20_240_601,
            threads: None,
        }
    }
}

impl SuiteParams {
    fn config(&self, horizon: f64) -> Result<SimConfig<f64>> {
        Ok(SimConfig::new(horizon, self.steps, self.paths, self.seed)?.with_threads(self.threads))
    }
}

/// Runs one suite (or all) and returns its reports in a fixed order.
pub fn run_suite(suite: Suite, p: &SuiteParams) -> Result<Vec<GofReport>> {
    match suite {
        Suite::Density => density_suite(p),
        Suite::Exit => exit_suite(p),
        Suite::Skew => skew_suite(p).map(|r| vec![r]),
        Suite::Trap => trap_suite(p),
        Suite::Occupation => occupation_suite(p).map(|r| vec![r]),
        Suite::Balance => balance_suite(p).map(|r| vec![r]),
        Suite::All => {
            let mut out = density_suite(p)?;
            out.extend(exit_suite(p)?);
            out.push(skew_suite(p)?);
            let trap = SuiteParams {
                lambda: 0.0,
                paths: p.paths.min(1_000),
                ..p.clone()
            };
            out.extend(trap_suite(&trap)?);
            out.push(occupation_suite(p)?);
            out.push(balance_suite(p)?);
            Ok(out)
        }
    }
}

/// Seed for the `k`-th independent companion sample of a run seeded with `seed`.
pub fn derived_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn table(
    density: impl Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    breaks: Vec<f64>,
) -> Result<CdfTable<f64>> {
    let opts = CdfOptions {
        breaks,
        ..CdfOptions::default()
    };
    let t = cdf_from_density_with(density, lower, upper, &opts)?;
    t.certify_mass(1.0, 1e-6)?;
    Ok(t)
}

/// Tabulated CDF of `BES^delta(z0)` at time `t`.
pub fn bessel_cdf(t: f64, z0: f64, delta: f64) -> Result<CdfTable<f64>> {
    let upper = z0 + 12.0 * t.sqrt();
    table(
        |y| bessel_density(&DensityQuery { t, x: z0, y }, delta).unwrap_or(f64::NAN),
        0.0,
        upper,
        vec![z0],
    )
}

/// Tabulated CDF of the skew Bessel law at time `t`.
pub fn skew_cdf(t: f64, z0: f64, spec: &SkewSpec<f64>) -> Result<CdfTable<f64>> {
    let w = z0.abs() + 12.0 * t.sqrt();
    table(
        |y| skew_density(&DensityQuery { t, x: z0, y }, spec).unwrap_or(f64::NAN),
        -w,
        w,
        vec![0.0, z0, -z0],
    )
}

/// Tabulated CDF of the heterogeneous diffusion at time `t`, for the
/// recurrent regime.
pub fn het_cdf(t: f64, x0: f64, params: &ModelParams<f64>, theta: f64) -> Result<CdfTable<f64>> {
    if params.regime() != Regime::SkewRecurrent {
        return domain("het_cdf is a probability CDF only in the recurrent regime");
    }
    let alpha = params.alpha();
    let w = h_inverse(h_transform(x0, alpha).abs() + 12.0 * t.sqrt(), alpha);
    table(
        |y| {
            if y == 0.0 {
                f64::INFINITY
            } else {
                het_density(t, x0, y, params, theta).unwrap_or(f64::NAN)
            }
        },
        -w,
        w,
        vec![0.0, x0, -x0],
    )
}

fn ks_report(name: String, samples: &[f64], cdf: &CdfTable<f64>, threshold: f64, seed: u64) -> Result<GofReport> {
    let d = ks_against_table(samples, cdf)?;
    Ok(GofReport::new(name, d, threshold, samples.len(), seed, "one-sample KS at t=1"))
}

fn density_suite(p: &SuiteParams) -> Result<Vec<GofReport>> {
    let cfg = p.config(1.0)?;
    let delta = p.delta;
    let z0 = p.x0.abs();
    let mut out = Vec::new();
    if delta > 0.0 {
        let cdf = bessel_cdf(1.0, z0, delta)?;
        let besq = terminal_values(&cfg, |i| bessel_from_besq_path(z0, delta, &cfg, i))?;
        out.push(ks_report(format!("ks_bessel_besq(delta={delta}, z={z0})"), &besq, &cdf, 0.025, p.seed)?);
        if delta < 2.0 {
            let cfg_b = cfg.clone().with_seed(derived_seed(p.seed, 1));
            let tc = terminal_values(&cfg_b, |i| bessel_time_changed_path(z0, delta, &cfg_b, i))?;
            out.push(ks_report(format!("ks_bessel_time_change(delta={delta}, z={z0})"), &tc, &cdf, 0.025, p.seed)?);
            out.push(GofReport::new(
                format!("ks2_besq_vs_time_change(delta={delta}, z={z0})"),
                two_sample_ks(&besq, &tc)?,
                0.03,
                besq.len(),
                p.seed,
                "two-sample KS at t=1, independent seeds",
            ));
            let spec = SkewSpec::new(delta, p.theta)?;
            let skew = terminal_values(&cfg, |i| time_changed_path(p.x0, &spec, &cfg, i))?;
            let cdf = skew_cdf(1.0, p.x0, &spec)?;
            out.push(ks_report(
                format!("ks_skew_time_change(delta={delta}, theta={}, z={})", p.theta, p.x0),
                &skew,
                &cdf,
                0.025,
                p.seed,
            )?);
        }
    }
    let params = ModelParams::new(p.alpha, p.lambda)?;
    if params.regime() == Regime::SkewRecurrent {
        let x = terminal_values(&cfg, |i| het_path(p.x0, &params, p.theta, &cfg, i))?;
        let cdf = het_cdf(1.0, p.x0, &params, p.theta)?;
        out.push(ks_report(
            format!("ks_het(alpha={}, lambda={}, theta={}, x={})", p.alpha, p.lambda, p.theta, p.x0),
            &x,
            &cdf,
            0.025,
            p.seed,
        )?);
    }
    Ok(out)
}

fn recurrent_spec(p: &SuiteParams) -> Result<SkewSpec<f64>> {
    if !(p.delta > 0.0 && p.delta < 2.0 && p.theta.abs() < 1.0) {
        return domain(format!(
            "this suite needs delta in (0, 2) and |theta| < 1, got delta={}, theta={}",
            p.delta, p.theta
        ));
    }
    SkewSpec::new(p.delta, p.theta)
}

fn exit_suite(p: &SuiteParams) -> Result<Vec<GofReport>> {
    let spec = recurrent_spec(p)?;
    let q = ExitQuery::new(-1.0, 0.0, 1.0)?;
    let cfg = p.config(q.suggested_horizon())?;
    Ok(vec![
        estimate_exit_probability(&q, &spec, &cfg)?,
        exit_eps_independence(&spec, (0.25, 0.5), &cfg)?,
    ])
}

fn skew_suite(p: &SuiteParams) -> Result<GofReport> {
    let spec = recurrent_spec(p)?;
    let cfg = p.config(1.0)?;
    let z = terminal_values(&cfg, |i| time_changed_path(0.0, &spec, &cfg, i))?;
    let est = skewness_from_terminals(&z)?;
    let pp = spec.p_plus();
    let n = z.len();
    Ok(GofReport::new(
        format!("skewness(delta={}, theta={})", spec.delta, spec.theta),
        (est - spec.theta).abs(),
        6.0 * (pp * (1.0 - pp) / n as f64).sqrt(),
        n,
        p.seed,
        format!("estimate={est:.6}"),
    ))
}

fn trap_suite(p: &SuiteParams) -> Result<Vec<GofReport>> {
    let params = ModelParams::new(p.alpha, p.lambda)?;
    if params.regime() != Regime::Trap {
        return domain(format!("trap suite needs delta <= 0, got {}", params.delta()));
    }
    if !(p.x0 != 0.0) {
        return domain("trap suite needs x0 != 0");
    }
    let cfg = p.config(5.0)?;
    let times = cfg.time_grid();
    let k1 = times.iter().position(|&t| t >= 1.0).expect("horizon exceeds 1");
    let t1 = times[k1];
    let eps = cfg.eps0(p.x0);
    let stats = map_paths(
        &cfg,
        |i| het_path(p.x0, &params, p.theta, &cfg, i),
        |path| {
            let v = path.values();
            let entry = v.iter().position(|x| x.abs() <= eps);
            let violation = entry.is_some_and(|k| v[k..].iter().any(|&x| x != 0.0))
                || path.check_invariants().is_err();
            let by_t1 = path.absorbed_at().is_some_and(|k| k <= k1);
            (violation, by_t1)
        },
    )?;
    let n = stats.len();
    let violations = stats.iter().filter(|s| s.0).count();
    let absorbed = stats.iter().filter(|s| s.1).count();
    let z0 = h_transform(p.x0, p.alpha).abs();
    let expect = 1.0 - survival_probability(t1, z0, params.delta())?;
    let frac = absorbed as f64 / n as f64;
    let se = (expect * (1.0 - expect) / n as f64).sqrt();
    Ok(vec![
        GofReport::new(
            format!("trap_stays_at_zero(alpha={}, lambda={})", p.alpha, p.lambda),
            violations as f64,
            0.0,
            n,
            p.seed,
            "paths leaving the zero band after entering it; horizon 5",
        ),
        GofReport::new(
            format!("trap_absorbed_fraction(alpha={}, lambda={}, t={t1})", p.alpha, p.lambda),
            (frac - expect).abs(),
            3.0 * se,
            n,
            p.seed,
            format!("empirical={frac:.6}, theory={expect:.6}"),
        ),
    ])
}

/// Band edges for the occupation regression.
pub const OCCUPATION_EPS: [f64; 4] = [0.02, 0.04, 0.08, 0.16];

fn occupation_suite(p: &SuiteParams) -> Result<GofReport> {
    let delta = p.delta;
    if !(delta > 0.0 && delta < 2.0) {
        return domain(format!("occupation suite needs delta in (0, 2), got {delta}"));
    }
    let cfg = p.config(1.0)?;
    let occ = map_paths(
        &cfg,
        |i| bessel_time_changed_path(0.0, delta, &cfg, i),
        |path| OCCUPATION_EPS.map(|e| occupation_near_zero(path, e)),
    )?;
    let n = occ.len() as f64;
    let means: Vec<f64> = (0..OCCUPATION_EPS.len())
        .map(|j| occ.iter().map(|o| o[j]).sum::<f64>() / n)
        .collect();
    let slope = log_log_slope(&OCCUPATION_EPS, &means)?;
    Ok(GofReport::new(
        format!("occupation_slope(delta={delta})"),
        (slope - delta).abs(),
        0.3,
        occ.len(),
        p.seed,
        format!("slope={slope:.4}, mean occupation={means:?}"),
    )
    .diagnostic())
}

/// Levels for the local-time balance check.
pub const BALANCE_LEVELS: [f64; 3] = [0.01, 0.02, 0.04];

fn balance_suite(p: &SuiteParams) -> Result<GofReport> {
    let params = ModelParams::new(p.alpha, p.lambda)?;
    let target = (1.0 + p.theta) / (1.0 - p.theta);
    let name = format!("balance_ratio(alpha={}, lambda={}, theta={})", p.alpha, p.lambda, p.theta);
    if params.regime() != Regime::SkewRecurrent || p.theta.abs() >= 1.0 {
        return Ok(GofReport::new(name, f64::NAN, 0.4, 0, p.seed, "")
            .diagnostic()
            .inconclusive("balance needs the recurrent regime and |theta| < 1"));
    }
    let cfg = p.config(1.0)?;
    let terms = map_paths(
        &cfg,
        |i| het_path(0.0, &params, p.theta, &cfg, i),
        |path| balance_terms(path, &params, &BALANCE_LEVELS),
    )?;
    let (mut num, mut den) = (0.0, 0.0);
    for t in terms {
        let (a, b) = t?;
        num += a;
        den += b;
    }
    let report = match ratio_or_none(num, den) {
        Some(r) => GofReport::new(
            name,
            (r / target - 1.0).abs(),
            0.4,
            cfg.paths,
            p.seed,
            format!("ratio={r:.4}, target={target:.4}"),
        ),
        None => GofReport::new(name, f64::NAN, 0.4, cfg.paths, p.seed, "")
            .inconclusive("no visits below zero"),
    };
    Ok(report.diagnostic())
}
