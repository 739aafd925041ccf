use crate::error::{domain, Result};
use crate::model::{h_inverse, h_transform, ModelParams, Regime, SkewSpec};
use crate::scalar::{lit, Real};

use super::besq::bessel_from_besq_path;
use super::ensemble::run_indexed;
use super::rng::{substream, Stream};
use super::timechange::{killed_time_changed_path, time_changed_path};
use super::{PathGrid, SimConfig};

/// Path of the heterogeneous diffusion `X = H^{-1}(Z^{delta,theta}(H(x0)))`.
///
/// * Trap: killed Bessel from `|H(x0)|` on the side of `x0`; exactly zero from
///   `absorbed_at` on.
/// * SkewRecurrent: skew Bessel by time change.
/// * Transient: Bessel from `|H(x0)|` via the squared-Bessel route on the side of
///   `x0`; from `x0 = 0` the side is drawn once with `P(+) = (1 + theta)/2`.
pub fn het_path<T: Real>(
    x0: T,
    params: &ModelParams<T>,
    theta: T,
    cfg: &SimConfig<T>,
    index: u64,
) -> Result<PathGrid<T>> {
    let alpha = params.alpha();
    let spec = SkewSpec::new(params.delta(), theta)?;
    if !x0.is_finite() {
        return domain("start must be finite");
    }
    let z0 = h_transform(x0, alpha);
    let back = |z: T| h_inverse(z, alpha);
    match params.regime() {
        Regime::Trap => {
            let sign = if x0 < T::zero() { -T::one() } else { T::one() };
            let path = killed_time_changed_path(z0.abs(), spec.delta, cfg, index)?;
            Ok(path.map_values(|z| back(sign * z)))
        }
        Regime::SkewRecurrent => Ok(time_changed_path(z0, &spec, cfg, index)?.map_values(back)),
        Regime::Transient => {
            let sign = if x0 > T::zero() {
                T::one()
            } else if x0 < T::zero() {
                -T::one()
            } else {
                let mut rng = substream(cfg.master_seed, index, Stream::Signs);
                if T::unit_uniform(&mut rng) < spec.p_plus() {
                    T::one()
                } else {
                    -T::one()
                }
            };
            let path = bessel_from_besq_path(z0.abs(), spec.delta, cfg, index)?;
            Ok(path.map_values(|z| back(sign * z)))
        }
    }
}

/// Euler scheme for `dX = |X|^alpha dB + alpha lambda |X|^{2 alpha - 1} sign(X) dt`,
/// stopped at zero on the first step that enters the zero band or changes sign.
pub fn het_direct_path<T: Real>(
    x0: T,
    params: &ModelParams<T>,
    cfg: &SimConfig<T>,
    index: u64,
) -> Result<PathGrid<T>> {
    if x0 == T::zero() || !x0.is_finite() {
        return domain(format!("direct heterogeneous Euler needs x0 != 0, got {x0}"));
    }
    let alpha = params.alpha();
    let coef = params.drift_coefficient();
    let drift_power = lit::<T>(2.0) * alpha - T::one();
    let times = cfg.time_grid();
    let n = cfg.steps;
    let dt = cfg.dt();
    let sdt = dt.sqrt();
    let eps = cfg.eps0(x0);
    let mut rng = substream(cfg.master_seed, index, Stream::Increments);

    let mut values = Vec::with_capacity(n + 1);
    let mut visits = Vec::with_capacity(n);
    values.push(x0);
    let mut x = x0;
    let mut absorbed_at = None;
    for k in 1..=n {
        let ax = x.abs();
        let base = if drift_power < T::zero() { ax.max(eps) } else { ax };
        let x1 = x
            + coef * base.powf(drift_power) * x.signum() * dt
            + ax.powf(alpha) * sdt * T::standard_normal(&mut rng);
        if x1.abs() <= eps || x1.signum() != x.signum() {
            absorbed_at = Some(k);
            values.resize(n + 1, T::zero());
            visits.resize(n, true);
            break;
        }
        values.push(x1);
        visits.push(false);
        x = x1;
    }
    Ok(PathGrid::assemble(times, values, absorbed_at, visits))
}

pub fn simulate_het<T: Real>(
    x0: T,
    params: &ModelParams<T>,
    theta: T,
    cfg: &SimConfig<T>,
) -> Result<Vec<PathGrid<T>>> {
    run_indexed(cfg, |i| het_path(x0, params, theta, cfg, i))
}

pub fn simulate_het_direct<T: Real>(
    x0: T,
    params: &ModelParams<T>,
    cfg: &SimConfig<T>,
) -> Result<Vec<PathGrid<T>>> {
    run_indexed(cfg, |i| het_direct_path(x0, params, cfg, i))
}
