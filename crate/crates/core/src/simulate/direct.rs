use crate::error::{domain, Error, Result};
use crate::model::SkewSpec;
use crate::scalar::{lit, Real};

use super::ensemble::run_indexed;
use super::rng::{substream, Stream};
use super::{PathGrid, SimConfig};

/// Euler scheme for the skew Bessel SDE, used as an independent oracle.
///
/// The modulus follows `d|Z| = dB + (delta - 1)/(2 max(|Z|, sqrt(dt))) dt`,
/// reflected at zero. For `delta < 2` the sign is redrawn with `P(+) = (1 + theta)/2`
/// whenever a step reaches zero (reflection or Brownian-bridge crossing), which
/// is exact for skew Brownian motion (`delta = 1`). For `delta >= 2` the sign is
/// fixed, drawn once if `z0 = 0`.
pub fn sde_direct_path<T: Real>(
    z0: T,
    spec: &SkewSpec<T>,
    cfg: &SimConfig<T>,
    index: u64,
) -> Result<PathGrid<T>> {
    let delta = spec.delta;
    if delta < T::one() {
        return Err(Error::Unsupported(format!(
            "direct Euler needs delta >= 1, got {delta}; use the time-change construction"
        )));
    }
    if !z0.is_finite() {
        return domain("start must be finite");
    }
    let times = cfg.time_grid();
    let n = cfg.steps;
    let dt = cfg.dt();
    let sdt = dt.sqrt();
    let eps = cfg.eps0(z0);
    let two = lit::<T>(2.0);
    let drift = (delta - T::one()) / two;
    let recurrent = delta < two;
    let p_plus = spec.p_plus();

    let mut inc = substream(cfg.master_seed, index, Stream::Increments);
    let mut bridge = substream(cfg.master_seed, index, Stream::Bridge);
    let mut signs = substream(cfg.master_seed, index, Stream::Signs);
    let mut draw_sign = || {
        if T::unit_uniform(&mut signs) < p_plus {
            T::one()
        } else {
            -T::one()
        }
    };

    let mut a = z0.abs();
    let mut s = if z0 > T::zero() {
        T::one()
    } else if z0 < T::zero() {
        -T::one()
    } else {
        draw_sign()
    };
    let mut values = Vec::with_capacity(n + 1);
    let mut visits = Vec::with_capacity(n);
    values.push(z0);
    for _ in 0..n {
        let mut a1 = a + drift / a.max(sdt) * dt + sdt * T::standard_normal(&mut inc);
        let mut crossed = false;
        if a1 < T::zero() {
            a1 = -a1;
            crossed = true;
        } else if a > T::zero() {
            let x = two * a * a1 / dt;
            crossed = x < lit(40.0) && T::unit_uniform(&mut bridge) < (-x).exp();
        }
        if crossed && recurrent {
            s = draw_sign();
        }
        values.push(s * a1);
        visits.push(crossed || a1 <= eps);
        a = a1;
    }
    Ok(PathGrid::assemble(times, values, None, visits))
}

pub fn simulate_sde_direct<T: Real>(
    z0: T,
    spec: &SkewSpec<T>,
    cfg: &SimConfig<T>,
) -> Result<Vec<PathGrid<T>>> {
    run_indexed(cfg, |i| sde_direct_path(z0, spec, cfg, i))
}
