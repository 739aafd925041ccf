use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

use super::ensemble::run_indexed;
use super::rng::{substream, Stream};
use super::{PathGrid, SimConfig};

/// One full-truncation Euler path of `BESQ^delta(y0)`.
///
/// Stored values are `max(Y, 0)`; the internal state keeps the sign so the
/// scheme stays the usual full-truncation one. For `delta <= 0` the path is
/// absorbed at the first step with `Y <= eps0`.
pub fn besq_path<T: Real>(y0: T, delta: T, cfg: &SimConfig<T>, index: u64) -> Result<PathGrid<T>> {
    if !(y0 >= T::zero()) || !delta.is_finite() {
        return domain(format!("besq needs y0 >= 0 and finite delta, got y0={y0}, delta={delta}"));
    }
    let times = cfg.time_grid();
    let n = cfg.steps;
    let eps = cfg.eps0(y0);
    let trap = delta <= T::zero();
    let dt = cfg.dt();
    let sdt = dt.sqrt();
    let two = lit::<T>(2.0);

    let mut values = Vec::with_capacity(n + 1);
    let mut visits = Vec::with_capacity(n);
    values.push(y0);
    if trap && y0 <= eps {
        values.resize(n + 1, T::zero());
        visits.resize(n, true);
        return Ok(PathGrid::assemble(times, values, Some(0), visits));
    }
    let mut rng = substream(cfg.master_seed, index, Stream::Increments);
    let mut y = y0;
    let mut absorbed_at = None;
    for k in 1..=n {
        let db = sdt * T::standard_normal(&mut rng);
        y = y + delta * dt + two * y.max(T::zero()).sqrt() * db;
        if trap && y <= eps {
            absorbed_at = Some(k);
            values.resize(n + 1, T::zero());
            visits.resize(n, true);
            break;
        }
        let out = y.max(T::zero());
        values.push(out);
        visits.push(out <= eps);
    }
    Ok(PathGrid::assemble(times, values, absorbed_at, visits))
}

/// `sqrt` of a `BESQ^delta(z0^2)` path, for `delta > 0`.
pub fn bessel_from_besq_path<T: Real>(
    z0: T,
    delta: T,
    cfg: &SimConfig<T>,
    index: u64,
) -> Result<PathGrid<T>> {
    if !(delta > T::zero()) || !(z0 >= T::zero()) {
        return domain(format!(
            "bessel_from_besq needs delta > 0 and z0 >= 0, got delta={delta}, z0={z0}"
        ));
    }
    let eps = cfg.eps0(z0);
    let path = besq_path(z0 * z0, delta, cfg, index)?.map_values(|y| y.sqrt());
    let visits = path.values().iter().skip(1).map(|v| *v <= eps).collect();
    Ok(PathGrid::assemble(
        path.shared_times(),
        path.values().to_vec(),
        None,
        visits,
    ))
}

pub fn simulate_besq<T: Real>(y0: T, delta: T, cfg: &SimConfig<T>) -> Result<Vec<PathGrid<T>>> {
    run_indexed(cfg, |i| besq_path(y0, delta, cfg, i))
}

pub fn simulate_bessel_from_besq<T: Real>(
    z0: T,
    delta: T,
    cfg: &SimConfig<T>,
) -> Result<Vec<PathGrid<T>>> {
    run_indexed(cfg, |i| bessel_from_besq_path(z0, delta, cfg, i))
}
