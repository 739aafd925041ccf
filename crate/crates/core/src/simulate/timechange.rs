//! Random time change of Brownian motion.
//!
//! With `R` the inverse scale function, `Z_t = R(beta_{r_t})` where `r` inverts
//! the additive clock `tau_s = int_0^s R'(beta_u)^2 du`. The simulator streams
//! Brownian steps, accumulates the clock with the midpoint rule and emits `Z` as
//! the clock passes each output time, so the Brownian path is never stored.

use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::model::SkewSpec;
use crate::scalar::{lit, to_f64, Real};

use super::ensemble::run_indexed;
use super::rng::{substream, Stream};
use super::{PathGrid, SimConfig};

/// `R(b) = sign(b) (c_{sign b} |b|)^p` with `p = 1/(2 - delta)` and its clock rate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel<T> {
    delta: T,
    p: T,
    power: T,
    rate_plus: T,
    rate_minus: T,
    c_plus: T,
    c_minus: T,
    floor: T,
}

impl<T: Real> Kernel<T> {
    fn new(delta: T, c_plus: T, c_minus: T, floor: T) -> Self {
        let two = lit::<T>(2.0);
        let p = T::one() / (two - delta);
        Self {
            delta,
            p,
            power: two * (p - T::one()),
            rate_plus: p * p * c_plus.powf(two * p),
            rate_minus: p * p * c_minus.powf(two * p),
            c_plus,
            c_minus,
            floor,
        }
    }

    fn plain(delta: T, floor: T) -> Self {
        Self::new(delta, T::one(), T::one(), floor)
    }

    fn skew(spec: &SkewSpec<T>, floor: T) -> Self {
        let half = lit::<T>(0.5);
        Self::new(
            spec.delta,
            (T::one() + spec.theta) * half,
            (T::one() - spec.theta) * half,
            floor,
        )
    }

    /// `R'(b)^2`, with `|b|` floored when the exponent is negative.
    #[inline]
    fn rate(&self, b: T) -> T {
        let a = if self.power < T::zero() {
            b.abs().max(self.floor)
        } else {
            b.abs()
        };
        let k = if b >= T::zero() {
            self.rate_plus
        } else {
            self.rate_minus
        };
        k * a.powf(self.power)
    }

    #[inline]
    fn map(&self, b: T) -> T {
        if b >= T::zero() {
            (self.c_plus * b).powf(self.p)
        } else {
            -(self.c_minus * -b).powf(self.p)
        }
    }

    /// Scale function, the inverse of [`Kernel::map`].
    fn scale(&self, z: T) -> T {
        let q = T::one() / self.p;
        if z >= T::zero() {
            z.powf(q) / self.c_plus
        } else {
            -(-z).powf(q) / self.c_minus
        }
    }

    /// Brownian step giving about `substeps` clock steps per output step at the
    /// path's natural scale `max(|z0|, sqrt(T))`.
    fn brownian_step(&self, z0: T, cfg: &SimConfig<T>) -> T {
        let zs = z0.abs().max(cfg.horizon.sqrt());
        let c = self.c_plus.max(self.c_minus);
        let pc = self.p * c;
        let g = pc * pc * zs.powf(lit::<T>(2.0) * (self.delta - T::one()));
        cfg.dt() / (g * lit::<T>(cfg.substeps as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Boundary {
    /// Reflect `beta` at 0 (plain Bessel).
    Reflect,
    /// Let `beta` cross 0 (skew Bessel).
    TwoSided,
    /// Stop at the first visit of `beta` to 0.
    Kill,
}

/// Output of one clock run: `values[j]` at `targets[j]`, `visits[j]` for the
/// interval ending at `targets[j]`, and the clock time of the first zero visit
/// when killed.
pub(crate) struct Segment<T> {
    pub values: Vec<T>,
    pub visits: Vec<bool>,
    pub hit: Option<T>,
}

pub(crate) struct ClockRun<'a, T> {
    pub kernel: &'a Kernel<T>,
    pub boundary: Boundary,
    pub ds: T,
    pub max_steps: u64,
    /// zero band in Brownian coordinates
    pub band: T,
}

impl<T: Real> ClockRun<'_, T> {
    pub(crate) fn run<R: Rng>(
        &self,
        beta0: T,
        targets: &[T],
        inc: &mut R,
        bridge: &mut R,
    ) -> Result<Segment<T>> {
        let k = self.kernel;
        let m = targets.len();
        let mut values = Vec::with_capacity(m);
        let mut visits = Vec::with_capacity(m);
        let ds = self.ds;
        let sds = ds.sqrt();
        let two = lit::<T>(2.0);
        let half = lit::<T>(0.5);
        let cutoff = lit::<T>(40.0);

        let mut b = beta0;
        let mut tau = T::zero();
        let mut pending = b.abs() <= self.band;
        if self.boundary == Boundary::Kill && pending {
            values.resize(m, T::zero());
            visits.resize(m, true);
            return Ok(Segment {
                values,
                visits,
                hit: Some(T::zero()),
            });
        }
        let mut j = 0;
        while j < m && targets[j] <= tau {
            values.push(k.map(b));
            visits.push(pending);
            pending = false;
            j += 1;
        }
        let mut steps = 0u64;
        while j < m {
            if steps >= self.max_steps {
                return Err(Error::Resource {
                    what: "time-change clock",
                    attained: to_f64(tau),
                    requested: to_f64(targets[m - 1]),
                });
            }
            steps += 1;
            let mut b1 = b + sds * T::standard_normal(inc);
            let sign_change = (b > T::zero() && b1 <= T::zero()) || (b < T::zero() && b1 >= T::zero());
            let bridge_hit = if !sign_change && b != T::zero() {
                let x = two * b * b1 / ds;
                x < cutoff && T::unit_uniform(bridge) < (-x).exp()
            } else {
                false
            };
            let crossed = sign_change || bridge_hit;
            // position of the crossing along the step
            let wstar = if sign_change {
                b / (b - b1)
            } else if bridge_hit {
                half
            } else {
                T::one()
            };

            if self.boundary == Boundary::Kill && crossed {
                let dtau = k.rate(b * half) * wstar * ds;
                let hit = tau + dtau;
                while j < m && targets[j] < hit {
                    let w = (targets[j] - tau) / dtau;
                    values.push(k.map(b * (T::one() - w)));
                    visits.push(pending);
                    pending = false;
                    j += 1;
                }
                values.resize(m, T::zero());
                visits.resize(m, true);
                return Ok(Segment {
                    values,
                    visits,
                    hit: Some(hit),
                });
            }
            if self.boundary == Boundary::Reflect && b1 < T::zero() {
                b1 = -b1;
            }

            let dtau = k.rate((b + b1) * half) * ds;
            let tau1 = tau + dtau;
            if !tau1.is_finite() {
                return Err(Error::Numerical {
                    what: "time-change clock",
                    detail: format!("clock overflow at beta={}", to_f64(b)),
                });
            }
            let mut flag = crossed || b1.abs() <= self.band;
            while j < m && targets[j] <= tau1 {
                let w = if dtau > T::zero() {
                    (targets[j] - tau) / dtau
                } else {
                    T::one()
                };
                if flag && w >= wstar {
                    pending = true;
                    flag = false;
                }
                values.push(k.map(b + w * (b1 - b)));
                visits.push(pending);
                pending = false;
                j += 1;
            }
            if flag {
                pending = true;
            }
            b = b1;
            tau = tau1;
        }
        Ok(Segment {
            values,
            visits,
            hit: None,
        })
    }
}

fn max_steps<T: Real>(cfg: &SimConfig<T>) -> u64 {
    (cfg.extension_blocks as u64) * (cfg.steps as u64) * (cfg.substeps as u64)
}

fn require_recurrent_dimension<T: Real>(delta: T, what: &str) -> Result<()> {
    if !(delta > T::zero() && delta < lit(2.0)) {
        return domain(format!("{what} requires delta in (0, 2), got {delta}"));
    }
    Ok(())
}

fn band_in_beta<T: Real>(eps0: T, delta: T) -> T {
    eps0.powf(lit::<T>(2.0) - delta)
}

fn segment_path<T: Real>(cfg: &SimConfig<T>, seg: Segment<T>, sign: T) -> PathGrid<T> {
    let times = cfg.time_grid();
    let absorbed_at = seg
        .hit
        .and_then(|h| times.iter().position(|&t| t >= h));
    let values = seg.values.into_iter().map(|v| sign * v).collect();
    PathGrid::assemble(times, values, absorbed_at, seg.visits[1..].to_vec())
}

/// Reflecting `BES^delta(z0)`, `delta in (0, 2)`, from the plain time change.
pub fn bessel_time_changed_path<T: Real>(
    z0: T,
    delta: T,
    cfg: &SimConfig<T>,
    index: u64,
) -> Result<PathGrid<T>> {
    require_recurrent_dimension(delta, "bessel_time_changed_path")?;
    if !(z0 >= T::zero()) {
        return domain(format!("Bessel start must be nonnegative, got {z0}"));
    }
    let seg = plain_segment(z0, delta, cfg, index, Boundary::Reflect, Stream::Increments, Stream::Bridge, &cfg.time_grid())?;
    Ok(segment_path(cfg, seg, T::one()))
}

/// `BES^delta(z0)` killed at its first visit to zero, for any `delta < 2`.
/// Values from `absorbed_at` on are exactly zero.
pub fn killed_time_changed_path<T: Real>(
    z0: T,
    delta: T,
    cfg: &SimConfig<T>,
    index: u64,
) -> Result<PathGrid<T>> {
    if !(delta < lit(2.0)) || !(z0 >= T::zero()) {
        return domain(format!(
            "killed path needs delta < 2 and z0 >= 0, got delta={delta}, z0={z0}"
        ));
    }
    let seg = plain_segment(z0, delta, cfg, index, Boundary::Kill, Stream::Increments, Stream::Bridge, &cfg.time_grid())?;
    Ok(segment_path(cfg, seg, T::one()))
}

#[allow(clippy::too_many_arguments)]
fn plain_segment<T: Real>(
    z0: T,
    delta: T,
    cfg: &SimConfig<T>,
    index: u64,
    boundary: Boundary,
    inc_stream: Stream,
    bridge_stream: Stream,
    targets: &[T],
) -> Result<Segment<T>> {
    let band = band_in_beta(cfg.eps0(z0), delta);
    let kernel = Kernel::plain(delta, band);
    let run = ClockRun {
        kernel: &kernel,
        boundary,
        ds: kernel.brownian_step(z0, cfg),
        max_steps: max_steps(cfg),
        band,
    };
    let mut inc = substream(cfg.master_seed, index, inc_stream);
    let mut bridge = substream(cfg.master_seed, index, bridge_stream);
    run.run(kernel.scale(z0), targets, &mut inc, &mut bridge)
}

/// Skew Bessel path `Z^{delta,theta}(z0)`, `delta in (0, 2)`.
///
/// For `|theta| < 1` this is the two-sided time change. For `theta = +-1` the
/// path runs as a Bessel process killed at zero on the unfavoured side and
/// restarts as a reflecting Bessel process from zero on the favoured side,
/// driven by independent substreams.
pub fn time_changed_path<T: Real>(
    z0: T,
    spec: &SkewSpec<T>,
    cfg: &SimConfig<T>,
    index: u64,
) -> Result<PathGrid<T>> {
    let delta = spec.delta;
    require_recurrent_dimension(delta, "time_changed_path")?;
    if !z0.is_finite() {
        return domain("start must be finite");
    }
    let times = cfg.time_grid();
    if spec.theta.abs() < T::one() {
        let eps0 = cfg.eps0(z0);
        let probe = Kernel::skew(spec, T::zero());
        let band = probe.scale(eps0).min(-probe.scale(-eps0));
        let kernel = Kernel::skew(spec, band);
        let run = ClockRun {
            kernel: &kernel,
            boundary: Boundary::TwoSided,
            ds: kernel.brownian_step(z0, cfg),
            max_steps: max_steps(cfg),
            band,
        };
        let mut inc = substream(cfg.master_seed, index, Stream::Increments);
        let mut bridge = substream(cfg.master_seed, index, Stream::Bridge);
        let seg = run.run(kernel.scale(z0), &times, &mut inc, &mut bridge)?;
        return Ok(segment_path(cfg, seg, T::one()));
    }

    let side = spec.theta.signum();
    if z0 * side >= T::zero() {
        let seg = plain_segment(z0.abs(), delta, cfg, index, Boundary::Reflect, Stream::Increments, Stream::Bridge, &times)?;
        return Ok(segment_path(cfg, seg, side));
    }
    let first = plain_segment(z0.abs(), delta, cfg, index, Boundary::Kill, Stream::Increments, Stream::Bridge, &times)?;
    let mut values: Vec<T> = first.values.iter().map(|&v| -side * v).collect();
    let mut visits = first.visits;
    if let Some(hit) = first.hit {
        if let Some(j0) = times.iter().position(|&t| t >= hit) {
            let shifted: Vec<T> = times[j0..].iter().map(|&t| t - hit).collect();
            let rest = plain_segment(
                T::zero(),
                delta,
                cfg,
                index,
                Boundary::Reflect,
                Stream::RestartIncrements,
                Stream::RestartBridge,
                &shifted,
            )?;
            for (i, (v, f)) in rest.values.into_iter().zip(rest.visits).enumerate() {
                values[j0 + i] = side * v;
                visits[j0 + i] = visits[j0 + i] || f;
            }
        }
    }
    Ok(PathGrid::assemble(times, values, None, visits[1..].to_vec()))
}

pub fn simulate_bessel_time_changed<T: Real>(
    z0: T,
    delta: T,
    cfg: &SimConfig<T>,
) -> Result<Vec<PathGrid<T>>> {
    run_indexed(cfg, |i| bessel_time_changed_path(z0, delta, cfg, i))
}

pub fn simulate_time_changed<T: Real>(
    z0: T,
    spec: &SkewSpec<T>,
    cfg: &SimConfig<T>,
) -> Result<Vec<PathGrid<T>>> {
    run_indexed(cfg, |i| time_changed_path(z0, spec, cfg, i))
}

/// Additive clock `tau_k = int_0^{s_k} R'(beta_u)^2 du` along a sampled Brownian path.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockTable<T> {
    s_grid: Vec<T>,
    tau: Vec<T>,
}

impl<T: Real> ClockTable<T> {
    pub fn s_grid(&self) -> &[T] {
        &self.s_grid
    }

    pub fn tau(&self) -> &[T] {
        &self.tau
    }

    /// Largest clock value reached.
    pub fn reach(&self) -> T {
        *self.tau.last().expect("clock has points")
    }

    /// `r_t`: Brownian time at which the clock reaches `t`, by linear
    /// interpolation. `None` beyond the clock's reach.
    pub fn inverse(&self, t: T) -> Option<T> {
        if t < T::zero() || t > self.reach() {
            return None;
        }
        let k = self.tau.partition_point(|&v| v < t);
        if k == 0 {
            return Some(self.s_grid[0]);
        }
        let (t0, t1) = (self.tau[k - 1], self.tau[k]);
        let (s0, s1) = (self.s_grid[k - 1], self.s_grid[k]);
        if t1 == t0 {
            return Some(s1);
        }
        Some(s0 + (t - t0) / (t1 - t0) * (s1 - s0))
    }
}

/// Clock of a Brownian path `beta` for the skew (`two_sided`) or reflected plain
/// construction, midpoint rule, `|beta|` floored at `eps0` when the rate is singular.
pub fn build_clock<T: Real>(
    beta: &PathGrid<T>,
    spec: &SkewSpec<T>,
    two_sided: bool,
    eps0: T,
) -> Result<ClockTable<T>> {
    require_recurrent_dimension(spec.delta, "build_clock")?;
    if !(eps0 > T::zero()) {
        return domain(format!("clamp must be positive, got {eps0}"));
    }
    let kernel = if two_sided {
        if !(spec.theta.abs() < T::one()) {
            return domain("two-sided clock needs |theta| < 1");
        }
        Kernel::skew(spec, eps0)
    } else {
        Kernel::plain(spec.delta, eps0)
    };
    let half = lit::<T>(0.5);
    let times = beta.times();
    let vals = beta.values();
    let mut tau = Vec::with_capacity(vals.len());
    tau.push(T::zero());
    let mut acc = T::zero();
    for k in 1..vals.len() {
        let mid = (vals[k - 1] + vals[k]) * half;
        let mid = if two_sided { mid } else { mid.abs() };
        acc = acc + kernel.rate(mid) * (times[k] - times[k - 1]);
        tau.push(acc);
    }
    Ok(ClockTable {
        s_grid: times.to_vec(),
        tau,
    })
}
