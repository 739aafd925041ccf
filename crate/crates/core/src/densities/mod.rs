//! Closed-form transition densities of Bessel, killed Bessel and skew Bessel
//! processes, the push-forward density of the heterogeneous diffusion, and the
//! quadrature utilities used to normalize and tabulate them.
//!
//! All kernels are assembled in log space from [`bessel_i_scaled`] so that the
//! Gaussian factor and the Bessel factor never overflow separately.

pub mod cdf;
pub mod quadrature;

use crate::error::{domain, Error, Result};
use crate::model::{h_transform, ModelParams, Regime, SkewSpec};
use crate::scalar::{lit, to_f64, Real};
use crate::specialfn::{bessel_i_scaled, ln_abs_gamma};

pub use cdf::{cdf_from_density, CdfTable};
pub use quadrature::{integrate, integrate_with_breaks, QuadSettings, Quadrature};

/// Point `(t, x, y)` at which a transition density is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityQuery<T> {
    pub t: T,
    pub x: T,
    pub y: T,
}

impl<T: Real> DensityQuery<T> {
    pub fn new(t: T, x: T, y: T) -> Result<Self> {
        if !(t > T::zero()) || !t.is_finite() {
            return domain(format!("density time must be finite and positive, got {t}"));
        }
        if !x.is_finite() || !y.is_finite() {
            return domain("density arguments must be finite");
        }
        Ok(Self { t, x, y })
    }

    fn require_nonnegative(&self) -> Result<()> {
        if self.x < T::zero() || self.y < T::zero() {
            return domain(format!(
                "Bessel densities live on [0, inf), got x={}, y={}",
                self.x, self.y
            ));
        }
        Ok(())
    }
}

/// `y^p` with the conventions `0^0 = 1`, `0^{p>0} = 0`, `0^{p<0} = inf`.
fn power_at_zero<T: Real>(p: T) -> T {
    if p > T::zero() {
        T::zero()
    } else if p == T::zero() {
        T::one()
    } else {
        T::infinity()
    }
}

/// `ln[t^{-1} x^{-nu} y^{nu+1} e^{-(x-y)^2/2t}]`, the prefactor shared by the
/// Bessel and killed kernels once `e^{-xy/t}` is absorbed into the scaled `I`.
fn ln_prefactor<T: Real>(t: T, x: T, y: T, nu: T) -> T {
    let d = x - y;
    -t.ln() - nu * x.ln() + (nu + T::one()) * y.ln() - d * d / (lit::<T>(2.0) * t)
}

/// Bessel transition density `p^delta(t, x, y)` on `[0, inf)`, for `delta > 0`.
pub fn bessel_density<T: Real>(q: &DensityQuery<T>, delta: T) -> Result<T> {
    if !(delta > T::zero()) {
        return domain(format!(
            "bessel_density requires delta > 0, got {delta}; use killed_density"
        ));
    }
    q.require_nonnegative()?;
    let (t, x, y) = (q.t, q.x, q.y);
    let nu = delta * lit(0.5) - T::one();
    let two = lit::<T>(2.0);
    if x == T::zero() {
        // 2^{-nu} t^{-nu-1} Gamma(nu+1)^{-1} y^{2nu+1} e^{-y^2/2t}
        let (lg, _) = ln_abs_gamma(nu + T::one())?;
        let base = -nu * two.ln() - (nu + T::one()) * t.ln() - lg - y * y / (two * t);
        let power = two * nu + T::one();
        if y == T::zero() {
            return Ok(base.exp() * power_at_zero(power));
        }
        return Ok((base + power * y.ln()).exp());
    }
    if y == T::zero() {
        // y^{nu+1} I_nu(xy/t) ~ y^{2nu+1} (x/2t)^nu / Gamma(nu+1)
        let (lg, _) = ln_abs_gamma(nu + T::one())?;
        let base = -t.ln() - nu * (two * t).ln() - lg - x * x / (two * t);
        return Ok(base.exp() * power_at_zero(two * nu + T::one()));
    }
    let z = x * y / t;
    let scaled = bessel_i_scaled(nu, z)?;
    Ok((ln_prefactor(t, x, y, nu) + scaled.ln()).exp())
}

/// Density of `BES^delta` killed at its first visit to zero, for `delta < 2`.
pub fn killed_density<T: Real>(q: &DensityQuery<T>, delta: T) -> Result<T> {
    if !(delta < lit(2.0)) {
        return domain(format!("killed_density requires delta < 2, got {delta}"));
    }
    if !(q.x > T::zero()) || !(q.y > T::zero()) {
        return domain(format!(
            "killed_density requires x > 0 and y > 0, got x={}, y={}",
            q.x, q.y
        ));
    }
    killed_kernel(q.t, q.x, q.y, delta)
}

/// Killed density extended by its zero limits at `x = 0` or `y = 0`.
fn killed_kernel<T: Real>(t: T, x: T, y: T, delta: T) -> Result<T> {
    if x == T::zero() || y == T::zero() {
        return Ok(T::zero());
    }
    let z = x * y / t;
    if delta >= T::zero() {
        let nu = delta * lit(0.5) - T::one();
        let scaled = bessel_i_scaled(-nu, z)?;
        Ok((ln_prefactor(t, x, y, nu) + scaled.ln()).exp())
    } else {
        // t^{-1} x^{nt} y^{1-nt} e^{-(x^2+y^2)/2t} I_{nt}(xy/t), nt = |delta|/2 + 1;
        // identical to the prefactor with nu = -nt
        let nt = delta.abs() * lit(0.5) + T::one();
        let scaled = bessel_i_scaled(nt, z)?;
        Ok((ln_prefactor(t, x, y, -nt) + scaled.ln()).exp())
    }
}

/// Shared ingredients of the skew kernels at `|x|, |y| > 0`:
/// `(K e^{-z} I_nu, K e^{-z} I_{-nu})` with `K` the common prefactor.
fn skew_parts<T: Real>(t: T, ax: T, ay: T, nu: T) -> Result<(T, T)> {
    let z = ax * ay / t;
    let pre = ln_prefactor(t, ax, ay, nu).exp();
    Ok((
        pre * bessel_i_scaled(nu, z)?,
        pre * bessel_i_scaled(-nu, z)?,
    ))
}

fn require_skew_dimension<T: Real>(spec: &SkewSpec<T>, what: &str) -> Result<()> {
    if !(spec.delta > T::zero() && spec.delta < lit(2.0)) {
        return domain(format!("{what} requires delta in (0, 2), got {}", spec.delta));
    }
    Ok(())
}

fn sign_of<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Skew Bessel density in the unified form
/// `p_dag(|x|,|y|) 1{xy>0} + (1 + theta sign y)/2 (p(|x|,|y|) - p_dag(|x|,|y|))`.
pub fn skew_density<T: Real>(q: &DensityQuery<T>, spec: &SkewSpec<T>) -> Result<T> {
    require_skew_dimension(spec, "skew_density")?;
    let (t, x, y) = (q.t, q.x, q.y);
    let (ax, ay) = (x.abs(), y.abs());
    let weight = (T::one() + spec.theta * sign_of(y)) * lit(0.5);
    if ax == T::zero() || ay == T::zero() {
        // the killed part vanishes on both axes
        let p = bessel_density(&DensityQuery { t, x: ax, y: ay }, spec.delta)?;
        return Ok(weight * p);
    }
    let (free, killed) = skew_parts(t, ax, ay, spec.nu())?;
    // free - killed = K (I_nu - I_{-nu}) >= 0; clamp the rounding residue
    let visited = (free - killed).max(T::zero());
    let same_side = (x > T::zero()) == (y > T::zero());
    Ok(if same_side { killed } else { T::zero() } + weight * visited)
}

/// Four-case form of the skew density for `x, y != 0`, with the cross-sign
/// coefficients that reproduce [`skew_density`].
pub fn skew_density_cases<T: Real>(q: &DensityQuery<T>, spec: &SkewSpec<T>) -> Result<T> {
    skew_cases(q, spec, false)
}

/// Four-case form with the cross-sign coefficients as they are usually printed:
/// `(1-theta)/2 I_nu - (1+theta)/2 I_{-nu}` for `x > 0 > y` and its mirror.
///
/// Kept only to quantify the discrepancy: for `theta != 0` this kernel goes
/// negative and carries total mass `1 - theta * P(no zero visit)`.
pub fn skew_density_cases_as_printed<T: Real>(
    q: &DensityQuery<T>,
    spec: &SkewSpec<T>,
) -> Result<T> {
    skew_cases(q, spec, true)
}

fn skew_cases<T: Real>(q: &DensityQuery<T>, spec: &SkewSpec<T>, printed: bool) -> Result<T> {
    require_skew_dimension(spec, "skew_density_cases")?;
    if q.x == T::zero() || q.y == T::zero() {
        return domain("the four-case form needs x != 0 and y != 0");
    }
    let half = lit::<T>(0.5);
    let plus = (T::one() + spec.theta) * half;
    let minus = (T::one() - spec.theta) * half;
    let (i_nu, i_neg) = skew_parts(q.t, q.x.abs(), q.y.abs(), spec.nu())?;
    let value = match (q.x > T::zero(), q.y > T::zero()) {
        (true, true) => plus * i_nu + minus * i_neg,
        (false, false) => minus * i_nu + plus * i_neg,
        (true, false) => {
            if printed {
                minus * i_nu - plus * i_neg
            } else {
                minus * (i_nu - i_neg)
            }
        }
        (false, true) => {
            if printed {
                plus * i_nu - minus * i_neg
            } else {
                plus * (i_nu - i_neg)
            }
        }
    };
    Ok(value)
}

/// Density of the signed process `Z^{delta,theta}` for every dimension.
///
/// * `0 < delta < 2`: [`skew_density`].
/// * `delta >= 2`: the Bessel density on the side of `x`; from `x = 0` the
///   side is chosen with probability `(1 +- theta)/2`.
/// * `delta <= 0`: the killed density on the side of `x` (a sub-probability;
///   the missing mass sits at the origin). From `x = 0` there is no density.
pub fn signed_bessel_density<T: Real>(q: &DensityQuery<T>, spec: &SkewSpec<T>) -> Result<T> {
    let (t, x, y) = (q.t, q.x, q.y);
    match spec.regime() {
        Regime::SkewRecurrent => skew_density(q, spec),
        Regime::Transient => {
            let (ax, ay) = (x.abs(), y.abs());
            let free = || bessel_density(&DensityQuery { t, x: ax, y: ay }, spec.delta);
            if x == T::zero() {
                let weight = (T::one() + spec.theta * sign_of(y)) * lit(0.5);
                Ok(weight * free()?)
            } else if (x > T::zero()) == (y > T::zero()) && y != T::zero() {
                free()
            } else {
                Ok(T::zero())
            }
        }
        Regime::Trap => {
            if x == T::zero() || y == T::zero() || (x > T::zero()) != (y > T::zero()) {
                Ok(T::zero())
            } else {
                killed_kernel(t, x.abs(), y.abs(), spec.delta)
            }
        }
    }
}

/// Transition density of the heterogeneous diffusion `X = H^{-1}(Z)`:
/// `p^{delta,theta}(t, H(x), H(y)) |y|^{-alpha}`.
pub fn het_density<T: Real>(
    t: T,
    x: T,
    y: T,
    params: &ModelParams<T>,
    theta: T,
) -> Result<T> {
    if y == T::zero() {
        return domain("het_density is not defined at y = 0; integrate around it");
    }
    let alpha = params.alpha();
    let spec = SkewSpec::new(params.delta(), theta)?;
    let q = DensityQuery::new(t, h_transform(x, alpha), h_transform(y, alpha))?;
    Ok(signed_bessel_density(&q, &spec)? * y.abs().powf(-alpha))
}

/// `P_x(tau_0 > t)` for `BES^delta`, `delta < 2`, by integrating the killed density.
pub fn survival_probability<T: Real>(t: T, x: T, delta: T) -> Result<T> {
    if !(t > T::zero()) || !(x > T::zero()) || !(delta < lit(2.0)) {
        return domain(format!(
            "survival_probability requires t > 0, x > 0, delta < 2; got t={t}, x={x}, delta={delta}"
        ));
    }
    let f = |y: T| killed_kernel(t, x, y, delta).unwrap_or(T::nan());
    let width = lit::<T>(10.0) * t.sqrt();
    let q = integrate_with_breaks(
        f,
        &[T::zero(), x, x + width, T::infinity()],
        &QuadSettings::default(),
    )
    .map_err(|e| Error::Numerical {
        what: "survival_probability",
        detail: format!("t={}, x={}, delta={}: {e}", to_f64(t), to_f64(x), to_f64(delta)),
    })?;
    Ok(q.value.max(T::zero()).min(T::one()))
}

/// Break points that put quadrature nodes where a density on the real line needs
/// them: the origin, the start point and its mirror, and a wide Gaussian envelope.
pub fn line_breaks<T: Real>(t: T, x: T) -> Vec<T> {
    let w = lit::<T>(12.0) * t.sqrt();
    let ax = x.abs();
    let mut pts = vec![T::neg_infinity(), -(ax + w), -ax, T::zero(), ax, ax + w, T::infinity()];
    pts.dedup();
    pts
}

/// Break points for a density on `[0, inf)` started at `x >= 0`.
pub fn half_line_breaks<T: Real>(t: T, x: T) -> Vec<T> {
    let w = lit::<T>(12.0) * t.sqrt();
    let mut pts = vec![T::zero(), x, x + w, T::infinity()];
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests;
