//! Parameter algebra: the power-law transform, the dimension map, regime
//! classification and the scale/speed functions of plain and skew Bessel processes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{lit, signed_pow, Real};

/// Physical parameters of `dX = |X|^alpha dB + alpha lambda |X|^{2 alpha - 1} sign(X) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    alpha: T,
    lambda: T,
    delta: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(alpha: T, lambda: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return domain(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return domain(format!("lambda must lie in [0, 1], got {lambda}"));
        }
        let delta = (T::one() - lit::<T>(2.0) * alpha * (T::one() - lambda)) / (T::one() - alpha);
        Ok(Self {
            alpha,
            lambda,
            delta,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Bessel dimension, computed once at construction.
    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self.delta)
    }

    /// `alpha * lambda`, the coefficient of the noise-induced drift.
    pub fn drift_coefficient(&self) -> T {
        self.alpha * self.lambda
    }
}

/// Dimension `delta = (1 - 2 alpha (1 - lambda)) / (1 - alpha)`.
pub fn dimension<T: Real>(params: &ModelParams<T>) -> T {
    params.delta
}

/// Dimension and skewness of a (skew) Bessel law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewSpec<T> {
    pub delta: T,
    pub theta: T,
}

impl<T: Real> SkewSpec<T> {
    pub fn new(delta: T, theta: T) -> Result<Self> {
        if !delta.is_finite() {
            return domain(format!("delta must be finite, got {delta}"));
        }
        if !(theta >= -T::one() && theta <= T::one()) {
            return domain(format!("theta must lie in [-1, 1], got {theta}"));
        }
        Ok(Self { delta, theta })
    }

    /// Bessel order `nu = delta / 2 - 1`.
    pub fn nu(&self) -> T {
        self.delta * lit(0.5) - T::one()
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self.delta)
    }

    /// Probability of choosing the positive side at a visit to zero.
    pub fn p_plus(&self) -> T {
        (T::one() + self.theta) * lit(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `delta <= 0`: absorbed at the origin on first contact.
    Trap,
    /// `0 < delta < 2`: recurrent, zero is visited and left instantly.
    SkewRecurrent,
    /// `delta >= 2`: zero is never reached from a nonzero start.
    Transient,
}

impl Regime {
    pub fn behavior_at_zero(&self) -> &'static str {
        match self {
            Regime::Trap => "hits zero with probability one and stays there",
            Regime::SkewRecurrent => {
                "visits zero infinitely often, spends zero time there, picks a side by the skewness"
            }
            Regime::Transient => "never hits zero from a nonzero start; from zero it leaves immediately",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Trap => "Trap",
            Regime::SkewRecurrent => "SkewRecurrent",
            Regime::Transient => "Transient",
        };
        f.write_str(s)
    }
}

pub fn classify_regime<T: Real>(delta: T) -> Regime {
    if delta <= T::zero() {
        Regime::Trap
    } else if delta < lit(2.0) {
        Regime::SkewRecurrent
    } else {
        Regime::Transient
    }
}

/// `H_alpha(x) = |x|^{1 - alpha} sign(x) / (1 - alpha)`.
pub fn h_transform<T: Real>(x: T, alpha: T) -> T {
    signed_pow(x, T::one() - alpha) / (T::one() - alpha)
}

/// Inverse of [`h_transform`].
pub fn h_inverse<T: Real>(z: T, alpha: T) -> T {
    let a = T::one() - alpha;
    signed_pow(a * z, a.recip())
}

/// Scale function of `BES^delta` on `[0, inf)`.
pub fn scale_s<T: Real>(x: T, delta: T) -> Result<T> {
    if !(x >= T::zero()) {
        return domain(format!("scale_s requires x >= 0, got {x}"));
    }
    let two = lit::<T>(2.0);
    if delta < two {
        Ok(x.powf(two - delta))
    } else if x == T::zero() {
        domain(format!("scale_s is singular at 0 for delta = {delta} >= 2"))
    } else if delta == two {
        Ok(two * x.ln())
    } else {
        Ok(-x.powf(two - delta))
    }
}

/// Speed measure density of `BES^delta`.
pub fn speed_m<T: Real>(x: T, delta: T) -> Result<T> {
    if !(x > T::zero()) || !(delta > T::zero()) {
        return domain(format!("speed_m requires x > 0 and delta > 0, got x={x}, delta={delta}"));
    }
    let two = lit::<T>(2.0);
    Ok(if delta == two {
        x
    } else {
        two / (two - delta).abs() * x.powf(delta - T::one())
    })
}

fn require_recurrent<T: Real>(spec: &SkewSpec<T>, what: &str) -> Result<()> {
    if !(spec.delta > T::zero() && spec.delta < lit(2.0)) {
        return domain(format!("{what} requires delta in (0, 2), got {}", spec.delta));
    }
    Ok(())
}

/// Two-sided scale function `2 |x|^{2 - delta} / (sign x + theta)`.
pub fn scale_s_skew<T: Real>(x: T, spec: &SkewSpec<T>) -> Result<T> {
    require_recurrent(spec, "scale_s_skew")?;
    if spec.theta.abs() >= T::one() {
        return domain("scale_s_skew is undefined for theta = +-1");
    }
    let two = lit::<T>(2.0);
    let p = x.abs().powf(two - spec.delta);
    Ok(if x >= T::zero() {
        two / (T::one() + spec.theta) * p
    } else {
        -two / (T::one() - spec.theta) * p
    })
}

/// Speed density of the skew Bessel process, `(1 +- theta) |x|^{delta - 1} / (2 - delta)`.
pub fn speed_m_skew<T: Real>(x: T, spec: &SkewSpec<T>) -> Result<T> {
    require_recurrent(spec, "speed_m_skew")?;
    if x == T::zero() {
        if spec.delta < T::one() {
            return domain("speed_m_skew diverges at 0 for delta < 1");
        }
        return domain("speed_m_skew is one-sided at 0");
    }
    let side = if x > T::zero() {
        T::one() + spec.theta
    } else {
        T::one() - spec.theta
    };
    Ok(side / (lit::<T>(2.0) - spec.delta) * x.abs().powf(spec.delta - T::one()))
}

/// `R_delta(z) = z^{1 / (2 - delta)}`, inverse of [`scale_s`] for `delta < 2`.
pub fn r_inverse<T: Real>(z: T, delta: T) -> Result<T> {
    if !(delta < lit(2.0)) {
        return domain(format!("r_inverse requires delta < 2, got {delta}"));
    }
    if !(z >= T::zero()) {
        return domain(format!("r_inverse requires z >= 0, got {z}"));
    }
    Ok(z.powf((lit::<T>(2.0) - delta).recip()))
}

/// Inverse of [`scale_s_skew`].
pub fn r_inverse_skew<T: Real>(z: T, spec: &SkewSpec<T>) -> Result<T> {
    require_recurrent(spec, "r_inverse_skew")?;
    let p = (lit::<T>(2.0) - spec.delta).recip();
    let half = lit::<T>(0.5);
    Ok(if z > T::zero() {
        ((T::one() + spec.theta) * half * z).powf(p)
    } else if z < T::zero() {
        -((T::one() - spec.theta) * half * (-z)).powf(p)
    } else {
        T::zero()
    })
}
