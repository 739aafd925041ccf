#![allow(clippy::excessive_precision)]

//! Log-gamma and the exponentially scaled modified Bessel function of the first kind.
//!
//! Everything here is a pure function of its arguments. `bessel_i_scaled` returns
//! `e^{-z} I_nu(z)`; callers that need `I_nu` itself add `z` to the logarithm.

use crate::error::{domain, Result};
use crate::scalar::{from_usize, lit, Real};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `zeta(k) - 1` for `k = 2, 3, ...`.
const ZETA_MINUS_ONE: [f64; 39] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_6,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_1,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_840e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_961e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_330e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505e-10,
    1.164_155_017_270_052e-10,
    5.820_772_087_902_701e-11,
    2.910_385_044_497_100e-11,
    1.455_192_189_104_198e-11,
    7.275_959_835_057_481e-12,
    3.637_979_547_378_651e-12,
    1.818_989_650_307_066e-12,
    9.094_947_840_263_889e-13,
];

/// `B_{2k} / (2k (2k - 1))`, the Stirling series coefficients.
const STIRLING: [f64; 10] = [
    0.083_333_333_333_333_33,
    -0.002_777_777_777_777_778,
    0.000_793_650_793_650_793_7,
    -0.000_595_238_095_238_095_2,
    0.000_841_750_841_750_841_8,
    -0.001_917_526_917_526_918,
    0.006_410_256_410_256_410,
    -0.029_550_653_594_771_24,
    0.179_644_372_368_830_6,
    -1.392_432_216_905_901,
];

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return domain(format!("log_gamma requires finite x > 0, got {x}"));
    }
    Ok(ln_gamma_pos(x))
}

/// `(ln |Gamma(x)|, sign Gamma(x))` for any real `x` that is not a pole.
pub fn ln_abs_gamma<T: Real>(x: T) -> Result<(T, T)> {
    if !x.is_finite() {
        return domain(format!("ln_abs_gamma requires finite x, got {x}"));
    }
    if x > T::zero() {
        return Ok((ln_gamma_pos(x), T::one()));
    }
    if x == x.floor() {
        return domain(format!("gamma has a pole at {x}"));
    }
    // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    let s = sin_pi(x);
    let ln = T::PI().ln() - s.abs().ln() - ln_gamma_pos(T::one() - x);
    Ok((ln, s.signum()))
}

fn sin_pi<T: Real>(x: T) -> T {
    let two = lit::<T>(2.0);
    let r = x - two * (x / two).round();
    (T::PI() * r).sin()
}

fn ln_gamma_pos<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        return ln_gamma_pos(x + T::one()) - x.ln();
    }
    if x < lit(1.5) {
        // ln Gamma(x) = ln Gamma(x + 1) - ln x, with ln x = ln1p(x - 1) exact near 1
        return ln_gamma_near_two(x + T::one()) - (x - T::one()).ln_1p();
    }
    if x < lit(2.5) {
        return ln_gamma_near_two(x);
    }
    if x < lit(8.0) {
        let mut y = x;
        let mut prod = T::one();
        while y >= lit(2.5) {
            y = y - T::one();
            prod = prod * y;
        }
        return ln_gamma_near_two(y) + prod.ln();
    }
    stirling(x)
}

/// Taylor series of `ln Gamma(2 + z)` in `z = x - 2`, valid for `|z| <= 1/2`.
fn ln_gamma_near_two<T: Real>(x: T) -> T {
    let z = x - lit(2.0);
    if z == T::zero() {
        return T::zero();
    }
    let mut sum = (T::one() - lit(EULER_GAMMA)) * z;
    let mut zk = -z;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = i + 2;
        zk = zk * (-z);
        let term = zk * lit(*c) / from_usize(k);
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() * lit(0.01) {
            break;
        }
    }
    sum
}

fn stirling<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    let ln_sqrt_2pi = lit::<T>(0.918_938_533_204_672_8);
    let mut sum = (x - half) * x.ln() - x + ln_sqrt_2pi;
    let inv = x.recip();
    let inv2 = inv * inv;
    let mut p = inv;
    for c in STIRLING {
        let term = lit::<T>(c) * p;
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() * lit(0.01) {
            break;
        }
        p = p * inv2;
    }
    sum
}

/// Crossover between the power series and the large-argument expansion.
pub fn bessel_switch_point<T: Real>(nu: T) -> T {
    lit::<T>(15.0).max(nu * nu * lit(0.5))
}

/// `e^{-z} I_nu(z)` for real order `nu` and `z >= 0`.
///
/// Negative integer orders are reflected (`I_{-n} = I_n`). At `z = 0` a negative
/// non-integer order diverges and `+inf` is returned.
pub fn bessel_i_scaled<T: Real>(nu: T, z: T) -> Result<T> {
    if !(z >= T::zero()) || !z.is_finite() {
        return domain(format!("bessel_i_scaled requires finite z >= 0, got {z}"));
    }
    if !nu.is_finite() {
        return domain(format!("bessel_i_scaled requires finite order, got {nu}"));
    }
    let nu = if nu < T::zero() && nu == nu.floor() { -nu } else { nu };
    if z == T::zero() {
        return Ok(if nu == T::zero() {
            T::one()
        } else if nu > T::zero() {
            T::zero()
        } else {
            T::infinity()
        });
    }
    if z >= bessel_switch_point(nu) {
        Ok(bessel_i_asymptotic(nu, z))
    } else {
        bessel_i_series(nu, z)
    }
}

/// `ln I_nu(z)` for `z > 0`; `None` when `I_nu(z) <= 0` (possible for `nu < -1`).
pub fn ln_bessel_i<T: Real>(nu: T, z: T) -> Result<Option<T>> {
    let s = bessel_i_scaled(nu, z)?;
    Ok((s > T::zero()).then(|| s.ln() + z))
}

/// Power series `sum (z/2)^{nu+2k} / (k! Gamma(nu+k+1))`, scaled by `e^{-z}`.
///
/// Terms are accumulated relative to the first one with periodic rescaling, so
/// neither the leading power nor the peak term overflows.
pub(crate) fn bessel_i_series<T: Real>(nu: T, z: T) -> Result<T> {
    let half_z = z * lit(0.5);
    let q = half_z * half_z;
    let (lg, sg) = ln_abs_gamma(nu + T::one())?;
    let ln_t0 = nu * half_z.ln() - lg;

    let big = T::max_value().sqrt();
    let mut ln_scale = ln_t0;
    let mut term = sg;
    let mut sum = sg;
    let mut k = 0usize;
    loop {
        let kk = from_usize::<T>(k + 1);
        term = term * q / (kk * (nu + kk));
        sum = sum + term;
        k += 1;
        if term.abs() > big {
            sum = sum / big;
            term = term / big;
            ln_scale = ln_scale + big.ln();
        }
        let past_peak = kk * (nu + kk) > q;
        if past_peak && term.abs() <= T::epsilon() * sum.abs() * lit(0.1) {
            break;
        }
        if k > 20_000 {
            break;
        }
    }
    if sum == T::zero() {
        return Ok(T::zero());
    }
    Ok(sum.signum() * (sum.abs().ln() + ln_scale - z).exp())
}

/// Hankel expansion `e^{-z} I_nu(z) ~ (2 pi z)^{-1/2} sum (-1)^k a_k(nu) / z^k`.
pub(crate) fn bessel_i_asymptotic<T: Real>(nu: T, z: T) -> T {
    let mu = lit::<T>(4.0) * nu * nu;
    let eight_z = lit::<T>(8.0) * z;
    let mut term = T::one();
    let mut sum = T::one();
    let mut prev = T::infinity();
    for k in 1..200usize {
        let odd = from_usize::<T>(2 * k - 1);
        term = -term * (mu - odd * odd) / (from_usize::<T>(k) * eight_z);
        if term.abs() >= prev {
            break;
        }
        sum = sum + term;
        prev = term.abs();
        if prev <= T::epsilon() * sum.abs() * lit(0.1) {
            break;
        }
    }
    sum / (lit::<T>(2.0) * T::PI() * z).sqrt()
}
