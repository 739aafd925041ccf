//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed on their error estimate and the worst one
//! is bisected until the summed error meets the tolerance. Semi-infinite pieces are
//! mapped onto `[0, 1)` with `y = a + s / (1 - s)`. Nodes never touch interval
//! endpoints, so integrable endpoint singularities are handled by bisection alone.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadSettings<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadSettings<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-9),
            rel_tol: lit(1e-8),
            max_intervals: 4000,
        }
    }
}

impl<T: Real> QuadSettings<T> {
    pub fn tight() -> Self {
        Self {
            abs_tol: lit(1e-13),
            rel_tol: lit(1e-12),
            max_intervals: 8000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub abs_error: T,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map<T> {
    Identity,
    /// `y = a + s / (1 - s)`
    Up(T),
    /// `y = b - s / (1 - s)`
    Down(T),
}

impl<T: Real> Map<T> {
    #[inline]
    fn eval<F: Fn(T) -> T>(&self, f: &F, s: T) -> T {
        match *self {
            Map::Identity => f(s),
            Map::Up(a) | Map::Down(a) => {
                let one_minus = T::one() - s;
                let u = s / one_minus;
                let jac = (one_minus * one_minus).recip();
                let y = if matches!(self, Map::Up(_)) { a + u } else { a - u };
                let v = f(y);
                if v == T::zero() {
                    T::zero()
                } else {
                    v * jac
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece<T> {
    lo: T,
    hi: T,
    map: Map<T>,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<T: Real> Eq for Piece<T> {}

impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err.abs();
    if res_asc != T::zero() && scaled != T::zero() {
        let scale = (lit::<T>(200.0) * scaled / res_asc).powf(lit(1.5));
        scaled = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let fifty_eps = lit::<T>(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        scaled = scaled.max(fifty_eps * res_abs);
    }
    scaled
}

/// One 15-point Kronrod rule with its embedded 7-point Gauss error estimate.
fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, map: Map<T>, lo: T, hi: T) -> Result<(T, T)> {
    let half = lit::<T>(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let abs_half = half_len.abs();

    let fc = map.eval(f, center);
    let mut res_g = fc * lit(WG[3]);
    let mut res_k = fc * lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * lit(XGK[j]);
        let f1 = map.eval(f, center - dx);
        let f2 = map.eval(f, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let wk = lit::<T>(WGK[j]);
        res_k = res_k + wk * (f1 + f2);
        res_abs = res_abs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + lit::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::Numerical {
            what: "quadrature",
            detail: format!(
                "non-finite integrand on [{}, {}]",
                to_f64(lo),
                to_f64(hi)
            ),
        });
    }
    let mean = res_k * half;
    let mut res_asc = lit::<T>(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + lit::<T>(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half_len;
    let err = (res_k - res_g) * half_len;
    Ok((
        value,
        rescale_error(err, res_abs * abs_half, res_asc * abs_half),
    ))
}

fn run<T: Real, F: Fn(T) -> T>(
    f: &F,
    pieces: Vec<(T, T, Map<T>)>,
    settings: &QuadSettings<T>,
) -> Result<Quadrature<T>> {
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = T::zero();
    let mut evaluations = 0usize;
    let mut done: Vec<Piece<T>> = Vec::new();
    for (lo, hi, map) in pieces {
        if lo == hi {
            continue;
        }
        let (value, error) = kronrod(f, map, lo, hi)?;
        evaluations += 15;
        total = total + value;
        total_err = total_err + error;
        heap.push(Piece {
            lo,
            hi,
            map,
            value,
            error,
        });
    }
    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() + done.len() >= settings.max_intervals {
            return Err(Error::Numerical {
                what: "quadrature",
                detail: format!(
                    "no convergence after {} intervals: value {} error {} tolerance {}",
                    heap.len() + done.len(),
                    to_f64(total),
                    to_f64(total_err),
                    to_f64(tol)
                ),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = lit::<T>(0.5) * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // at floating point resolution; keep its contribution as is
            done.push(worst);
            continue;
        }
        let (v1, e1) = kronrod(f, worst.map, worst.lo, mid)?;
        let (v2, e2) = kronrod(f, worst.map, mid, worst.hi)?;
        evaluations += 30;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Piece {
            lo: worst.lo,
            hi: mid,
            map: worst.map,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            lo: mid,
            hi: worst.hi,
            map: worst.map,
            value: v2,
            error: e2,
        });
        // keep the running error honest against cancellation drift
        if heap.len() % 64 == 0 {
            (total, total_err) = sums(heap.iter().chain(done.iter()));
        }
    }
    let (total, total_err) = sums(heap.iter().chain(done.iter()));
    Ok(Quadrature {
        value: total,
        abs_error: total_err,
        evaluations,
        intervals: heap.len() + done.len(),
    })
}

fn sums<'a, T: Real>(pieces: impl Iterator<Item = &'a Piece<T>>) -> (T, T) {
    pieces.fold((T::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error))
}

/// Integrates `f` over `[a, b]`; either bound may be infinite.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    settings: &QuadSettings<T>,
) -> Result<Quadrature<T>> {
    integrate_with_breaks(f, &[a, b], settings)
}

/// Integrates over `[points[0], points[last]]`, splitting at every interior point.
///
/// The outer points may be `-inf` / `+inf`. Interior points are where the integrand
/// is singular or sharply peaked.
pub fn integrate_with_breaks<T: Real, F: Fn(T) -> T>(
    f: F,
    points: &[T],
    settings: &QuadSettings<T>,
) -> Result<Quadrature<T>> {
    if points.len() < 2 {
        return Err(Error::Domain("quadrature needs at least two points".into()));
    }
    if points.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Domain(
            "quadrature break points must be nondecreasing".into(),
        ));
    }
    let n = points.len();
    let mut pieces = Vec::with_capacity(n);
    for (i, w) in points.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let lo_inf = lo.is_infinite();
        let hi_inf = hi.is_infinite();
        match (lo_inf, hi_inf) {
            (false, false) => pieces.push((lo, hi, Map::Identity)),
            (false, true) => pieces.push((T::zero(), T::one(), Map::Up(lo))),
            (true, false) => pieces.push((T::zero(), T::one(), Map::Down(hi))),
            (true, true) => {
                debug_assert!(i == 0 && n == 2);
                pieces.push((T::zero(), T::one(), Map::Up(T::zero())));
                pieces.push((T::zero(), T::one(), Map::Down(T::zero())));
            }
        }
    }
    run(&f, pieces, settings)
}
