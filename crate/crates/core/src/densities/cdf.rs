//! Tabulated cumulative distribution functions built from a density.
//!
//! Cell masses come from adaptive quadrature. Inside a cell the CDF is a cubic
//! Hermite interpolant using the density as derivative, falling back to linear
//! interpolation where the Hermite cubic would not be monotone or the density is
//! singular. Cells are bisected until the interpolant matches quadrature at the
//! quarter points.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::quadrature::{integrate, QuadSettings};

#[derive(Debug, Clone)]
pub struct CdfTable<T> {
    nodes: Vec<T>,
    cdf: Vec<T>,
    density: Vec<T>,
    hermite: Vec<bool>,
    total_mass: T,
}

impl<T: Real> CdfTable<T> {
    pub fn lower(&self) -> T {
        self.nodes[0]
    }

    pub fn upper(&self) -> T {
        *self.nodes.last().expect("table has nodes")
    }

    /// Integral of the density over the whole table.
    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.cdf
    }

    /// Checks the total mass against `expected` within `tol`.
    pub fn certify_mass(&self, expected: T, tol: T) -> Result<()> {
        if (self.total_mass - expected).abs() > tol {
            return Err(Error::Internal(format!(
                "tabulated mass {} differs from {} by more than {}",
                to_f64(self.total_mass),
                to_f64(expected),
                to_f64(tol)
            )));
        }
        Ok(())
    }

    /// CDF at `y`; `0` below the table and `total_mass` above it.
    pub fn eval(&self, y: T) -> T {
        let n = self.nodes.len();
        if y <= self.nodes[0] {
            return T::zero();
        }
        if y >= self.nodes[n - 1] {
            return self.total_mass;
        }
        let i = self.nodes.partition_point(|&v| v <= y) - 1;
        self.interpolate(i, y)
    }

    fn interpolate(&self, i: usize, y: T) -> T {
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let h = x1 - x0;
        let s = (y - x0) / h;
        let v = if self.hermite[i] {
            let (m0, m1) = (self.density[i] * h, self.density[i + 1] * h);
            let s2 = s * s;
            let s3 = s2 * s;
            let two = lit::<T>(2.0);
            let three = lit::<T>(3.0);
            let h00 = two * s3 - three * s2 + T::one();
            let h10 = s3 - two * s2 + s;
            let h01 = -two * s3 + three * s2;
            let h11 = s3 - s2;
            h00 * f0 + h10 * m0 + h01 * f1 + h11 * m1
        } else {
            f0 + s * (f1 - f0)
        };
        v.max(f0).min(f1)
    }
}

/// Whether the cubic Hermite interpolant on a cell stays monotone (Fritsch-Carlson).
fn hermite_ok<T: Real>(mass: T, h: T, d0: T, d1: T) -> bool {
    if !d0.is_finite() || !d1.is_finite() {
        return false;
    }
    if mass <= T::zero() {
        return d0 == T::zero() && d1 == T::zero();
    }
    let slope = mass / h;
    let a = d0 / slope;
    let b = d1 / slope;
    a * a + b * b <= lit(9.0)
}

/// Options for [`cdf_from_density_with`].
#[derive(Debug, Clone)]
pub struct CdfOptions<T> {
    /// Extra points that must be table nodes (singularities, the start point).
    pub breaks: Vec<T>,
    /// Target interpolation error.
    pub tolerance: T,
    pub initial_cells: usize,
    pub max_nodes: usize,
}

impl<T: Real> Default for CdfOptions<T> {
    fn default() -> Self {
        Self {
            breaks: Vec::new(),
            tolerance: lit(1e-6),
            initial_cells: 64,
            max_nodes: 200_000,
        }
    }
}

/// Tabulates the CDF of `density` on `[lower, upper]`.
pub fn cdf_from_density<T: Real, F: Fn(T) -> T>(
    density: F,
    lower: T,
    upper: T,
) -> Result<CdfTable<T>> {
    cdf_from_density_with(density, lower, upper, &CdfOptions::default())
}

pub fn cdf_from_density_with<T: Real, F: Fn(T) -> T>(
    density: F,
    lower: T,
    upper: T,
    opts: &CdfOptions<T>,
) -> Result<CdfTable<T>> {
    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
        return Err(Error::Domain(format!(
            "cdf table needs finite lower < upper, got [{lower}, {upper}]"
        )));
    }
    let mut seeds: Vec<T> = (0..=opts.initial_cells)
        .map(|i| lower + (upper - lower) * lit::<T>(i as f64 / opts.initial_cells as f64))
        .collect();
    seeds.extend(opts.breaks.iter().copied().filter(|&b| b > lower && b < upper));
    seeds.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    seeds.dedup();

    let settings = QuadSettings {
        abs_tol: opts.tolerance * lit(1e-3),
        rel_tol: lit(1e-10),
        max_intervals: 2000,
    };
    let mass_on = |a: T, b: T| -> Result<T> { Ok(integrate(&density, a, b, &settings)?.value) };
    let dens = |y: T| -> Result<T> {
        let v = density(y);
        if v < T::zero() || v.is_nan() {
            return Err(Error::Internal(format!(
                "negative or undefined density {} at {}",
                to_f64(v),
                to_f64(y)
            )));
        }
        Ok(v)
    };

    // Each stack entry is a cell [a, b] with its mass still to be checked.
    let mut nodes = vec![seeds[0]];
    let mut density_at = vec![dens(seeds[0])?];
    let mut cdf = vec![T::zero()];
    let mut hermite = Vec::new();
    let mut stack: Vec<(T, T, T)> = Vec::new();
    for w in seeds.windows(2).rev() {
        stack.push((w[0], w[1], mass_on(w[0], w[1])?));
    }
    let quarter = lit::<T>(0.25);
    while let Some((a, b, mass)) = stack.pop() {
        if mass < -opts.tolerance * lit(1e-3) {
            return Err(Error::Internal(format!(
                "negative mass {} on [{}, {}]",
                to_f64(mass),
                to_f64(a),
                to_f64(b)
            )));
        }
        let mass = mass.max(T::zero());
        let h = b - a;
        let d0 = *density_at.last().expect("nonempty");
        let d1 = dens(b)?;
        let use_hermite = hermite_ok(mass, h, d0, d1);
        // quadrature at the quarter points
        let q1 = a + quarter * h;
        let q2 = a + lit::<T>(0.5) * h;
        let q3 = a + lit::<T>(0.75) * h;
        let m1 = mass_on(a, q1)?;
        let m2 = m1 + mass_on(q1, q2)?;
        let m3 = m2 + mass_on(q2, q3)?;
        let probe = CdfTable {
            nodes: vec![a, b],
            cdf: vec![T::zero(), mass],
            density: vec![d0, d1],
            hermite: vec![use_hermite],
            total_mass: mass,
        };
        let worst = [(q1, m1), (q2, m2), (q3, m3)]
            .iter()
            .map(|&(y, m)| (probe.interpolate(0, y) - m).abs())
            .fold(T::zero(), T::max);
        let splittable = q2 > a && q2 < b;
        if worst > opts.tolerance * lit(0.5) && splittable {
            if nodes.len() + stack.len() > opts.max_nodes {
                return Err(Error::Numerical {
                    what: "cdf_from_density",
                    detail: format!("node budget {} exhausted", opts.max_nodes),
                });
            }
            let left = m2;
            let right = (mass - m2).max(T::zero());
            stack.push((q2, b, right));
            stack.push((a, q2, left));
            continue;
        }
        let last = *cdf.last().expect("nonempty");
        nodes.push(b);
        density_at.push(d1);
        cdf.push(last + mass);
        hermite.push(use_hermite);
    }
    if cdf.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Internal("tabulated cdf is not monotone".into()));
    }
    let total_mass = *cdf.last().expect("nonempty");
    Ok(CdfTable {
        nodes,
        cdf,
        density: density_at,
        hermite,
        total_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_density_gives_identity() {
        let t = cdf_from_density(|_| 1.0f64, 0.0, 1.0).unwrap();
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            assert!((t.eval(y) - y).abs() < 1e-12);
        }
        assert_eq!(t.eval(-1.0), 0.0);
        assert_relative_eq!(t.eval(2.0), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn normal_cdf_within_tolerance() {
        let phi = |y: f64| (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let t = cdf_from_density(phi, -10.0, 10.0).unwrap();
        t.certify_mass(1.0, 1e-9).unwrap();
        // erf-free oracle: fine trapezoid rule
        let mut acc = 0.0;
        let h = 1e-4;
        let mut y = -10.0;
        while y < 2.0 - 1e-12 {
            acc += 0.5 * h * (phi(y) + phi(y + h));
            y += h;
            let k = (y / 0.37).round();
            if (y - 0.37 * k).abs() < 0.5e-4 {
                assert!((t.eval(y) - acc).abs() < 1e-6, "y={y}");
            }
        }
        assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn singular_density_is_tabulated() {
        // density 0.5 y^{-1/2} on (0, 1], CDF sqrt(y)
        let t = cdf_from_density_with(
            |y: f64| if y > 0.0 { 0.5 / y.sqrt() } else { f64::INFINITY },
            0.0,
            1.0,
            &CdfOptions::default(),
        )
        .unwrap();
        for y in [1e-8, 1e-4, 0.01, 0.3, 0.9] {
            assert!((t.eval(y) - y.sqrt()).abs() < 1e-6, "y={y}");
        }
    }

    #[test]
    fn negative_density_is_rejected() {
        let err = cdf_from_density(|y: f64| y - 0.5, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Internal(_)));
    }
}
