//! Path simulation: squared-Bessel Euler, random time change of Brownian motion,
//! direct Euler of the drift SDEs, and the heterogeneous-diffusion generator.
//!
//! Every path is a pure function of `(parameters, config, path index)`. Random
//! numbers come from per-path ChaCha substreams, so ensembles are bit-identical
//! for any number of worker threads.

mod besq;
mod direct;
mod ensemble;
mod het;
mod rng;
mod timechange;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{from_usize, lit, Real};

pub use besq::{besq_path, bessel_from_besq_path, simulate_besq, simulate_bessel_from_besq};
pub use direct::{sde_direct_path, simulate_sde_direct};
pub use ensemble::{map_paths, run_indexed, terminal_values};
pub use het::{het_direct_path, het_path, simulate_het, simulate_het_direct};
pub use timechange::{
    bessel_time_changed_path, build_clock, killed_time_changed_path, simulate_bessel_time_changed,
    simulate_time_changed, time_changed_path, ClockTable,
};

/// A sampled trajectory on a fixed time grid.
///
/// `band_visits[k]` records whether the path entered the zero band during
/// `(times[k], times[k + 1]]`, including visits between grid points detected by
/// the simulator. It is what makes sign changes auditable.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid<T> {
    times: Arc<[T]>,
    values: Vec<T>,
    absorbed_at: Option<usize>,
    band_visits: Vec<bool>,
}

impl<T: Real> PathGrid<T> {
    pub fn new(
        times: Arc<[T]>,
        values: Vec<T>,
        absorbed_at: Option<usize>,
        band_visits: Vec<bool>,
    ) -> Result<Self> {
        let path = Self {
            times,
            values,
            absorbed_at,
            band_visits,
        };
        path.check_invariants()?;
        Ok(path)
    }

    /// Path without intra-step information: band visits are read off the grid values.
    pub fn from_values(times: Arc<[T]>, values: Vec<T>, zero_band: T) -> Result<Self> {
        let band_visits = values.iter().skip(1).map(|v| v.abs() <= zero_band).collect();
        Self::new(times, values, None, band_visits)
    }

    pub(crate) fn assemble(
        times: Arc<[T]>,
        values: Vec<T>,
        absorbed_at: Option<usize>,
        band_visits: Vec<bool>,
    ) -> Self {
        debug_assert_eq!(times.len(), values.len());
        Self {
            times,
            values,
            absorbed_at,
            band_visits,
        }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn shared_times(&self) -> Arc<[T]> {
        Arc::clone(&self.times)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn absorbed_at(&self) -> Option<usize> {
        self.absorbed_at
    }

    pub fn band_visits(&self) -> &[bool] {
        &self.band_visits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn terminal(&self) -> T {
        *self.values.last().expect("path has at least two points")
    }

    /// Applies `f` pointwise, keeping times, absorption and band visits.
    /// `f` must fix zero for the absorption invariant to survive.
    pub fn map_values(self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.into_iter().map(f).collect(),
            ..self
        }
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.times.len();
        if n < 2 || self.values.len() != n || self.band_visits.len() != n - 1 {
            return Err(Error::Internal(format!(
                "path lengths disagree: {} times, {} values, {} band flags",
                n,
                self.values.len(),
                self.band_visits.len()
            )));
        }
        if self.times[0] != T::zero() || self.times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Internal("time grid must start at 0 and increase".into()));
        }
        if let Some(k) = self.absorbed_at {
            if k >= n {
                return Err(Error::Internal(format!("absorbed_at {k} outside the grid")));
            }
            if let Some(j) = (k..n).find(|&j| self.values[j] != T::zero()) {
                return Err(Error::Internal(format!(
                    "value {} at index {j} after absorption at {k}",
                    self.values[j]
                )));
            }
        }
        Ok(())
    }

    /// True if every sign change is preceded by a zero-band visit since the last
    /// nonzero sample.
    pub fn sign_changes_are_legal(&self) -> bool {
        let mut last = T::zero();
        let mut visited = false;
        for (k, &v) in self.values.iter().enumerate() {
            if k > 0 && self.band_visits[k - 1] {
                visited = true;
            }
            if v == T::zero() {
                visited = true;
                continue;
            }
            if last != T::zero() && v.signum() != last.signum() && !visited {
                return false;
            }
            last = v;
            visited = false;
        }
        true
    }

    /// Number of sign changes between consecutive nonzero samples.
    pub fn sign_changes(&self) -> usize {
        let mut last = T::zero();
        let mut count = 0;
        for &v in &self.values {
            if v == T::zero() {
                continue;
            }
            if last != T::zero() && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }
}

/// Discretization and ensemble settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub horizon: T,
    pub steps: usize,
    pub paths: usize,
    pub master_seed: u64,
    /// Numerical zero threshold; `None` means `1e-9 * max(1, |start|)`.
    pub zero_band: Option<T>,
    /// Brownian steps per output step in the time-change construction.
    pub substeps: usize,
    /// Clock extension budget, in blocks of `steps * substeps` Brownian steps.
    pub extension_blocks: usize,
    /// Worker cap; `None` uses the global pool. Never changes results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl<T: Real> SimConfig<T> {
    pub fn new(horizon: T, steps: usize, paths: usize, master_seed: u64) -> Result<Self> {
        let cfg = Self {
            horizon,
            steps,
            paths,
            master_seed,
            zero_band: None,
            substeps: 4,
            extension_blocks: 64,
            threads: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return domain(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.steps < 2 {
            return domain(format!("need at least 2 steps, got {}", self.steps));
        }
        if self.paths < 1 {
            return domain("need at least one path");
        }
        if self.substeps < 1 || self.extension_blocks < 1 {
            return domain("substeps and extension_blocks must be positive");
        }
        if let Some(eps) = self.zero_band {
            if !(eps > T::zero()) {
                return domain(format!("zero band must be positive, got {eps}"));
            }
        }
        if self.threads == Some(0) {
            return domain("thread cap must be positive");
        }
        Ok(())
    }

    pub fn with_paths(mut self, paths: usize) -> Self {
        self.paths = paths;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_zero_band(mut self, eps: T) -> Self {
        self.zero_band = Some(eps);
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn dt(&self) -> T {
        self.horizon / from_usize(self.steps)
    }

    /// Uniform grid `k T / n`, `k = 0..=n`, with the last point exactly `T`.
    pub fn time_grid(&self) -> Arc<[T]> {
        let n = from_usize::<T>(self.steps);
        (0..=self.steps)
            .map(|k| self.horizon * from_usize(k) / n)
            .collect()
    }

    /// Zero band for a path whose natural scale is `scale`.
    pub fn eps0(&self, scale: T) -> T {
        self.zero_band
            .unwrap_or_else(|| lit::<T>(1e-9) * scale.abs().max(T::one()))
    }
}
