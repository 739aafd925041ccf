use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{PathGrid, SimConfig};

/// Evaluates `f(0..paths)` in parallel and returns the results in index order.
pub fn run_indexed<T, R, F>(cfg: &SimConfig<T>, f: F) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    F: Fn(u64) -> Result<R> + Sync + Send,
{
    cfg.validate()?;
    let n = cfg.paths as u64;
    let work = || (0..n).into_par_iter().map(&f).collect::<Result<Vec<R>>>();
    match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Generates each path and reduces it to a summary without keeping the ensemble.
pub fn map_paths<T, R, G, F>(cfg: &SimConfig<T>, generate: G, summarize: F) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    G: Fn(u64) -> Result<PathGrid<T>> + Sync + Send,
    F: Fn(&PathGrid<T>) -> R + Sync + Send,
{
    run_indexed(cfg, |i| generate(i).map(|p| summarize(&p)))
}

/// Terminal value of every path.
pub fn terminal_values<T, G>(cfg: &SimConfig<T>, generate: G) -> Result<Vec<T>>
where
    T: Real,
    G: Fn(u64) -> Result<PathGrid<T>> + Sync + Send,
{
    map_paths(cfg, generate, |p| p.terminal())
}
