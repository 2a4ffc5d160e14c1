//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans out
//! over the current rayon pool. Without it every call runs sequentially. Both
//! paths return results in index order, so reductions are deterministic.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluates `f(0..count)` and collects the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(exec: Execution, count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match exec {
        Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
        Execution::Sequential => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(_exec: Execution, count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Counts the indices in `0..count` for which `pred` holds.
#[cfg(feature = "parallel")]
pub fn count_where<F>(exec: Execution, count: u64, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    use rayon::prelude::*;
    match exec {
        Execution::Parallel => (0..count).into_par_iter().filter(|&i| pred(i)).count() as u64,
        Execution::Sequential => (0..count).filter(|&i| pred(i)).count() as u64,
    }
}

#[cfg(not(feature = "parallel"))]
pub fn count_where<F>(_exec: Execution, count: u64, pred: F) -> u64
where
    F: Fn(u64) -> bool,
{
    (0..count).filter(|&i| pred(i)).count() as u64
}
