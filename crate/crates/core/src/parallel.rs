//! Ordered map over independent work items.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs the items on the
//! rayon pool. Otherwise they run in a plain loop.
//! Results always come back in index order, so any reduction done by the
//! caller afterwards is independent of the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Runs on the rayon pool; same as `Sequential` without the feature.
    #[default]
    Parallel,
}

/// Evaluate `f(0), ..., f(count - 1)` and return the results in that order.
pub fn map_indexed<T, F>(exec: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
        _ => (0..count).map(f).collect(),
    }
}
