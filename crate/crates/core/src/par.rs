//! Data-parallel helpers for campaign inner loops.
//!
//! With the `parallel` feature (default) [`map_collect`] fans work out over
//! the rayon pool; without it the same call runs on the current thread.
//! Both paths preserve input order, and every work item seeds its own RNG
//! stream, so the output is identical either way. [`map_collect_seq`] is
//! always sequential and exists as the comparison baseline for benches and
//! determinism tests.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items` and collects the results in input order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items` and collects the results in input order.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Sequential counterpart of [`map_collect`], available regardless of the
/// `parallel` feature.
pub fn map_collect_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
