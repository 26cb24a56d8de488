//! Thin parallelism layer.
//!
//! Every data-parallel loop in the crate goes through [`map_indexed`], which
//! dispatches to rayon when the `parallel` feature is enabled and to a plain
//! sequential loop otherwise. The sequential lane [`map_indexed_seq`] is
//! always compiled so the two can be benchmarked against each other.
//!
//! Both lanes produce results in index order, and all floating-point
//! reductions downstream fold the returned vectors sequentially, so worker
//! count never changes output bytes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential map over `0..n`.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).map(f).collect()
}

/// Data-parallel map over `0..n`, order-preserving.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = library default).
///
/// With the `parallel` feature disabled the worker count is ignored and `f`
/// runs on the calling thread; the external interface stays the same.
#[cfg(feature = "parallel")]
pub fn with_workers<T, F>(workers: usize, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool construction");
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T, F>(_workers: usize, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    f()
}
