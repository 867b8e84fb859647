//! Data-parallel map helpers.
//!
//! With the `parallel` feature (default) [`map`] fans out over rayon;
//! without it the same call runs sequentially. Output order equals input
//! order either way, and callers reduce in that order, so a run produces
//! bit-identical results no matter how many workers are active.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Size the global worker pool. `jobs = 1` keeps work on one thread.
/// Only the first call has any effect; later calls are ignored.
pub fn set_jobs(jobs: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        if jobs > 1 {
            log::warn!("built without the `parallel` feature; running on one thread");
        }
    }
}

/// Map `f` over `items`, preserving order. Parallel when the `parallel`
/// feature is enabled, sequential otherwise.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map `f` over `items`, preserving order. Parallel when the `parallel`
/// feature is enabled, sequential otherwise.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    map_seq(items, f)
}

/// Sequential map, always available. The benches compare this against
/// [`map`] on the same workloads.
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
