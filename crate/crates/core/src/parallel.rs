//! Batch parallelism with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`par_map`] fans out over the
//! rayon global pool; without it the same call is a plain sequential map.
//! [`seq_map`] is always sequential regardless of features, so benchmarks can
//! compare both paths in a single build.
//!
//! Output order always matches input order, so callers that write results to
//! disk stay deterministic under any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, in parallel when the `parallel` feature is enabled.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential map with the same shape as [`par_map`].
pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Size the global worker pool. Must be called before the first parallel
/// batch; later calls fail harmlessly.
///
/// Returns `Err` with an explanatory message when the pool is already built
/// or the crate was compiled without the `parallel` feature.
pub fn set_jobs(jobs: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        Err("compiled without the `parallel` feature; running sequentially".to_string())
    }
}

/// Number of worker threads batch maps will use.
pub fn current_jobs() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_order() {
        let items: Vec<u64> = (0..503).collect();
        let out = par_map(&items, |&x| x * x);
        let expected = seq_map(&items, |&x| x * x);
        assert_eq!(out, expected);
    }
}
