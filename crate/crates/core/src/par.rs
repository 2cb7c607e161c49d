//! Replication-level parallelism.
//!
//! Every replication draws from its own RNG substream and results are
//! collected in replication order, so output never depends on how the work
//! was scheduled. Without the `parallel` feature everything runs on the
//! calling thread.

/// Runs `f(0), ..., f(count - 1)` on the calling thread.
pub fn map_reps_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_reps_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

/// Parallel when the feature is enabled, sequential otherwise.
pub fn map_reps<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_reps_parallel(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_reps_sequential(count, f)
    }
}

/// Runs `op` with at most `threads` workers (`None` keeps the default pool).
pub fn with_threads<R: Send>(threads: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(k) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            return pool.install(op);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    op()
}
