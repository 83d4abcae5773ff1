//! Replicate execution helpers.
//!
//! `map_collect` evaluates an indexed job for `0..count` and returns results
//! in index order. With the `parallel` feature it fans out over a rayon pool
//! (`workers == 0` uses the global pool, `workers == 1` stays on the calling
//! thread); without the feature it is a plain loop. Because every job is
//! keyed by its index and results are collected in order, both paths produce
//! identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_collect<T, F>(count: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            return pool_run(workers, || (0..count).into_par_iter().map(&f).collect());
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
fn pool_run<R, J>(workers: usize, job: J) -> R
where
    R: Send,
    J: FnOnce() -> R + Send,
{
    if workers == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("building a rayon pool")
            .install(job)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        for workers in [0, 1, 3] {
            let out = map_collect(100, workers, |i| i * i);
            assert_eq!(out.len(), 100);
            assert!(out.iter().enumerate().all(|(i, &v)| v == (i as u64).pow(2)));
        }
    }
}
