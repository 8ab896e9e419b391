//! Execution policy: data-parallel kernels with a sequential fallback.
//!
//! With the `parallel` feature (default) heavy kernels run on rayon.
//! Parallelism can also be disabled at runtime with [`set_parallel`],
//! which the benchmark suite uses to compare both paths in one process.
//!
//! Reductions must not depend on the thread count, so they are chunked
//! with a fixed chunk size: partial sums are produced per chunk in index
//! order and combined sequentially. The result is bit-identical for any
//! number of workers, including the sequential fallback.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(cfg!(feature = "parallel"));

/// Chunk length used by all deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

/// Enable or disable data-parallel execution at runtime. A no-op build
/// without the `parallel` feature always runs sequentially.
pub fn set_parallel(enabled: bool) {
    PARALLEL.store(enabled && cfg!(feature = "parallel"), Ordering::Relaxed);
}

pub fn parallel_enabled() -> bool {
    PARALLEL.load(Ordering::Relaxed)
}

/// Map disjoint mutable slabs of `data` of length `slab`, in parallel when
/// enabled. `f` receives the slab index and the slab.
pub fn for_each_slab_mut<T: Send, F>(data: &mut [T], slab: usize, f: F)
where
    F: Fn(usize, &mut [T]) + Sync,
{
    debug_assert_eq!(data.len() % slab, 0);
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        data.par_chunks_mut(slab)
            .enumerate()
            .for_each(|(i, s)| f(i, s));
        return;
    }
    for (i, s) in data.chunks_mut(slab).enumerate() {
        f(i, s);
    }
}

/// Deterministic sum of `f(i, chunk)` over fixed-size chunks of `data`.
/// Chunk boundaries are fixed by [`REDUCE_CHUNK`], partials are combined
/// in index order, so the value is independent of the worker count.
pub fn reduce_chunks<T: Sync, F>(data: &[T], f: F) -> f64
where
    F: Fn(usize, &[T]) -> f64 + Sync,
{
    let partials: Vec<f64>;
    #[cfg(feature = "parallel")]
    {
        if parallel_enabled() {
            use rayon::prelude::*;
            partials = data
                .par_chunks(REDUCE_CHUNK)
                .enumerate()
                .map(|(i, c)| f(i, c))
                .collect();
        } else {
            partials = data
                .chunks(REDUCE_CHUNK)
                .enumerate()
                .map(|(i, c)| f(i, c))
                .collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        partials = data
            .chunks(REDUCE_CHUNK)
            .enumerate()
            .map(|(i, c)| f(i, c))
            .collect();
    }
    partials.iter().sum()
}

/// Deterministic complex-valued chunked reduction.
pub fn reduce_chunks_c<T: Sync, F>(data: &[T], f: F) -> num_complex::Complex64
where
    F: Fn(usize, &[T]) -> num_complex::Complex64 + Sync,
{
    let re = reduce_chunks(data, |i, c| f(i, c).re);
    let im = reduce_chunks(data, |i, c| f(i, c).im);
    num_complex::Complex64::new(re, im)
}

/// Map fixed index ranges 0..n in chunks, returning the per-chunk
/// results in index order regardless of the worker count. Used by the
/// Monte Carlo accumulators.
pub fn map_index_chunks<A: Send, F>(n: usize, chunk: usize, f: F) -> Vec<A>
where
    F: Fn(std::ops::Range<usize>) -> A + Sync,
{
    let ranges: Vec<std::ops::Range<usize>> =
        (0..n).step_by(chunk).map(|s| s..(s + chunk).min(n)).collect();
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return ranges.into_par_iter().map(f).collect();
    }
    ranges.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_independent_of_mode() {
        let v: Vec<f64> = (0..100_000).map(|i| (i as f64).sin()).collect();
        set_parallel(true);
        let a = reduce_chunks(&v, |_, c| c.iter().sum());
        set_parallel(false);
        let b = reduce_chunks(&v, |_, c| c.iter().sum());
        set_parallel(true);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
