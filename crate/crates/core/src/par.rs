//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run on the calling thread. Reductions are split into fixed-size chunks
//! whose partial results are combined in index order, so floating-point
//! results do not depend on the number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for order-stable reductions.
pub(crate) const REDUCE_CHUNK: usize = 1 << 12;

/// Evaluates `f(0..n)` and collects the results in index order.
pub(crate) fn collect_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps a slice, preserving order.
pub(crate) fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// Applies `f(index, &mut item)` to every element.
pub(crate) fn for_each_indexed_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, x)| f(i, x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}

/// Sums `f(0..n)` in fixed chunks; the result is bit-identical for any
/// thread count.
pub(crate) fn chunked_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partial = collect_indexed(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partial.into_iter().sum()
}

/// Vector-valued reduction: `f(i, acc)` adds item `i` into a `len`-long
/// accumulator. Items are grouped in chunks of `chunk` and the chunk partials
/// added in index order, so the result is independent of the thread count.
pub(crate) fn chunked_vec_sum<T, F>(n: usize, len: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Copy + Default + std::ops::AddAssign + Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    let partial = collect_indexed(n.div_ceil(chunk), |c| {
        let mut acc = vec![T::default(); len];
        for i in c * chunk..((c + 1) * chunk).min(n) {
            f(i, &mut acc);
        }
        acc
    });
    let mut total = vec![T::default(); len];
    for part in partial {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}
