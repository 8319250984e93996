//! Thin dispatch layer between rayon and sequential execution.
//!
//! Every data-parallel loop in the crate goes through one of these helpers
//! so that the `parallel` feature flag is the only place the two code paths
//! diverge. The helpers are used exclusively for *maps* over disjoint data;
//! reductions that feed reported numbers (norms, means, cumulative sums)
//! stay sequential everywhere so that results are bit-identical regardless
//! of thread count or feature selection.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum elements per rayon work item; below this the scheduling overhead
/// dominates the arithmetic.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 1 << 12;

/// Build a vector by evaluating `f` at every index in `0..len`.
pub fn map_index<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().with_min_len(MIN_CHUNK).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Apply `f` to every element of `data`, receiving the element index.
pub fn for_each_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_iter_mut().with_min_len(MIN_CHUNK).enumerate().for_each(|(i, x)| f(i, x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}

/// Apply `f` to every chunk of exactly `chunk_len` elements. The closure
/// receives the chunk's starting offset in `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    debug_assert_eq!(data.len() % chunk_len, 0);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk_len, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk_len, c));
    }
}

/// Map `f` over items of an indexed collection, collecting into a `Vec`
/// in index order regardless of execution order.
pub fn map_items<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
