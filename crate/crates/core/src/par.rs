//! Thin switch between rayon and plain iterators.
//!
//! Every helper here produces the same result for any thread count: work is
//! split by output index, and reductions use a total order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fill `out` row by row; `f(i, row)` writes row `i` of width `width`.
pub(crate) fn fill_rows<T, F>(out: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// `(0..n).map(f).collect()`, in index order.
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

/// Scans below this many candidates stay on the calling thread.
#[cfg(feature = "parallel")]
const PAR_SCAN_MIN: usize = 4096;

/// Index into `items` minimizing `(key(item), tie(item))` lexicographically.
/// Keys must not be NaN.
pub(crate) fn argmin_by<T, K, F>(items: &[T], key: F) -> Option<usize>
where
    T: Sync,
    K: PartialOrd + Copy + Send,
    F: Fn(&T) -> (K, u32) + Send + Sync,
{
    let better = |a: (usize, (K, u32)), b: (usize, (K, u32))| {
        let ((ka, ta), (kb, tb)) = (a.1, b.1);
        if kb < ka || (kb == ka && tb < ta) {
            b
        } else {
            a
        }
    };
    #[cfg(feature = "parallel")]
    if items.len() >= PAR_SCAN_MIN {
        return items
            .par_iter()
            .enumerate()
            .map(|(i, it)| (i, key(it)))
            .reduce_with(better)
            .map(|(i, _)| i);
    }
    items
        .iter()
        .enumerate()
        .map(|(i, it)| (i, key(it)))
        .reduce(better)
        .map(|(i, _)| i)
}
