//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run the same per-row closures sequentially. Every reduction is
//! arranged so that the result does not depend on which path or how many
//! threads were used: rows are reduced independently and the row results are
//! combined in a fixed order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f(row_index, row)` to each consecutive `row_len` chunk of `data`.
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Like [`for_each_row`] but hands each worker a scratch value built by `init`.
pub fn for_each_row_with<T, S, I, F>(data: &mut [T], row_len: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each_init(&init, |s, (i, row)| f(s, i, row));
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        data.chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(&mut s, i, row));
    }
}

/// Maps every row of `data` to a value, preserving row order.
pub fn map_rows<T, R, F>(data: &[T], row_len: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return data
        .par_chunks(row_len)
        .enumerate()
        .map(|(i, row)| f(i, row))
        .collect();
    #[cfg(not(feature = "parallel"))]
    data.chunks(row_len)
        .enumerate()
        .map(|(i, row)| f(i, row))
        .collect()
}

/// Evaluates `f(i)` for `i in 0..n`, preserving index order.
///
/// Used for Monte-Carlo sample loops; each sample derives its own seed from
/// its index so the output is independent of scheduling.
pub fn map_indices<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    (0..n).map(f).collect()
}

/// Zips two equal-length slices element-wise into `out`.
pub fn zip_apply<A, B, F>(out: &mut [A], other: &[B], f: F)
where
    A: Send,
    B: Sync,
    F: Fn(&mut A, &B) + Sync + Send,
{
    debug_assert_eq!(out.len(), other.len());
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .zip(other.par_iter())
        .for_each(|(a, b)| f(a, b));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().zip(other).for_each(|(a, b)| f(a, b));
}

/// Pairwise (cascade) summation; the rounding error grows as O(log n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Deterministic sum of `g(x)` over a row-major array.
pub fn sum_rows_by<T, G>(data: &[T], row_len: usize, g: G) -> f64
where
    T: Sync,
    G: Fn(&T) -> f64 + Sync + Send,
{
    let rows = map_rows(data, row_len, |_, row| {
        let vals: Vec<f64> = row.iter().map(&g).collect();
        pairwise_sum(&vals)
    });
    pairwise_sum(&rows)
}

/// Deterministic maximum of `g(x)` over a row-major array.
pub fn max_rows_by<T, G>(data: &[T], row_len: usize, g: G) -> f64
where
    T: Sync,
    G: Fn(&T) -> f64 + Sync + Send,
{
    map_rows(data, row_len, |_, row| {
        row.iter().map(&g).fold(f64::NEG_INFINITY, f64::max)
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

/// Sizes the global worker pool; a no-op in sequential builds. Fails if the
/// pool was already initialized.
pub fn set_threads(n: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    return rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string());
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}
