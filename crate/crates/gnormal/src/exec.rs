//! Parallel/sequential execution of per-node maps.
//!
//! Every kernel maps a pure function over node indices of one level, so the
//! rayon and sequential paths produce bit-identical output; collection order
//! is the index order in both cases. Short rows are not worth splitting.

#[cfg(feature = "parallel")]
const MIN_SPLIT: usize = 1024;

#[cfg(feature = "parallel")]
pub(crate) fn map_nodes<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    if len < MIN_SPLIT {
        return (0..len).map(f).collect();
    }
    (0..len).into_par_iter().with_min_len(MIN_SPLIT).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_nodes<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64,
{
    (0..len).map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_nodes_pair<F>(len: usize, f: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(usize) -> (f64, f64) + Sync + Send,
{
    use rayon::prelude::*;
    if len < MIN_SPLIT {
        return (0..len).map(f).unzip();
    }
    (0..len)
        .into_par_iter()
        .with_min_len(MIN_SPLIT)
        .map(f)
        .unzip()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_nodes_pair<F>(len: usize, f: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(usize) -> (f64, f64),
{
    (0..len).map(f).unzip()
}

/// Maps path indices to terminal states; used by the Monte Carlo sampler.
#[cfg(feature = "parallel")]
pub(crate) fn map_paths<F>(count: usize, f: F) -> Vec<i32>
where
    F: Fn(usize) -> i32 + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().with_min_len(256).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_paths<F>(count: usize, f: F) -> Vec<i32>
where
    F: Fn(usize) -> i32,
{
    (0..count).map(f).collect()
}
