//! Order-preserving parallel maps over pixel indices.
//!
//! Results are always collected by index and reduced sequentially, so the
//! floating point outcome does not depend on the thread count.

use rayon::prelude::*;

use crate::error::Result;

const PARALLEL_MIN: usize = 256;

pub fn map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if n < PARALLEL_MIN || rayon::current_num_threads() == 1 {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(&f).collect()
    }
}

/// Sequential sum of per-index values computed in parallel.
pub fn sum_indexed<F>(n: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    Ok(map_indexed(n, f)?.into_iter().sum())
}
