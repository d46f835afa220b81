//! Data-parallel map helper with a sequential fallback.
//!
//! Every parallel site in the crate goes through [`map_indexed`]: each output
//! slot is produced by exactly one task and any floating-point accumulation
//! happens *inside* a task in a fixed order. Results are therefore bitwise
//! identical across thread counts and between the `parallel` and sequential
//! builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Sequential fallback: same contract, same output.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
