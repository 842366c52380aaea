//! Experiment drivers. Replicates run in parallel on the current rayon pool;
//! every replicate draws from its own derived seed and results are collected
//! in replicate order, so outputs do not depend on the thread count.

pub mod annulus;
pub mod capacity;
pub mod fractal;
pub mod laws;
pub mod percolation;

use rayon::prelude::*;

/// `f(0), …, f(n-1)` evaluated in parallel, in index order.
pub(crate) fn par_map<T: Send>(n: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}
