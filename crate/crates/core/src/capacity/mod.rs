//! Monte Carlo estimation of the generalized half-plane capacity
//!
//! ```text
//! M_α(A) = lim_{s→∞} s · E[(Im B^{is}_τ)^α]
//! ```
//!
//! where `τ` is the first hitting time of `A ∪ ℝ`. Walks start on the
//! semicircle of radius `R₀` enclosing `A` with angular density `sin θ / 2`,
//! which is the hitting law of that semicircle from `i∞`. Paths are simulated
//! by walk-on-spheres (exact Brownian exit points of empty disks) and, once
//! outside the semicircle, returned to it or absorbed on `ℝ` with the exact
//! exterior law via `z ↦ z + R₀²/z`.

mod engine;
mod hull;
mod tiling;

pub use engine::{
    batch_count, batch_sums, check_alpha, estimate, estimate_from_sums, simulate_walk, walk_batch, MomentSums,
    WalkParams, BATCH_SIZE, CAPACITY_CALIBRATION, DEFAULT_SHELL,
};
pub use hull::{Hull, HullShape, Shape, Vec2, HOLE_RESOLUTION};
pub use tiling::{tiling_of, HyperbolicSquare, Tiling, DEFAULT_MIN_LEVEL};

/// A capacity estimate with its Monte Carlo standard error.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CapacityEstimate {
    pub alpha: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub walks: u64,
    /// Absorption shell width used by walk-on-spheres.
    pub shell: f64,
    pub start_radius: f64,
}
