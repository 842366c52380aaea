//! Random-walk loop soups on the square lattice and the geometry built on top
//! of them: loop clusters, fillings, outermost clusters and their traced outer
//! boundaries. Also carries the closed-form κ ↔ c layer, Mandelbrot fractal
//! percolation, and a walk-on-spheres estimator for the generalized half-plane
//! capacity `M_α`.
//!
//! Everything here is pure computation over `alloc`; file formats, the CLI and
//! the parallel experiment drivers live in the `loopsoup` crate.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod capacity;
pub mod cluster;
pub mod contour;
pub mod dimension;
mod error;
pub mod fill;
pub mod fit;
pub mod formulas;
pub mod fractal;
pub mod grid;
pub mod lattice;
pub mod rng;
pub mod soup;
pub mod walk;

pub use cluster::{build_clusters, BBox, Cluster, ClusterSet};
pub use contour::{trace_outer_boundary, BoundaryLoop};
pub use error::{Error, Result};
pub use fill::{fill, outermost, FilledCluster};
pub use lattice::{Dir, LatticeDomain, Point};
pub use soup::{restrict, sample_layered, sample_soup, superpose, LayeredSoup, LoopSoup};
pub use walk::{build_mass_table, return_probability, sample_bridge, Loop, LoopMassTable};
