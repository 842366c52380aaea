//! Experiments, text formats and the command-line runner built on
//! [`loopsoup_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod io;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
pub use loopsoup_core as core;
