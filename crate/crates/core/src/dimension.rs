//! Box-counting dimension of lattice point sets.

use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::lattice::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct BoxCount {
    pub estimate: f64,
    pub r2: f64,
    pub slope_stderr: f64,
    /// `(box size, occupied boxes)` per scale.
    pub counts: Vec<(u32, usize)>,
}

/// Slope of `log N(ε)` against `log(1/ε)` over the given box sizes.
pub fn box_counting_dimension(points: &[Point], scales: &[u32]) -> Result<BoxCount> {
    if scales.len() < 3 || scales.iter().any(|&s| s < 2) {
        return Err(Error::TooFewScales(scales.len()));
    }
    let counts: Vec<(u32, usize)> = scales
        .iter()
        .map(|&eps| {
            let e = eps as i32;
            let boxes: HashSet<(i32, i32)> = points.iter().map(|p| (p.x.div_euclid(e), p.y.div_euclid(e))).collect();
            (eps, boxes.len())
        })
        .collect();
    let samples: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(_, n)| *n > 0)
        .map(|&(eps, n)| (-libm::log(eps as f64), libm::log(n as f64)))
        .collect();
    let fit = least_squares(&samples).ok_or(Error::TooFewScales(samples.len()))?;
    Ok(BoxCount {
        estimate: fit.slope,
        r2: fit.r2,
        slope_stderr: fit.slope_stderr,
        counts,
    })
}

/// Powers of two `2, 4, ..., 2^k` with `2^k <= max`.
pub fn dyadic_scales(max: u32) -> Vec<u32> {
    let mut v = Vec::new();
    let mut s = 2u32;
    while s <= max {
        v.push(s);
        s *= 2;
    }
    v
}
