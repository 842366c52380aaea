//! Mandelbrot fractal percolation on the unit square, plus the map sending a
//! loop to the dyadic square of twice its scale that contains it.
//!
//! Level `k ≥ 1` splits `[0,1]²` into `4^k` dyadic squares. Square `(k, i, j)`
//! is kept when its own uniform `U(k, i, j)` is below `p` and its parent is
//! kept. The uniforms are pure functions of `(seed, k, i, j)`, so samples at
//! different `p` with one seed are coupled monotonically, and the lazy
//! survival search sees the same squares as a materialized sample.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::hash_uniform;

fn check_p(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        })
    }
}

#[inline]
fn square_uniform(seed: u64, level: u32, i: u64, j: u64) -> f64 {
    hash_uniform(seed, &[level as u64, i, j])
}

/// Materialized fractal percolation down to `depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractalPercolation {
    p: f64,
    depth: u32,
    seed: u64,
    /// `levels[k-1]` is the `2^k × 2^k` row-major retention mask at level `k`.
    levels: Vec<Vec<bool>>,
}

/// Largest depth that [`sample_fractal`] will materialize (`4^13` cells).
pub const MAX_MATERIALIZED_DEPTH: u32 = 13;

pub fn sample_fractal(p: f64, depth: u32, seed: u64) -> Result<FractalPercolation> {
    let p = check_p(p)?;
    if depth == 0 || depth > MAX_MATERIALIZED_DEPTH {
        return Err(Error::OutOfRange {
            name: "depth",
            value: depth as f64,
            range: "[1, 13]",
        });
    }
    let mut levels: Vec<Vec<bool>> = Vec::with_capacity(depth as usize);
    for k in 1..=depth {
        let side = 1usize << k;
        let mut mask = vec![false; side * side];
        for j in 0..side {
            for i in 0..side {
                let parent_kept = k == 1 || levels[k as usize - 2][(j / 2) * (side / 2) + i / 2];
                mask[j * side + i] = parent_kept && square_uniform(seed, k, i as u64, j as u64) < p;
            }
        }
        levels.push(mask);
    }
    Ok(FractalPercolation { p, depth, seed, levels })
}

impl FractalPercolation {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Level 0 is the whole square and always kept.
    pub fn retained(&self, level: u32, i: usize, j: usize) -> bool {
        if level == 0 {
            return true;
        }
        let side = 1usize << level;
        level <= self.depth && i < side && j < side && self.levels[level as usize - 1][j * side + i]
    }

    pub fn retained_count(&self, level: u32) -> usize {
        if level == 0 {
            return 1;
        }
        self.levels[level as usize - 1].iter().filter(|&&b| b).count()
    }

    /// Row-major mask at `depth`, row 0 at the bottom.
    pub fn mask(&self) -> &[bool] {
        &self.levels[self.depth as usize - 1]
    }

    pub fn side(&self) -> usize {
        1 << self.depth
    }

    /// Whether the union of kept depth-level closed squares connects the
    /// left and right sides. Squares sharing an edge or a corner touch.
    pub fn crossing_exists(&self) -> bool {
        let side = self.side();
        let mask = self.mask();
        let mut seen = vec![false; side * side];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for j in 0..side {
            if mask[j * side] {
                seen[j * side] = true;
                stack.push((0, j));
            }
        }
        while let Some((i, j)) = stack.pop() {
            if i == side - 1 {
                return true;
            }
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= side as i64 || nj >= side as i64 {
                        continue;
                    }
                    let idx = nj as usize * side + ni as usize;
                    if mask[idx] && !seen[idx] {
                        seen[idx] = true;
                        stack.push((ni as usize, nj as usize));
                    }
                }
            }
        }
        false
    }
}

/// Whether some square at `depth` survives, found by depth-first search
/// over the same uniforms as [`sample_fractal`] without materializing levels.
pub fn survives_to_depth(p: f64, depth: u32, seed: u64) -> Result<bool> {
    let p = check_p(p)?;
    fn dfs(p: f64, seed: u64, level: u32, i: u64, j: u64, depth: u32) -> bool {
        if level == depth {
            return true;
        }
        let k = level + 1;
        (0..4u64).any(|c| {
            let (ci, cj) = (2 * i + (c & 1), 2 * j + (c >> 1));
            square_uniform(seed, k, ci, cj) < p && dfs(p, seed, k, ci, cj, depth)
        })
    }
    Ok(dfs(p, seed, 0, 0, 0, depth))
}

/// Probability that the kept set is eventually empty: the smallest fixed point
/// in `[0, 1]` of `f(q) = (1 − p + p q)⁴`.
///
/// With mean offspring `4p ≤ 1` that fixed point is 1. Otherwise `f` is
/// iterated from 0 until steps fall below `1e-12`, then polished with Newton
/// steps, which converge monotonically from below on the convex `f`.
pub fn extinction_probability(p: f64) -> Result<f64> {
    let p = check_p(p)?;
    if 4.0 * p <= 1.0 {
        return Ok(1.0);
    }
    let f = |q: f64| libm::pow(1.0 - p + p * q, 4.0);
    let df = |q: f64| 4.0 * p * libm::pow(1.0 - p + p * q, 3.0);
    let mut q = 0.0f64;
    for _ in 0..1_000_000 {
        let next = f(q);
        let done = (next - q).abs() < 1e-12;
        q = next;
        if done {
            break;
        }
    }
    for _ in 0..50 {
        let g = f(q) - q;
        let dg = df(q) - 1.0;
        if dg >= 0.0 || g.abs() < 1e-16 {
            break;
        }
        let next = q - g / dg;
        if !(next > q && next < 1.0) {
            break;
        }
        q = next;
    }
    Ok(q)
}

/// Dyadic square `[j 2^-n, (j+2) 2^-n] × [j' 2^-n, (j'+2) 2^-n]`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicSquare {
    pub level: u32,
    pub j: u64,
    pub jp: u64,
}

impl DyadicSquare {
    pub fn side(&self) -> f64 {
        2.0 * libm::ldexp(1.0, -(self.level as i32))
    }

    pub fn corner(&self) -> (f64, f64) {
        let unit = libm::ldexp(1.0, -(self.level as i32));
        (self.j as f64 * unit, self.jp as f64 * unit)
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        let (x0, y0) = self.corner();
        let s = self.side();
        x >= x0 && x <= x0 + s && y >= y0 && y <= y0 + s
    }
}

/// Scale of a loop given by its points in unit-square coordinates: the `n`
/// with `d ∈ [2^{-n-1}, 2^{-n})`, where `d` is the larger of the x and y
/// ranges. The square's corner is the dyadic point below-left of the loop's
/// minimal coordinates at resolution `2^{-n}`.
pub fn loop_to_square(points: &[(f64, f64)]) -> Result<DyadicSquare> {
    let inside = |v: f64| v > 0.0 && v < 1.0;
    if points.is_empty() || !points.iter().all(|&(x, y)| inside(x) && inside(y)) {
        return Err(Error::LoopOutsideUnitSquare);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (1.0f64, 0.0f64, 1.0f64, 0.0f64);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let d = (x1 - x0).max(y1 - y0);
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::OutOfRange {
            name: "loop diameter",
            value: d,
            range: "(0, 1)",
        });
    }
    let mut n = 0u32;
    while d < libm::ldexp(1.0, -(n as i32) - 1) {
        n += 1;
    }
    let scale = libm::ldexp(1.0, n as i32);
    Ok(DyadicSquare {
        level: n,
        j: libm::floor(x0 * scale) as u64,
        jp: libm::floor(y0 * scale) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_empty_retention() {
        let full = sample_fractal(1.0, 5, 1).unwrap();
        assert_eq!(full.retained_count(5), 1 << 10);
        assert!(full.crossing_exists());
        let empty = sample_fractal(0.0, 5, 1).unwrap();
        assert_eq!(empty.retained_count(1), 0);
        assert!(!empty.crossing_exists());
    }

    #[test]
    fn ancestors_of_kept_squares_are_kept() {
        let fp = sample_fractal(0.7, 6, 11).unwrap();
        for k in 2..=6 {
            let side = 1usize << k;
            for j in 0..side {
                for i in 0..side {
                    if fp.retained(k, i, j) {
                        assert!(fp.retained(k - 1, i / 2, j / 2));
                    }
                }
            }
        }
    }

    #[test]
    fn lazy_survival_agrees_with_materialized() {
        for seed in 0..200 {
            for &p in &[0.3, 0.5, 0.7] {
                let fp = sample_fractal(p, 6, seed).unwrap();
                assert_eq!(survives_to_depth(p, 6, seed).unwrap(), fp.retained_count(6) > 0);
            }
        }
    }

    #[test]
    fn extinction_values() {
        assert_eq!(extinction_probability(0.25).unwrap(), 1.0);
        assert_eq!(extinction_probability(0.0).unwrap(), 1.0);
        assert_eq!(extinction_probability(1.0).unwrap(), 0.0);
        let q = extinction_probability(0.9).unwrap();
        assert!(q > 0.0 && q < 1.0);
        let f = libm::pow(1.0 - 0.9 + 0.9 * q, 4.0);
        assert!((f - q).abs() < 1e-14);
        assert!(extinction_probability(1.5).is_err());
    }

    #[test]
    fn extinction_just_above_critical() {
        let q = extinction_probability(0.26).unwrap();
        assert!(q < 1.0);
        assert!((libm::pow(0.74 + 0.26 * q, 4.0) - q).abs() < 1e-12);
    }

    #[test]
    fn loop_square_levels() {
        let s = loop_to_square(&[(0.1, 0.1), (0.4, 0.2)]).unwrap();
        assert_eq!((s.level, s.side()), (1, 1.0));
        let s = loop_to_square(&[(0.1, 0.1), (0.3, 0.15)]).unwrap();
        assert_eq!((s.level, s.side()), (2, 0.5));
        assert!(loop_to_square(&[(0.1, 0.1), (1.0, 0.1)]).is_err());
        assert!(loop_to_square(&[(0.5, 0.5)]).is_err());
    }
}
