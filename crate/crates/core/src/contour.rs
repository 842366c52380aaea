//! Moore-neighbourhood tracing of the outer contour of a filled cluster.

use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::error::{Error, Result};
use crate::fill::FilledCluster;
use crate::lattice::Point;

/// Moore neighbourhood in counter-clockwise order, starting East (y up).
const MOORE: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const WEST: usize = 4;

/// Cyclic sequence of contour sites, counter-clockwise, starting at the
/// lexicographically smallest site. The closing return to the start is not
/// repeated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLoop {
    points: Vec<Point>,
}

impl BoundaryLoop {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Consecutive points (cyclically) are distinct Moore neighbours.
    pub fn is_closed(&self) -> bool {
        let n = self.points.len();
        n == 1
            || (0..n).all(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                a != b && (a.x - b.x).abs() <= 1 && (a.y - b.y).abs() <= 1
            })
    }

    /// No site is visited twice.
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.points.len());
        self.points.iter().all(|p| seen.insert(*p))
    }

    /// No directed step is taken twice. Sites may repeat where the filling
    /// is pinched to one site width, but each pass goes a different way.
    pub fn is_step_simple(&self) -> bool {
        let n = self.points.len();
        let mut seen = HashSet::with_capacity(n);
        (0..n).all(|i| seen.insert((self.points[i], self.points[(i + 1) % n])))
    }

    /// Sites visited more than once.
    pub fn pinch_points(&self) -> Vec<Point> {
        let mut seen = HashSet::with_capacity(self.points.len());
        let mut pinched: Vec<Point> = self.points.iter().filter(|p| !seen.insert(**p)).copied().collect();
        pinched.sort_unstable();
        pinched.dedup();
        pinched
    }

    /// Area enclosed by the polygon through the contour points, with sign
    /// (positive for counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let twice: i64 = (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                a.x as i64 * b.y as i64 - b.x as i64 * a.y as i64
            })
            .sum();
        twice as f64 / 2.0
    }
}

pub fn trace_outer_boundary(fc: &FilledCluster) -> Result<BoundaryLoop> {
    let start = fc.sites().min().ok_or(Error::EmptyFill)?;
    let limit = 4 * fc.fill_count + 8;
    trace_from(|p| fc.contains(p), start, limit)
}

/// Trace the outer contour of the 8-connected component of `inside`
/// containing `start`, which must be its lexicographically smallest site.
pub fn trace_from(inside: impl Fn(Point) -> bool, start: Point, limit: usize) -> Result<BoundaryLoop> {
    let mut points = Vec::new();
    points.push(start);

    // Returns the next contour site and the direction (relative to it) of the
    // last outside site examined before it.
    let advance = |current: Point, backtrack: usize| -> Option<(Point, usize)> {
        let mut prev = current.offset(MOORE[backtrack].0, MOORE[backtrack].1);
        for k in 1..=8 {
            let d = (backtrack + k) % 8;
            let cand = current.offset(MOORE[d].0, MOORE[d].1);
            if inside(cand) {
                let rel = (prev.x - cand.x, prev.y - cand.y);
                let back = MOORE.iter().position(|&m| m == rel).expect("neighbouring cells");
                return Some((cand, back));
            }
            prev = cand;
        }
        None
    };

    // The west neighbour of the leftmost-lowest site is outside.
    let Some((first, mut back)) = advance(start, WEST) else {
        return Ok(BoundaryLoop { points });
    };
    let mut current = first;
    for _ in 0..limit {
        let (next, nb) = advance(current, back).expect("contour site has a neighbour");
        if current == start && next == first {
            return Ok(BoundaryLoop { points });
        }
        points.push(current);
        current = next;
        back = nb;
    }
    Err(Error::TraceDidNotClose(limit))
}
