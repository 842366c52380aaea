//! Brute-force geometry oracles, independent of the library's algorithms.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use loopsoup::core::lattice::{LatticeDomain, Point};

/// Fill by flooding the complement of `sites` over the whole frame plus a
/// one-site collar, starting from a collar corner.
pub fn fill_oracle(sites: &[Point], frame: &LatticeDomain) -> BTreeSet<Point> {
    let blocked: HashSet<Point> = sites.iter().copied().collect();
    let (lo, hi) = (frame.origin().offset(-1, -1), frame.max().offset(1, 1));
    let in_box = |p: Point| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    let mut seen = HashSet::from([lo]);
    let mut queue = VecDeque::from([lo]);
    while let Some(p) = queue.pop_front() {
        for q in [p.offset(1, 0), p.offset(-1, 0), p.offset(0, 1), p.offset(0, -1)] {
            if in_box(q) && !blocked.contains(&q) && seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    frame.sites().filter(|p| !seen.contains(p)).collect()
}

/// Cluster `i` is outermost iff no other fill contains all its sites.
pub fn outermost_oracle(sites: &[Vec<Point>], fills: &[BTreeSet<Point>]) -> Vec<bool> {
    (0..sites.len())
        .map(|i| !(0..sites.len()).any(|j| j != i && sites[i].iter().all(|p| fills[j].contains(p))))
        .collect()
}

/// Fill sites with a 4-neighbour outside the fill.
pub fn contour_oracle(fill: &BTreeSet<Point>) -> BTreeSet<Point> {
    fill.iter()
        .copied()
        .filter(|p| {
            [p.offset(1, 0), p.offset(-1, 0), p.offset(0, 1), p.offset(0, -1)]
                .iter()
                .any(|q| !fill.contains(q))
        })
        .collect()
}
