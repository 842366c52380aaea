//! Fillings and outermost clusters.
//!
//! The filling of a cluster is everything not reachable from outside through
//! sites the cluster does not visit. The exterior flood uses 4-connectivity,
//! the usual partner of the 8-connected contours traced in `contour`.
//! Because cluster sites always lie inside the cluster's bounding box, the
//! flood only needs the box plus a one-site collar; fills of clusters that
//! touch the frame are therefore automatically clipped to the frame.

use alloc::vec;
use alloc::vec::Vec;

use crate::cluster::{BBox, Cluster, ClusterSet};
use crate::grid::BitGrid;
use crate::lattice::{LatticeDomain, Point};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilledCluster {
    pub cluster: usize,
    /// Filled sites over the cluster's bounding box.
    pub fill: BitGrid,
    pub fill_count: usize,
    pub outermost: bool,
    /// Some cluster site lies on the frame's outermost ring.
    pub touches_boundary: bool,
}

impl FilledCluster {
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.fill.get(p)
    }

    pub fn sites(&self) -> impl Iterator<Item = Point> + '_ {
        self.fill.iter_set()
    }

    pub fn bbox(&self) -> BBox {
        self.fill.bbox()
    }
}

/// Fill a single cluster relative to `frame`. `outermost` is left `true`;
/// use [`outermost`] to classify a whole cluster set.
pub fn fill(cluster: &Cluster, id: usize, frame: &LatticeDomain) -> FilledCluster {
    let fill = fill_sites(&cluster.sites, cluster.bbox);
    FilledCluster {
        cluster: id,
        fill_count: fill.count(),
        fill,
        outermost: true,
        touches_boundary: cluster.sites.iter().any(|&p| frame.on_edge(p)),
    }
}

/// Fill of an arbitrary site set whose bounding box is `bbox`.
pub fn fill_sites(sites: &[Point], bbox: BBox) -> BitGrid {
    let outer = bbox.padded(1);
    let w = outer.width() as usize;
    let h = outer.height() as usize;
    let idx = |p: Point| (p.y - outer.min.y) as usize * w + (p.x - outer.min.x) as usize;

    // 0 = unknown, 1 = wall (cluster site), 2 = exterior.
    let mut state = vec![0u8; w * h];
    for &p in sites {
        state[idx(p)] = 1;
    }
    let mut stack: Vec<usize> = Vec::new();
    for x in 0..w {
        stack.push(x);
        stack.push((h - 1) * w + x);
    }
    for y in 0..h {
        stack.push(y * w);
        stack.push(y * w + w - 1);
    }
    while let Some(i) = stack.pop() {
        if state[i] != 0 {
            continue;
        }
        state[i] = 2;
        let (x, y) = (i % w, i / w);
        if x > 0 {
            stack.push(i - 1);
        }
        if x + 1 < w {
            stack.push(i + 1);
        }
        if y > 0 {
            stack.push(i - w);
        }
        if y + 1 < h {
            stack.push(i + w);
        }
    }

    let mut grid = BitGrid::new(bbox);
    for y in bbox.min.y..=bbox.max.y {
        for x in bbox.min.x..=bbox.max.x {
            let p = Point::new(x, y);
            if state[idx(p)] != 2 {
                grid.set(p, true);
            }
        }
    }
    grid
}

/// Fill every cluster and mark the outermost ones: a cluster is outermost
/// unless its sites lie in the filling of another cluster.
///
/// Clusters are site-disjoint, so a site of `C` inside `F(C')` is a hole site
/// of `C'`. Hole sites of all clusters are painted onto one frame-sized map
/// and each cluster checks its own sites against it.
pub fn outermost(clusters: &ClusterSet, frame: &LatticeDomain) -> Vec<FilledCluster> {
    let mut filled: Vec<FilledCluster> = clusters
        .clusters()
        .iter()
        .enumerate()
        .map(|(id, c)| fill(c, id, frame))
        .collect();

    let mut holes = vec![false; frame.site_count()];
    let mut any_hole = false;
    for (fc, c) in filled.iter().zip(clusters.clusters()) {
        if fc.fill_count == c.sites.len() {
            continue;
        }
        for p in fc.sites() {
            if !c.contains_site(p) {
                if let Some(i) = frame.index(p) {
                    holes[i] = true;
                    any_hole = true;
                }
            }
        }
    }
    if any_hole {
        for (fc, c) in filled.iter_mut().zip(clusters.clusters()) {
            fc.outermost = !c.sites.iter().any(|&p| frame.index(p).is_some_and(|i| holes[i]));
        }
    }
    filled
}
