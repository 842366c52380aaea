//! Loop clusters: connected components of the "shares a site" relation.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{LatticeDomain, Point};
use crate::soup::LoopSoup;
use crate::walk::Loop;

/// Inclusive axis-aligned bounding box of lattice points.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn point(p: Point) -> Self {
        BBox { min: p, max: p }
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(mut self, other: BBox) -> BBox {
        self.include(other.min);
        self.include(other.max);
        self
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_box(&self, other: &BBox) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn width(&self) -> u32 {
        (self.max.x - self.min.x + 1) as u32
    }

    pub fn height(&self) -> u32 {
        (self.max.y - self.min.y + 1) as u32
    }

    /// Grown by `k` in every direction.
    pub fn padded(&self, k: i32) -> BBox {
        BBox {
            min: self.min.offset(-k, -k),
            max: self.max.offset(k, k),
        }
    }
}

pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        let mut root = i;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        while i != root {
            let next = self.parent[i] as usize;
            self.parent[i] = root as u32;
            i = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    /// Member loop indices, increasing.
    pub loops: Vec<usize>,
    /// Visited sites, sorted and deduplicated.
    pub sites: Vec<Point>,
    pub bbox: BBox,
}

impl Cluster {
    pub fn contains_site(&self, p: Point) -> bool {
        self.bbox.contains(p) && self.sites.binary_search(&p).is_ok()
    }
}

/// Partition of a soup's loops into clusters. Cluster ids are ordered by the
/// smallest loop index they contain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterSet {
    assignment: Vec<usize>,
    clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, id: usize) -> &Cluster {
        &self.clusters[id]
    }

    /// Cluster id of each loop.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn largest_site_count(&self) -> usize {
        self.clusters.iter().map(|c| c.sites.len()).max().unwrap_or(0)
    }
}

pub fn build_clusters(soup: &LoopSoup) -> ClusterSet {
    build_clusters_from(soup.loops(), soup.domain())
}

/// Clusters of `loops`, all of which must lie in `domain`.
///
/// A dense site → first-visiting-loop table drives the unions: every loop is
/// merged with the first earlier loop seen at each of its sites.
pub fn build_clusters_from(loops: &[Loop], domain: &LatticeDomain) -> ClusterSet {
    const NONE: u32 = u32::MAX;
    let mut first = vec![NONE; domain.site_count()];
    let mut uf = UnionFind::new(loops.len());
    for (i, l) in loops.iter().enumerate() {
        for p in l.sites() {
            let slot = &mut first[domain.index(p).expect("loop leaves its domain")];
            if *slot == NONE {
                *slot = i as u32;
            } else {
                uf.union(i, *slot as usize);
            }
        }
    }

    let mut id_of_root = vec![usize::MAX; loops.len()];
    let mut assignment = Vec::with_capacity(loops.len());
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, l) in loops.iter().enumerate() {
        let root = uf.find(i);
        if id_of_root[root] == usize::MAX {
            id_of_root[root] = clusters.len();
            clusters.push(Cluster {
                loops: Vec::new(),
                sites: Vec::new(),
                bbox: BBox::point(l.root()),
            });
        }
        let id = id_of_root[root];
        assignment.push(id);
        let c = &mut clusters[id];
        c.loops.push(i);
        for p in l.sites() {
            // Each site is recorded by the loop that claimed it first.
            if first[domain.index(p).unwrap()] == i as u32 {
                c.sites.push(p);
                c.bbox.include(p);
            }
        }
    }
    for c in &mut clusters {
        c.sites.sort_unstable();
        c.sites.dedup();
    }
    ClusterSet { assignment, clusters }
}
