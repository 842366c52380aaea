//! Dense boolean grid over a rectangle of lattice points.

use alloc::vec;
use alloc::vec::Vec;

use crate::cluster::BBox;
use crate::lattice::Point;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitGrid {
    bbox: BBox,
    width: usize,
    cells: Vec<bool>,
}

impl BitGrid {
    pub fn new(bbox: BBox) -> Self {
        let width = bbox.width() as usize;
        let height = bbox.height() as usize;
        BitGrid {
            bbox,
            width,
            cells: vec![false; width * height],
        }
    }

    #[inline]
    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    #[inline]
    fn index(&self, p: Point) -> Option<usize> {
        if self.bbox.contains(p) {
            let dx = (p.x - self.bbox.min.x) as usize;
            let dy = (p.y - self.bbox.min.y) as usize;
            Some(dy * self.width + dx)
        } else {
            None
        }
    }

    #[inline]
    pub fn get(&self, p: Point) -> bool {
        self.index(p).is_some_and(|i| self.cells[i])
    }

    /// Panics when `p` lies outside the grid.
    #[inline]
    pub fn set(&mut self, p: Point, value: bool) {
        let i = self.index(p).expect("point outside grid");
        self.cells[i] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn iter_set(&self) -> impl Iterator<Item = Point> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.bbox.min.offset((i % self.width) as i32, (i / self.width) as i32))
    }
}
