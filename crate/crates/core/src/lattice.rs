use core::fmt;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    #[inline]
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn step(self, dir: Dir) -> Self {
        let (dx, dy) = dir.delta();
        Point::new(self.x + dx, self.y + dy)
    }

    #[inline]
    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Point::new(self.x + dx, self.y + dy)
    }

    /// The four nearest neighbours in E, N, W, S order.
    #[inline]
    pub fn neighbors4(self) -> [Point; 4] {
        Dir::ALL.map(|d| self.step(d))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Nearest-neighbour step on the square lattice (y axis points up).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    E,
    N,
    W,
    S,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::E, Dir::N, Dir::W, Dir::S];

    #[inline]
    pub const fn delta(self) -> (i32, i32) {
        match self {
            Dir::E => (1, 0),
            Dir::N => (0, 1),
            Dir::W => (-1, 0),
            Dir::S => (0, -1),
        }
    }

    pub const fn as_char(self) -> char {
        match self {
            Dir::E => 'E',
            Dir::N => 'N',
            Dir::W => 'W',
            Dir::S => 'S',
        }
    }

    pub const fn from_char(c: char) -> Option<Dir> {
        match c {
            'E' => Some(Dir::E),
            'N' => Some(Dir::N),
            'W' => Some(Dir::W),
            'S' => Some(Dir::S),
            _ => None,
        }
    }

    pub const fn reverse(self) -> Dir {
        match self {
            Dir::E => Dir::W,
            Dir::N => Dir::S,
            Dir::W => Dir::E,
            Dir::S => Dir::N,
        }
    }
}

/// A `width × height` rectangle of lattice sites with bottom-left site at
/// `origin`. `mesh` is the physical side length of one lattice cell.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LatticeDomain {
    origin: Point,
    width: u32,
    height: u32,
    mesh: f64,
}

impl LatticeDomain {
    pub fn new(width: u32, height: u32, mesh: f64) -> Result<Self> {
        Self::with_origin(Point::new(0, 0), width, height, mesh)
    }

    /// Square `size × size` domain at the origin with mesh `1 / size`.
    pub fn square(size: u32) -> Result<Self> {
        Self::new(size, size, 1.0 / size.max(1) as f64)
    }

    pub fn with_origin(origin: Point, width: u32, height: u32, mesh: f64) -> Result<Self> {
        if width == 0 || height == 0 || !(mesh > 0.0) || !mesh.is_finite() {
            return Err(Error::InvalidDomain);
        }
        if width > i32::MAX as u32 / 2 || height > i32::MAX as u32 / 2 {
            return Err(Error::InvalidDomain);
        }
        Ok(LatticeDomain {
            origin,
            width,
            height,
            mesh,
        })
    }

    #[inline]
    pub fn origin(&self) -> Point {
        self.origin
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Top-right site (inclusive).
    #[inline]
    pub fn max(&self) -> Point {
        self.origin.offset(self.width as i32 - 1, self.height as i32 - 1)
    }

    #[inline]
    pub fn site_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        let dx = p.x.wrapping_sub(self.origin.x) as u32;
        let dy = p.y.wrapping_sub(self.origin.y) as u32;
        dx < self.width && dy < self.height
    }

    /// Row-major index of a site, `None` outside the domain.
    #[inline]
    pub fn index(&self, p: Point) -> Option<usize> {
        if self.contains(p) {
            let dx = (p.x - self.origin.x) as usize;
            let dy = (p.y - self.origin.y) as usize;
            Some(dy * self.width as usize + dx)
        } else {
            None
        }
    }

    #[inline]
    pub fn point(&self, index: usize) -> Point {
        let w = self.width as usize;
        self.origin.offset((index % w) as i32, (index / w) as i32)
    }

    pub fn contains_domain(&self, other: &LatticeDomain) -> bool {
        self.contains(other.origin) && self.contains(other.max())
    }

    /// True for sites on the outermost ring, i.e. within one lattice unit of
    /// the frame edge.
    #[inline]
    pub fn on_edge(&self, p: Point) -> bool {
        let max = self.max();
        self.contains(p) && (p.x == self.origin.x || p.y == self.origin.y || p.x == max.x || p.y == max.y)
    }

    /// Sub-rectangle of this domain, sharing its mesh.
    pub fn subdomain(&self, origin: Point, width: u32, height: u32) -> Result<Self> {
        let sub = LatticeDomain::with_origin(origin, width, height, self.mesh)?;
        if self.contains_domain(&sub) {
            Ok(sub)
        } else {
            Err(Error::NotSubdomain)
        }
    }

    /// The centered sub-square with half the side lengths (rounded down).
    pub fn centered_half(&self) -> Result<Self> {
        let w = (self.width / 2).max(1);
        let h = (self.height / 2).max(1);
        let origin = self
            .origin
            .offset(((self.width - w) / 2) as i32, ((self.height - h) / 2) as i32);
        self.subdomain(origin, w, h)
    }

    pub fn center(&self) -> Point {
        self.origin.offset((self.width / 2) as i32, (self.height / 2) as i32)
    }

    pub fn sites(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.site_count()).map(move |i| self.point(i))
    }
}
