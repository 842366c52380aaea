use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn scale(self, a: f64) -> Vec2 {
        Vec2::new(self.x * a, self.y * a)
    }
}

/// Closed segment or closed axis-aligned box.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Shape {
    Segment { a: Vec2, b: Vec2 },
    Box { min: Vec2, max: Vec2 },
}

impl Shape {
    pub fn segment(x0: f64, y0: f64, x1: f64, y1: f64) -> Shape {
        Shape::Segment {
            a: Vec2::new(x0, y0),
            b: Vec2::new(x1, y1),
        }
    }

    /// Box from two opposite corners. Flat boxes degenerate to segments.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Shape {
        let min = Vec2::new(x0.min(x1), y0.min(y1));
        let max = Vec2::new(x0.max(x1), y0.max(y1));
        if min.x == max.x || min.y == max.y {
            Shape::Segment { a: min, b: max }
        } else {
            Shape::Box { min, max }
        }
    }

    /// Distance from `z` and the closest point of the shape.
    #[inline]
    pub fn nearest(&self, z: Vec2) -> (f64, Vec2) {
        let p = match *self {
            Shape::Segment { a, b } => {
                let ab = b.sub(a);
                let len2 = ab.dot(ab);
                let t = if len2 > 0.0 {
                    (z.sub(a).dot(ab) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                Vec2::new(a.x + t * ab.x, a.y + t * ab.y)
            }
            Shape::Box { min, max } => Vec2::new(z.x.clamp(min.x, max.x), z.y.clamp(min.y, max.y)),
        };
        (z.sub(p).norm(), p)
    }

    pub fn y_range(&self) -> (f64, f64) {
        match *self {
            Shape::Segment { a, b } => (a.y.min(b.y), a.y.max(b.y)),
            Shape::Box { min, max } => (min.y, max.y),
        }
    }

    fn corners(&self) -> ([Vec2; 4], usize) {
        match *self {
            Shape::Segment { a, b } => ([a, b, a, b], 2),
            Shape::Box { min, max } => ([min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)], 4),
        }
    }

    pub fn scaled(&self, s: f64) -> Shape {
        match *self {
            Shape::Segment { a, b } => Shape::Segment {
                a: a.scale(s),
                b: b.scale(s),
            },
            Shape::Box { min, max } => Shape::Box {
                min: min.scale(s),
                max: max.scale(s),
            },
        }
    }

    fn is_valid(&self) -> bool {
        let (c, n) = self.corners();
        c[..n].iter().all(|v| v.x.is_finite() && v.y.is_finite() && v.y >= 0.0)
    }
}

/// Finite union of closed segments and boxes in the closed upper half-plane.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Hull {
    shapes: Vec<Shape>,
}

impl Hull {
    pub fn new(shapes: Vec<Shape>) -> Result<Self> {
        if shapes.is_empty() || !shapes.iter().all(Shape::is_valid) {
            return Err(Error::InvalidHull);
        }
        Ok(Hull { shapes })
    }

    /// Vertical slit from `x` to `x + i·height`.
    pub fn slit(x: f64, height: f64) -> Result<Self> {
        Hull::new(alloc::vec![Shape::segment(x, 0.0, x, height)])
    }

    pub fn empty() -> Self {
        Hull { shapes: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    /// Radius of the smallest origin-centred disk containing the hull.
    pub fn radius(&self) -> f64 {
        self.shapes
            .iter()
            .flat_map(|s| {
                let (c, n) = s.corners();
                c.into_iter().take(n)
            })
            .map(Vec2::norm)
            .fold(0.0, f64::max)
    }

    /// Distance from `z` and the closest hull point; `None` for the empty hull.
    #[inline]
    pub fn nearest(&self, z: Vec2) -> Option<(f64, Vec2)> {
        let mut best: Option<(f64, Vec2)> = None;
        for s in &self.shapes {
            let (d, p) = s.nearest(z);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, p));
            }
        }
        best
    }

    pub fn scaled(&self, s: f64) -> Hull {
        Hull {
            shapes: self.shapes.iter().map(|sh| sh.scaled(s)).collect(),
        }
    }

    pub fn union(&self, other: &Hull) -> Hull {
        let mut shapes = self.shapes.clone();
        shapes.extend_from_slice(&other.shapes);
        Hull { shapes }
    }

    pub fn touches_axis(&self) -> bool {
        self.shapes.iter().any(|s| s.y_range().0 == 0.0)
    }

    /// Whether the set is a compact half-plane hull in the strict sense.
    /// Other inputs are still valid absorbing sets for `M_α`.
    pub fn shape_check(&self) -> HullShape {
        HullShape {
            grounded: self.grounded(),
            encloses: self.encloses(HOLE_RESOLUTION),
        }
    }

    pub fn is_hull(&self) -> bool {
        self.shape_check().is_hull()
    }

    /// Every connected piece of the union meets the real axis.
    fn grounded(&self) -> bool {
        let n = self.shapes.len();
        let mut reached: Vec<bool> = self.shapes.iter().map(|s| s.y_range().0 == 0.0).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&i| reached[i]).collect();
        while let Some(i) = stack.pop() {
            for (j, shape) in self.shapes.iter().enumerate() {
                if !reached[j] && self.shapes[i].meets(shape) {
                    reached[j] = true;
                    stack.push(j);
                }
            }
        }
        reached.iter().all(|&r| r)
    }

    /// Whether some region of the half-plane is cut off from infinity, found
    /// by flooding a `resolution`-cell raster from its top and side edges.
    /// Cells within half a diagonal of the set are blocked, so shapes closer
    /// than one cell count as touching.
    fn encloses(&self, resolution: usize) -> bool {
        let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for s in &self.shapes {
            let (c, k) = s.corners();
            for v in &c[..k] {
                x0 = x0.min(v.x);
                x1 = x1.max(v.x);
                y1 = y1.max(v.y);
            }
        }
        let span = (x1 - x0).max(y1).max(f64::MIN_POSITIVE);
        let h = span / resolution as f64;
        let (x0, nx, ny) = (x0 - 2.0 * h, (x1 - x0) / h + 4.0, y1 / h + 2.0);
        let (nx, ny) = (libm::ceil(nx) as usize, libm::ceil(ny) as usize);
        let reach = h * core::f64::consts::FRAC_1_SQRT_2;
        let blocked: Vec<bool> = (0..nx * ny)
            .map(|k| {
                let c = Vec2::new(x0 + ((k % nx) as f64 + 0.5) * h, ((k / nx) as f64 + 0.5) * h);
                self.nearest(c).is_some_and(|(d, _)| d <= reach)
            })
            .collect();
        let mut seen = alloc::vec![false; nx * ny];
        let mut stack = Vec::new();
        for k in 0..nx * ny {
            let (i, j) = (k % nx, k / nx);
            if (i == 0 || i == nx - 1 || j == ny - 1) && !blocked[k] {
                seen[k] = true;
                stack.push(k);
            }
        }
        while let Some(k) = stack.pop() {
            let (i, j) = (k % nx, k / nx);
            let nbrs = [
                (i > 0).then(|| k - 1),
                (i + 1 < nx).then(|| k + 1),
                (j > 0).then(|| k - nx),
                (j + 1 < ny).then(|| k + nx),
            ];
            for m in nbrs.into_iter().flatten() {
                if !blocked[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        (0..nx * ny).any(|k| !blocked[k] && !seen[k])
    }
}

/// Raster size used by [`Hull::shape_check`] for enclosed regions.
pub const HOLE_RESOLUTION: usize = 512;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct HullShape {
    /// Every connected piece meets the real axis.
    pub grounded: bool,
    /// Some bounded region of the half-plane is cut off (raster estimate).
    pub encloses: bool,
}

impl HullShape {
    pub fn is_hull(self) -> bool {
        self.grounded && !self.encloses
    }
}

fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Vec2, a: Vec2, b: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_meet(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

impl Shape {
    /// Whether two closed shapes share a point.
    fn meets(&self, other: &Shape) -> bool {
        let inside = |p: Vec2, min: Vec2, max: Vec2| p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
        match (*self, *other) {
            (Shape::Segment { a, b }, Shape::Segment { a: c, b: d }) => segments_meet(a, b, c, d),
            (Shape::Box { min: a0, max: a1 }, Shape::Box { min: b0, max: b1 }) => {
                a0.x <= b1.x && b0.x <= a1.x && a0.y <= b1.y && b0.y <= a1.y
            }
            (Shape::Segment { a, b }, Shape::Box { min, max }) | (Shape::Box { min, max }, Shape::Segment { a, b }) => {
                if inside(a, min, max) || inside(b, min, max) {
                    return true;
                }
                let (c, _) = Shape::Box { min, max }.corners();
                (0..4).any(|i| segments_meet(a, b, c[i], c[(i + 1) % 4]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_points() {
        let s = Shape::segment(0.0, 0.0, 0.0, 1.0);
        let (d, p) = s.nearest(Vec2::new(1.0, 0.5));
        assert_eq!((d, p), (1.0, Vec2::new(0.0, 0.5)));
        let (d, p) = s.nearest(Vec2::new(0.0, 3.0));
        assert_eq!((d, p), (2.0, Vec2::new(0.0, 1.0)));
        let b = Shape::rect(0.0, 1.0, 2.0, 2.0);
        assert_eq!(b.nearest(Vec2::new(1.0, 1.5)).0, 0.0);
        assert_eq!(b.nearest(Vec2::new(3.0, 3.0)).1, Vec2::new(2.0, 2.0));
    }

    #[test]
    fn validation_and_radius() {
        assert!(Hull::new(alloc::vec![Shape::segment(0.0, -0.1, 0.0, 1.0)]).is_err());
        assert!(Hull::new(alloc::vec![]).is_err());
        let h = Hull::new(alloc::vec![Shape::rect(-3.0, 0.0, 1.0, 4.0)]).unwrap();
        assert_eq!(h.radius(), 5.0);
        assert!(h.touches_axis());
        assert!(matches!(Shape::rect(0.0, 1.0, 2.0, 1.0), Shape::Segment { .. }));
    }

    #[test]
    fn hull_shapes() {
        assert!(Hull::slit(0.0, 1.0).unwrap().is_hull());
        let floating = Hull::new(alloc::vec![Shape::segment(0.0, 0.5, 0.0, 1.0)]).unwrap();
        assert_eq!(
            floating.shape_check(),
            HullShape {
                grounded: false,
                encloses: false
            }
        );
        // A tree of segments hanging off a grounded box.
        let tree = Hull::new(alloc::vec![
            Shape::rect(-1.0, 0.0, 1.0, 0.5),
            Shape::segment(0.0, 0.5, 0.0, 2.0),
            Shape::segment(0.0, 1.0, 1.5, 1.7),
        ])
        .unwrap();
        assert!(tree.is_hull());
        let arch = Hull::new(alloc::vec![
            Shape::segment(0.0, 0.0, 0.0, 1.0),
            Shape::segment(0.0, 1.0, 1.0, 1.0),
            Shape::segment(1.0, 1.0, 1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(
            arch.shape_check(),
            HullShape {
                grounded: true,
                encloses: true
            }
        );
        let ring = Hull::new(alloc::vec![
            Shape::rect(0.0, 0.0, 3.0, 1.0),
            Shape::rect(0.0, 2.0, 3.0, 3.0),
            Shape::rect(0.0, 0.0, 1.0, 3.0),
            Shape::rect(2.0, 0.0, 3.0, 3.0),
        ])
        .unwrap();
        assert!(ring.shape_check().encloses);
    }

    #[test]
    fn shape_intersections() {
        let s = |x0, y0, x1, y1| Shape::segment(x0, y0, x1, y1);
        assert!(s(0.0, 0.0, 1.0, 1.0).meets(&s(0.0, 1.0, 1.0, 0.0)));
        assert!(s(0.0, 0.0, 1.0, 0.0).meets(&s(1.0, 0.0, 2.0, 0.0)));
        assert!(!s(0.0, 0.0, 1.0, 0.0).meets(&s(0.0, 0.1, 1.0, 0.1)));
        let b = Shape::rect(0.0, 0.0, 1.0, 1.0);
        assert!(b.meets(&s(-1.0, 0.5, 2.0, 0.5)));
        assert!(b.meets(&s(0.2, 0.2, 0.3, 0.3)));
        assert!(!b.meets(&s(1.1, 0.0, 1.1, 1.0)));
        assert!(b.meets(&Shape::rect(1.0, 1.0, 2.0, 2.0)));
    }
}
