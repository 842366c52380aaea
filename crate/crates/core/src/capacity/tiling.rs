use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::hull::{Hull, Shape, Vec2};

/// Lowest level enumerated for hulls that reach down to `ℝ`.
pub const DEFAULT_MIN_LEVEL: i32 = -12;

/// The square `[a·2^j, (a+1)·2^j] × [2^j, 2^{j+1}]`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperbolicSquare {
    pub j: i32,
    pub a: i64,
}

impl HyperbolicSquare {
    pub fn new(a: i64, j: i32) -> Self {
        HyperbolicSquare { j, a }
    }

    pub fn side(&self) -> f64 {
        libm::ldexp(1.0, self.j)
    }

    /// `(x0, y0, x1, y1)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let w = self.side();
        let x0 = self.a as f64 * w;
        (x0, w, x0 + w, 2.0 * w)
    }

    pub fn hull(&self) -> Hull {
        let (x0, y0, x1, y1) = self.bounds();
        Hull::new(alloc::vec![Shape::rect(x0, y0, x1, y1)]).expect("squares lie above ℝ")
    }

    /// `R(S) = [a·2^j, (a+1)·2^j] × [0, 2^{j+1}]`.
    pub fn r_hull(&self) -> Hull {
        let (x0, _, x1, y1) = self.bounds();
        Hull::new(alloc::vec![Shape::rect(x0, 0.0, x1, y1)]).expect("squares lie above ℝ")
    }

    /// The square owning `p` under half-open tiling, if `p.y > 0`.
    pub fn owner(p: Vec2) -> Option<Self> {
        if !(p.y > 0.0) {
            return None;
        }
        let j = libm::floor(libm::log2(p.y)) as i32;
        // log2 can round across a power of two.
        let j = if libm::ldexp(1.0, j) > p.y {
            j - 1
        } else if libm::ldexp(1.0, j + 1) <= p.y {
            j + 1
        } else {
            j
        };
        let a = libm::floor(p.x / libm::ldexp(1.0, j)) as i64;
        Some(HyperbolicSquare { j, a })
    }

    fn contains_closed(&self, p: Vec2) -> bool {
        let (x0, y0, x1, y1) = self.bounds();
        p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1
    }
}

/// The squares meeting a hull, and whether levels below the floor were cut.
#[derive(Clone, Debug, PartialEq)]
pub struct Tiling {
    pub squares: Vec<HyperbolicSquare>,
    pub truncated: bool,
    pub min_level: i32,
}

impl Tiling {
    /// `Â`, the union of the squares.
    pub fn hat(&self) -> Hull {
        let shapes = self
            .squares
            .iter()
            .map(|s| {
                let (x0, y0, x1, y1) = s.bounds();
                Shape::rect(x0, y0, x1, y1)
            })
            .collect();
        Hull::new(shapes).unwrap_or_else(|_| Hull::empty())
    }

    /// Squares per level, ascending.
    pub fn level_counts(&self) -> Vec<(i32, usize)> {
        let mut out: Vec<(i32, usize)> = Vec::new();
        for s in &self.squares {
            match out.last_mut() {
                Some((j, n)) if *j == s.j => *n += 1,
                _ => out.push((s.j, 1)),
            }
        }
        out
    }
}

/// Parameter interval of `a + t(b − a)`, `t ∈ [0, 1]`, inside a closed box.
fn clip(a: Vec2, b: Vec2, lo: Vec2, hi: Vec2) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, d, l, h) in [(a.x, b.x - a.x, lo.x, hi.x), (a.y, b.y - a.y, lo.y, hi.y)] {
        if d == 0.0 {
            if p < l || p > h {
                return None;
            }
        } else {
            let (u, v) = ((l - p) / d, (h - p) / d);
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            t0 = t0.max(u);
            t1 = t1.min(v);
            if t0 > t1 {
                return None;
            }
        }
    }
    Some((t0, t1))
}

fn lerp(a: Vec2, b: Vec2, t: f64) -> Vec2 {
    Vec2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
}

fn meets_interior(shape: &Shape, sq: &HyperbolicSquare) -> bool {
    let (x0, y0, x1, y1) = sq.bounds();
    let inside = |p: Vec2| p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
    match *shape {
        Shape::Box { min, max } => min.x < x1 && max.x > x0 && min.y < y1 && max.y > y0,
        Shape::Segment { a, b } => {
            match clip(a, b, Vec2::new(x0, y0), Vec2::new(x1, y1)) {
                // The clipped piece is convex, so it reaches the open square
                // iff its midpoint does.
                Some((t0, t1)) => inside(lerp(a, b, 0.5 * (t0 + t1))),
                None => false,
            }
        }
    }
}

/// Enumerate `𝒮(A)`: squares whose interior meets `A`, plus, for parts of
/// `A` lying on grid lines, the half-open owner square of each such point.
/// Levels below `min_level` are dropped and flagged.
pub fn tiling_of(hull: &Hull, min_level: i32) -> Tiling {
    let mut set = BTreeSet::new();
    let mut truncated = false;
    let floor_height = libm::ldexp(1.0, min_level);

    for shape in hull.shapes() {
        let (y0, y1) = shape.y_range();
        if y1 <= 0.0 {
            truncated = true;
            continue;
        }
        if y0 < floor_height {
            truncated = true;
        }
        let level_of = |y: f64| libm::floor(libm::log2(y)) as i32;
        let jlo = if y0 > floor_height { level_of(y0) - 1 } else { min_level }.max(min_level);
        let jhi = level_of(y1) + 1;

        for j in jlo..=jhi {
            let w = libm::ldexp(1.0, j);
            let (lo, hi) = (Vec2::new(f64::NEG_INFINITY, w), Vec2::new(f64::INFINITY, 2.0 * w));
            let (xa, xb, piece) = match *shape {
                Shape::Box { min, max } => {
                    if min.y > hi.y || max.y < lo.y {
                        continue;
                    }
                    (min.x, max.x, None)
                }
                Shape::Segment { a, b } => match clip(a, b, lo, hi) {
                    Some((t0, t1)) => {
                        let (p, q) = (lerp(a, b, t0), lerp(a, b, t1));
                        (p.x.min(q.x), p.x.max(q.x), Some((p, q)))
                    }
                    None => continue,
                },
            };
            let a_lo = libm::floor(xa / w) as i64 - 1;
            let a_hi = libm::floor(xb / w) as i64;
            let mut level = Vec::new();
            for a in a_lo..=a_hi {
                let sq = HyperbolicSquare::new(a, j);
                if meets_interior(shape, &sq) {
                    level.push(sq);
                }
            }
            set.extend(level.iter().copied());

            // Pieces on grid lines meet no interior; give each uncovered
            // sample point its owner square.
            if let Some((p, q)) = piece {
                for s in samples(p, q, 0.5 * w) {
                    if set.iter().any(|sq: &HyperbolicSquare| sq.contains_closed(s)) {
                        continue;
                    }
                    match HyperbolicSquare::owner(s) {
                        Some(o) if o.j >= min_level => {
                            set.insert(o);
                        }
                        _ => truncated = true,
                    }
                }
            }
        }
    }

    Tiling {
        squares: set.into_iter().collect(),
        truncated,
        min_level,
    }
}

/// Endpoints, crossings of the `spacing` grid, and midpoints between them.
fn samples(p: Vec2, q: Vec2, spacing: f64) -> Vec<Vec2> {
    let mut ts: Vec<f64> = alloc::vec![0.0, 1.0];
    for (u, v) in [(p.x, q.x), (p.y, q.y)] {
        if u == v {
            continue;
        }
        let (lo, hi) = (u.min(v), u.max(v));
        let mut k = libm::ceil(lo / spacing);
        while k * spacing <= hi {
            ts.push((k * spacing - u) / (v - u));
            k += 1.0;
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mids: Vec<f64> = ts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    ts.extend(mids);
    ts.into_iter().map(|t| lerp(p, q, t)).collect()
}
