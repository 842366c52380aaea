//! Closed nearest-neighbour walks: return probabilities, the rooted loop mass
//! table and exact uniform sampling of rooted loops of a given length.

use alloc::vec::Vec;

use rand::Rng;

use crate::cluster::BBox;
use crate::error::{Error, Result};
use crate::lattice::{Dir, Point};

/// Largest step count for which return probabilities are computed exactly.
pub const EXACT_RETURN_LIMIT: u32 = 16;

/// Reduced fraction `num / den`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Exact probability that simple random walk on `Z²` is back at its start
/// after `n` steps, for `n <= 16`.
///
/// Rotating by 45° splits the walk into two independent ±1 walks, so the
/// number of closed `2m`-step walks is `C(2m, m)²`.
pub fn return_probability_exact(n: u32) -> Option<Ratio> {
    if n > EXACT_RETURN_LIMIT {
        return None;
    }
    if n % 2 == 1 {
        return Some(Ratio::new(0, 1));
    }
    let closed = binomial(n as u64, n as u64 / 2).pow(2);
    Some(Ratio::new(closed, 1u64 << (2 * n)))
}

/// Probability that simple random walk on `Z²` is at its start after `n`
/// steps. Exact rational arithmetic up to `n = 16`, floating point beyond.
pub fn return_probability(n: u32) -> f64 {
    if let Some(r) = return_probability_exact(n) {
        return r.to_f64();
    }
    if n % 2 == 1 {
        return 0.0;
    }
    // C(2m, m) / 4^m by the ratio recurrence, then squared.
    let m = n / 2;
    let mut a = 1.0f64;
    for k in 0..m {
        a *= (2 * k + 1) as f64 / (2 * k + 2) as f64;
    }
    a * a
}

/// Per-site rooted loop intensities `λ_{2n} = q_{2n} / 2n` for every even
/// length up to the cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopMassTable {
    max_len: u32,
    q: Vec<f64>,
    lambda: Vec<f64>,
}

pub fn build_mass_table(max_len: u32) -> Result<LoopMassTable> {
    if max_len < 2 || max_len % 2 == 1 {
        return Err(Error::InvalidMaxLen(max_len));
    }
    let lengths = max_len / 2;
    let mut q = Vec::with_capacity(lengths as usize);
    let mut lambda = Vec::with_capacity(lengths as usize);
    for n in 1..=lengths {
        let qn = return_probability(2 * n);
        q.push(qn);
        lambda.push(qn / (2 * n) as f64);
    }
    Ok(LoopMassTable { max_len, q, lambda })
}

impl LoopMassTable {
    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    /// Return probability `q_len`; zero for odd or out-of-table lengths.
    pub fn return_probability(&self, len: u32) -> f64 {
        self.slot(len).map_or(0.0, |i| self.q[i])
    }

    /// Rooted intensity `λ_len`; zero for odd or out-of-table lengths.
    pub fn lambda(&self, len: u32) -> f64 {
        self.slot(len).map_or(0.0, |i| self.lambda[i])
    }

    /// `(length, λ)` pairs in increasing length.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.lambda.iter().enumerate().map(|(i, &l)| (2 * (i as u32 + 1), l))
    }

    pub fn total_lambda(&self) -> f64 {
        self.lambda.iter().sum()
    }

    fn slot(&self, len: u32) -> Option<usize> {
        (len >= 2 && len.is_multiple_of(2) && len <= self.max_len).then(|| (len / 2 - 1) as usize)
    }
}

/// A rooted closed nearest-neighbour walk.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    root: Point,
    steps: Vec<Dir>,
}

impl Loop {
    /// Returns `None` unless `steps` is non-empty and returns to `root`.
    pub fn new(root: Point, steps: Vec<Dir>) -> Option<Self> {
        let (dx, dy) = steps.iter().fold((0i64, 0i64), |(x, y), d| {
            let (a, b) = d.delta();
            (x + a as i64, y + b as i64)
        });
        (!steps.is_empty() && dx == 0 && dy == 0).then_some(Loop { root, steps })
    }

    #[inline]
    pub fn root(&self) -> Point {
        self.root
    }

    #[inline]
    pub fn steps(&self) -> &[Dir] {
        &self.steps
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.steps.len() as u32
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Visited sites in walk order, starting at the root. The closing return
    /// to the root is not repeated, so a loop of length `L` yields `L` points.
    pub fn sites(&self) -> impl Iterator<Item = Point> + '_ {
        let mut p = self.root;
        core::iter::once(self.root).chain(self.steps[..self.steps.len() - 1].iter().map(move |&d| {
            p = p.step(d);
            p
        }))
    }

    pub fn bbox(&self) -> BBox {
        let mut b = BBox::point(self.root);
        for p in self.sites() {
            b.include(p);
        }
        b
    }

    /// Largest coordinate variation, in lattice units.
    pub fn diameter(&self) -> u32 {
        let b = self.bbox();
        (b.max.x - b.min.x).max(b.max.y - b.min.y) as u32
    }

    /// Net displacement of the step sequence; `(0, 0)` for every valid loop.
    pub fn displacement(&self) -> (i64, i64) {
        self.steps.iter().fold((0, 0), |(x, y), d| {
            let (a, b) = d.delta();
            (x + a as i64, y + b as i64)
        })
    }
}

/// Uniformly random rooted closed walk of the given even length.
///
/// Steps are drawn sequentially, each direction weighted by the number of
/// walks of the remaining length that close the remaining displacement. In
/// the rotated coordinates `u = x + y`, `v = x - y` that count factorizes
/// into `C(m, (m+u)/2) · C(m, (m+v)/2)`, so the weights are products of two
/// binomial ratios and are evaluated without a table (and without overflow
/// for long loops).
///
/// # Panics
/// If `length` is zero or odd.
pub fn sample_bridge<R: Rng + ?Sized>(root: Point, length: u32, rng: &mut R) -> Loop {
    assert!(
        length >= 2 && length.is_multiple_of(2),
        "bridge length must be even and >= 2"
    );
    let mut steps = Vec::with_capacity(length as usize);
    // Current rotated displacement from the root.
    let (mut u, mut v) = (0i64, 0i64);
    for done in 0..length {
        let m = (length - done) as i64;
        // Walks of length m from s back to 0 with a +1 first step, over all
        // such walks: ((m - s) / 2) / m.
        let up_u = rng.random::<f64>() * (m as f64) < ((m - u) as f64) / 2.0;
        let up_v = rng.random::<f64>() * (m as f64) < ((m - v) as f64) / 2.0;
        let dir = match (up_u, up_v) {
            (true, true) => Dir::E,
            (true, false) => Dir::N,
            (false, false) => Dir::W,
            (false, true) => Dir::S,
        };
        u += if up_u { 1 } else { -1 };
        v += if up_v { 1 } else { -1 };
        steps.push(dir);
    }
    debug_assert_eq!((u, v), (0, 0));
    Loop { root, steps }
}
