//! Poissonian random-walk loop soups.
//!
//! For every site `x` of the domain and every even length `2n` up to the
//! cutoff, the number of rooted loops at `x` of length `2n` is Poisson with
//! mean `c · λ_{2n}`, independently over `(x, 2n)`. Loops that leave the
//! domain are discarded, which is exactly the restriction of the soup on a
//! larger domain.
//!
//! Sampling proceeds per length: the total count over all roots is Poisson
//! with mean `c · λ_{2n} · |D|` and, given the total, roots are i.i.d.
//! uniform, which is the same law as independent per-site counts. Each length
//! draws from its own stream, addressed by `(seed, 2n)`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::lattice::LatticeDomain;
use crate::rng::{mix64, stream};
use crate::walk::{build_mass_table, sample_bridge, Loop};

#[derive(Clone, Debug, PartialEq)]
pub struct LoopSoup {
    loops: Vec<Loop>,
    intensity: f64,
    domain: LatticeDomain,
    max_len: u32,
    seed: u64,
}

impl LoopSoup {
    /// Assemble a soup from parts, checking that every loop fits the domain
    /// and the length cutoff.
    pub fn from_parts(
        loops: Vec<Loop>,
        intensity: f64,
        domain: LatticeDomain,
        max_len: u32,
        seed: u64,
    ) -> Result<Self> {
        check_intensity(intensity)?;
        build_mass_table(max_len)?;
        for l in &loops {
            if l.len() > max_len || l.len() % 2 == 1 || !l.sites().all(|p| domain.contains(p)) {
                return Err(Error::DomainMismatch);
            }
        }
        Ok(LoopSoup {
            loops,
            intensity,
            domain,
            max_len,
            seed,
        })
    }

    pub fn empty(domain: LatticeDomain, max_len: u32, seed: u64) -> Result<Self> {
        Self::from_parts(Vec::new(), 0.0, domain, max_len, seed)
    }

    #[inline]
    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn into_loops(self) -> Vec<Loop> {
        self.loops
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    #[inline]
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    #[inline]
    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    #[inline]
    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of loops per `(root index, length)` cell, as a dense
    /// `site_count × (max_len / 2)` row-major table over `domain`.
    /// Loops rooted outside `domain` are ignored.
    pub fn root_length_counts(&self, domain: &LatticeDomain) -> Vec<u32> {
        let lengths = (self.max_len / 2) as usize;
        let mut counts = alloc::vec![0u32; domain.site_count() * lengths];
        for l in &self.loops {
            if let Some(i) = domain.index(l.root()) {
                counts[i * lengths + (l.len() / 2 - 1) as usize] += 1;
            }
        }
        counts
    }
}

/// A soup sampled at `c_max` in which every loop carries an arrival time
/// uniform in `[0, c_max]`. Keeping the loops that arrived by time `c` gives
/// a soup of intensity `c`, and these soups increase with `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredSoup {
    loops: Vec<Loop>,
    arrivals: Vec<f64>,
    c_max: f64,
    domain: LatticeDomain,
    max_len: u32,
    seed: u64,
}

impl LayeredSoup {
    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    /// Indices of loops present at intensity `c`.
    pub fn indices_at(&self, c: f64) -> impl Iterator<Item = usize> + '_ {
        self.arrivals
            .iter()
            .enumerate()
            .filter(move |(_, &t)| t <= c)
            .map(|(i, _)| i)
    }

    /// The soup at intensity `c` (clamped to `c_max`).
    pub fn at(&self, c: f64) -> LoopSoup {
        let c = c.clamp(0.0, self.c_max);
        LoopSoup {
            loops: self.indices_at(c).map(|i| self.loops[i].clone()).collect(),
            intensity: c,
            domain: self.domain,
            max_len: self.max_len,
            seed: self.seed,
        }
    }

    pub fn into_soup(self) -> LoopSoup {
        LoopSoup {
            loops: self.loops,
            intensity: self.c_max,
            domain: self.domain,
            max_len: self.max_len,
            seed: self.seed,
        }
    }
}

fn check_intensity(c: f64) -> Result<()> {
    if c >= 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidIntensity(c))
    }
}

/// Sample a layered soup on `domain` up to intensity `c_max`.
pub fn sample_layered(domain: &LatticeDomain, c_max: f64, max_len: u32, seed: u64) -> Result<LayeredSoup> {
    check_intensity(c_max)?;
    let table = build_mass_table(max_len)?;
    let mut loops = Vec::new();
    let mut arrivals = Vec::new();
    for (len, lambda) in table.iter() {
        sample_length(domain, len, c_max * lambda, c_max, seed, &mut loops, &mut arrivals);
    }
    Ok(LayeredSoup {
        loops,
        arrivals,
        c_max,
        domain: *domain,
        max_len,
        seed,
    })
}

fn sample_length(
    domain: &LatticeDomain,
    len: u32,
    per_site_mean: f64,
    c_max: f64,
    seed: u64,
    loops: &mut Vec<Loop>,
    arrivals: &mut Vec<f64>,
) {
    let mean = per_site_mean * domain.site_count() as f64;
    if mean <= 0.0 {
        return;
    }
    let mut rng = stream(seed, &[len as u64]);
    let total = Poisson::new(mean).expect("finite positive mean").sample(&mut rng) as u64;
    let sites = domain.site_count();
    for _ in 0..total {
        let root = domain.point(rng.random_range(0..sites));
        let l = sample_bridge(root, len, &mut rng);
        let t = rng.random::<f64>() * c_max;
        if l.sites().all(|p| domain.contains(p)) {
            loops.push(l);
            arrivals.push(t);
        }
    }
}

/// Sample the random-walk loop soup of intensity `c` on `domain`.
pub fn sample_soup(domain: &LatticeDomain, c: f64, max_len: u32, seed: u64) -> Result<LoopSoup> {
    Ok(sample_layered(domain, c, max_len, seed)?.into_soup())
}

/// Keep exactly the loops whose every site lies in `sub`.
pub fn restrict(soup: &LoopSoup, sub: &LatticeDomain) -> Result<LoopSoup> {
    if !soup.domain.contains_domain(sub) {
        return Err(Error::NotSubdomain);
    }
    Ok(LoopSoup {
        loops: soup
            .loops
            .iter()
            .filter(|l| l.sites().all(|p| sub.contains(p)))
            .cloned()
            .collect(),
        intensity: soup.intensity,
        domain: *sub,
        max_len: soup.max_len,
        seed: soup.seed,
    })
}

/// Union of two soups on the same domain; intensities add.
pub fn superpose(a: &LoopSoup, b: &LoopSoup) -> Result<LoopSoup> {
    if a.domain != b.domain || a.max_len != b.max_len {
        return Err(Error::DomainMismatch);
    }
    let mut loops = Vec::with_capacity(a.len() + b.len());
    loops.extend_from_slice(&a.loops);
    loops.extend_from_slice(&b.loops);
    Ok(LoopSoup {
        loops,
        intensity: a.intensity + b.intensity,
        domain: a.domain,
        max_len: a.max_len,
        seed: if b.is_empty() {
            a.seed
        } else {
            mix64(a.seed ^ b.seed.rotate_left(17))
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Dir, Point};

    fn dom(n: u32) -> LatticeDomain {
        LatticeDomain::square(n).unwrap()
    }

    #[test]
    fn zero_intensity_is_empty() {
        let s = sample_soup(&dom(16), 0.0, 20, 1).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            sample_soup(&dom(8), -0.5, 8, 1).unwrap_err(),
            Error::InvalidIntensity(-0.5)
        );
        assert_eq!(sample_soup(&dom(8), 1.0, 7, 1).unwrap_err(), Error::InvalidMaxLen(7));
    }

    #[test]
    fn reproducible_and_parity_preserving() {
        let a = sample_soup(&dom(24), 1.0, 40, 77).unwrap();
        let b = sample_soup(&dom(24), 1.0, 40, 77).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
        for l in a.loops() {
            assert_eq!(l.len() % 2, 0);
            assert!(l.len() <= 40);
            assert_eq!(l.displacement(), (0, 0));
            assert!(l.sites().all(|p| a.domain().contains(p)));
        }
        assert_ne!(a, sample_soup(&dom(24), 1.0, 40, 78).unwrap());
    }

    #[test]
    fn layers_are_nested() {
        let layered = sample_layered(&dom(20), 1.5, 30, 5).unwrap();
        let cs = [0.0, 0.3, 0.7, 1.0, 1.5];
        for w in cs.windows(2) {
            let lo: Vec<usize> = layered.indices_at(w[0]).collect();
            let hi: Vec<usize> = layered.indices_at(w[1]).collect();
            assert!(lo.iter().all(|i| hi.binary_search(i).is_ok()));
        }
        assert!(layered.at(0.0).is_empty());
        assert_eq!(layered.at(1.5).len(), layered.loops().len());
    }

    #[test]
    fn restrict_identity_and_strip() {
        let d = dom(12);
        let s = sample_soup(&d, 2.0, 12, 3).unwrap();
        assert_eq!(restrict(&s, &d).unwrap(), s);

        let strip = d.subdomain(Point::new(4, 4), 2, 1).unwrap();
        let r = restrict(&s, &strip).unwrap();
        for l in r.loops() {
            assert_eq!(l.len(), 2);
            assert!(matches!(l.steps(), [Dir::E, Dir::W] | [Dir::W, Dir::E]));
        }
        let outside = LatticeDomain::with_origin(Point::new(10, 10), 4, 4, d.mesh()).unwrap();
        assert_eq!(restrict(&s, &outside).unwrap_err(), Error::NotSubdomain);
    }

    #[test]
    fn superpose_identity_and_intensity() {
        let d = dom(10);
        let a = sample_soup(&d, 0.5, 10, 1).unwrap();
        let b = sample_soup(&d, 0.5, 10, 2).unwrap();
        let empty = LoopSoup::empty(d, 10, 9).unwrap();
        assert_eq!(superpose(&a, &empty).unwrap(), a);
        let ab = superpose(&a, &b).unwrap();
        assert_eq!(ab.intensity(), 1.0);
        assert_eq!(ab.len(), a.len() + b.len());
        let other = sample_soup(&dom(11), 0.5, 10, 1).unwrap();
        assert_eq!(superpose(&a, &other).unwrap_err(), Error::DomainMismatch);
    }

    #[test]
    fn mean_length_two_count_per_interior_site() {
        // λ_2 = 1/8 and a length-2 loop rooted at an interior site always
        // stays inside, so the mean count per interior site is c / 8.
        let d = dom(40);
        let reps = 200;
        let mut total = 0usize;
        for r in 0..reps {
            let s = sample_soup(&d, 1.0, 2, r).unwrap();
            total += s.loops().iter().filter(|l| !d.on_edge(l.root())).count();
        }
        let interior = 38.0 * 38.0 * reps as f64;
        let mean = total as f64 / interior;
        let sd = (0.125 / interior).sqrt();
        assert!((mean - 0.125).abs() < 4.0 * sd, "mean {mean}");
    }
}
