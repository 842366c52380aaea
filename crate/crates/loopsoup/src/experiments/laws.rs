//! Two-sample checks of the exact soup identities: superposition adds
//! intensities and restriction to a sub-domain gives the sub-domain soup.
//!
//! Each statistic is compared by a chi-square homogeneity test. Per-cell
//! root counts use one test per `(site, length)` cell with bins
//! `{0, 1, …, ≥ cap}`; cells are independent, so their statistics and
//! degrees of freedom add up to one omnibus test.

use std::collections::BTreeMap;

use loopsoup_core::lattice::{LatticeDomain, Point};
use loopsoup_core::rng::derive_seed;
use loopsoup_core::{restrict, sample_soup, superpose, LoopSoup};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::percolation::observe;
use crate::error::{Error, Result};
use crate::stats::{chi_square_two_sample, ChiSquare};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawConfig {
    pub size: u32,
    pub max_len: u32,
    pub replicates: u64,
    pub seed: u64,
    /// Per-cell count bins are `0..cap` and `≥ cap`.
    pub count_cap: u32,
    pub macro_fraction: f64,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            size: 32,
            max_len: 16,
            replicates: 10_000,
            seed: 0,
            count_cap: 2,
            macro_fraction: 0.25,
        }
    }
}

impl LawConfig {
    fn validate(&self) -> Result<LatticeDomain> {
        if self.replicates < 2 || self.count_cap == 0 {
            return Err(Error::Config("need replicates >= 2 and count_cap >= 1".into()));
        }
        loopsoup_core::walk::build_mass_table(self.max_len)?;
        Ok(LatticeDomain::square(self.size)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawTest {
    pub name: String,
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub replicates: u64,
    pub tests: Vec<LawTest>,
}

impl LawReport {
    /// Every test has p-value above `level`.
    pub fn passes(&self, level: f64) -> bool {
        self.tests.iter().all(|t| t.p_value > level)
    }

    pub fn min_p(&self) -> f64 {
        self.tests.iter().map(|t| t.p_value).fold(1.0, f64::min)
    }
}

/// Histograms of one sample's statistics.
#[derive(Clone, Debug, Default)]
struct Tally {
    /// `cells[cell * (cap+1) + bin]`.
    cells: Vec<u64>,
    /// `per_length[len_index]` maps total count to frequency.
    per_length: Vec<BTreeMap<u64, u64>>,
    clusters: BTreeMap<u64, u64>,
    largest: BTreeMap<u64, u64>,
    touch: [u64; 2],
}

impl Tally {
    fn new(cells: usize, lengths: usize, cap: u32) -> Self {
        Tally {
            cells: vec![0; cells * (cap as usize + 1)],
            per_length: vec![BTreeMap::new(); lengths],
            ..Default::default()
        }
    }

    fn record(&mut self, soup: &LoopSoup, domain: &LatticeDomain, cap: u32, macro_fraction: f64) {
        let counts = soup.root_length_counts(domain);
        let lengths = self.per_length.len();
        let mut totals = vec![0u64; lengths];
        for (cell, &n) in counts.iter().enumerate() {
            self.cells[cell * (cap as usize + 1) + n.min(cap) as usize] += 1;
            totals[cell % lengths] += n as u64;
        }
        for (map, t) in self.per_length.iter_mut().zip(totals) {
            *map.entry(t).or_insert(0) += 1;
        }
        let obs = observe(soup, macro_fraction);
        *self.clusters.entry(obs.clusters).or_insert(0) += 1;
        *self.largest.entry(obs.largest).or_insert(0) += 1;
        self.touch[obs.touch as usize] += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.cells.iter_mut().zip(other.cells) {
            *a += b;
        }
        for (a, b) in self.per_length.iter_mut().zip(other.per_length) {
            merge_map(a, b);
        }
        merge_map(&mut self.clusters, other.clusters);
        merge_map(&mut self.largest, other.largest);
        self.touch[0] += other.touch[0];
        self.touch[1] += other.touch[1];
        self
    }
}

fn merge_map(a: &mut BTreeMap<u64, u64>, b: BTreeMap<u64, u64>) {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
}

/// Two histograms over the union of their keys, in key order.
fn aligned(a: &BTreeMap<u64, u64>, b: &BTreeMap<u64, u64>) -> (Vec<u64>, Vec<u64>) {
    let keys: std::collections::BTreeSet<u64> = a.keys().chain(b.keys()).copied().collect();
    keys.iter()
        .map(|k| (a.get(k).copied().unwrap_or(0), b.get(k).copied().unwrap_or(0)))
        .unzip()
}

fn test(name: &str, chi: ChiSquare) -> LawTest {
    LawTest {
        name: name.into(),
        statistic: chi.statistic,
        dof: chi.dof,
        p_value: chi.p_value,
    }
}

fn compare(a: &Tally, b: &Tally, cap: u32) -> Vec<LawTest> {
    let bins = cap as usize + 1;
    let cells = ChiSquare::combine(
        a.cells
            .chunks(bins)
            .zip(b.cells.chunks(bins))
            .map(|(x, y)| chi_square_two_sample(x, y)),
    );
    let lengths = ChiSquare::combine(a.per_length.iter().zip(&b.per_length).map(|(x, y)| {
        let (x, y) = aligned(x, y);
        chi_square_two_sample(&x, &y)
    }));
    let (ca, cb) = aligned(&a.clusters, &b.clusters);
    let (la, lb) = aligned(&a.largest, &b.largest);
    vec![
        test("root_length_cells", cells),
        test("loops_per_length", lengths),
        test("cluster_count", chi_square_two_sample(&ca, &cb)),
        test("largest_cluster_sites", chi_square_two_sample(&la, &lb)),
        test("boundary_touch", chi_square_two_sample(&a.touch, &b.touch)),
    ]
}

/// Tally two samples per replicate, in parallel over replicates. Integer
/// tallies make the merge order irrelevant.
fn tally_pair(
    cfg: &LawConfig,
    domain: &LatticeDomain,
    sample: impl Fn(u64) -> Result<(LoopSoup, LoopSoup)> + Sync,
) -> Result<(Tally, Tally)> {
    let lengths = (cfg.max_len / 2) as usize;
    let empty = || {
        let t = Tally::new(domain.site_count() * lengths, lengths, cfg.count_cap);
        (t.clone(), t)
    };
    (0..cfg.replicates)
        .into_par_iter()
        .try_fold(empty, |(mut ta, mut tb), rep| {
            let (a, b) = sample(rep)?;
            ta.record(&a, domain, cfg.count_cap, cfg.macro_fraction);
            tb.record(&b, domain, cfg.count_cap, cfg.macro_fraction);
            Ok((ta, tb))
        })
        .try_reduce(empty, |(a1, b1), (a2, b2)| Ok((a1.merge(a2), b1.merge(b2))))
}

/// `superpose(sample(c1), sample(c2))` against `sample(c1 + c2)`.
pub fn additivity_check(c1: f64, c2: f64, cfg: &LawConfig) -> Result<LawReport> {
    let domain = cfg.validate()?;
    if !(c1 >= 0.0 && c2 >= 0.0) {
        return Err(Error::Config("intensities must be >= 0".into()));
    }
    let (a, b) = tally_pair(cfg, &domain, |rep| {
        let s1 = sample_soup(&domain, c1, cfg.max_len, derive_seed(cfg.seed, &[rep, 0]))?;
        let s2 = sample_soup(&domain, c2, cfg.max_len, derive_seed(cfg.seed, &[rep, 1]))?;
        let joint = sample_soup(&domain, c1 + c2, cfg.max_len, derive_seed(cfg.seed, &[rep, 2]))?;
        Ok((superpose(&s1, &s2)?, joint))
    })?;
    Ok(LawReport {
        replicates: cfg.replicates,
        tests: compare(&a, &b, cfg.count_cap),
    })
}

/// Sub-rectangle `(x0, y0, width, height)`; the centred half-size square
/// when absent.
pub fn sub_domain(frame: &LatticeDomain, sub: Option<(i32, i32, u32, u32)>) -> Result<LatticeDomain> {
    Ok(match sub {
        Some((x, y, w, h)) => frame.subdomain(Point::new(x, y), w, h)?,
        None => frame.centered_half()?,
    })
}

/// `restrict(sample(frame), sub)` against `sample(sub)`.
pub fn restriction_check(c: f64, sub: Option<(i32, i32, u32, u32)>, cfg: &LawConfig) -> Result<LawReport> {
    let frame = cfg.validate()?;
    let sub = sub_domain(&frame, sub)?;
    let (a, b) = tally_pair(cfg, &sub, |rep| {
        let big = sample_soup(&frame, c, cfg.max_len, derive_seed(cfg.seed, &[rep, 0]))?;
        let small = sample_soup(&sub, c, cfg.max_len, derive_seed(cfg.seed, &[rep, 1]))?;
        Ok((restrict(&big, &sub)?, small))
    })?;
    Ok(LawReport {
        replicates: cfg.replicates,
        tests: compare(&a, &b, cfg.count_cap),
    })
}
