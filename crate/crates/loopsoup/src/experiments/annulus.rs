//! Number of distinct clusters crossing an annulus around the frame centre.

use loopsoup_core::fit::{least_squares, LineFit};
use loopsoup_core::lattice::LatticeDomain;
use loopsoup_core::rng::derive_seed;
use loopsoup_core::{build_clusters, sample_soup, ClusterSet};
use serde::{Deserialize, Serialize};

use super::par_map;
use super::percolation::dist2;
use crate::error::{Error, Result};
use crate::stats::wilson95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusConfig {
    pub c: f64,
    pub inner: f64,
    pub outer: f64,
    pub size: u32,
    pub max_len: u32,
    pub replicates: u64,
    pub seed: u64,
    /// Tail points with fewer hits are left out of the fit.
    pub min_hits: u64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        AnnulusConfig {
            c: 0.5,
            inner: 8.0,
            outer: 32.0,
            size: 512,
            max_len: 512,
            replicates: 2000,
            seed: 0,
            min_hits: 20,
        }
    }
}

impl AnnulusConfig {
    pub fn validate(&self) -> Result<LatticeDomain> {
        if !(self.c >= 0.0 && self.c.is_finite()) || self.replicates == 0 {
            return Err(Error::Config("need c >= 0 and at least one replicate".into()));
        }
        if !(self.inner > 0.0 && self.inner < self.outer) {
            return Err(Error::Config("annulus needs 0 < inner < outer".into()));
        }
        let domain = LatticeDomain::square(self.size)?;
        let centre = domain.center();
        let room = (centre.x - domain.origin().x)
            .min(centre.y - domain.origin().y)
            .min(domain.max().x - centre.x)
            .min(domain.max().y - centre.y);
        if self.outer > room as f64 {
            return Err(Error::Config("annulus does not fit inside the frame".into()));
        }
        loopsoup_core::walk::build_mass_table(self.max_len)?;
        Ok(domain)
    }
}

/// Clusters with a site within `inner` of the centre and a site at distance
/// at least `outer`.
pub fn crossing_clusters(clusters: &ClusterSet, domain: &LatticeDomain, inner: f64, outer: f64) -> u32 {
    let centre = domain.center();
    let (r2, big_r2) = (inner * inner, outer * outer);
    clusters
        .clusters()
        .iter()
        .filter(|c| {
            let d = |p| dist2(p, centre) as f64;
            c.sites.iter().any(|&p| d(p) <= r2) && c.sites.iter().any(|&p| d(p) >= big_r2)
        })
        .count() as u32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: u32,
    pub hits: u64,
    pub n: u64,
    pub frequency: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusResult {
    pub config: AnnulusConfig,
    pub counts: Vec<u32>,
    /// Frequency of at least `k` crossing clusters, `k = 0, 1, …, max`.
    pub tail: Vec<TailRow>,
    /// Least-squares line through `(k, ln frequency)` for `k ≥ 1` with at
    /// least `min_hits` hits.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub fit_points: usize,
}

pub fn tail_table(counts: &[u32]) -> Vec<TailRow> {
    let n = counts.len() as u64;
    let max = counts.iter().copied().max().unwrap_or(0);
    (0..=max)
        .map(|k| {
            let hits = counts.iter().filter(|&&c| c >= k).count() as u64;
            let (lo, hi) = wilson95(hits, n);
            TailRow {
                k,
                hits,
                n,
                frequency: hits as f64 / n as f64,
                ci_lo: lo,
                ci_hi: hi,
            }
        })
        .collect()
}

pub fn fit_tail(tail: &[TailRow], min_hits: u64) -> (Option<LineFit>, usize) {
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.k >= 1 && r.hits >= min_hits)
        .map(|r| (r.k as f64, r.frequency.ln()))
        .collect();
    (least_squares(&pts), pts.len())
}

pub fn annulus_chain_tail(cfg: &AnnulusConfig) -> Result<AnnulusResult> {
    let domain = cfg.validate()?;
    let counts = par_map(cfg.replicates, |rep| {
        let soup = sample_soup(&domain, cfg.c, cfg.max_len, derive_seed(cfg.seed, &[rep]))?;
        Ok(crossing_clusters(&build_clusters(&soup), &domain, cfg.inner, cfg.outer))
    })
    .into_iter()
    .collect::<Result<Vec<u32>>>()?;
    let tail = tail_table(&counts);
    let (fit, fit_points) = fit_tail(&tail, cfg.min_hits);
    Ok(AnnulusResult {
        config: cfg.clone(),
        counts,
        tail,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        r2: fit.map(|f| f.r2),
        fit_points,
    })
}
