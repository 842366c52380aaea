//! Boundary-touch and crossing scans over a coupled intensity grid.

use loopsoup_core::lattice::{LatticeDomain, Point};
use loopsoup_core::rng::derive_seed;
use loopsoup_core::{build_clusters, sample_layered, ClusterSet, LoopSoup};
use serde::{Deserialize, Serialize};

use super::par_map;
use crate::error::{Error, Result};
use crate::io::StatRow;
use crate::stats::wilson95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub c_values: Vec<f64>,
    /// Frame width in lattice sites.
    pub size: u32,
    /// Height over width.
    pub aspect: f64,
    /// Lattice spacing; `1/size` when absent.
    pub mesh: Option<f64>,
    pub max_len: u32,
    pub replicates: u64,
    pub seed: u64,
    /// A cluster is macroscopic when its bounding box spans at least this
    /// fraction of the shorter frame side.
    pub macro_fraction: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            c_values: vec![0.2, 0.6, 1.0, 1.4],
            size: 256,
            aspect: 1.0,
            mesh: None,
            max_len: 512,
            replicates: 200,
            seed: 0,
            macro_fraction: 0.25,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() || self.c_values.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::Config("intensities must be finite and >= 0".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if !(self.aspect > 0.0) || !(self.macro_fraction > 0.0 && self.macro_fraction <= 1.0) {
            return Err(Error::Config("aspect must be > 0 and macro_fraction in (0, 1]".into()));
        }
        self.domain()?;
        loopsoup_core::walk::build_mass_table(self.max_len)?;
        Ok(())
    }

    pub fn domain(&self) -> Result<LatticeDomain> {
        let height = ((self.size as f64) * self.aspect).round().max(1.0) as u32;
        let mesh = self.mesh.unwrap_or(1.0 / self.size.max(1) as f64);
        Ok(LatticeDomain::new(self.size, height, mesh)?)
    }

    fn c_max(&self) -> f64 {
        self.c_values.iter().copied().fold(0.0, f64::max)
    }

    pub fn replicate_seed(&self, rep: u64) -> u64 {
        derive_seed(self.seed, &[rep])
    }
}

/// Per-soup indicators.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// Some macroscopic cluster has a site on the frame's edge ring.
    pub touch: bool,
    /// Some cluster at all has a site on the edge ring.
    pub touch_any: bool,
    /// Some cluster has sites on both the left and the right frame side.
    pub crossing: bool,
    /// The largest cluster holds at least half of all visited sites.
    pub giant: bool,
    pub clusters: u64,
    pub largest: u64,
}

pub(crate) fn macro_extent(domain: &LatticeDomain, fraction: f64) -> u32 {
    let side = domain.width().min(domain.height()) as f64;
    ((fraction * side).ceil() as u32).max(1)
}

pub fn observe_clusters(clusters: &ClusterSet, domain: &LatticeDomain, macro_fraction: f64) -> Observation {
    let extent = macro_extent(domain, macro_fraction);
    let (left, right) = (domain.origin().x, domain.max().x);
    let mut obs = Observation {
        touch: false,
        touch_any: false,
        crossing: false,
        giant: false,
        clusters: clusters.len() as u64,
        largest: clusters.largest_site_count() as u64,
    };
    let mut visited = 0usize;
    for c in clusters.clusters() {
        visited += c.sites.len();
        let edge = c.sites.iter().any(|&p| domain.on_edge(p));
        obs.touch_any |= edge;
        obs.touch |= edge && c.bbox.width().max(c.bbox.height()) >= extent;
        obs.crossing |= c.bbox.min.x == left && c.bbox.max.x == right;
    }
    obs.giant = visited > 0 && 2 * obs.largest as usize >= visited;
    obs
}

pub fn observe(soup: &LoopSoup, macro_fraction: f64) -> Observation {
    observe_clusters(&build_clusters(soup), soup.domain(), macro_fraction)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Indicator {
    Touch,
    TouchAny,
    Crossing,
    Giant,
}

impl Indicator {
    pub const ALL: [Indicator; 4] = [
        Indicator::Touch,
        Indicator::TouchAny,
        Indicator::Crossing,
        Indicator::Giant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Touch => "boundary_touch",
            Indicator::TouchAny => "boundary_touch_any",
            Indicator::Crossing => "crossing",
            Indicator::Giant => "giant_cluster",
        }
    }

    pub fn of(self, o: &Observation) -> bool {
        match self {
            Indicator::Touch => o.touch,
            Indicator::TouchAny => o.touch_any,
            Indicator::Crossing => o.crossing,
            Indicator::Giant => o.giant,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub config: ScanConfig,
    /// `observations[rep][i]` is replicate `rep` at `config.c_values[i]`.
    pub observations: Vec<Vec<Observation>>,
}

impl ScanResult {
    /// `(successes, replicates)` of an indicator at the `i`-th intensity.
    pub fn count(&self, i: usize, ind: Indicator) -> (u64, u64) {
        let k = self.observations.iter().filter(|o| ind.of(&o[i])).count() as u64;
        (k, self.observations.len() as u64)
    }

    pub fn frequency(&self, i: usize, ind: Indicator) -> f64 {
        let (k, n) = self.count(i, ind);
        k as f64 / n as f64
    }

    pub fn rows(&self, indicators: &[Indicator]) -> Vec<StatRow> {
        let mut rows = Vec::new();
        for (i, &c) in self.config.c_values.iter().enumerate() {
            for &ind in indicators {
                let (k, n) = self.count(i, ind);
                let (lo, hi) = wilson95(k, n);
                rows.push(StatRow {
                    c,
                    stat: ind.name().into(),
                    value: k as f64 / n as f64,
                    ci_lo: lo,
                    ci_hi: hi,
                    n,
                });
            }
        }
        rows
    }
}

/// All indicators at every intensity; each replicate is one layered soup
/// observed at every `c`, so indicators are coupled across `c`.
pub fn scan(cfg: &ScanConfig) -> Result<ScanResult> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let c_max = cfg.c_max();
    let observations = par_map(cfg.replicates, |rep| {
        let layered = sample_layered(&domain, c_max, cfg.max_len, cfg.replicate_seed(rep))?;
        Ok(cfg
            .c_values
            .iter()
            .map(|&c| observe(&layered.at(c), cfg.macro_fraction))
            .collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        config: cfg.clone(),
        observations,
    })
}

pub fn boundary_touch_scan(cfg: &ScanConfig) -> Result<Vec<StatRow>> {
    Ok(scan(cfg)?.rows(&[Indicator::Touch, Indicator::TouchAny, Indicator::Giant]))
}

pub fn crossing_scan(cfg: &ScanConfig, aspect: f64) -> Result<Vec<StatRow>> {
    let cfg = ScanConfig { aspect, ..cfg.clone() };
    Ok(scan(&cfg)?.rows(&[Indicator::Crossing]))
}

/// Violations of monotonicity under the layered coupling, summed over
/// replicates and consecutive pairs of the sorted intensity grid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub replicates: u64,
    pub comparisons: u64,
    pub loop_set: u64,
    pub cluster_containment: u64,
    pub touch: u64,
    pub touch_any: u64,
    pub crossing: u64,
}

impl CouplingReport {
    pub fn violations(&self) -> u64 {
        self.loop_set + self.cluster_containment + self.touch + self.touch_any + self.crossing
    }

    fn add(&mut self, o: &CouplingReport) {
        self.replicates += o.replicates;
        self.comparisons += o.comparisons;
        self.loop_set += o.loop_set;
        self.cluster_containment += o.cluster_containment;
        self.touch += o.touch;
        self.touch_any += o.touch_any;
        self.crossing += o.crossing;
    }
}

pub fn coupling_check(cfg: &ScanConfig) -> Result<CouplingReport> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let mut cs = cfg.c_values.clone();
    cs.sort_by(f64::total_cmp);
    let c_max = cfg.c_max();
    let parts = par_map(cfg.replicates, |rep| -> Result<CouplingReport> {
        let layered = sample_layered(&domain, c_max, cfg.max_len, cfg.replicate_seed(rep))?;
        let mut report = CouplingReport {
            replicates: 1,
            ..Default::default()
        };
        let mut prev: Option<(Vec<usize>, Vec<usize>, Observation)> = None;
        for &c in &cs {
            let ids: Vec<usize> = layered.indices_at(c).collect();
            let soup = layered.at(c);
            let clusters = build_clusters(&soup);
            let obs = observe_clusters(&clusters, &domain, cfg.macro_fraction);
            // Cluster id of every present loop, keyed by global loop index.
            let mut owner = vec![usize::MAX; layered.loops().len()];
            for (local, &g) in ids.iter().enumerate() {
                owner[g] = clusters.assignment()[local];
            }
            if let Some((pids, powner, pobs)) = &prev {
                report.comparisons += 1;
                report.loop_set += pids.iter().any(|&g| owner[g] == usize::MAX) as u64;
                // Loops sharing a cluster at the lower intensity must share
                // one at the higher intensity.
                let mut image: Vec<usize> = vec![usize::MAX; pids.len()];
                let mut broken = false;
                for &g in pids {
                    let (lo, hi) = (powner[g], owner[g]);
                    if image[lo] == usize::MAX {
                        image[lo] = hi;
                    } else if image[lo] != hi {
                        broken = true;
                    }
                }
                report.cluster_containment += broken as u64;
                report.touch += (pobs.touch && !obs.touch) as u64;
                report.touch_any += (pobs.touch_any && !obs.touch_any) as u64;
                report.crossing += (pobs.crossing && !obs.crossing) as u64;
            }
            prev = Some((ids, owner, obs));
        }
        Ok(report)
    });
    let mut total = CouplingReport::default();
    for p in parts {
        total.add(&p?);
    }
    Ok(total)
}

/// Squared Euclidean distance in lattice units.
pub(crate) fn dist2(a: Point, b: Point) -> i64 {
    let dx = (a.x - b.x) as i64;
    let dy = (a.y - b.y) as i64;
    dx * dx + dy * dy
}
