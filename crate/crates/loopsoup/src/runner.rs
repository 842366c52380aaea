//! Typed run configurations, dispatch, manifests and result merging.
//!
//! Data files depend only on the resolved [`RunConfig`] minus the thread
//! count. Wall-clock time and the thread count live in the manifest only.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use loopsoup_core::capacity::{Hull, DEFAULT_MIN_LEVEL};
use loopsoup_core::fractal::sample_fractal;
use loopsoup_core::lattice::LatticeDomain;
use loopsoup_core::rng::derive_seed;
use loopsoup_core::{build_clusters, formulas, outermost, sample_soup, trace_outer_boundary};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::annulus::{annulus_chain_tail, AnnulusConfig};
use crate::experiments::capacity::{
    m_alpha, monotonicity_subadditivity_check, r_ratio_check, sandwich_check, scaling_check, slit_check,
    unit_square_capacity, CapacityConfig,
};
use crate::experiments::fractal::{crossing_scan as fractal_crossing, survival_scan, FractalConfig};
use crate::experiments::laws::{additivity_check, restriction_check, LawConfig, LawReport};
use crate::experiments::percolation::{scan, Indicator, ScanConfig};
use crate::io::{self, StatRow};
use crate::stats::wilson95;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityMode {
    /// `M_α` of the hull for each α.
    Estimate,
    /// The hull is replaced by a slit of the given height.
    Slit {
        height: f64,
    },
    Scaling {
        scales: Vec<f64>,
    },
    /// Second hull `B` for monotonicity and subadditivity.
    Union {
        other: Vec<[f64; 5]>,
    },
    Sandwich {
        min_level: i32,
    },
    Ratio {
        levels: Vec<i32>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    Soup {
        c: f64,
        size: u32,
        max_len: u32,
    },
    Clusters {
        c: f64,
        size: u32,
        max_len: u32,
    },
    Scan(ScanConfig),
    Annulus(AnnulusConfig),
    Additivity {
        c1: f64,
        c2: f64,
        law: LawConfig,
    },
    Restriction {
        c: f64,
        sub: Option<(i32, i32, u32, u32)>,
        law: LawConfig,
    },
    Fractal {
        cfg: FractalConfig,
        /// Crossing frequencies at this (materializable) depth.
        crossing_depth: Option<u32>,
        /// Write a PBM of one sample at `(p, depth)`.
        bitmap: Option<(f64, u32)>,
    },
    Capacity {
        /// Shapes as `[kind, x0, y0, x1, y1]` with kind 0 = segment, 1 = box.
        hull: Vec<[f64; 5]>,
        alphas: Vec<f64>,
        cfg: CapacityConfig,
        mode: CapacityMode,
    },
    Formulas {
        start: f64,
        stop: f64,
        step: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Soup { .. } => "soup",
            Command::Clusters { .. } => "clusters",
            Command::Scan(_) => "scan",
            Command::Annulus(_) => "annulus",
            Command::Additivity { .. } => "additivity",
            Command::Restriction { .. } => "restriction",
            Command::Fractal { .. } => "fractal",
            Command::Capacity { .. } => "capacity",
            Command::Formulas { .. } => "formulas",
        }
    }

    /// Copy the master seed into the experiment configuration.
    fn seeded(&self, seed: u64) -> Command {
        let mut c = self.clone();
        match &mut c {
            Command::Scan(s) => s.seed = seed,
            Command::Annulus(a) => a.seed = seed,
            Command::Additivity { law, .. } | Command::Restriction { law, .. } => law.seed = seed,
            Command::Fractal { cfg, .. } => cfg.seed = seed,
            Command::Capacity { cfg, .. } => cfg.seed = seed,
            _ => {}
        }
        c
    }

    /// Seeds of the independent replicates the run will draw.
    fn replicate_seeds(&self, seed: u64) -> Vec<u64> {
        let n = match self {
            Command::Scan(s) => s.replicates,
            Command::Annulus(a) => a.replicates,
            Command::Additivity { law, .. } | Command::Restriction { law, .. } => law.replicates,
            Command::Fractal { cfg, .. } => cfg.samples,
            _ => return vec![seed],
        };
        (0..n).map(|i| derive_seed(seed, &[i])).collect()
    }
}

pub fn hull_from_rows(rows: &[[f64; 5]]) -> Result<Hull> {
    use loopsoup_core::capacity::Shape;
    let shapes = rows
        .iter()
        .map(|r| match r[0] as i32 {
            0 => Ok(Shape::segment(r[1], r[2], r[3], r[4])),
            1 => Ok(Shape::rect(r[1], r[2], r[3], r[4])),
            k => Err(Error::Config(format!("unknown shape kind {k}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Hull::new(shapes)?)
}

pub fn hull_to_rows(hull: &Hull) -> Vec<[f64; 5]> {
    use loopsoup_core::capacity::Shape;
    hull.shapes()
        .iter()
        .map(|s| match *s {
            Shape::Segment { a, b } => [0.0, a.x, a.y, b.x, b.y],
            Shape::Box { min, max } => [1.0, min.x, min.y, max.x, max.y],
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    /// Worker threads; the pool default when absent. Does not affect data.
    pub threads: Option<usize>,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: RunConfig,
    pub replicate_seeds: Vec<u64>,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// JSON sidecar written next to every result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar<T> {
    pub tool_version: String,
    pub command: Command,
    pub seed: u64,
    pub result: T,
}

struct Emitter<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Emitter<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = self.path(name);
        io::write_csv(&p, rows)
    }

    fn json<T: Serialize>(&mut self, name: &str, cmd: &Command, seed: u64, result: T) -> Result<()> {
        let p = self.path(name);
        io::write_json(
            &p,
            &Sidecar {
                tool_version: TOOL_VERSION.into(),
                command: cmd.clone(),
                seed,
                result,
            },
        )
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        io::write_text(&p, text)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Run on a pool of `cfg.threads` workers and write outputs plus manifest.
pub fn run(cfg: &RunConfig) -> Result<RunManifest> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let command = cfg.command.seeded(cfg.seed);
    let files = pool.install(|| dispatch(&command, cfg.seed, &cfg.out))?;
    let outputs = files
        .iter()
        .map(|f| {
            Ok(OutputDigest {
                file: f.clone(),
                sha256: sha256_file(&cfg.out.join(f))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.into(),
        config: RunConfig { command, ..cfg.clone() },
        replicate_seeds: cfg.command.replicate_seeds(cfg.seed),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs,
    };
    io::write_json(&cfg.out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Re-run the configuration recorded in a manifest into `out` and list the
/// files whose digests differ.
pub fn rerun(manifest_path: &Path, out: &Path, threads: Option<usize>) -> Result<Vec<String>> {
    let old: RunManifest = io::read_json(manifest_path)?;
    let cfg = RunConfig {
        out: out.to_path_buf(),
        threads: threads.or(old.config.threads),
        ..old.config.clone()
    };
    let new = run(&cfg)?;
    let fresh: BTreeMap<&str, &str> = new
        .outputs
        .iter()
        .map(|o| (o.file.as_str(), o.sha256.as_str()))
        .collect();
    Ok(old
        .outputs
        .iter()
        .filter(|o| fresh.get(o.file.as_str()) != Some(&o.sha256.as_str()))
        .map(|o| o.file.clone())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ClusterRecord {
    id: usize,
    loop_count: usize,
    site_count: usize,
    fill_count: usize,
    outermost: bool,
    touches_boundary: bool,
    bbox_min_x: i32,
    bbox_min_y: i32,
    bbox_max_x: i32,
    bbox_max_y: i32,
    contour_len: usize,
    pinch_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct FormulaRow {
    c: f64,
    kappa: f64,
    boundary_dimension: f64,
    carpet_dimension: f64,
    sle_dimension: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CapacityRow {
    alpha: f64,
    estimate: f64,
    stderr: f64,
    walks: u64,
    /// Grounded with no enclosed region; `M_α` is estimated either way.
    is_hull: bool,
}

fn dispatch(cmd: &Command, seed: u64, dir: &Path) -> Result<Vec<String>> {
    let mut e = Emitter { dir, files: Vec::new() };
    match cmd {
        Command::Soup { c, size, max_len } => {
            let soup = sample_soup(&LatticeDomain::square(*size)?, *c, *max_len, seed)?;
            e.text("soup.txt", &io::write_soup(&soup))?;
        }
        Command::Clusters { c, size, max_len } => {
            let domain = LatticeDomain::square(*size)?;
            let soup = sample_soup(&domain, *c, *max_len, seed)?;
            let clusters = build_clusters(&soup);
            let mut rows = Vec::new();
            let mut contours = String::new();
            for fc in outermost(&clusters, &domain) {
                let cl = clusters.cluster(fc.cluster);
                let (len, pinches) = if fc.outermost {
                    let b = trace_outer_boundary(&fc)?;
                    contours.push_str(&format!("{}", fc.cluster));
                    for p in b.points() {
                        contours.push_str(&format!(" {},{}", p.x, p.y));
                    }
                    contours.push('\n');
                    (b.len(), b.pinch_points().len())
                } else {
                    (0, 0)
                };
                rows.push(ClusterRecord {
                    id: fc.cluster,
                    loop_count: cl.loops.len(),
                    site_count: cl.sites.len(),
                    fill_count: fc.fill_count,
                    outermost: fc.outermost,
                    touches_boundary: fc.touches_boundary,
                    bbox_min_x: cl.bbox.min.x,
                    bbox_min_y: cl.bbox.min.y,
                    bbox_max_x: cl.bbox.max.x,
                    bbox_max_y: cl.bbox.max.y,
                    contour_len: len,
                    pinch_points: pinches,
                });
            }
            e.csv("clusters.csv", &rows)?;
            e.text("contours.txt", &contours)?;
        }
        Command::Scan(cfg) => {
            let r = scan(cfg)?;
            let rows = r.rows(&Indicator::ALL);
            e.csv("scan.csv", &rows)?;
            e.json("scan.json", cmd, seed, &rows)?;
        }
        Command::Annulus(cfg) => {
            let r = annulus_chain_tail(cfg)?;
            e.csv("annulus.csv", &r.tail)?;
            e.json("annulus.json", cmd, seed, &r)?;
        }
        Command::Additivity { c1, c2, law } => {
            let r = additivity_check(*c1, *c2, law)?;
            emit_law(&mut e, "additivity", cmd, seed, &r)?;
        }
        Command::Restriction { c, sub, law } => {
            let r = restriction_check(*c, *sub, law)?;
            emit_law(&mut e, "restriction", cmd, seed, &r)?;
        }
        Command::Fractal {
            cfg,
            crossing_depth,
            bitmap,
        } => {
            let rows = survival_scan(cfg)?;
            e.csv("survival.csv", &rows)?;
            e.json("survival.json", cmd, seed, &rows)?;
            if let Some(depth) = crossing_depth {
                let rows = fractal_crossing(&FractalConfig {
                    depth: *depth,
                    ..cfg.clone()
                })?;
                e.csv("crossing.csv", &rows)?;
            }
            if let Some((p, depth)) = bitmap {
                let fp = sample_fractal(*p, *depth, seed)?;
                e.text("fractal.pbm", &io::fractal_pbm(&fp))?;
            }
        }
        Command::Capacity {
            hull,
            alphas,
            cfg,
            mode,
        } => {
            let h = hull_from_rows(hull)?;
            match mode {
                CapacityMode::Estimate => {
                    let is_hull = h.is_hull();
                    let rows = alphas
                        .iter()
                        .map(|&a| {
                            let r = m_alpha(&h, a, cfg)?;
                            Ok(CapacityRow {
                                alpha: a,
                                estimate: r.estimate,
                                stderr: r.stderr,
                                walks: r.walks,
                                is_hull,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    e.csv("capacity.csv", &rows)?;
                    e.json("capacity.json", cmd, seed, &rows)?;
                }
                CapacityMode::Slit { height } => {
                    let r = slit_check(*height, cfg)?;
                    e.json("capacity.json", cmd, seed, &r)?;
                }
                CapacityMode::Scaling { scales } => {
                    let r = scaling_check(&h, alphas, scales, cfg)?;
                    e.json("capacity.json", cmd, seed, &r)?;
                }
                CapacityMode::Union { other } => {
                    let b = hull_from_rows(other)?;
                    let r = alphas
                        .iter()
                        .map(|&a| monotonicity_subadditivity_check(&h, &b, a, cfg))
                        .collect::<Result<Vec<_>>>()?;
                    e.json("capacity.json", cmd, seed, &r)?;
                }
                CapacityMode::Sandwich { min_level } => {
                    let r = alphas
                        .iter()
                        .map(|&a| {
                            let unit = unit_square_capacity(
                                a,
                                &CapacityConfig {
                                    seed: derive_seed(seed, &[1]),
                                    ..cfg.clone()
                                },
                            )?;
                            sandwich_check(&h, a, &unit, *min_level, cfg)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    e.json("capacity.json", cmd, seed, &r)?;
                }
                CapacityMode::Ratio { levels } => {
                    let r = alphas
                        .iter()
                        .map(|&a| r_ratio_check(a, levels, cfg))
                        .collect::<Result<Vec<_>>>()?;
                    e.json("capacity.json", cmd, seed, &r)?;
                }
            }
        }
        Command::Formulas { start, stop, step } => {
            if !(*step > 0.0) || stop < start {
                return Err(Error::Config("grid needs start <= stop and step > 0".into()));
            }
            let n = ((stop - start) / step + 1e-9).floor() as u64;
            let rows = (0..=n)
                .map(|i| {
                    let c = start + i as f64 * step;
                    let kappa = formulas::kappa_of_c(c)?;
                    Ok(FormulaRow {
                        c,
                        kappa,
                        boundary_dimension: formulas::boundary_dimension(c)?,
                        carpet_dimension: formulas::carpet_dimension(c)?,
                        sle_dimension: formulas::sle_dimension(kappa),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            e.csv("formulas.csv", &rows)?;
        }
    }
    Ok(e.files)
}

fn emit_law(e: &mut Emitter, name: &str, cmd: &Command, seed: u64, r: &LawReport) -> Result<()> {
    e.csv(&format!("{name}.csv"), &r.tests)?;
    e.json(&format!("{name}.json"), cmd, seed, r)
}

/// Default capacity floor level, re-exported for the CLI.
pub const DEFAULT_TILING_FLOOR: i32 = DEFAULT_MIN_LEVEL;

/// Pool binomial result tables. Each input `x.csv` needs a sidecar
/// `x.json`; sidecar commands must agree after the seed is cleared.
/// Rows are pooled per `(c, stat)` and sorted, so the merge is
/// associative and commutative.
pub fn merge_results(inputs: &[PathBuf]) -> Result<Vec<StatRow>> {
    if inputs.is_empty() {
        return Err(Error::Merge("no inputs".into()));
    }
    let mut reference: Option<Command> = None;
    let mut pooled: BTreeMap<(u64, String), (f64, u64, u64)> = BTreeMap::new();
    for path in inputs {
        let side: Sidecar<serde_json::Value> = io::read_json(&path.with_extension("json"))?;
        let cmd = side.command.seeded(0);
        match &reference {
            None => reference = Some(cmd),
            Some(r) if *r != cmd => {
                return Err(Error::Merge(format!(
                    "{} has a different configuration",
                    path.display()
                )))
            }
            _ => {}
        }
        for row in io::read_csv::<StatRow>(path)? {
            let k = (row.value * row.n as f64).round() as u64;
            let e = pooled
                .entry((row.c.to_bits(), row.stat.clone()))
                .or_insert((row.c, 0, 0));
            e.1 += k;
            e.2 += row.n;
        }
    }
    let mut rows: Vec<StatRow> = pooled
        .into_iter()
        .map(|((_, stat), (c, k, n))| {
            let (lo, hi) = wilson95(k, n);
            StatRow {
                c,
                stat,
                value: k as f64 / n as f64,
                ci_lo: lo,
                ci_hi: hi,
                n,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.c.total_cmp(&b.c).then_with(|| a.stat.cmp(&b.stat)));
    Ok(rows)
}

/// Write a merged table plus its sidecar (carrying the shared command).
pub fn write_merged(inputs: &[PathBuf], out: &Path) -> Result<Vec<StatRow>> {
    let rows = merge_results(inputs)?;
    let side: Sidecar<serde_json::Value> = io::read_json(&inputs[0].with_extension("json"))?;
    io::write_csv(out, &rows)?;
    io::write_json(
        &out.with_extension("json"),
        &Sidecar {
            tool_version: TOOL_VERSION.into(),
            command: side.command.seeded(0),
            seed: 0,
            result: &rows,
        },
    )?;
    Ok(rows)
}
