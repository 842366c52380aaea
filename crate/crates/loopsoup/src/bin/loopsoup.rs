//! `loopsoup`: command-line entry point for the loop-soup laboratory.
//!
//! Every experiment flag may also come from a `key=value` config file given
//! with `--config`; flags win over the file, the file over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use loopsoup::experiments::annulus::AnnulusConfig;
use loopsoup::experiments::capacity::CapacityConfig;
use loopsoup::experiments::fractal::FractalConfig;
use loopsoup::experiments::laws::LawConfig;
use loopsoup::experiments::percolation::ScanConfig;
use loopsoup::io::parse_hull;
use loopsoup::runner::{self, hull_to_rows, CapacityMode, Command, RunConfig, DEFAULT_TILING_FLOOR};
use loopsoup::{Error, Result};

const OUT_ENV: &str = "LOOPSOUP_OUT";

#[derive(Parser, Debug)]
#[command(name = "loopsoup", version, about = "Random-walk loop-soup laboratory")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory [env: LOOPSOUP_OUT; default: loopsoup-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key=value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample a soup and write it in the text format.
    Soup(SoupArgs),
    /// Sample a soup and write per-cluster records and outer contours.
    Clusters(SoupArgs),
    /// Coupled scan of boundary-touch, crossing and giant-cluster frequencies.
    Scan(ScanArgs),
    /// Tail of the number of clusters crossing an annulus.
    Annulus(AnnulusArgs),
    /// Superposition of two soups against one soup of the summed intensity.
    Additivity(AdditivityArgs),
    /// Restricted frame soup against the sub-domain soup.
    Restriction(RestrictionArgs),
    /// Fractal percolation survival and crossing.
    Fractal(FractalArgs),
    /// Monte Carlo generalized half-plane capacity.
    Capacity(CapacityArgs),
    /// Table of κ(c) and the dimension formulas.
    Formulas(FormulaArgs),
    /// Pool result tables from runs that differ only in seed.
    Merge(MergeArgs),
    /// Re-run a manifest and compare output digests.
    Rerun(RerunArgs),
}

#[derive(Args, Debug)]
struct SoupArgs {
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    max_len: Option<String>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Comma-separated intensities.
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    aspect: Option<String>,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    max_len: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    macro_fraction: Option<String>,
}

#[derive(Args, Debug)]
struct AnnulusArgs {
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    inner: Option<String>,
    #[arg(long)]
    outer: Option<String>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    max_len: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    min_hits: Option<String>,
}

#[derive(Args, Debug)]
struct LawArgs {
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    max_len: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    count_cap: Option<String>,
}

#[derive(Args, Debug)]
struct AdditivityArgs {
    #[arg(long)]
    c1: Option<String>,
    #[arg(long)]
    c2: Option<String>,
    #[command(flatten)]
    law: LawArgs,
}

#[derive(Args, Debug)]
struct RestrictionArgs {
    #[arg(long)]
    c: Option<String>,
    /// Sub-rectangle `x,y,width,height`; centred half-size square if absent.
    #[arg(long)]
    sub: Option<String>,
    #[command(flatten)]
    law: LawArgs,
}

#[derive(Args, Debug)]
struct FractalArgs {
    /// Comma-separated retention probabilities.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    crossing_depth: Option<String>,
    /// Write one sample as PBM: `p:depth`.
    #[arg(long)]
    bitmap: Option<String>,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    /// Hull file with `seg`/`box` lines.
    #[arg(long)]
    hull: Option<String>,
    /// Use a vertical slit of this height as the hull.
    #[arg(long)]
    slit: Option<String>,
    /// Comma-separated exponents α.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    walks: Option<String>,
    #[arg(long)]
    shell: Option<String>,
    #[arg(long)]
    radius_factor: Option<String>,
    /// estimate | slit | scaling | union | sandwich | ratio
    #[arg(long)]
    check: Option<String>,
    #[arg(long)]
    scales: Option<String>,
    /// Second hull file for `--check union`.
    #[arg(long)]
    other: Option<String>,
    #[arg(long)]
    min_level: Option<String>,
    #[arg(long)]
    levels: Option<String>,
}

#[derive(Args, Debug)]
struct FormulaArgs {
    /// `start:stop:step`.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args, Debug)]
struct MergeArgs {
    /// Result CSV files, each with a `.json` sidecar.
    inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct RerunArgs {
    manifest: PathBuf,
}

/// Flag values layered over a config file.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
                file.insert(k.trim().replace('-', "_"), v.trim().to_string());
            }
        }
        Ok(Settings { file })
    }

    fn raw(&self, key: &str, flag: &Option<String>) -> Option<String> {
        flag.clone().or_else(|| self.file.get(key).cloned())
    }

    fn get<T: FromStr>(&self, key: &str, flag: &Option<String>, default: T) -> Result<T> {
        match self.raw(key, flag) {
            Some(v) => parse(key, &v),
            None => Ok(default),
        }
    }

    fn opt<T: FromStr>(&self, key: &str, flag: &Option<String>) -> Result<Option<T>> {
        self.raw(key, flag).map(|v| parse(key, &v)).transpose()
    }

    fn list<T: FromStr>(&self, key: &str, flag: &Option<String>, default: Vec<T>) -> Result<Vec<T>> {
        match self.raw(key, flag) {
            Some(v) => v.split(',').map(|s| parse(key, s.trim())).collect(),
            None => Ok(default),
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
}

fn pair<A: FromStr, B: FromStr>(key: &str, v: &str, sep: char) -> Result<(A, B)> {
    let (a, b) = v
        .split_once(sep)
        .ok_or_else(|| Error::Config(format!("{key} expects `a{sep}b`")))?;
    Ok((parse(key, a)?, parse(key, b)?))
}

fn law(s: &Settings, a: &LawArgs) -> Result<LawConfig> {
    let d = LawConfig::default();
    Ok(LawConfig {
        size: s.get("size", &a.size, d.size)?,
        max_len: s.get("max_len", &a.max_len, d.max_len)?,
        replicates: s.get("reps", &a.reps, d.replicates)?,
        count_cap: s.get("count_cap", &a.count_cap, d.count_cap)?,
        ..d
    })
}

fn read_hull_rows(path: &str) -> Result<Vec<[f64; 5]>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(hull_to_rows(&parse_hull(&text)?))
}

fn command(cmd: &Cmd, s: &Settings) -> Result<Command> {
    Ok(match cmd {
        Cmd::Soup(a) | Cmd::Clusters(a) => {
            let c = s.get("c", &a.c, 1.0)?;
            let size = s.get("size", &a.size, 128)?;
            let max_len = s.get("max_len", &a.max_len, 256)?;
            if matches!(cmd, Cmd::Soup(_)) {
                Command::Soup { c, size, max_len }
            } else {
                Command::Clusters { c, size, max_len }
            }
        }
        Cmd::Scan(a) => {
            let d = ScanConfig::default();
            Command::Scan(ScanConfig {
                c_values: s.list("c", &a.c, d.c_values)?,
                size: s.get("size", &a.size, d.size)?,
                aspect: s.get("aspect", &a.aspect, d.aspect)?,
                mesh: s.opt("mesh", &a.mesh)?,
                max_len: s.get("max_len", &a.max_len, d.max_len)?,
                replicates: s.get("reps", &a.reps, d.replicates)?,
                macro_fraction: s.get("macro_fraction", &a.macro_fraction, d.macro_fraction)?,
                seed: 0,
            })
        }
        Cmd::Annulus(a) => {
            let d = AnnulusConfig::default();
            Command::Annulus(AnnulusConfig {
                c: s.get("c", &a.c, d.c)?,
                inner: s.get("inner", &a.inner, d.inner)?,
                outer: s.get("outer", &a.outer, d.outer)?,
                size: s.get("size", &a.size, d.size)?,
                max_len: s.get("max_len", &a.max_len, d.max_len)?,
                replicates: s.get("reps", &a.reps, d.replicates)?,
                min_hits: s.get("min_hits", &a.min_hits, d.min_hits)?,
                seed: 0,
            })
        }
        Cmd::Additivity(a) => Command::Additivity {
            c1: s.get("c1", &a.c1, 0.5)?,
            c2: s.get("c2", &a.c2, 0.5)?,
            law: law(s, &a.law)?,
        },
        Cmd::Restriction(a) => {
            let sub = match s.raw("sub", &a.sub) {
                Some(v) => {
                    let parts: Vec<&str> = v.split(',').collect();
                    if parts.len() != 4 {
                        return Err(Error::Config("sub expects x,y,width,height".into()));
                    }
                    Some((
                        parse("sub", parts[0])?,
                        parse("sub", parts[1])?,
                        parse("sub", parts[2])?,
                        parse("sub", parts[3])?,
                    ))
                }
                None => None,
            };
            Command::Restriction {
                c: s.get("c", &a.c, 1.0)?,
                sub,
                law: law(s, &a.law)?,
            }
        }
        Cmd::Fractal(a) => {
            let d = FractalConfig::default();
            Command::Fractal {
                cfg: FractalConfig {
                    p_values: s.list("p", &a.p, d.p_values)?,
                    depth: s.get("depth", &a.depth, d.depth)?,
                    samples: s.get("samples", &a.samples, d.samples)?,
                    seed: 0,
                },
                crossing_depth: s.opt("crossing_depth", &a.crossing_depth)?,
                bitmap: s
                    .raw("bitmap", &a.bitmap)
                    .map(|v| pair("bitmap", &v, ':'))
                    .transpose()?,
            }
        }
        Cmd::Capacity(a) => {
            let d = CapacityConfig::default();
            let cfg = CapacityConfig {
                walks: s.get("walks", &a.walks, d.walks)?,
                shell: s.get("shell", &a.shell, d.shell)?,
                radius_factor: s.get("radius_factor", &a.radius_factor, d.radius_factor)?,
                seed: 0,
            };
            let slit: Option<f64> = s.opt("slit", &a.slit)?;
            let hull = match (s.raw("hull", &a.hull), slit) {
                (Some(path), _) => read_hull_rows(&path)?,
                (None, Some(h)) => vec![[0.0, 0.0, 0.0, 0.0, h]],
                (None, None) => return Err(Error::Config("capacity needs --hull or --slit".into())),
            };
            let check = s.get("check", &a.check, "estimate".to_string())?;
            let mode = match check.as_str() {
                "estimate" => CapacityMode::Estimate,
                "slit" => CapacityMode::Slit {
                    height: slit.ok_or_else(|| Error::Config("--check slit needs --slit".into()))?,
                },
                "scaling" => CapacityMode::Scaling {
                    scales: s.list("scales", &a.scales, vec![0.5, 1.0, 2.0, 4.0])?,
                },
                "union" => CapacityMode::Union {
                    other: read_hull_rows(
                        &s.raw("other", &a.other)
                            .ok_or_else(|| Error::Config("--check union needs --other".into()))?,
                    )?,
                },
                "sandwich" => CapacityMode::Sandwich {
                    min_level: s.get("min_level", &a.min_level, DEFAULT_TILING_FLOOR)?,
                },
                "ratio" => CapacityMode::Ratio {
                    levels: s.list("levels", &a.levels, vec![-2, -1, 0, 1, 2])?,
                },
                other => return Err(Error::Config(format!("unknown capacity check {other:?}"))),
            };
            Command::Capacity {
                hull,
                alphas: s.list("alpha", &a.alpha, vec![1.0])?,
                cfg,
                mode,
            }
        }
        Cmd::Formulas(a) => {
            let grid = s.get("grid", &a.grid, "0:1:0.1".to_string())?;
            let parts: Vec<&str> = grid.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Config("grid expects start:stop:step".into()));
            }
            Command::Formulas {
                start: parse("grid", parts[0])?,
                stop: parse("grid", parts[1])?,
                step: parse("grid", parts[2])?,
            }
        }
        Cmd::Merge(_) | Cmd::Rerun(_) => unreachable!("handled before command resolution"),
    })
}

fn out_dir(cli: &Cli, s: &Settings) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| s.file.get("out").map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("loopsoup-out"))
}

fn main_inner(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let out = out_dir(&cli, &settings);
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => settings.opt("threads", &None)?,
    };
    match &cli.cmd {
        Cmd::Merge(m) => {
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let path = out.join("merged.csv");
            let rows = runner::write_merged(&m.inputs, &path)?;
            println!("merged {} rows into {}", rows.len(), path.display());
        }
        Cmd::Rerun(r) => {
            let differing = runner::rerun(&r.manifest, &out, threads)?;
            if differing.is_empty() {
                println!("all outputs reproduced in {}", out.display());
            } else {
                return Err(Error::Config(format!("outputs differ: {}", differing.join(", "))));
            }
        }
        cmd => {
            let seed = match cli.seed {
                Some(s) => s,
                None => settings.get("seed", &None, 0)?,
            };
            let cfg = RunConfig {
                command: command(cmd, &settings)?,
                seed,
                threads,
                out,
            };
            let manifest = runner::run(&cfg)?;
            for o in &manifest.outputs {
                println!("{}  {}", o.sha256, cfg.out.join(&o.file).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("loopsoup: {e}");
            ExitCode::FAILURE
        }
    }
}
