//! Survival and crossing frequencies of fractal percolation.

use loopsoup_core::fractal::{extinction_probability, sample_fractal, survives_to_depth, MAX_MATERIALIZED_DEPTH};
use loopsoup_core::rng::derive_seed;
use serde::{Deserialize, Serialize};

use super::par_map;
use crate::error::{Error, Result};
use crate::stats::wilson95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalConfig {
    pub p_values: Vec<f64>,
    pub depth: u32,
    pub samples: u64,
    pub seed: u64,
}

impl Default for FractalConfig {
    fn default() -> Self {
        FractalConfig {
            p_values: vec![0.3, 0.5, 0.9],
            depth: 14,
            samples: 10_000,
            seed: 0,
        }
    }
}

impl FractalConfig {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.depth == 0 {
            return Err(Error::Config("need depth >= 1 and samples >= 1".into()));
        }
        if self.p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("p must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Sample `i` uses the same uniforms at every `p`.
    pub fn sample_seed(&self, i: u64) -> u64 {
        derive_seed(self.seed, &[i])
    }
}

/// `P(some square survives to depth n) = 1 − f^n(0)` with
/// `f(q) = (1 − p + p q)⁴`.
pub fn finite_depth_survival(p: f64, depth: u32) -> f64 {
    let q = (0..depth).fold(0.0f64, |q, _| (1.0 - p + p * q).powi(4));
    1.0 - q
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub p: f64,
    pub depth: u32,
    pub survived: u64,
    pub n: u64,
    pub frequency: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `1 −` the extinction probability.
    pub limit: f64,
    /// Exact survival probability at this depth.
    pub at_depth: f64,
    /// `(frequency − limit) / σ`, with `σ² = limit (1 − limit) / n`.
    pub z_limit: f64,
    pub z_at_depth: f64,
}

fn z(freq: f64, target: f64, n: u64) -> f64 {
    let sd = (target * (1.0 - target) / n as f64).sqrt();
    if sd > 0.0 {
        (freq - target) / sd
    } else if freq == target {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn survival_scan(cfg: &FractalConfig) -> Result<Vec<SurvivalRow>> {
    cfg.validate()?;
    cfg.p_values
        .iter()
        .map(|&p| {
            let hits = par_map(cfg.samples, |i| survives_to_depth(p, cfg.depth, cfg.sample_seed(i)))
                .into_iter()
                .collect::<std::result::Result<Vec<bool>, _>>()?;
            let survived = hits.iter().filter(|&&h| h).count() as u64;
            let n = cfg.samples;
            let frequency = survived as f64 / n as f64;
            let (ci_lo, ci_hi) = wilson95(survived, n);
            let limit = 1.0 - extinction_probability(p)?;
            let at_depth = finite_depth_survival(p, cfg.depth);
            Ok(SurvivalRow {
                p,
                depth: cfg.depth,
                survived,
                n,
                frequency,
                ci_lo,
                ci_hi,
                limit,
                at_depth,
                z_limit: z(frequency, limit, n),
                z_at_depth: z(frequency, at_depth, n),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRow {
    pub p: f64,
    pub depth: u32,
    pub crossed: u64,
    pub n: u64,
    pub frequency: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Left-right crossing frequency of the depth-`depth` retained squares.
pub fn crossing_scan(cfg: &FractalConfig) -> Result<Vec<CrossingRow>> {
    cfg.validate()?;
    if cfg.depth > MAX_MATERIALIZED_DEPTH {
        return Err(Error::Config(format!(
            "crossing needs depth <= {MAX_MATERIALIZED_DEPTH}"
        )));
    }
    cfg.p_values
        .iter()
        .map(|&p| {
            let hits = par_map(cfg.samples, |i| {
                sample_fractal(p, cfg.depth, cfg.sample_seed(i)).map(|f| f.crossing_exists())
            })
            .into_iter()
            .collect::<std::result::Result<Vec<bool>, _>>()?;
            let crossed = hits.iter().filter(|&&h| h).count() as u64;
            let (ci_lo, ci_hi) = wilson95(crossed, cfg.samples);
            Ok(CrossingRow {
                p,
                depth: cfg.depth,
                crossed,
                n: cfg.samples,
                frequency: crossed as f64 / cfg.samples as f64,
                ci_lo,
                ci_hi,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_depth_survival_decreases_to_limit() {
        for p in [0.3, 0.5, 0.9] {
            let limit = 1.0 - extinction_probability(p).unwrap();
            let mut prev = 1.0;
            for d in 1..2000 {
                let s = finite_depth_survival(p, d);
                assert!(s <= prev + 1e-15 && s >= limit - 1e-12);
                prev = s;
            }
            assert!((prev - limit).abs() < 1e-6);
        }
        assert_eq!(finite_depth_survival(0.5, 1), 1.0 - 0.5f64.powi(4));
    }

    #[test]
    fn survival_matches_depth_probability_on_small_runs() {
        let cfg = FractalConfig {
            p_values: vec![0.0, 0.6, 1.0],
            depth: 5,
            samples: 2000,
            seed: 4,
        };
        let rows = survival_scan(&cfg).unwrap();
        assert_eq!(rows[0].survived, 0);
        assert_eq!(rows[2].survived, 2000);
        assert!(rows[1].z_at_depth.abs() < 4.0);
    }

    #[test]
    fn crossing_is_monotone_in_p() {
        let cfg = FractalConfig {
            p_values: vec![0.5, 0.8, 0.95],
            depth: 5,
            samples: 200,
            seed: 2,
        };
        let rows = crossing_scan(&cfg).unwrap();
        assert!(rows.windows(2).all(|w| w[0].crossed <= w[1].crossed));
    }
}
