use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use super::hull::{Hull, Vec2};
use super::CapacityEstimate;
use crate::error::{Error, Result};
use crate::rng::stream;

/// Absorption shell, relative to the start radius.
pub const DEFAULT_SHELL: f64 = 1e-4;

/// Walks per independently seeded batch.
pub const BATCH_SIZE: u64 = 4096;

/// Converts `R₀ · E[(Im B_τ)^α]` into `M_α`.
///
/// With this factor a vertical slit of height `y` has `M₁ = y²/4` (the
/// normalization `g(z) = z + 2·hcap/z`), for which the analytic factor is
/// `2/π`. The frozen value is the slit calibration of the default shell:
/// 10⁸ walks with seed `0xCA11B` gave `M₁ / (y²/4) = 1.000146 ± 0.000132`
/// at factor `2/π`.
pub const CAPACITY_CALIBRATION: f64 = 0.636_525_566_583_726_9;

const MAX_STEPS: u32 = 1_000_000;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct WalkParams {
    pub walks: u64,
    /// Start radius `R₀`; defaults to `1.25 ×` the hull radius.
    pub start_radius: Option<f64>,
    /// Absorption shell relative to `R₀`.
    pub shell: f64,
}

impl WalkParams {
    pub fn new(walks: u64) -> Self {
        WalkParams {
            walks,
            start_radius: None,
            shell: DEFAULT_SHELL,
        }
    }

    /// Resolved `(R₀, absolute shell width)` for hulls of the given radius.
    pub fn resolve(&self, radius: f64) -> Result<(f64, f64)> {
        let r0 = match self.start_radius {
            Some(r0) => r0,
            None if radius > 0.0 => 1.25 * radius,
            None => 1.0,
        };
        if !(r0 > radius) || !r0.is_finite() {
            return Err(Error::OutOfRange {
                name: "start radius",
                value: r0,
                range: "(hull radius, inf)",
            });
        }
        if !(self.shell > 0.0 && self.shell < 1.0) {
            return Err(Error::OutOfRange {
                name: "shell",
                value: self.shell,
                range: "(0, 1)",
            });
        }
        Ok((r0, self.shell * r0))
    }
}

pub fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(alpha)
    } else {
        Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1]",
        })
    }
}

/// Run one Brownian path against several targets at once and write, for each
/// target, the height at which the path first hits it (0 when the path
/// reaches `ℝ` first). All targets must lie within radius `r0`.
///
/// Targets stay active until hit, so every target sees the same path and
/// `out[k]` is the hitting height for `targets[k] ∪ ℝ` along that one path.
pub fn simulate_walk<R: Rng + ?Sized>(targets: &[&Hull], r0: f64, eps: f64, rng: &mut R, out: &mut [f64]) {
    assert!(targets.len() <= 64 && out.len() == targets.len());
    out.fill(0.0);
    let mut active: u64 = targets
        .iter()
        .enumerate()
        .filter(|(_, h)| !h.is_empty())
        .fold(0, |m, (k, _)| m | (1 << k));
    if active == 0 {
        return;
    }

    let theta = libm::acos(1.0 - 2.0 * rng.random::<f64>());
    let mut z = Vec2::new(r0 * libm::cos(theta), r0 * libm::sin(theta));
    let r0sq = r0 * r0;

    for _ in 0..MAX_STEPS {
        let rsq = z.x * z.x + z.y * z.y;
        if rsq > r0sq * (1.0 + 1e-12) {
            // Exit law of the semicircle ∪ ℝ seen from outside: map by
            // w = z + R₀²/z to the half-plane, where the semicircle becomes
            // [-2R₀, 2R₀] and Brownian motion exits with a Cauchy law.
            let m = r0sq / rsq;
            let w = Vec2::new(z.x * (1.0 + m), z.y * (1.0 - m));
            let x = w.x + w.y * libm::tan(PI * (rng.random::<f64>() - 0.5));
            if !(x.abs() < 2.0 * r0) {
                return;
            }
            let phi = libm::acos(x / (2.0 * r0));
            z = Vec2::new(r0 * libm::cos(phi), r0 * libm::sin(phi));
        }
        if z.y < eps {
            return;
        }
        let mut radius = z.y;
        let mut bits = active;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (d, p) = targets[k].nearest(z).expect("active targets are non-empty");
            if d < eps {
                out[k] = p.y;
                active &= !(1 << k);
            } else if d < radius {
                radius = d;
            }
        }
        if active == 0 {
            return;
        }
        let psi = 2.0 * PI * rng.random::<f64>();
        z = Vec2::new(z.x + radius * libm::cos(psi), (z.y + radius * libm::sin(psi)).max(0.0));
    }
}

/// Running sums of `h^α` and `h^{2α}` per (target, α), row-major by target.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSums {
    pub alphas: Vec<f64>,
    pub targets: usize,
    pub n: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl MomentSums {
    pub fn new(targets: usize, alphas: &[f64]) -> Self {
        MomentSums {
            alphas: alphas.to_vec(),
            targets,
            n: 0,
            sum: vec![0.0; targets * alphas.len()],
            sum_sq: vec![0.0; targets * alphas.len()],
        }
    }

    pub fn add(&mut self, heights: &[f64]) {
        self.n += 1;
        let na = self.alphas.len();
        for (k, &h) in heights.iter().enumerate() {
            if h <= 0.0 {
                continue;
            }
            for (a, &alpha) in self.alphas.iter().enumerate() {
                let v = if alpha == 1.0 { h } else { libm::pow(h, alpha) };
                self.sum[k * na + a] += v;
                self.sum_sq[k * na + a] += v * v;
            }
        }
    }

    pub fn merge(&mut self, other: &MomentSums) {
        assert_eq!(self.sum.len(), other.sum.len());
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }

    /// Mean and standard error of `h^α` for one (target, α) slot.
    pub fn mean_stderr(&self, target: usize, alpha_index: usize) -> (f64, f64) {
        let i = target * self.alphas.len() + alpha_index;
        let n = self.n as f64;
        let mean = self.sum[i] / n;
        let var = (self.sum_sq[i] / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        (mean, libm::sqrt(var / n))
    }
}

/// Number of batches covering `walks` walks.
pub fn batch_count(walks: u64) -> u64 {
    walks.div_ceil(BATCH_SIZE)
}

/// Walk one batch and hand each walk's hitting heights to `f`.
pub fn walk_batch(targets: &[&Hull], r0: f64, eps: f64, seed: u64, batch: u64, walks: u64, mut f: impl FnMut(&[f64])) {
    let start = batch * BATCH_SIZE;
    let end = (start + BATCH_SIZE).min(walks);
    let mut rng = stream(seed, &[batch]);
    let mut heights = vec![0.0; targets.len()];
    for _ in start..end {
        simulate_walk(targets, r0, eps, &mut rng, &mut heights);
        f(&heights);
    }
}

/// Moment sums of one batch.
pub fn batch_sums(
    targets: &[&Hull],
    alphas: &[f64],
    r0: f64,
    eps: f64,
    seed: u64,
    batch: u64,
    walks: u64,
) -> MomentSums {
    let mut sums = MomentSums::new(targets.len(), alphas);
    walk_batch(targets, r0, eps, seed, batch, walks, |h| sums.add(h));
    sums
}

pub fn estimate_from_sums(
    sums: &MomentSums,
    target: usize,
    alpha_index: usize,
    r0: f64,
    shell: f64,
) -> CapacityEstimate {
    let (mean, se) = sums.mean_stderr(target, alpha_index);
    let scale = CAPACITY_CALIBRATION * r0;
    CapacityEstimate {
        alpha: sums.alphas[alpha_index],
        estimate: scale * mean,
        stderr: scale * se,
        walks: sums.n,
        shell,
        start_radius: r0,
    }
}

/// Single-threaded estimate of `M_α(hull)`.
pub fn estimate(hull: &Hull, alpha: f64, params: &WalkParams, seed: u64) -> Result<CapacityEstimate> {
    let alpha = check_alpha(alpha)?;
    let (r0, eps) = params.resolve(hull.radius())?;
    let targets = [hull];
    let mut sums = MomentSums::new(1, &[alpha]);
    for b in 0..batch_count(params.walks) {
        sums.merge(&batch_sums(&targets, &[alpha], r0, eps, seed, b, params.walks));
    }
    Ok(estimate_from_sums(&sums, 0, 0, r0, eps))
}
