//! Capacity checks: the slit oracle, scaling, monotonicity and
//! subadditivity with common random numbers, and the tiling bounds.
//!
//! Walks are grouped in fixed-size batches with one stream per batch and
//! summed in batch order, so estimates are identical for every thread count.

use loopsoup_core::capacity::{
    batch_count, check_alpha, tiling_of, walk_batch, CapacityEstimate, Hull, HyperbolicSquare, Shape, WalkParams,
    CAPACITY_CALIBRATION, DEFAULT_SHELL,
};
use loopsoup_core::fit::least_squares;
use loopsoup_core::rng::{derive_seed, stream};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::par_map;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityConfig {
    pub walks: u64,
    /// Absorption shell relative to the start radius.
    pub shell: f64,
    /// Start radius as a multiple of the hull radius.
    pub radius_factor: f64,
    pub seed: u64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            walks: 1_000_000,
            shell: DEFAULT_SHELL,
            radius_factor: 1.25,
            seed: 0,
        }
    }
}

impl CapacityConfig {
    fn params(&self, hull: &Hull) -> Result<(f64, f64)> {
        if self.walks < 2 {
            return Err(Error::Config("need at least two walks".into()));
        }
        if !(self.radius_factor > 1.0) {
            return Err(Error::Config("radius_factor must exceed 1".into()));
        }
        let radius = hull.radius();
        let p = WalkParams {
            walks: self.walks,
            start_radius: Some(if radius > 0.0 { self.radius_factor * radius } else { 1.0 }),
            shell: self.shell,
        };
        Ok(p.resolve(radius)?)
    }
}

/// Sample means and standard errors of several per-walk quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Moments {
            n: 0,
            sum: vec![0.0; k],
            sum_sq: vec![0.0; k],
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.n += 1;
        for (i, &v) in values.iter().enumerate() {
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        for i in 0..self.sum.len() {
            self.sum[i] += o.sum[i];
            self.sum_sq[i] += o.sum_sq[i];
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.n as f64
    }

    pub fn stderr(&self, i: usize) -> f64 {
        let n = self.n as f64;
        let m = self.mean(i);
        ((self.sum_sq[i] / n - m * m).max(0.0) / (n - 1.0)).sqrt()
    }
}

/// Walk `walks` paths against all `targets` and accumulate the quantities
/// produced by `f` from the per-target hitting heights. Everything is in the
/// capacity scale: `f` receives heights, and the result is multiplied by
/// `CAPACITY_CALIBRATION · R₀`.
pub fn simulate(
    targets: &[&Hull],
    r0: f64,
    eps: f64,
    walks: u64,
    seed: u64,
    outputs: usize,
    f: impl Fn(&[f64], &mut [f64]) + Sync,
) -> Moments {
    let parts = par_map(batch_count(walks), |b| {
        let mut m = Moments::new(outputs);
        let mut buf = vec![0.0; outputs];
        walk_batch(targets, r0, eps, seed, b, walks, |h| {
            f(h, &mut buf);
            m.push(&buf);
        });
        m
    });
    let mut total = Moments::new(outputs);
    for p in &parts {
        total.merge(p);
    }
    let scale = CAPACITY_CALIBRATION * r0;
    for i in 0..outputs {
        total.sum[i] *= scale;
        total.sum_sq[i] *= scale * scale;
    }
    total
}

fn powa(h: f64, alpha: f64) -> f64 {
    if h <= 0.0 {
        0.0
    } else if alpha == 1.0 {
        h
    } else {
        h.powf(alpha)
    }
}

/// Parallel estimate of `M_α(hull)`.
pub fn m_alpha(hull: &Hull, alpha: f64, cfg: &CapacityConfig) -> Result<CapacityEstimate> {
    let alpha = check_alpha(alpha)?;
    let (r0, eps) = cfg.params(hull)?;
    let m = simulate(&[hull], r0, eps, cfg.walks, cfg.seed, 1, |h, out| {
        out[0] = powa(h[0], alpha)
    });
    Ok(estimate(&m, 0, alpha, r0, eps))
}

fn estimate(m: &Moments, i: usize, alpha: f64, r0: f64, eps: f64) -> CapacityEstimate {
    CapacityEstimate {
        alpha,
        estimate: m.mean(i),
        stderr: m.stderr(i),
        walks: m.n,
        shell: eps,
        start_radius: r0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitReport {
    pub height: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub walks: u64,
}

/// `M₁` of the vertical slit `[0, i·height]` against `height² / 4`.
pub fn slit_check(height: f64, cfg: &CapacityConfig) -> Result<SlitReport> {
    let e = m_alpha(&Hull::slit(0.0, height)?, 1.0, cfg)?;
    let expected = height * height / 4.0;
    Ok(SlitReport {
        height,
        estimate: e.estimate,
        stderr: e.stderr,
        expected,
        relative_error: (e.estimate - expected).abs() / expected,
        walks: e.walks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub alpha: f64,
    /// `(a, M_α(aA), stderr)`.
    pub points: Vec<(f64, f64, f64)>,
    pub exponent: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Fit `log M_α(aA)` against `log a`. Each scale gets an independent walk
/// ensemble, and all `α` share the walks of a scale.
pub fn scaling_check(hull: &Hull, alphas: &[f64], scales: &[f64], cfg: &CapacityConfig) -> Result<Vec<ScalingReport>> {
    for &a in alphas {
        check_alpha(a)?;
    }
    if scales.len() < 2 || scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Config("need at least two positive scales".into()));
    }
    let mut per_scale = Vec::new();
    for (i, &s) in scales.iter().enumerate() {
        let h = hull.scaled(s);
        let (r0, eps) = cfg.params(&h)?;
        let alphas = alphas.to_vec();
        let m = simulate(
            &[&h],
            r0,
            eps,
            cfg.walks,
            derive_seed(cfg.seed, &[i as u64]),
            alphas.len(),
            |hts, out| {
                for (o, &a) in out.iter_mut().zip(&alphas) {
                    *o = powa(hts[0], a);
                }
            },
        );
        per_scale.push(m);
    }
    Ok(alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let points: Vec<(f64, f64, f64)> = scales
                .iter()
                .zip(&per_scale)
                .map(|(&s, m)| (s, m.mean(k), m.stderr(k)))
                .collect();
            let logs: Vec<(f64, f64)> = points.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
            let exponent = least_squares(&logs).map_or(f64::NAN, |f| f.slope);
            let expected = alpha + 1.0;
            ScalingReport {
                alpha,
                points,
                exponent,
                expected,
                relative_error: (exponent - expected).abs() / expected,
            }
        })
        .collect())
}

/// One inequality `lhs ≤ rhs`, estimated on common walks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Mean of `lhs − rhs` and its standard error.
    pub diff: f64,
    pub diff_stderr: f64,
    /// `lhs − rhs ≤ 3 · stderr`.
    pub holds: bool,
}

impl Inequality {
    fn new(name: &str, lhs: f64, rhs: f64, diff: f64, diff_stderr: f64) -> Self {
        Inequality {
            name: name.into(),
            lhs,
            rhs,
            diff,
            diff_stderr,
            holds: diff <= 3.0 * diff_stderr,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub alpha: f64,
    pub m_a: f64,
    pub m_b: f64,
    pub m_union: f64,
    pub inequalities: Vec<Inequality>,
    /// Walks on which `h(A∪B)^α > h(A)^α + h(B)^α`.
    pub pathwise_violations: u64,
    pub walks: u64,
}

/// `M(A) ≤ M(A∪B)`, `M(B) ≤ M(A∪B)` and `M(A∪B) ≤ M(A) + M(B)` on one walk
/// ensemble evaluated against all three sets.
pub fn monotonicity_subadditivity_check(
    a: &Hull,
    b: &Hull,
    alpha: f64,
    cfg: &CapacityConfig,
) -> Result<SubadditivityReport> {
    let alpha = check_alpha(alpha)?;
    let ab = a.union(b);
    let (r0, eps) = cfg.params(&ab)?;
    // Outputs: M(A), M(B), M(A∪B), M(A) − M(A∪B), M(B) − M(A∪B),
    // M(A∪B) − M(A) − M(B), violation indicator (unscaled below).
    let m = simulate(&[a, b, &ab], r0, eps, cfg.walks, cfg.seed, 7, |h, out| {
        let (x, y, z) = (powa(h[0], alpha), powa(h[1], alpha), powa(h[2], alpha));
        out[0] = x;
        out[1] = y;
        out[2] = z;
        out[3] = x - z;
        out[4] = y - z;
        out[5] = z - x - y;
        out[6] = if z > x + y + 1e-12 * (x + y).max(1.0) { 1.0 } else { 0.0 };
    });
    let scale = CAPACITY_CALIBRATION * r0;
    let violations = (m.sum[6] / scale).round() as u64;
    Ok(SubadditivityReport {
        alpha,
        m_a: m.mean(0),
        m_b: m.mean(1),
        m_union: m.mean(2),
        inequalities: vec![
            Inequality::new("M(A) <= M(A u B)", m.mean(0), m.mean(2), m.mean(3), m.stderr(3)),
            Inequality::new("M(B) <= M(A u B)", m.mean(1), m.mean(2), m.mean(4), m.stderr(4)),
            Inequality::new(
                "M(A u B) <= M(A) + M(B)",
                m.mean(2),
                m.mean(0) + m.mean(1),
                m.mean(5),
                m.stderr(5),
            ),
        ],
        pathwise_violations: violations,
        walks: m.n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub alpha: f64,
    pub m_a: f64,
    pub m_a_stderr: f64,
    pub m_hat: f64,
    pub m_hat_stderr: f64,
    pub m_sum: f64,
    pub m_sum_stderr: f64,
    pub squares: usize,
    pub truncated: bool,
    /// `M(A) / M(Â)` and `M(A) / Σ M(S)`, the empirical constants.
    pub ratio_hat: f64,
    pub ratio_sum: f64,
    pub upper_hat: Inequality,
    pub upper_sum: Inequality,
}

/// `M_α` of the unit square `[0,1] × [1,2]`, from which every `M_α(S)`
/// follows by translation invariance and `M(aA) = a^{α+1} M(A)`.
pub fn unit_square_capacity(alpha: f64, cfg: &CapacityConfig) -> Result<CapacityEstimate> {
    m_alpha(&HyperbolicSquare::new(0, 0).hull(), alpha, cfg)
}

/// `M(A) ≤ M(Â)` (common walks) and `M(A) ≤ Σ_{S ∈ 𝒮(A)} M(S)`, where
/// `Σ M(S) = M(S₀) Σ 2^{j(α+1)}` with `M(S₀)` from `unit`.
pub fn sandwich_check(
    hull: &Hull,
    alpha: f64,
    unit: &CapacityEstimate,
    min_level: i32,
    cfg: &CapacityConfig,
) -> Result<SandwichReport> {
    let alpha = check_alpha(alpha)?;
    let tiling = tiling_of(hull, min_level);
    let hat = tiling.hat();
    if hat.is_empty() {
        return Err(Error::Config("hull meets no square above the floor level".into()));
    }
    let (r0, eps) = cfg.params(&hat)?;
    let m = simulate(&[hull, &hat], r0, eps, cfg.walks, cfg.seed, 3, |h, out| {
        out[0] = powa(h[0], alpha);
        out[1] = powa(h[1], alpha);
        out[2] = out[0] - out[1];
    });
    let weight: f64 = tiling.squares.iter().map(|s| (s.j as f64 * (alpha + 1.0)).exp2()).sum();
    let (m_sum, m_sum_se) = (unit.estimate * weight, unit.stderr * weight);
    let (ma, se_a) = (m.mean(0), m.stderr(0));
    let combined = (se_a * se_a + m_sum_se * m_sum_se).sqrt();
    Ok(SandwichReport {
        alpha,
        m_a: ma,
        m_a_stderr: se_a,
        m_hat: m.mean(1),
        m_hat_stderr: m.stderr(1),
        m_sum,
        m_sum_stderr: m_sum_se,
        squares: tiling.squares.len(),
        truncated: tiling.truncated,
        ratio_hat: ma / m.mean(1),
        ratio_sum: ma / m_sum,
        upper_hat: Inequality::new("M(A) <= M(hat A)", ma, m.mean(1), m.mean(2), m.stderr(2)),
        upper_sum: Inequality::new("M(A) <= sum M(S)", ma, m_sum, ma - m_sum, combined),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub level: i32,
    pub m_square: f64,
    pub m_r: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub alpha: f64,
    pub rows: Vec<RatioRow>,
    pub mean_ratio: f64,
    /// Largest `|ratio / mean − 1|`.
    pub max_deviation: f64,
}

/// `M(R(S)) / M(S)` for `S = S_{0,j}` at each level, each level on its own
/// walks and both sets of a level on common walks.
pub fn r_ratio_check(alpha: f64, levels: &[i32], cfg: &CapacityConfig) -> Result<RatioReport> {
    let alpha = check_alpha(alpha)?;
    let mut rows = Vec::new();
    for (i, &j) in levels.iter().enumerate() {
        let sq = HyperbolicSquare::new(0, j);
        let (s, r) = (sq.hull(), sq.r_hull());
        let (r0, eps) = cfg.params(&r)?;
        let m = simulate(
            &[&s, &r],
            r0,
            eps,
            cfg.walks,
            derive_seed(cfg.seed, &[i as u64]),
            2,
            |h, out| {
                out[0] = powa(h[0], alpha);
                out[1] = powa(h[1], alpha);
            },
        );
        let (ms, mr) = (m.mean(0), m.mean(1));
        let ratio = mr / ms;
        // Delta method, ignoring the positive covariance (conservative).
        let rel = ((m.stderr(0) / ms).powi(2) + (m.stderr(1) / mr).powi(2)).sqrt();
        rows.push(RatioRow {
            level: j,
            m_square: ms,
            m_r: mr,
            ratio,
            ratio_stderr: ratio * rel,
        });
    }
    let mean_ratio = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len().max(1) as f64;
    let max_deviation = rows
        .iter()
        .map(|r| (r.ratio / mean_ratio - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(RatioReport {
        alpha,
        rows,
        mean_ratio,
        max_deviation,
    })
}

/// `segments` random segments with endpoints in `[-1, 1] × [0.1, 1.5]`.
pub fn random_hull(seed: u64, segments: usize) -> Hull {
    let mut rng = stream(seed, &[0x4855_4c4c]);
    let shapes = (0..segments)
        .map(|_| {
            let mut pt = || (rng.random_range(-1.0..1.0), rng.random_range(0.1..1.5));
            let (a, b) = (pt(), pt());
            Shape::segment(a.0, a.1, b.0, b.1)
        })
        .collect();
    Hull::new(shapes).expect("points lie above the axis")
}
