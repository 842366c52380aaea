//! Binomial intervals and chi-square tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// 95% Wilson interval.
pub fn wilson95(k: u64, n: u64) -> (f64, f64) {
    wilson_interval(k, n, 1.959_963_984_540_054)
}

#[derive(Copy, Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn new(statistic: f64, dof: u64) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64)
                .expect("positive degrees of freedom")
                .sf(statistic)
        };
        ChiSquare {
            statistic,
            dof,
            p_value,
        }
    }

    /// Sum of independent tests.
    pub fn combine(tests: impl IntoIterator<Item = ChiSquare>) -> ChiSquare {
        let (s, d) = tests
            .into_iter()
            .fold((0.0, 0), |(s, d), t| (s + t.statistic, d + t.dof));
        ChiSquare::new(s, d)
    }
}

/// Smallest expected count a bin may have before it is merged.
pub const MIN_EXPECTED: f64 = 5.0;

/// Goodness of fit of `observed` to `probs` (which sum to one). Adjacent
/// bins are merged until every expected count reaches [`MIN_EXPECTED`].
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let groups = merge_bins(probs.iter().map(|p| p * n as f64), observed.len());
    let mut stat = 0.0;
    for g in &groups {
        let o: u64 = g.clone().map(|i| observed[i]).sum();
        let e: f64 = g.clone().map(|i| probs[i] * n as f64).sum();
        stat += (o as f64 - e).powi(2) / e;
    }
    ChiSquare::new(stat, groups.len().saturating_sub(1) as u64)
}

/// Two-sample homogeneity test on histograms over the same bins. Bins are
/// merged left to right until every expected count reaches
/// [`MIN_EXPECTED`] in both samples.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    let len = a.len().max(b.len());
    let at = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let n = (na + nb) as f64;
    if na == 0 || nb == 0 {
        return ChiSquare::new(0.0, 0);
    }
    let small = na.min(nb) as f64 / n;
    let groups = merge_bins((0..len).map(|i| (at(a, i) + at(b, i)) as f64 * small), len);
    let mut stat = 0.0;
    for g in &groups {
        let oa: u64 = g.clone().map(|i| at(a, i)).sum();
        let ob: u64 = g.clone().map(|i| at(b, i)).sum();
        let col = (oa + ob) as f64;
        let ea = col * na as f64 / n;
        let eb = col * nb as f64 / n;
        stat += (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb;
    }
    ChiSquare::new(stat, groups.len().saturating_sub(1) as u64)
}

/// Groups of consecutive bins whose summed weight reaches the minimum; a
/// light remainder joins the last group.
fn merge_bins(weights: impl Iterator<Item = f64>, len: usize) -> Vec<std::ops::Range<usize>> {
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, w) in weights.enumerate() {
        acc += w;
        if acc >= MIN_EXPECTED {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < len {
        match groups.last_mut() {
            Some(last) => last.end = len,
            None if acc > 0.0 => groups.push(start..len),
            None => {}
        }
    }
    groups
}

/// Histogram of `values` with bins `0..cap` and a final bin for `>= cap`.
pub fn histogram(values: impl IntoIterator<Item = u64>, cap: u64) -> Vec<u64> {
    let mut h = vec![0; cap as usize + 1];
    for v in values {
        h[v.min(cap) as usize] += 1;
    }
    h
}
