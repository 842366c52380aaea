//! Walk counts and bridge sampling checked against brute-force enumeration
//! and an independent dynamic program.

use std::collections::HashMap;

use loopsoup_core::lattice::{Dir, Point};
use loopsoup_core::rng::stream;
use loopsoup_core::walk::{return_probability, return_probability_exact, sample_bridge, Ratio};

const STEPS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// `count[m][(x, y)]`: walks of `m` steps from `(x, y)` to the origin.
fn dp_counts(max: usize) -> Vec<HashMap<(i64, i64), u128>> {
    let mut table = vec![HashMap::from([((0, 0), 1u128)])];
    for m in 1..=max {
        let prev = &table[m - 1];
        let mut next = HashMap::new();
        for (&(x, y), &n) in prev {
            for (dx, dy) in STEPS {
                *next.entry((x - dx, y - dy)).or_insert(0) += n;
            }
        }
        table.push(next);
    }
    table
}

fn closed_by_brute_force(len: u32) -> u64 {
    (0..4u64.pow(len))
        .filter(|&code| {
            let (mut x, mut y, mut c) = (0i64, 0i64, code);
            for _ in 0..len {
                let (dx, dy) = STEPS[(c % 4) as usize];
                x += dx;
                y += dy;
                c /= 4;
            }
            x == 0 && y == 0
        })
        .count() as u64
}

#[test]
fn return_probabilities_match_brute_force() {
    for len in 1..=8 {
        let expected = Ratio::new(closed_by_brute_force(len), 4u64.pow(len));
        assert_eq!(return_probability_exact(len), Some(expected), "length {len}");
    }
    assert_eq!(closed_by_brute_force(4), 36);
}

#[test]
fn return_probabilities_match_dp() {
    let dp = dp_counts(40);
    for len in 1..=40u32 {
        let closed = dp[len as usize].get(&(0, 0)).copied().unwrap_or(0);
        let q = closed as f64 / 4f64.powi(len as i32);
        let rel = (return_probability(len) - q).abs() / q.max(1e-300);
        assert!(
            rel < 1e-13 || (q == 0.0 && return_probability(len) == 0.0),
            "length {len}"
        );
        if let Some(r) = return_probability_exact(len) {
            assert_eq!(r, Ratio::new(closed as u64, 1 << (2 * len)));
        }
    }
}

fn key(steps: &[Dir]) -> String {
    steps.iter().map(|d| d.as_char()).collect()
}

#[test]
fn bridges_are_closed_and_uniform_on_short_lengths() {
    let mut rng = stream(41, &[]);
    let mut counts: HashMap<String, u32> = HashMap::new();
    let draws = 72_000;
    for _ in 0..draws {
        let l = sample_bridge(Point::new(3, -2), 4, &mut rng);
        assert_eq!(l.displacement(), (0, 0));
        *counts.entry(key(l.steps())).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 36);
    let expected = draws as f64 / 36.0;
    let sd = (expected * (1.0 - 1.0 / 36.0)).sqrt();
    for (k, &n) in &counts {
        assert!((n as f64 - expected).abs() < 5.0 * sd, "{k}: {n}");
    }
}

#[test]
fn bridge_prefixes_follow_dp_weights() {
    // P(first two steps = d1 d2) = N(len-2, d1+d2) / N(len, 0).
    let len = 10usize;
    let dp = dp_counts(len);
    let total = dp[len][&(0, 0)] as f64;
    let mut rng = stream(42, &[]);
    let draws = 200_000u32;
    let mut counts: HashMap<String, u32> = HashMap::new();
    for _ in 0..draws {
        let l = sample_bridge(Point::new(0, 0), len as u32, &mut rng);
        *counts.entry(key(&l.steps()[..2])).or_insert(0) += 1;
    }
    for a in Dir::ALL {
        for b in Dir::ALL {
            let (ax, ay) = a.delta();
            let (bx, by) = b.delta();
            let pos = ((ax + bx) as i64, (ay + by) as i64);
            let p = dp[len - 2].get(&pos).copied().unwrap_or(0) as f64 / total;
            let n = counts.get(&key(&[a, b])).copied().unwrap_or(0) as f64;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt().max(1.0);
            assert!(
                (n - draws as f64 * p).abs() < 5.0 * sd,
                "{a:?}{b:?}: {n} vs {}",
                draws as f64 * p
            );
        }
    }
}

#[test]
fn long_bridges_close() {
    let mut rng = stream(43, &[]);
    for len in [2u32, 64, 512, 4096] {
        let l = sample_bridge(Point::new(0, 0), len, &mut rng);
        assert_eq!(l.len(), len);
        assert_eq!(l.displacement(), (0, 0));
    }
}
