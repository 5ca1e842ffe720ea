//! Two-sample location tests used by the benchmark acceptance checks.

use crate::normal;

fn midrank_all(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// One-sided Mann–Whitney test, alternative: values in `a` are
/// stochastically smaller than values in `b`. Normal approximation with tie
/// correction and continuity correction; returns the p-value.
pub fn mann_whitney_less(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    assert!(na >= 3.0 && nb >= 3.0, "samples too small");
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let ranks = midrank_all(&all);
    let ra: f64 = ranks[..a.len()].iter().sum();
    let u_a = ra - na * (na + 1.0) / 2.0;

    let n = na + nb;
    // tie correction: sum t^3 - t over tie groups
    all.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1] == all[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let mean = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    assert!(var > 0.0, "degenerate variance (all values tied)");
    let z = (u_a - mean + 0.5) / var.sqrt();
    normal::cdf(z)
}

/// One-sided Welch z-test, alternative: mean of `a` is below mean of `b`.
/// Intended for large samples where the normal approximation is exact enough.
pub fn welch_less(a: &[f64], b: &[f64]) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64], m: f64| {
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    let se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
    assert!(se > 0.0, "degenerate variance");
    normal::cdf((ma - mb) / se)
}
