//! Adaptive Gaussian quadrature.
//!
//! Each interval is scored with paired 7- and 15-node Gauss–Legendre rules;
//! the rule difference serves as the local error estimate and drives
//! bisection. Integrands handed to this module must be smooth on each
//! interval, so callers split at known kinks via [`integrate_split`].

use crate::tables::{GL15, GL7};

fn rule_pair<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut g7 = 0.0;
    for &(x, w) in GL7.iter() {
        g7 += w * f(mid + half * x);
    }
    let mut g15 = 0.0;
    for &(x, w) in GL15.iter() {
        g15 += w * f(mid + half * x);
    }
    (g7 * half, g15 * half)
}

fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (g7, g15) = rule_pair(f, a, b);
    if (g15 - g7).abs() <= tol || depth >= 48 || (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
        return g15;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth + 1) + adaptive(f, mid, b, 0.5 * tol, depth + 1)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adaptive(&mut f, a, b, tol, 0)
}

/// Integrate over consecutive intervals delimited by the sorted `knots`
/// (piecewise-smooth integrands: place every kink on a knot).
pub fn integrate_split<F: FnMut(f64) -> f64>(mut f: F, knots: &[f64], tol: f64) -> f64 {
    assert!(knots.len() >= 2, "need at least one interval");
    assert!(
        knots.windows(2).all(|w| w[0] <= w[1]),
        "knots must be sorted"
    );
    let per = tol / (knots.len() - 1) as f64;
    let mut total = 0.0;
    for w in knots.windows(2) {
        if w[1] > w[0] {
            total += adaptive(&mut f, w[0], w[1], per, 0);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal;

    #[test]
    fn normal_mass_and_entropy() {
        let mass = integrate(normal::pdf, -14.0, 14.0, 1e-12);
        assert!((mass - 1.0).abs() < 1e-11, "mass {mass}");
        let h = integrate(|x| -normal::pdf(x) * normal::log_pdf(x), -14.0, 14.0, 1e-12);
        assert!((h - 1.4189385332046727).abs() < 1e-10, "entropy {h}");
    }

    #[test]
    fn split_handles_kinks() {
        // integral of |x| over [-1, 2] = 0.5 + 2 = 2.5
        let v = integrate_split(|x| x.abs(), &[-1.0, 0.0, 2.0], 1e-12);
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn truncated_normal_tail() {
        let z = integrate(normal::pdf, 1.0, 14.0, 1e-13);
        assert!((z - (1.0 - 0.8413447460685429)).abs() < 1e-12);
    }
}
