//! Box-constrained quasi-Newton minimizer.
//!
//! Limited-memory BFGS with projection onto the box and Armijo backtracking.
//! Used for evidence maximization (analytic gradients) and acquisition
//! refinement (finite-difference gradients); both problems are smooth,
//! low-dimensional, and cheap enough per iterate that a compact routine beats
//! pulling in a solver framework.

use ndarray::prelude::*;

const HISTORY: usize = 8;
const ARMIJO_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_LINE_ITERS: usize = 40;

fn project(x: &Array1<f64>, lo: &Array1<f64>, hi: &Array1<f64>) -> Array1<f64> {
    let mut out = x.clone();
    for i in 0..out.len() {
        out[i] = out[i].clamp(lo[i], hi[i]);
    }
    out
}

/// Infinity norm of the projected gradient: the first-order optimality
/// residual that respects the active bounds.
fn projected_grad_norm(x: &Array1<f64>, g: &Array1<f64>, lo: &Array1<f64>, hi: &Array1<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let gi = if x[i] <= lo[i] {
            g[i].min(0.0)
        } else if x[i] >= hi[i] {
            g[i].max(0.0)
        } else {
            g[i]
        };
        worst = worst.max(gi.abs());
    }
    worst
}

/// Minimize `f` (which returns value and gradient) over the box `[lo, hi]`.
/// Returns the best point found and its value. Non-finite trial values are
/// treated as +inf, so `f` may signal failed regions that way.
pub(crate) fn minimize_box<F>(
    f: &mut F,
    x0: Array1<f64>,
    lo: &Array1<f64>,
    hi: &Array1<f64>,
    max_iter: usize,
) -> (Array1<f64>, f64)
where
    F: FnMut(&Array1<f64>) -> (f64, Array1<f64>),
{
    let sanitize = |v: f64| if v.is_finite() { v } else { f64::INFINITY };
    let mut x = project(&x0, lo, hi);
    let (fx_raw, mut g) = f(&x);
    let mut fx = sanitize(fx_raw);
    let mut best = (x.clone(), fx);

    // (s, y, 1/s'y) pairs, newest last
    let mut hist: Vec<(Array1<f64>, Array1<f64>, f64)> = Vec::new();
    let mut stall = 0usize;
    let mut skipped = 0usize;

    for _ in 0..max_iter {
        if !fx.is_finite() || projected_grad_norm(&x, &g, lo, hi) < 1e-6 * (1.0 + fx.abs()) {
            break;
        }

        // two-loop recursion
        let mut d = -g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * s.dot(&d);
            d = &d - &(y * a);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.last() {
            let gamma = s.dot(y) / y.dot(y);
            d *= gamma;
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = rho * y.dot(&d);
            d = &d + &(s * (a - b));
        }
        if d.dot(&g) >= 0.0 {
            // not a descent direction: restart from steepest descent
            hist.clear();
            d = -g.clone();
        }

        // weak-Wolfe search by bisection and expansion: backtrack when the
        // sufficient-decrease test fails, lengthen when curvature says the
        // step is too short. The curvature condition keeps s'y > 0 so the
        // quasi-Newton pairs stay well posed on nonconvex stretches.
        let mut t = 1.0;
        let mut t_hi = f64::INFINITY;
        let mut accepted = None;
        for _ in 0..MAX_LINE_ITERS {
            let trial = project(&(&x + &(&d * t)), lo, hi);
            let move_vec = &trial - &x;
            let move_norm = move_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
            if move_norm < 1e-14 {
                break;
            }
            let dir_deriv = g.dot(&move_vec);
            if dir_deriv >= 0.0 {
                // projection bent the move uphill; shorten
                t_hi = t;
                t *= 0.5;
                continue;
            }
            let (ft_raw, gt) = f(&trial);
            let ft = sanitize(ft_raw);
            if ft > fx + ARMIJO_C1 * dir_deriv {
                t_hi = t;
                t *= 0.5;
                continue;
            }
            let bent = move_vec
                .iter()
                .zip(d.iter())
                .any(|(m, dd)| (m - dd * t).abs() > 1e-12 * (1.0 + (dd * t).abs()));
            let curvature_ok = gt.dot(&move_vec) >= WOLFE_C2 * dir_deriv;
            accepted = Some((trial, ft, gt, move_vec));
            if curvature_ok || bent || t >= 1e6 {
                break;
            }
            // slope still strongly negative: the step is too short
            t = if t_hi.is_finite() {
                0.5 * (t + t_hi)
            } else {
                2.0 * t
            };
        }
        let Some((xn, fn_, gn, s_vec)) = accepted else {
            if hist.is_empty() {
                break;
            }
            // stale curvature can poison the direction; retry as plain
            // gradient descent before giving up
            hist.clear();
            continue;
        };

        let y_vec = &gn - &g;
        let sy = s_vec.dot(&y_vec);
        if sy > 1e-12 * s_vec.dot(&s_vec).sqrt() * y_vec.dot(&y_vec).sqrt() {
            if hist.len() == HISTORY {
                hist.remove(0);
            }
            hist.push((s_vec, y_vec, 1.0 / sy));
            skipped = 0;
        } else {
            // repeated rejected pairs mean the stored curvature no longer
            // describes the local model
            skipped += 1;
            if skipped >= 3 {
                hist.clear();
                skipped = 0;
            }
        }

        let progress = fx - fn_;
        x = xn;
        fx = fn_;
        g = gn;
        if fx < best.1 {
            best = (x.clone(), fx);
        }
        if progress.abs() < 1e-12 * (1.0 + fx.abs()) {
            stall += 1;
            if stall >= 3 {
                break;
            }
            hist.clear();
        } else {
            stall = 0;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl_interior() {
        let mut f = |x: &Array1<f64>| {
            let v = 3.0 * (x[0] - 0.7).powi(2) + (x[1] + 0.2).powi(2);
            let g = arr1(&[6.0 * (x[0] - 0.7), 2.0 * (x[1] + 0.2)]);
            (v, g)
        };
        let lo = arr1(&[-2.0, -2.0]);
        let hi = arr1(&[2.0, 2.0]);
        let (x, v) = minimize_box(&mut f, arr1(&[-1.5, 1.5]), &lo, &hi, 100);
        assert!((x[0] - 0.7).abs() < 1e-5 && (x[1] + 0.2).abs() < 1e-5, "{x:?}");
        assert!(v < 1e-9);
    }

    #[test]
    fn active_bound_is_respected() {
        // minimum of (x-3)^2 over [0, 1] sits at the upper bound
        let mut f = |x: &Array1<f64>| ((x[0] - 3.0).powi(2), arr1(&[2.0 * (x[0] - 3.0)]));
        let (x, _) = minimize_box(&mut f, arr1(&[0.2]), &arr1(&[0.0]), &arr1(&[1.0]), 50);
        assert!((x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rosenbrock_in_box() {
        let mut f = |x: &Array1<f64>| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = arr1(&[
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ]);
            (v, g)
        };
        let lo = arr1(&[-2.0, -2.0]);
        let hi = arr1(&[2.0, 2.0]);
        let (x, v) = minimize_box(&mut f, arr1(&[-1.2, 1.0]), &lo, &hi, 400);
        assert!(v < 1e-7, "f={v} at {x:?}");
    }

    #[test]
    fn infinite_values_are_skipped() {
        // objective undefined left of 0.1; solver must stay in the good region
        let mut f = |x: &Array1<f64>| {
            if x[0] < 0.1 {
                (f64::INFINITY, arr1(&[0.0]))
            } else {
                ((x[0] - 0.5).powi(2), arr1(&[2.0 * (x[0] - 0.5)]))
            }
        };
        let (x, _) = minimize_box(&mut f, arr1(&[0.9]), &arr1(&[0.0]), &arr1(&[1.0]), 60);
        assert!((x[0] - 0.5).abs() < 1e-6);
    }
}
