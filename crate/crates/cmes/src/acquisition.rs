//! Closed-form entropy differences behind the cMES acquisition score, for
//! real-valued and binary constraint feedback, plus marginal variants for
//! scoring objective-only or constraint-only evaluations.

use crate::constraint::{feasibility_stats, local_laplace, ConstraintPosterior};
use crate::constraint::{FeasibilityStats, LocalConstraintApprox};
use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::math::{hazard, log1mexp, log_phi};
use crate::thompson::YstarSet;
use ndarray::prelude::*;

/// Standardized per-point quantities feeding the real-valued score.
#[derive(Clone, Copy, Debug)]
pub struct StandardizedInputs {
    pub gamma_y: f64,
    pub gamma_c: f64,
    pub log_zy: f64,
    pub log_zc: f64,
}

impl StandardizedInputs {
    /// Standardize from gammas alone; the log-normalizers follow as logPhi.
    pub fn from_gammas(gamma_y: f64, gamma_c: f64) -> Self {
        Self {
            gamma_y,
            gamma_c,
            log_zy: log_phi(gamma_y),
            log_zc: log_phi(gamma_c),
        }
    }

    /// Standardize posterior moments of (y, c) against y* and delta.
    pub fn from_moments(
        mu_y: f64,
        var_y: f64,
        ystar: f64,
        mu_c: f64,
        var_c: f64,
        delta: f64,
    ) -> Self {
        let gamma_y = (ystar - mu_y) / var_y.max(1e-18).sqrt();
        let gamma_c = (delta - mu_c) / var_c.max(1e-18).sqrt();
        Self::from_gammas(gamma_y, gamma_c)
    }
}

/// Shrinkage factors mapping noise-free gammas to noisy-target gammas.
#[derive(Clone, Copy, Debug)]
pub struct NoisyAdjustment {
    pub rho_y: f64,
    pub rho_c: f64,
}

/// rho = sigma sqrt(alpha) / sqrt(1 + sigma^2 alpha) for variance sigma^2
/// and noise precision alpha.
pub fn noisy_rho(var: f64, alpha: f64) -> f64 {
    let sa = var * alpha;
    (sa / (1.0 + sa)).sqrt()
}

/// gamma-tilde = gamma / rho; identity at rho = 1 (no noise).
pub fn noisy_gamma(gamma: f64, adj_rho: f64) -> f64 {
    gamma / adj_rho
}

/// Sum of log-normalizers too close to 0: conditioning on y* excludes
/// almost nothing, so the score is pinned at 0 rather than left to blow up.
pub fn is_degenerate(log_z_sum: f64) -> bool {
    log_z_sum > -1e-12
}

/// H[P(y,c)] - H[P(y,c|y*)] for real-valued constraint feedback.
pub fn entropy_diff_real(s: &StandardizedInputs) -> f64 {
    let sum = s.log_zy + s.log_zc;
    if is_degenerate(sum) {
        return 0.0;
    }
    if sum == f64::NEG_INFINITY {
        return 0.0;
    }
    let num = s.gamma_c * hazard(-s.gamma_c) + s.gamma_y * hazard(-s.gamma_y);
    -log1mexp(sum) - num / (2.0 * (-sum).exp_m1())
}

/// H[P(y)] + H[Q(z_c)] - H[P(y,z_c|y*)] for binary constraint feedback,
/// with the E_Q term folded into log space.
pub fn entropy_diff_binary(
    gamma_y: f64,
    log_zy: f64,
    local: &LocalConstraintApprox,
    fs: &FeasibilityStats,
) -> f64 {
    let sum = log_zy + fs.log_ztilde_c;
    if is_degenerate(sum) {
        return 0.0;
    }
    // below this the B(...) term is dwarfed by the already-negligible -log Z,
    // and the exp(log F - log Ztilde_c) rescalings can overflow
    if sum < -700.0 {
        return -log1mexp(sum);
    }
    let b = 1.0 / (-sum).exp_m1();
    let mut folded = 0.0;
    for zc in [-1i8, 1] {
        let lq = local.log_q(zc);
        if lq == f64::NEG_INFINITY {
            continue;
        }
        let lf = fs.log_f(zc);
        let l1mf = fs.log_1mf(zc);
        let t1 = ((lf - fs.log_ztilde_c).exp() - 1.0) * lq;
        let t2 = if l1mf == f64::NEG_INFINITY {
            0.0
        } else {
            (l1mf - fs.log_ztilde_c).exp() * l1mf
        };
        folded += lq.exp() * (t1 - t2);
    }
    -log1mexp(sum) - b * (gamma_y * hazard(-gamma_y) / 2.0 + folded)
}

/// H[P(z_y)] - H[P(z_y|y*)]: the value of observing the objective alone.
pub fn entropy_diff_marginal_y(gamma_y_tilde: f64, log_ztilde_y: f64, log_zc: f64) -> f64 {
    let sum = log_ztilde_y + log_zc;
    if is_degenerate(sum) {
        return 0.0;
    }
    if sum < -700.0 {
        return -log1mexp(sum);
    }
    // t = Zc^{-1} (1 - Zc) (-log(1 - Zc)), assembled in log space
    let t = if log_zc > -1e-15 {
        0.0
    } else {
        let l1mzc = log1mexp(log_zc);
        ((l1mzc - log_zc) + (-l1mzc).ln()).exp()
    };
    -log1mexp(sum) - (gamma_y_tilde * hazard(-gamma_y_tilde) / 2.0 + t) / (-sum).exp_m1()
}

/// H[Q(z_c)] - H[P(z_c|y*)]: the value of observing the binary constraint
/// alone, with kappa-tilde(z_c) = 1 - Z_y F(z_c).
pub fn entropy_diff_marginal_zc(
    log_zy: f64,
    local: &LocalConstraintApprox,
    fs: &FeasibilityStats,
) -> f64 {
    let sum = log_zy + fs.log_ztilde_c;
    if is_degenerate(sum) {
        return 0.0;
    }
    if sum < -700.0 {
        return -log1mexp(sum);
    }
    let log_z = log1mexp(sum);
    let b = 1.0 / (-sum).exp_m1();
    let mut kappa_term = 0.0;
    let mut q_term = 0.0;
    for zc in [-1i8, 1] {
        let lq = local.log_q(zc);
        if lq == f64::NEG_INFINITY {
            continue;
        }
        let lf = fs.log_f(zc);
        let log_kappa = log1mexp(log_zy + lf);
        if log_kappa != f64::NEG_INFINITY {
            kappa_term += (lq + log_kappa - log_z).exp() * (-log_kappa);
        }
        q_term += lq.exp() * ((lf - fs.log_ztilde_c).exp() - 1.0) * lq;
    }
    -log_z - kappa_term - b * q_term
}

/// Feasibility-weighted mixture for settings where y is observed only on
/// feasible evaluations.
pub fn mixture_score_unobserved(
    joint_score: f64,
    marginal_zc_score: f64,
    local: &LocalConstraintApprox,
) -> f64 {
    local.log_q(-1).exp() * joint_score + local.log_q(1).exp() * marginal_zc_score
}

/// Which entropy difference a cMES evaluation averages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreMode {
    /// Real-valued constraint feedback (joint truncated-Gaussian form).
    RealValued,
    /// Binary constraint feedback.
    Binary,
    /// Binary feedback with y unobserved on infeasible points: mixture of
    /// the joint score and the constraint-only score.
    BinaryUnobservedMixture,
}

/// cMES score at x: the mode's entropy difference averaged over y* samples.
/// Constraint-side quantities are standardized once per x and reused.
pub fn cmes_score(
    x: &ArrayView1<f64>,
    obj: &GpPosterior,
    con: &ConstraintPosterior,
    ystars: &YstarSet,
    delta: f64,
    mode: ScoreMode,
) -> Result<f64> {
    cmes_score_noisy(x, obj, con, ystars, delta, mode, None)
}

/// cMES score with an optional noisy-target shrinkage applied to the
/// real-valued formula; `None` reproduces the noise-free score.
pub fn cmes_score_noisy(
    x: &ArrayView1<f64>,
    obj: &GpPosterior,
    con: &ConstraintPosterior,
    ystars: &YstarSet,
    delta: f64,
    mode: ScoreMode,
    noisy: Option<&NoisyAdjustment>,
) -> Result<f64> {
    if ystars.values.is_empty() {
        return Err(Error::invalid("cmes_score needs at least one y* sample"));
    }
    let (mu_y, var_y) = obj.predict_marginal(x);
    let sd_y = var_y.max(1e-18).sqrt();
    let (mu_c, var_c) = con.latent_marginal(x);
    let k = ystars.values.len() as f64;
    match mode {
        ScoreMode::RealValued => {
            if matches!(con, ConstraintPosterior::Binary(_)) {
                return Err(Error::invalid(
                    "real_valued scoring needs a real-valued constraint posterior",
                ));
            }
            let (rho_y, rho_c) = match noisy {
                Some(adj) => {
                    if !(adj.rho_y > 0.0 && adj.rho_y <= 1.0 && adj.rho_c > 0.0 && adj.rho_c <= 1.0)
                    {
                        return Err(Error::invalid("noisy adjustment needs rho in (0, 1]"));
                    }
                    (adj.rho_y, adj.rho_c)
                }
                None => (1.0, 1.0),
            };
            let gamma_c = noisy_gamma((delta - mu_c) / var_c.max(1e-18).sqrt(), rho_c);
            let log_zc = log_phi(gamma_c);
            let mut acc = 0.0;
            for &ystar in &ystars.values {
                let gamma_y = noisy_gamma((ystar - mu_y) / sd_y, rho_y);
                let s = StandardizedInputs {
                    gamma_y,
                    gamma_c,
                    log_zy: log_phi(gamma_y),
                    log_zc,
                };
                acc += entropy_diff_real(&s);
            }
            Ok(acc / k)
        }
        ScoreMode::Binary | ScoreMode::BinaryUnobservedMixture => {
            if noisy.is_some() {
                return Err(Error::invalid(
                    "noisy adjustment applies to real_valued scoring only",
                ));
            }
            if !matches!(con, ConstraintPosterior::Binary(_)) {
                return Err(Error::invalid(
                    "binary scoring needs a binary constraint posterior",
                ));
            }
            let local = local_laplace(mu_c, var_c);
            let fs = feasibility_stats(&local, delta);
            let mut acc = 0.0;
            for &ystar in &ystars.values {
                let gamma_y = (ystar - mu_y) / sd_y;
                let log_zy = log_phi(gamma_y);
                let joint = entropy_diff_binary(gamma_y, log_zy, &local, &fs);
                acc += match mode {
                    ScoreMode::Binary => joint,
                    _ => {
                        let marg = entropy_diff_marginal_zc(log_zy, &local, &fs);
                        mixture_score_unobserved(joint, marg, &local)
                    }
                };
            }
            Ok(acc / k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::fit_ep;
    use crate::kernel::KernelParams;
    use crate::thompson::SamplerKind;

    fn set(values: Vec<f64>) -> YstarSet {
        YstarSet {
            values,
            sampler: SamplerKind::Joint,
            discretization_size: 1,
            fallback_count: 0,
        }
    }

    #[test]
    fn origin_matches_closed_form() {
        // gamma terms vanish at 0, Z = 1 - 1/2 * 1/2 = 3/4
        let s = StandardizedInputs::from_gammas(0.0, 0.0);
        assert!((entropy_diff_real(&s) - 0.75f64.ln().neg()).abs() < 1e-12);
    }

    #[test]
    fn real_score_is_symmetric_in_channels() {
        for (a, b) in [(0.7, -1.3), (2.0, 0.1), (-0.4, -0.4), (1.5, 3.0)] {
            let s1 = entropy_diff_real(&StandardizedInputs::from_gammas(a, b));
            let s2 = entropy_diff_real(&StandardizedInputs::from_gammas(b, a));
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn degenerate_conditioning_scores_zero() {
        let s = StandardizedInputs::from_gammas(20.0, 20.0);
        assert!(is_degenerate(s.log_zy + s.log_zc));
        assert_eq!(entropy_diff_real(&s), 0.0);
    }

    #[test]
    fn scores_vanish_when_conditioning_excludes_nothing() {
        // certainly infeasible, or y* certainly below belief
        let s = entropy_diff_real(&StandardizedInputs::from_gammas(0.0, -8.0));
        assert!(s.abs() < 1e-8, "{s}");
        let s = entropy_diff_real(&StandardizedInputs::from_gammas(-8.0, 0.0));
        assert!(s.abs() < 1e-8, "{s}");
        let m = entropy_diff_marginal_y(0.0, log_phi(0.0), log_phi(-8.0));
        assert!(m.abs() < 1e-8, "{m}");
        let m = entropy_diff_marginal_y(-8.0, log_phi(-8.0), log_phi(0.0));
        assert!(m.abs() < 1e-9, "{m}");
    }

    #[test]
    fn real_score_increases_with_gamma_y() {
        let mut prev = -1.0;
        for i in 0..=50 {
            let gy = i as f64 * 0.1;
            let s = entropy_diff_real(&StandardizedInputs::from_gammas(gy, 0.5));
            assert!(s > prev, "not increasing at gamma_y = {gy}");
            prev = s;
        }
    }

    #[test]
    fn noisy_adjustment_cases() {
        assert_eq!(noisy_gamma(1.3, 1.0), 1.3);
        assert_eq!(noisy_gamma(0.0, 0.37), 0.0);
        // sigma^2 alpha = 1 shrinks by rho = 1/sqrt(2)
        let rho = noisy_rho(2.0, 0.5);
        assert!((rho - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((noisy_gamma(1.0, rho) - 2f64.sqrt()).abs() < 1e-12);
        assert!((noisy_rho(1.0, 1e12) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_f_collapses_to_marginal_y_form() {
        // identical conditional branches make z_c carry nothing beyond its
        // mean: the joint binary score degenerates to the objective-only
        // score at Zc = Ztilde_c
        let local = LocalConstraintApprox::from_parts(
            [0.5f64.ln(), 0.5f64.ln()],
            [0.3, 0.3],
            [0.8, 0.8],
        );
        let fs = feasibility_stats(&local, 0.1);
        for gy in [-1.0, 0.0, 0.7, 2.0] {
            let lzy = log_phi(gy);
            let joint = entropy_diff_binary(gy, lzy, &local, &fs);
            let marg = entropy_diff_marginal_y(gy, lzy, fs.log_ztilde_c);
            assert!((joint - marg).abs() < 1e-10, "gy={gy}: {joint} vs {marg}");
        }
    }

    #[test]
    fn marginal_zc_limits() {
        let local = local_laplace(0.2, 0.5);
        let fs = feasibility_stats(&local, 0.4);
        // Z_y -> 0: kappa = 1 everywhere, nothing to learn
        assert!(entropy_diff_marginal_zc(-90.0, &local, &fs).abs() < 1e-9);
        // deterministic Q: the answer is already known
        let q1: f64 = 1.0 - 1e-15;
        let det = LocalConstraintApprox::from_parts(
            [(1.0 - q1).ln(), q1.ln()],
            [-0.3, 0.6],
            [0.4, 0.4],
        );
        let fs_det = feasibility_stats(&det, 0.0);
        let s = entropy_diff_marginal_zc(log_phi(0.3), &det, &fs_det);
        assert!(s.abs() < 1e-6, "{s}");
    }

    #[test]
    fn mixture_is_q_weighted_average() {
        let uniform = LocalConstraintApprox::from_parts(
            [0.5f64.ln(), 0.5f64.ln()],
            [0.0, 0.0],
            [1.0, 1.0],
        );
        assert!((mixture_score_unobserved(0.4, 0.1, &uniform) - 0.25).abs() < 1e-15);
        let sure_feasible =
            LocalConstraintApprox::from_parts([0.0, f64::NEG_INFINITY], [0.0, 0.0], [1.0, 1.0]);
        assert_eq!(mixture_score_unobserved(0.4, 0.1, &sure_feasible), 0.4);
        let sure_infeasible =
            LocalConstraintApprox::from_parts([f64::NEG_INFINITY, 0.0], [0.0, 0.0], [1.0, 1.0]);
        assert_eq!(mixture_score_unobserved(0.4, 0.1, &sure_infeasible), 0.1);
    }

    #[test]
    fn no_nan_over_extreme_gammas() {
        for &gy in &[-100.0, -30.0, -3.0, 0.0, 3.0, 30.0, 100.0] {
            for &gc in &[-100.0, -30.0, -3.0, 0.0, 3.0, 30.0, 100.0] {
                let s = entropy_diff_real(&StandardizedInputs::from_gammas(gy, gc));
                assert!(s.is_finite(), "real({gy},{gc}) = {s}");
                let m = entropy_diff_marginal_y(gy, log_phi(gy), log_phi(gc));
                assert!(m.is_finite(), "marg_y({gy},{gc}) = {m}");
            }
        }
        for &mu in &[-50.0, 0.0, 50.0] {
            for &var in &[1e-12, 1.0, 1e12] {
                let local = local_laplace(mu, var);
                let fs = feasibility_stats(&local, 0.0);
                for &gy in &[-100.0, 0.0, 100.0] {
                    let b = entropy_diff_binary(gy, log_phi(gy), &local, &fs);
                    assert!(b.is_finite(), "binary({mu},{var},{gy}) = {b}");
                    let z = entropy_diff_marginal_zc(log_phi(gy), &local, &fs);
                    assert!(z.is_finite(), "marg_zc({mu},{var},{gy}) = {z}");
                }
            }
        }
    }

    fn fitted_real() -> (GpPosterior, ConstraintPosterior) {
        let params = KernelParams::matern52(arr1(&[0.5]), 1.0, 50.0).unwrap();
        let x = arr2(&[[0.2], [0.8]]);
        let obj = GpPosterior::fit(x.clone(), &arr1(&[0.4, -0.6]).view(), params.clone()).unwrap();
        let con = ConstraintPosterior::RealValued(
            GpPosterior::fit(x, &arr1(&[-0.5, 1.0]).view(), params).unwrap(),
        );
        (obj, con)
    }

    #[test]
    fn cmes_score_averages_per_sample_formula() {
        let (obj, con) = fitted_real();
        let x = arr1(&[0.5]);
        let single = cmes_score(&x.view(), &obj, &con, &set(vec![-0.9]), 0.3, ScoreMode::RealValued)
            .unwrap();
        let (mu_y, var_y) = obj.predict_marginal(&x.view());
        let (mu_c, var_c) = con.latent_marginal(&x.view());
        let expect = entropy_diff_real(&StandardizedInputs::from_moments(
            mu_y, var_y, -0.9, mu_c, var_c, 0.3,
        ));
        assert!((single - expect).abs() < 1e-14);
        // duplicating samples leaves the mean unchanged
        let dup = cmes_score(
            &x.view(),
            &obj,
            &con,
            &set(vec![-0.9, -0.9, -0.9]),
            0.3,
            ScoreMode::RealValued,
        )
        .unwrap();
        assert!((dup - single).abs() < 1e-14);
    }

    #[test]
    fn cmes_score_rejects_bad_arguments() {
        let (obj, con) = fitted_real();
        let x = arr1(&[0.5]);
        assert!(cmes_score(&x.view(), &obj, &con, &set(vec![]), 0.3, ScoreMode::RealValued)
            .is_err());
        assert!(
            cmes_score(&x.view(), &obj, &con, &set(vec![0.0]), 0.3, ScoreMode::Binary).is_err()
        );
        let bin = fit_ep(
            arr2(&[[0.1], [0.9]]),
            &[-1, 1],
            KernelParams::matern52(arr1(&[0.5]), 1.0, 1e6).unwrap(),
        )
        .unwrap();
        assert!(
            cmes_score(&x.view(), &obj, &bin, &set(vec![0.0]), 0.3, ScoreMode::RealValued)
                .is_err()
        );
        let ok = cmes_score(&x.view(), &obj, &bin, &set(vec![0.0]), 0.3, ScoreMode::Binary);
        assert!(ok.unwrap().is_finite());
    }

    #[test]
    fn mixture_mode_sits_between_components() {
        let bin = fit_ep(
            arr2(&[[0.1], [0.6], [0.9]]),
            &[-1, -1, 1],
            KernelParams::matern52(arr1(&[0.4]), 1.2, 1e6).unwrap(),
        )
        .unwrap();
        let params = KernelParams::matern52(arr1(&[0.5]), 1.0, 50.0).unwrap();
        let obj = GpPosterior::fit(
            arr2(&[[0.2], [0.8]]),
            &arr1(&[0.4, -0.6]).view(),
            params,
        )
        .unwrap();
        let x = arr1(&[0.4]);
        let ys = set(vec![-1.1, -0.8]);
        let joint = cmes_score(&x.view(), &obj, &bin, &ys, 0.0, ScoreMode::Binary).unwrap();
        let mix =
            cmes_score(&x.view(), &obj, &bin, &ys, 0.0, ScoreMode::BinaryUnobservedMixture)
                .unwrap();
        let (mu_c, var_c) = bin.latent_marginal(&x.view());
        let local = local_laplace(mu_c, var_c);
        let fs = feasibility_stats(&local, 0.0);
        let (mu_y, var_y) = obj.predict_marginal(&x.view());
        let marg: f64 = ys
            .values
            .iter()
            .map(|&ystar| {
                let gy = (ystar - mu_y) / var_y.sqrt();
                entropy_diff_marginal_zc(log_phi(gy), &local, &fs)
            })
            .sum::<f64>()
            / 2.0;
        let lo = joint.min(marg) - 1e-12;
        let hi = joint.max(marg) + 1e-12;
        assert!(mix >= lo && mix <= hi, "{mix} outside [{lo}, {hi}]");
    }

    use std::ops::Neg;
}
