//! Constraint posteriors.
//!
//! Binary feedback uses GP classification with a logistic likelihood,
//! fitted by expectation propagation (sequential sweeps, damped natural
//! parameters, Gauss-Hermite tilted moments) with a Laplace-mode fallback
//! when EP diverges. Real-valued feedback passes through to plain GP
//! regression. The per-point factorization Q(z_c) Q(c | z_c) needed by the
//! binary acquisition score lives here as well.

use crate::error::{Error, Result};
use crate::gp::{jittered_cholesky, GpPosterior, HyperBounds, JointBelief};
use crate::kernel::{KernelKind, KernelParams};
use crate::math::{log_phi, log_sigmoid, logsumexp2, sigmoid};
use crate::opt::minimize_box;
use ndarray::prelude::*;
use ndarray_linalg::triangular::{Diag, SolveTriangular};
use ndarray_linalg::UPLO;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gauss-Hermite nodes/weights (n = 32) for logistic tilted moments.
const GH32: [(f64, f64); 32] = [
    (-7.125813909830727, 7.310676427384163e-23),
    (-6.409498149269661, 9.231736536518292e-19),
    (-5.812225949515914, 1.1973440170928487e-15),
    (-5.2755509865158805, 4.2150102113264474e-13),
    (-4.777164503502596, 5.933291463396639e-11),
    (-4.305547953351199, 4.098832164770897e-09),
    (-3.853755485471445, 1.574167792545594e-07),
    (-3.417167492818571, 3.650585129562376e-06),
    (-2.992490825002374, 5.4165840618199826e-05),
    (-2.5772495377323175, 0.000536268365527972),
    (-2.169499183606112, 0.003654890326654428),
    (-1.7676541094632017, 0.01755342883157343),
    (-1.3703764109528718, 0.06045813095591261),
    (-0.9765004635896828, 0.1512697340766425),
    (-0.5849787654359324, 0.2774581423025299),
    (-0.19484074156939932, 0.3752383525928024),
    (0.19484074156939932, 0.3752383525928024),
    (0.5849787654359324, 0.2774581423025299),
    (0.9765004635896828, 0.1512697340766425),
    (1.3703764109528718, 0.06045813095591261),
    (1.7676541094632017, 0.01755342883157343),
    (2.169499183606112, 0.003654890326654428),
    (2.5772495377323175, 0.000536268365527972),
    (2.992490825002374, 5.4165840618199826e-05),
    (3.417167492818571, 3.650585129562376e-06),
    (3.853755485471445, 1.574167792545594e-07),
    (4.305547953351199, 4.098832164770897e-09),
    (4.777164503502596, 5.933291463396639e-11),
    (5.2755509865158805, 4.2150102113264474e-13),
    (5.812225949515914, 1.1973440170928487e-15),
    (6.409498149269661, 9.231736536518292e-19),
    (7.125813909830727, 7.310676427384163e-23),
];

const INV_SQRT_PI: f64 = 0.5641895835477563;

/// EP inference settings.
#[derive(Clone, Copy, Debug)]
pub struct EpConfig {
    /// Convergence threshold on the largest site natural-parameter change.
    pub tol: f64,
    /// Sweep budget; 0 skips EP entirely and fits the Laplace mode.
    pub max_sweeps: usize,
    /// Damping factor on natural-parameter updates in (0, 1].
    pub damping: f64,
}

impl Default for EpConfig {
    fn default() -> Self {
        EpConfig {
            tol: 1e-6,
            max_sweeps: 100,
            damping: 0.5,
        }
    }
}

/// Site natural parameters; reusable to warm-start a refit.
#[derive(Clone, Debug)]
pub struct EpSites {
    pub tau: Array1<f64>,
    pub nu: Array1<f64>,
}

/// Moments of the tilted density sigma(z f) N(f | m, v): log normalizer,
/// mean, variance. Gauss-Hermite since the logistic integral has no closed
/// form.
fn tilted_moments(z: f64, m: f64, v: f64) -> (f64, f64, f64) {
    let scale = (2.0 * v).sqrt();
    let (mut z0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for &(t, w) in GH32.iter() {
        let f = m + scale * t;
        let lik = sigmoid(z * f);
        let ww = w * lik;
        z0 += ww;
        m1 += ww * f;
        m2 += ww * f * f;
    }
    z0 *= INV_SQRT_PI;
    m1 *= INV_SQRT_PI;
    m2 *= INV_SQRT_PI;
    let mhat = m1 / z0;
    let vhat = (m2 / z0 - mhat * mhat).max(1e-12);
    (z0.max(1e-300).ln(), mhat, vhat)
}

/// Posterior (Sigma, mu) from sites via the numerically safe B-form
/// B = I + S^{1/2} K S^{1/2}; also returns chol(B) and S^{1/2}.
#[allow(clippy::type_complexity)]
fn refresh(
    k: &Array2<f64>,
    tau: &Array1<f64>,
    nu: &Array1<f64>,
) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>, Array1<f64>)> {
    let n = k.nrows();
    let s_sqrt = tau.mapv(|t| t.max(0.0).sqrt());
    let mut b = Array2::eye(n);
    for i in 0..n {
        for j in 0..n {
            b[[i, j]] += s_sqrt[i] * k[[i, j]] * s_sqrt[j];
        }
    }
    let (l_b, _) = jittered_cholesky(&b)?;
    // V = L_B^{-1} S^{1/2} K, Sigma = K - V'V
    let mut sk = k.clone();
    for i in 0..n {
        for j in 0..n {
            sk[[i, j]] *= s_sqrt[i];
        }
    }
    let v = l_b
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &sk)
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    let sigma = k - &v.t().dot(&v);
    let mu = sigma.dot(nu);
    Ok((sigma, mu, l_b, s_sqrt))
}

/// GP classifier for binary constraint feedback.
#[derive(Clone, Debug)]
pub struct BinaryPosterior {
    x: Array2<f64>,
    z: Array1<f64>,
    params: KernelParams,
    sites: EpSites,
    l_b: Array2<f64>,
    s_sqrt: Array1<f64>,
    w: Array1<f64>,
    log_evidence: f64,
    fallback: bool,
    converged: bool,
    sweeps_used: usize,
}

impl BinaryPosterior {
    /// Prior classifier with no observations.
    pub fn prior(params: KernelParams) -> Self {
        let p = params.input_dim();
        BinaryPosterior {
            x: Array2::zeros((0, p)),
            z: Array1::zeros(0),
            params,
            sites: EpSites {
                tau: Array1::zeros(0),
                nu: Array1::zeros(0),
            },
            l_b: Array2::zeros((0, 0)),
            s_sqrt: Array1::zeros(0),
            w: Array1::zeros(0),
            log_evidence: 0.0,
            fallback: false,
            converged: true,
            sweeps_used: 0,
        }
    }

    /// Fit by EP; `warm` seeds the site parameters (shape-checked).
    pub fn fit(
        x: Array2<f64>,
        zc: &[i8],
        params: KernelParams,
        cfg: &EpConfig,
        warm: Option<&EpSites>,
    ) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::invalid("fit needs at least one observation"));
        }
        if zc.len() != n {
            return Err(Error::dims(format!("{} labels for {n} inputs", zc.len())));
        }
        if x.ncols() != params.input_dim() {
            return Err(Error::dims("input columns must match lengthscale count"));
        }
        if !zc.iter().all(|&v| v == 1 || v == -1) {
            return Err(Error::invalid("labels must be +1 or -1"));
        }
        if !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
            return Err(Error::invalid("damping must lie in (0, 1]"));
        }
        let z = Array1::from_iter(zc.iter().map(|&v| v as f64));
        let k = params.gram(&x.view());

        let (mut tau, mut nu) = match warm {
            Some(s) if s.tau.len() == n && s.tau.iter().all(|&t| t >= 0.0 && t.is_finite()) => {
                (s.tau.clone(), s.nu.clone())
            }
            _ => (Array1::zeros(n), Array1::zeros(n)),
        };

        let mut converged = false;
        let mut sweeps_used = 0;
        let mut diverged = cfg.max_sweeps == 0;

        if let (false, Ok((mut sigma, mut mu, _, _))) = (diverged, refresh(&k, &tau, &nu)) {
            let mut order: Vec<usize> = (0..n).collect();
            'sweeps: for sweep in 0..cfg.max_sweeps {
                let mut shuffle_rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ sweep as u64);
                order.shuffle(&mut shuffle_rng);
                let mut max_delta = 0.0_f64;
                for &i in &order {
                    let sig_ii = sigma[[i, i]];
                    if !(sig_ii > 0.0) {
                        diverged = true;
                        break 'sweeps;
                    }
                    let tau_cav = 1.0 / sig_ii - tau[i];
                    if tau_cav <= 1e-12 {
                        continue;
                    }
                    let nu_cav = mu[i] / sig_ii - nu[i];
                    let v_cav = 1.0 / tau_cav;
                    let m_cav = nu_cav * v_cav;
                    let (_, mhat, vhat) = tilted_moments(z[i], m_cav, v_cav);
                    let tau_full = (1.0 / vhat - tau_cav).max(0.0);
                    let nu_full = mhat / vhat - nu_cav;
                    let tau_next = (1.0 - cfg.damping) * tau[i] + cfg.damping * tau_full;
                    let nu_next = (1.0 - cfg.damping) * nu[i] + cfg.damping * nu_full;
                    let dtau = tau_next - tau[i];
                    let denom = 1.0 + dtau * sig_ii;
                    if denom <= 1e-12 {
                        continue;
                    }
                    max_delta = max_delta.max(dtau.abs()).max((nu_next - nu[i]).abs());
                    let col = sigma.column(i).to_owned();
                    let factor = dtau / denom;
                    for a in 0..n {
                        for b in 0..n {
                            sigma[[a, b]] -= factor * col[a] * col[b];
                        }
                    }
                    tau[i] = tau_next;
                    nu[i] = nu_next;
                    mu = sigma.dot(&nu);
                }
                sweeps_used = sweep + 1;
                // periodic refresh keeps the rank-1 drift in check
                match refresh(&k, &tau, &nu) {
                    Ok((s2, m2, _, _)) => {
                        sigma = s2;
                        mu = m2;
                    }
                    Err(_) => {
                        diverged = true;
                        break 'sweeps;
                    }
                }
                let finite = tau.iter().all(|v| v.is_finite())
                    && nu.iter().all(|v| v.is_finite())
                    && mu.iter().all(|v| v.is_finite());
                if !finite {
                    diverged = true;
                    break 'sweeps;
                }
                if max_delta < cfg.tol {
                    converged = true;
                    break;
                }
            }
        } else {
            diverged = true;
        }

        let state = if diverged {
            Err(Error::numerical("EP diverged"))
        } else {
            refresh(&k, &tau, &nu)
        };
        if state.is_err() {
            // Laplace-mode fallback: Newton iteration for the posterior mode,
            // effective sites from the curvature there
            let (f_hat, tau_l, nu_l, ev) = laplace_mode(&k, &z)?;
            let (_, _, l_b, s_sqrt) = refresh(&k, &tau_l, &nu_l)?;
            let w = representer_weights(&k, &nu_l, &l_b, &s_sqrt)?;
            log::warn!("EP diverged or was disabled; using Laplace-mode fit");
            let _ = f_hat;
            return Ok(BinaryPosterior {
                x,
                z,
                params,
                sites: EpSites { tau: tau_l, nu: nu_l },
                l_b,
                s_sqrt,
                w,
                log_evidence: ev,
                fallback: true,
                converged: false,
                sweeps_used,
            });
        }

        if !converged {
            log::warn!("EP did not reach tol {} in {} sweeps", cfg.tol, cfg.max_sweeps);
        }
        let (sigma, mu, l_b, s_sqrt) = state.expect("checked above");
        let w = representer_weights(&k, &nu, &l_b, &s_sqrt)?;
        let log_evidence = ep_evidence(&sigma, &mu, &tau, &nu, &z, &l_b);
        Ok(BinaryPosterior {
            x,
            z,
            params,
            sites: EpSites { tau, nu },
            l_b,
            s_sqrt,
            w,
            log_evidence,
            fallback: false,
            converged,
            sweeps_used,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Training labels as +/-1 reals.
    pub fn labels(&self) -> ArrayView1<'_, f64> {
        self.z.view()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn sites(&self) -> &EpSites {
        &self.sites
    }

    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    pub fn sweeps_used(&self) -> usize {
        self.sweeps_used
    }

    /// Latent posterior mean and variance at one point.
    pub fn predict_marginal(&self, x: &ArrayView1<f64>) -> (f64, f64) {
        let prior_var = self.params.eval(x, x);
        if self.n() == 0 {
            return (0.0, prior_var);
        }
        let kstar = self.params.cross_vec(&self.x.view(), x);
        let mean = kstar.dot(&self.w);
        let scaled = &kstar * &self.s_sqrt;
        let v = self
            .l_b
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &scaled)
            .expect("triangular solve cannot fail after successful factorization");
        let var = (prior_var - v.dot(&v)).max(1e-12);
        (mean, var)
    }

    /// Batch version of [`predict_marginal`](Self::predict_marginal).
    pub fn predict_marginal_batch(&self, xs: &ArrayView2<f64>) -> (Array1<f64>, Array1<f64>) {
        let m = xs.nrows();
        if self.n() == 0 {
            let vars = Array1::from_iter((0..m).map(|i| self.params.eval(&xs.row(i), &xs.row(i))));
            return (Array1::zeros(m), vars);
        }
        let kxs = self.params.cross(&self.x.view(), xs);
        let means = kxs.t().dot(&self.w);
        let mut scaled = kxs;
        for i in 0..self.n() {
            for j in 0..m {
                scaled[[i, j]] *= self.s_sqrt[i];
            }
        }
        let v = self
            .l_b
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &scaled)
            .expect("triangular solve cannot fail after successful factorization");
        let mut vars = Array1::zeros(m);
        for j in 0..m {
            let col = v.column(j);
            vars[j] = (self.params.eval(&xs.row(j), &xs.row(j)) - col.dot(&col)).max(1e-12);
        }
        (means, vars)
    }

    /// Joint latent posterior over the rows of `xs`.
    pub fn predict_joint(&self, xs: &ArrayView2<f64>) -> Result<JointBelief> {
        let kss = self.params.gram(&xs.view());
        if self.n() == 0 {
            return Ok(JointBelief {
                mean: Array1::zeros(xs.nrows()),
                cov: kss,
            });
        }
        let kxs = self.params.cross(&self.x.view(), xs);
        let mean = kxs.t().dot(&self.w);
        let mut scaled = kxs;
        for i in 0..self.n() {
            for j in 0..xs.nrows() {
                scaled[[i, j]] *= self.s_sqrt[i];
            }
        }
        let v = self
            .l_b
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &scaled)
            .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
        let cov_raw = &kss - &v.t().dot(&v);
        let cov = 0.5 * (&cov_raw + &cov_raw.t());
        Ok(JointBelief { mean, cov })
    }

    /// Predictive probability of outcome `zc` at `x` (probit moderation of
    /// the logistic link).
    pub fn class_prob(&self, x: &ArrayView1<f64>, zc: i8) -> f64 {
        let (mu, var) = self.predict_marginal(x);
        let kappa = (1.0 + std::f64::consts::PI * var / 8.0).sqrt().recip();
        sigmoid(zc as f64 * mu * kappa)
    }
}

/// Representer weights for the predictive mean:
/// w = nu - S^{1/2} B^{-1} S^{1/2} K nu, so mean(x*) = k*' w.
fn representer_weights(
    k: &Array2<f64>,
    nu: &Array1<f64>,
    l_b: &Array2<f64>,
    s_sqrt: &Array1<f64>,
) -> Result<Array1<f64>> {
    let knu = k.dot(nu);
    let scaled = &knu * s_sqrt;
    let half = l_b
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &scaled)
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    let full = l_b
        .t()
        .to_owned()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &half)
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    Ok(nu - &(&full * s_sqrt))
}

/// EP approximation of the log evidence, written so sites with tau = 0
/// contribute only their tilted normalizer.
fn ep_evidence(
    sigma: &Array2<f64>,
    mu: &Array1<f64>,
    tau: &Array1<f64>,
    nu: &Array1<f64>,
    z: &Array1<f64>,
    l_b: &Array2<f64>,
) -> f64 {
    let n = z.len();
    let mut total = 0.0;
    for i in 0..n {
        let sig_ii = sigma[[i, i]];
        let tau_cav = (1.0 / sig_ii - tau[i]).max(1e-12);
        let v = 1.0 / tau_cav;
        let m = (mu[i] / sig_ii - nu[i]) * v;
        let (log_zhat, _, _) = tilted_moments(z[i], m, v);
        let one_plus = 1.0 + tau[i] * v;
        total += log_zhat + 0.5 * one_plus.ln()
            + (m * m * tau[i] - 2.0 * m * nu[i] - v * nu[i] * nu[i]) / (2.0 * one_plus);
    }
    let log_det_half: f64 = (0..n).map(|i| l_b[[i, i]].ln()).sum();
    total - log_det_half + 0.5 * nu.dot(mu)
}

/// Newton iteration for the Laplace mode; returns the mode, effective site
/// parameters matching its curvature, and the Laplace log evidence.
#[allow(clippy::type_complexity)]
fn laplace_mode(
    k: &Array2<f64>,
    z: &Array1<f64>,
) -> Result<(Array1<f64>, Array1<f64>, Array1<f64>, f64)> {
    let n = z.len();
    let mut f = Array1::zeros(n);
    let mut a = Array1::zeros(n);
    let mut log_det_half = 0.0;
    for _ in 0..200 {
        let pi = f.mapv(sigmoid);
        let grad = Array1::from_iter((0..n).map(|i| 0.5 * (z[i] + 1.0) - pi[i]));
        let w = pi.mapv(|p| (p * (1.0 - p)).max(1e-12));
        let s_sqrt = w.mapv(f64::sqrt);
        let mut b = Array2::eye(n);
        for i in 0..n {
            for j in 0..n {
                b[[i, j]] += s_sqrt[i] * k[[i, j]] * s_sqrt[j];
            }
        }
        let (l_b, _) = jittered_cholesky(&b)?;
        log_det_half = (0..n).map(|i| l_b[[i, i]].ln()).sum();
        let bvec = &(&w * &f) + &grad;
        let scaled = &k.dot(&bvec) * &s_sqrt;
        let half = l_b
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &scaled)
            .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
        let full = l_b
            .t()
            .to_owned()
            .solve_triangular(UPLO::Upper, Diag::NonUnit, &half)
            .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
        a = &bvec - &(&full * &s_sqrt);
        let f_new = k.dot(&a);
        let delta = f_new
            .iter()
            .zip(f.iter())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0_f64, f64::max);
        f = f_new;
        if delta < 1e-10 {
            break;
        }
    }
    let pi = f.mapv(sigmoid);
    let w = pi.mapv(|p| (p * (1.0 - p)).max(1e-12));
    let grad = Array1::from_iter((0..n).map(|i| 0.5 * (z[i] + 1.0) - pi[i]));
    let nu_eff = &(&w * &f) + &grad;
    let log_lik: f64 = (0..n).map(|i| log_sigmoid(z[i] * f[i])).sum();
    let evidence = -0.5 * a.dot(&f) + log_lik - log_det_half;
    Ok((f, w, nu_eff, evidence))
}

/// Constraint posterior for either feedback mode.
#[derive(Clone, Debug)]
pub enum ConstraintPosterior {
    RealValued(GpPosterior),
    Binary(BinaryPosterior),
}

impl ConstraintPosterior {
    /// Latent mean and variance of c at one point.
    pub fn latent_marginal(&self, x: &ArrayView1<f64>) -> (f64, f64) {
        match self {
            ConstraintPosterior::RealValued(gp) => gp.predict_marginal(x),
            ConstraintPosterior::Binary(ep) => ep.predict_marginal(x),
        }
    }

    /// Batch latent marginals.
    pub fn latent_marginal_batch(&self, xs: &ArrayView2<f64>) -> (Array1<f64>, Array1<f64>) {
        match self {
            ConstraintPosterior::RealValued(gp) => gp.predict_marginal_batch(xs),
            ConstraintPosterior::Binary(ep) => ep.predict_marginal_batch(xs),
        }
    }

    /// Joint latent posterior over the rows of `xs`.
    pub fn latent_joint(&self, xs: &ArrayView2<f64>) -> Result<JointBelief> {
        match self {
            ConstraintPosterior::RealValued(gp) => gp.predict_joint(xs),
            ConstraintPosterior::Binary(ep) => ep.predict_joint(xs),
        }
    }

    /// Posterior probability that the latent constraint satisfies c <= delta.
    pub fn feasible_prob(&self, x: &ArrayView1<f64>, delta: f64) -> f64 {
        match self {
            ConstraintPosterior::RealValued(gp) => {
                let (mu, var) = gp.predict_marginal(x);
                log_phi((delta - mu) / var.max(1e-18).sqrt()).exp()
            }
            // binary feedback: the moderated next-label probability; the
            // threshold is already folded into the +/-1 labels
            ConstraintPosterior::Binary(ep) => ep.class_prob(x, -1),
        }
    }
}

/// Fit the binary constraint model with default EP settings.
pub fn fit_ep(x: Array2<f64>, zc: &[i8], params: KernelParams) -> Result<ConstraintPosterior> {
    Ok(ConstraintPosterior::Binary(BinaryPosterior::fit(
        x,
        zc,
        params,
        &EpConfig::default(),
        None,
    )?))
}

fn zi(zc: i8) -> usize {
    if zc < 0 {
        0
    } else {
        1
    }
}

/// Per-point factorization Q(z_c) Q(c | z_c), indexed by z_c in {-1, +1}.
#[derive(Clone, Copy, Debug)]
pub struct LocalConstraintApprox {
    log_q: [f64; 2],
    cond_mean: [f64; 2],
    cond_var: [f64; 2],
}

impl LocalConstraintApprox {
    /// Assemble from explicit per-outcome weights and conditional moments,
    /// for callers substituting their own two-component approximation.
    /// Arrays are indexed [z_c = -1, z_c = +1].
    pub fn from_parts(log_q: [f64; 2], cond_mean: [f64; 2], cond_var: [f64; 2]) -> Self {
        Self {
            log_q,
            cond_mean,
            cond_var,
        }
    }

    pub fn log_q(&self, zc: i8) -> f64 {
        self.log_q[zi(zc)]
    }

    pub fn cond_mean(&self, zc: i8) -> f64 {
        self.cond_mean[zi(zc)]
    }

    pub fn cond_var(&self, zc: i8) -> f64 {
        self.cond_var[zi(zc)]
    }
}

fn laplace_branch(zc: f64, mu: f64, var: f64, iterate: bool) -> (f64, f64) {
    // mode of log sigma(z c) + log N(c | mu, var) by Newton from c0 = mu
    let mut c = mu;
    let steps = if iterate { 100 } else { 1 };
    for _ in 0..steps {
        let d1 = zc * sigmoid(-zc * c) - (c - mu) / var;
        let d2 = -sigmoid(zc * c) * sigmoid(-zc * c) - 1.0 / var;
        let next = c - d1 / d2;
        let moved = (next - c).abs();
        c = next;
        if iterate && moved < 1e-12 {
            break;
        }
    }
    let d2 = -sigmoid(zc * c) * sigmoid(-zc * c) - 1.0 / var;
    let cond_var = (-1.0 / d2).max(1e-12);
    (c, cond_var)
}

fn local_laplace_impl(mu_c: f64, var_c: f64, iterate: bool) -> LocalConstraintApprox {
    let var = var_c.max(1e-12);
    let kappa = (1.0 + std::f64::consts::PI * var / 8.0).sqrt().recip();
    let mut out = LocalConstraintApprox {
        log_q: [0.0; 2],
        cond_mean: [0.0; 2],
        cond_var: [0.0; 2],
    };
    for (idx, zc) in [(-1.0_f64), 1.0].into_iter().enumerate() {
        out.log_q[idx] = log_sigmoid(zc * mu_c * kappa);
        let (m, v) = laplace_branch(zc, mu_c, var, iterate);
        out.cond_mean[idx] = m;
        out.cond_var[idx] = v;
    }
    out
}

/// One-step Laplace factorization at a point with latent moments
/// (mu_c, var_c): Q(z_c) by probit moderation, Q(c | z_c) Gaussian at one
/// Newton step from the cavity mean.
pub fn local_laplace(mu_c: f64, var_c: f64) -> LocalConstraintApprox {
    local_laplace_impl(mu_c, var_c, false)
}

/// Same factorization with the Newton iteration run to convergence; used to
/// probe the quality of the one-step approximation.
pub fn local_laplace_converged(mu_c: f64, var_c: f64) -> LocalConstraintApprox {
    local_laplace_impl(mu_c, var_c, true)
}

/// Feasibility summaries for the binary score, indexed by z_c in {-1, +1}.
#[derive(Clone, Copy, Debug)]
pub struct FeasibilityStats {
    log_f: [f64; 2],
    log_1mf: [f64; 2],
    pub log_ztilde_c: f64,
}

impl FeasibilityStats {
    /// log P(c <= delta | z_c).
    pub fn log_f(&self, zc: i8) -> f64 {
        self.log_f[zi(zc)]
    }

    /// log P(c > delta | z_c).
    pub fn log_1mf(&self, zc: i8) -> f64 {
        self.log_1mf[zi(zc)]
    }
}

/// Per-outcome feasibility probabilities F(z_c) = Phi(gamma_c(z_c)) and the
/// total Ztilde_c = sum_z Q(z) F(z), all in log space.
pub fn feasibility_stats(local: &LocalConstraintApprox, delta: f64) -> FeasibilityStats {
    let mut log_f = [0.0; 2];
    let mut log_1mf = [0.0; 2];
    for idx in 0..2 {
        let gamma = (delta - local.cond_mean[idx]) / local.cond_var[idx].sqrt();
        log_f[idx] = log_phi(gamma);
        log_1mf[idx] = log_phi(-gamma);
    }
    let log_ztilde_c = logsumexp2(
        local.log_q[0] + log_f[0],
        local.log_q[1] + log_f[1],
    );
    FeasibilityStats {
        log_f,
        log_1mf,
        log_ztilde_c,
    }
}

/// Fixed-site gradient of the EP evidence with respect to
/// `[log l_1, .., log l_p, log amplitude]`. Exact at the EP fixed point,
/// where the evidence is stationary in the site parameters.
fn ep_evidence_grad(post: &BinaryPosterior) -> Result<Array1<f64>> {
    let n = post.n();
    let p = post.params.input_dim();
    let grads = post.params.gram_grads(&post.x.view());
    // R = S^{1/2} B^{-1} S^{1/2} via M = L_B^{-1} diag(s)
    let mut sdiag = Array2::zeros((n, n));
    for i in 0..n {
        sdiag[[i, i]] = post.s_sqrt[i];
    }
    let m = post
        .l_b
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &sdiag)
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    let r = m.t().dot(&m);
    let mut out = Array1::zeros(p + 1);
    for (t, dk) in grads.iter().enumerate() {
        let quad = post.w.dot(&dk.dot(&post.w));
        let trace: f64 = (0..n).map(|i| r.row(i).dot(&dk.row(i))).sum();
        out[t] = 0.5 * (quad - trace);
    }
    Ok(out)
}

/// Maximize the EP evidence over kernel hyperparameters. Warm-starts each
/// refit from the previous sites, so successive evidence evaluations along
/// the search path stay cheap.
pub fn optimize_ep_hyperparameters<R: Rng + ?Sized>(
    x: &ArrayView2<f64>,
    zc: &[i8],
    kind: KernelKind,
    bounds: &HyperBounds,
    restarts: usize,
    cfg: &EpConfig,
    rng: &mut R,
) -> Result<KernelParams> {
    let n = x.nrows();
    let p = x.ncols();
    if n == 0 {
        return Err(Error::invalid("cannot optimize hyperparameters without data"));
    }
    let restarts = restarts.max(1);

    let mut lo = Array1::zeros(p + 1);
    let mut hi = Array1::zeros(p + 1);
    for d in 0..p {
        lo[d] = bounds.lengthscale.0.ln();
        hi[d] = bounds.lengthscale.1.ln();
    }
    lo[p] = bounds.amplitude.0.ln();
    hi[p] = bounds.amplitude.1.ln();

    let params_of = |u: &Array1<f64>| -> Result<KernelParams> {
        let ls = Array1::from_iter((0..p).map(|d| u[d].exp()));
        KernelParams::new(kind, ls, u[p].exp(), 1e6)
    };

    let mut warm: Option<EpSites> = None;
    let mut objective = |u: &Array1<f64>| -> (f64, Array1<f64>) {
        let fit = params_of(u)
            .and_then(|prm| BinaryPosterior::fit(x.to_owned(), zc, prm, cfg, warm.as_ref()));
        match fit {
            Ok(post) => {
                let grad = ep_evidence_grad(&post).unwrap_or_else(|_| Array1::zeros(p + 1));
                warm = Some(post.sites.clone());
                (-post.log_evidence, -grad)
            }
            Err(_) => (f64::INFINITY, Array1::zeros(p + 1)),
        }
    };

    // heuristic start: moderate lengthscales, unit-ish latent amplitude
    let mut start0 = Array1::zeros(p + 1);
    for d in 0..p {
        let col = x.column(d);
        let range = col.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - col.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let guess = if range > 0.0 { 0.3 * range } else { 0.3 };
        start0[d] = guess.clamp(bounds.lengthscale.0, bounds.lengthscale.1).ln();
    }
    start0[p] = 4.0_f64.clamp(bounds.amplitude.0, bounds.amplitude.1).ln();

    let mut best: Option<(Array1<f64>, f64)> = None;
    for r in 0..restarts {
        let u0 = if r == 0 {
            start0.clone()
        } else {
            Array1::from_iter((0..p + 1).map(|i| rng.random_range(lo[i]..hi[i])))
        };
        let (u, val) = minimize_box(&mut objective, u0, &lo, &hi, 25);
        if val.is_finite() && best.as_ref().is_none_or(|(_, b)| val < *b) {
            best = Some((u, val));
        }
    }
    let (u, _) = best.ok_or_else(|| Error::numerical("all hyperparameter starts failed"))?;
    params_of(&u)
}
