//! Gaussian process regression with exact inference.
//!
//! A fitted posterior stores the Cholesky factor of the noisy Gram matrix
//! and the representer weights; marginal prediction is one triangular solve,
//! joint prediction over a discretization is a matrix triangular solve. The
//! evidence and its analytic gradient drive the hyperparameter optimizer.

use crate::error::{Error, Result};
use crate::kernel::{KernelKind, KernelParams};
use crate::opt::minimize_box;
use ndarray::prelude::*;
use ndarray_linalg::cholesky::{Cholesky, UPLO};
use ndarray_linalg::eigh::Eigh;
use ndarray_linalg::triangular::{Diag, SolveTriangular};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floor applied to predictive variances to absorb round-off.
pub const VAR_FLOOR: f64 = 0.0;

/// Cholesky with an escalating jitter ladder: 0, then 1e-10..1e-4 times the
/// mean diagonal. Returns the factor and the jitter that was needed.
pub(crate) fn jittered_cholesky(a: &Array2<f64>) -> Result<(Array2<f64>, f64)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Array2::zeros((0, 0)), 0.0));
    }
    let mean_diag = a.diag().iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    if !mean_diag.is_finite() {
        return Err(Error::numerical("non-finite diagonal in covariance"));
    }
    if mean_diag <= 1e-300 {
        // Degenerate covariance: treat as exactly zero, factor is zero.
        return Ok((Array2::zeros((n, n)), 0.0));
    }
    let mut scale = 1e-10;
    for attempt in 0..8 {
        let jitter = if attempt == 0 { 0.0 } else { scale * mean_diag };
        if attempt > 1 {
            scale *= 10.0;
        }
        let mut try_mat = a.clone();
        for i in 0..n {
            try_mat[[i, i]] += jitter;
        }
        if let Ok(l) = try_mat.cholesky(UPLO::Lower) {
            if l.iter().all(|v| v.is_finite()) {
                return Ok((l, jitter));
            }
        }
    }
    Err(Error::numerical(format!(
        "Cholesky failed up to jitter 1e-4 * mean diag ({mean_diag:.3e})"
    )))
}

/// Gaussian belief over function values at a finite set of points.
#[derive(Clone, Debug)]
pub struct JointBelief {
    pub mean: Array1<f64>,
    pub cov: Array2<f64>,
}

/// Reusable sampler holding the factored covariance of a [`JointBelief`].
pub struct JointSampler<'a> {
    belief: &'a JointBelief,
    factor: Array2<f64>,
}

/// Square root of a symmetric PSD matrix for sampling. Cholesky when it
/// succeeds; a posterior covariance can be numerically rank-deficient, and
/// then an eigendecomposition with negative round-off modes clipped to zero
/// still satisfies F F^T = A.
fn sampling_factor(sym: &Array2<f64>) -> Result<Array2<f64>> {
    if let Ok((l, _)) = jittered_cholesky(sym) {
        return Ok(l);
    }
    let (vals, vecs) = sym
        .eigh(UPLO::Lower)
        .map_err(|e| Error::numerical(format!("eigendecomposition failed: {e}")))?;
    let mut factor = vecs;
    for (j, &v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        factor.column_mut(j).mapv_inplace(|u| u * s);
    }
    if factor.iter().all(|v| v.is_finite()) {
        Ok(factor)
    } else {
        Err(Error::numerical("non-finite eigenfactor of covariance"))
    }
}

impl JointBelief {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Factor the covariance once for repeated draws.
    pub fn sampler(&self) -> Result<JointSampler<'_>> {
        let sym = 0.5 * (&self.cov + &self.cov.t());
        let factor = sampling_factor(&sym)?;
        Ok(JointSampler {
            belief: self,
            factor,
        })
    }

    /// Draw `k` joint samples as an (m, k) matrix. Column j is the j-th
    /// sample; normals are consumed column by column, so identically seeded
    /// generators reproduce the output bit for bit.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Array2<f64>> {
        let sampler = self.sampler()?;
        let m = self.len();
        let mut out = Array2::zeros((m, k));
        for j in 0..k {
            let draw = sampler.draw(rng);
            out.column_mut(j).assign(&draw);
        }
        Ok(out)
    }
}

impl JointSampler<'_> {
    /// One joint draw mean + F n, n ~ N(0, I).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Array1<f64> {
        let m = self.belief.len();
        let noise = Array1::from_iter((0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
        &self.factor.dot(&noise) + &self.belief.mean
    }
}

/// Exact GP regression posterior.
#[derive(Clone, Debug)]
pub struct GpPosterior {
    x: Array2<f64>,
    chol: Array2<f64>,
    representer: Array1<f64>,
    params: KernelParams,
    jitter: f64,
}

impl GpPosterior {
    /// Condition on observations `z` at rows of `x`.
    pub fn fit(x: Array2<f64>, z: &ArrayView1<f64>, params: KernelParams) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::invalid("fit needs at least one observation"));
        }
        if z.len() != n {
            return Err(Error::dims(format!("{} targets for {} inputs", z.len(), n)));
        }
        if x.ncols() != params.input_dim() {
            return Err(Error::dims(format!(
                "{} input columns but {} lengthscales",
                x.ncols(),
                params.input_dim()
            )));
        }
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("targets must be finite"));
        }
        let mut gram = params.gram(&x.view());
        let noise_var = 1.0 / params.noise_precision;
        for i in 0..n {
            gram[[i, i]] += noise_var;
        }
        let (chol, jitter) = jittered_cholesky(&gram)?;
        let representer = chol
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &z.to_owned())
            .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
        Ok(GpPosterior {
            x,
            chol,
            representer,
            params,
            jitter,
        })
    }

    /// Prior belief (no observations) over a `input_dim`-dimensional domain.
    pub fn prior(params: KernelParams) -> Self {
        let p = params.input_dim();
        GpPosterior {
            x: Array2::zeros((0, p)),
            chol: Array2::zeros((0, 0)),
            representer: Array1::zeros(0),
            params,
            jitter: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn train_inputs(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    /// Posterior mean and variance of the latent function at one point.
    pub fn predict_marginal(&self, x: &ArrayView1<f64>) -> (f64, f64) {
        let prior_var = self.params.eval(x, x);
        if self.n() == 0 {
            return (0.0, prior_var);
        }
        let kstar = self.params.cross_vec(&self.x.view(), x);
        let v = self
            .chol
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &kstar)
            .expect("triangular solve cannot fail after successful factorization");
        let mean = v.dot(&self.representer);
        let var = (prior_var - v.dot(&v)).max(VAR_FLOOR);
        (mean, var)
    }

    /// Batch marginal prediction: means and variances at each row of `xs`.
    pub fn predict_marginal_batch(&self, xs: &ArrayView2<f64>) -> (Array1<f64>, Array1<f64>) {
        let m = xs.nrows();
        if self.n() == 0 {
            let vars = Array1::from_iter((0..m).map(|i| self.params.eval(&xs.row(i), &xs.row(i))));
            return (Array1::zeros(m), vars);
        }
        let kxs = self.params.cross(&self.x.view(), xs); // n x m
        let v = self
            .chol
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &kxs)
            .expect("triangular solve cannot fail after successful factorization");
        let means = v.t().dot(&self.representer);
        let mut vars = Array1::zeros(m);
        for j in 0..m {
            let col = v.column(j);
            vars[j] = (self.params.eval(&xs.row(j), &xs.row(j)) - col.dot(&col)).max(VAR_FLOOR);
        }
        (means, vars)
    }

    /// Full joint posterior over the rows of `xs`.
    pub fn predict_joint(&self, xs: &ArrayView2<f64>) -> Result<JointBelief> {
        if xs.ncols() != self.input_dim() && self.n() > 0 {
            return Err(Error::dims("query dimension mismatch"));
        }
        let kss = self.params.gram(&xs.view());
        if self.n() == 0 {
            return Ok(JointBelief {
                mean: Array1::zeros(xs.nrows()),
                cov: kss,
            });
        }
        let kxs = self.params.cross(&self.x.view(), xs); // n x m
        let v = self
            .chol
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &kxs)
            .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
        let mean = v.t().dot(&self.representer);
        let cov_raw = &kss - &v.t().dot(&v);
        let cov = 0.5 * (&cov_raw + &cov_raw.t());
        Ok(JointBelief { mean, cov })
    }
}

/// Log marginal likelihood of `z` under the GP prior with `params`.
pub fn log_marginal_likelihood(
    x: &ArrayView2<f64>,
    z: &ArrayView1<f64>,
    params: &KernelParams,
) -> Result<f64> {
    let n = x.nrows();
    let mut gram = params.gram(x);
    let noise_var = 1.0 / params.noise_precision;
    for i in 0..n {
        gram[[i, i]] += noise_var;
    }
    let (chol, _) = jittered_cholesky(&gram)?;
    let p = chol
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &z.to_owned())
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    let log_det_half: f64 = (0..n).map(|i| chol[[i, i]].ln()).sum();
    Ok(-0.5 * p.dot(&p) - log_det_half - 0.5 * n as f64 * crate::math::LN_2PI)
}

/// Evidence and its gradient with respect to
/// `[log l_1, .., log l_p, log amplitude, log noise_variance]`.
pub fn log_marginal_likelihood_grad(
    x: &ArrayView2<f64>,
    z: &ArrayView1<f64>,
    params: &KernelParams,
) -> Result<(f64, Array1<f64>)> {
    let n = x.nrows();
    let p = params.input_dim();
    let mut gram = params.gram(x);
    let noise_var = 1.0 / params.noise_precision;
    for i in 0..n {
        gram[[i, i]] += noise_var;
    }
    let (chol, _) = jittered_cholesky(&gram)?;
    let pvec = chol
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &z.to_owned())
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    let log_det_half: f64 = (0..n).map(|i| chol[[i, i]].ln()).sum();
    let value = -0.5 * pvec.dot(&pvec) - log_det_half - 0.5 * n as f64 * crate::math::LN_2PI;

    // beta = A^{-1} z via the second triangular solve, A^{-1} via L^{-1}
    let beta = chol
        .t()
        .to_owned()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &pvec)
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    let linv = chol
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &Array2::eye(n))
        .map_err(|e| Error::numerical(format!("triangular solve failed: {e}")))?;
    let ainv = linv.t().dot(&linv);

    // dL/dtheta = 0.5 (beta' dA beta - tr(A^{-1} dA))
    let grads = params.gram_grads(x);
    let mut out = Array1::zeros(p + 2);
    for (t, dk) in grads.iter().enumerate() {
        let quad = beta.dot(&dk.dot(&beta));
        let trace: f64 = (0..n).map(|i| ainv.row(i).dot(&dk.row(i))).sum();
        out[t] = 0.5 * (quad - trace);
    }
    // noise direction: dA/dlog s^2 = s^2 I
    let tr_ainv: f64 = (0..n).map(|i| ainv[[i, i]]).sum();
    out[p + 1] = 0.5 * noise_var * (beta.dot(&beta) - tr_ainv);
    Ok((value, out))
}

/// Box bounds for hyperparameter search, in natural (not log) units.
#[derive(Clone, Copy, Debug)]
pub struct HyperBounds {
    pub lengthscale: (f64, f64),
    pub amplitude: (f64, f64),
    pub noise_var: (f64, f64),
}

impl HyperBounds {
    /// Bounds scaled for data living in the unit box with standardized
    /// targets: lengthscales in [1e-3, 1e3], amplitude in [1e-4, 1e4],
    /// noise variance in [1e-8, 1].
    pub fn unit_box() -> Self {
        HyperBounds {
            lengthscale: (1e-3, 1e3),
            amplitude: (1e-4, 1e4),
            noise_var: (1e-8, 1.0),
        }
    }
}

/// Maximize the evidence over kernel hyperparameters with a multi-start
/// quasi-Newton search in log space. The first start is a data-driven
/// heuristic; the rest are log-uniform draws inside the bounds.
pub fn optimize_hyperparameters<R: Rng + ?Sized>(
    x: &ArrayView2<f64>,
    z: &ArrayView1<f64>,
    kind: KernelKind,
    bounds: &HyperBounds,
    restarts: usize,
    rng: &mut R,
) -> Result<KernelParams> {
    let n = x.nrows();
    let p = x.ncols();
    if n == 0 {
        return Err(Error::invalid("cannot optimize hyperparameters without data"));
    }
    let restarts = restarts.max(1);

    let mut lo = Array1::zeros(p + 2);
    let mut hi = Array1::zeros(p + 2);
    for d in 0..p {
        lo[d] = bounds.lengthscale.0.ln();
        hi[d] = bounds.lengthscale.1.ln();
    }
    lo[p] = bounds.amplitude.0.ln();
    hi[p] = bounds.amplitude.1.ln();
    lo[p + 1] = bounds.noise_var.0.ln();
    hi[p + 1] = bounds.noise_var.1.ln();

    let params_of = |u: &Array1<f64>| -> Result<KernelParams> {
        let ls = Array1::from_iter((0..p).map(|d| u[d].exp()));
        KernelParams::new(kind, ls, u[p].exp(), u[p + 1].exp().recip())
    };

    let mut objective = |u: &Array1<f64>| -> (f64, Array1<f64>) {
        match params_of(u).and_then(|prm| log_marginal_likelihood_grad(x, z, &prm)) {
            Ok((v, g)) => (-v, -g),
            Err(_) => (f64::INFINITY, Array1::zeros(p + 2)),
        }
    };

    // heuristic start: moderate lengthscales from data ranges, amplitude and
    // noise from the target variance
    let z_mean = z.sum() / n as f64;
    let z_var = (z.iter().map(|v| (v - z_mean).powi(2)).sum::<f64>() / n as f64).max(1e-12);
    let mut start0 = Array1::zeros(p + 2);
    for d in 0..p {
        let col = x.column(d);
        let range = col.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - col.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let guess = if range > 0.0 { 0.3 * range } else { 0.3 };
        start0[d] = guess.clamp(bounds.lengthscale.0, bounds.lengthscale.1).ln();
    }
    start0[p] = z_var.clamp(bounds.amplitude.0, bounds.amplitude.1).ln();
    start0[p + 1] = (0.01 * z_var)
        .clamp(bounds.noise_var.0, bounds.noise_var.1)
        .ln();

    let mut best: Option<(Array1<f64>, f64)> = None;
    for r in 0..restarts {
        let u0 = if r == 0 {
            start0.clone()
        } else {
            Array1::from_iter((0..p + 2).map(|i| rng.random_range(lo[i]..hi[i])))
        };
        let (u, val) = minimize_box(&mut objective, u0, &lo, &hi, 60);
        if val.is_finite() && best.as_ref().is_none_or(|(_, b)| val < *b) {
            best = Some((u, val));
        }
    }
    let (u, _) = best.ok_or_else(|| Error::numerical("all hyperparameter starts failed"))?;
    params_of(&u)
}
