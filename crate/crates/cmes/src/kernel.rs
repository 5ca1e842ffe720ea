//! Stationary covariance functions with per-dimension lengthscales.
//!
//! Matérn-5/2 is the working kernel; the squared exponential is kept for
//! tests that want an infinitely smooth alternative. Gradients are taken
//! with respect to log lengthscales and log amplitude, the parameterization
//! the evidence optimizer works in.

use crate::error::{Error, Result};
use ndarray::prelude::*;

pub const SQRT_5: f64 = 2.23606797749979;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Matern52,
    SquaredExp,
}

/// Kernel hyperparameters plus the Gaussian noise precision of the
/// observation model they are paired with.
#[derive(Clone, Debug)]
pub struct KernelParams {
    pub kind: KernelKind,
    /// Per-input-dimension lengthscales, all positive.
    pub lengthscales: Array1<f64>,
    /// Kernel variance a = k(x, x), positive.
    pub amplitude: f64,
    /// Observation noise precision alpha; ignored by likelihoods that have
    /// no Gaussian noise term but must still be positive.
    pub noise_precision: f64,
}

impl KernelParams {
    pub fn new(
        kind: KernelKind,
        lengthscales: Array1<f64>,
        amplitude: f64,
        noise_precision: f64,
    ) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::invalid("lengthscales must be non-empty"));
        }
        if !lengthscales.iter().all(|&l| l.is_finite() && l > 0.0) {
            return Err(Error::invalid("lengthscales must be finite and positive"));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::invalid("amplitude must be finite and positive"));
        }
        if !(noise_precision > 0.0) {
            return Err(Error::invalid("noise precision must be positive"));
        }
        Ok(KernelParams {
            kind,
            lengthscales,
            amplitude,
            noise_precision,
        })
    }

    pub fn matern52(lengthscales: Array1<f64>, amplitude: f64, noise_precision: f64) -> Result<Self> {
        Self::new(KernelKind::Matern52, lengthscales, amplitude, noise_precision)
    }

    pub fn squared_exp(
        lengthscales: Array1<f64>,
        amplitude: f64,
        noise_precision: f64,
    ) -> Result<Self> {
        Self::new(KernelKind::SquaredExp, lengthscales, amplitude, noise_precision)
    }

    pub fn input_dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Scaled squared distance r^2 = sum_d ((x_d - y_d)/l_d)^2.
    fn scaled_sq_dist(&self, x: &ArrayView1<f64>, y: &ArrayView1<f64>) -> f64 {
        let mut r2 = 0.0;
        for d in 0..x.len() {
            let u = (x[d] - y[d]) / self.lengthscales[d];
            r2 += u * u;
        }
        r2
    }

    /// Covariance k(x, y).
    pub fn eval(&self, x: &ArrayView1<f64>, y: &ArrayView1<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.input_dim());
        debug_assert_eq!(y.len(), self.input_dim());
        let r2 = self.scaled_sq_dist(x, y);
        match self.kind {
            KernelKind::Matern52 => {
                let t = SQRT_5 * r2.sqrt();
                self.amplitude * (1.0 + t + t * t / 3.0) * (-t).exp()
            }
            KernelKind::SquaredExp => self.amplitude * (-0.5 * r2).exp(),
        }
    }

    /// Gram matrix K(X, X) without the noise term.
    pub fn gram(&self, xs: &ArrayView2<f64>) -> Array2<f64> {
        let n = xs.nrows();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            k[[i, i]] = self.amplitude;
            for j in 0..i {
                let v = self.eval(&xs.row(i), &xs.row(j));
                k[[i, j]] = v;
                k[[j, i]] = v;
            }
        }
        k
    }

    /// Cross covariance K(A, B), shape (a.nrows, b.nrows).
    pub fn cross(&self, a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Array2<f64> {
        let mut k = Array2::zeros((a.nrows(), b.nrows()));
        for i in 0..a.nrows() {
            for j in 0..b.nrows() {
                k[[i, j]] = self.eval(&a.row(i), &b.row(j));
            }
        }
        k
    }

    /// Covariance vector k(X, x*).
    pub fn cross_vec(&self, xs: &ArrayView2<f64>, x: &ArrayView1<f64>) -> Array1<f64> {
        Array1::from_iter((0..xs.nrows()).map(|i| self.eval(&xs.row(i), x)))
    }

    /// Gradients of the Gram matrix with respect to each log lengthscale and
    /// (last entry) log amplitude.
    pub(crate) fn gram_grads(&self, xs: &ArrayView2<f64>) -> Vec<Array2<f64>> {
        let n = xs.nrows();
        let p = self.input_dim();
        let mut grads = vec![Array2::zeros((n, n)); p + 1];
        for i in 0..n {
            for j in 0..i {
                let r2 = self.scaled_sq_dist(&xs.row(i), &xs.row(j));
                // common factor such that dk/dlog l_d = factor * u_d^2
                let factor = match self.kind {
                    KernelKind::Matern52 => {
                        let t = SQRT_5 * r2.sqrt();
                        self.amplitude * (5.0 / 3.0) * (1.0 + t) * (-t).exp()
                    }
                    KernelKind::SquaredExp => self.eval(&xs.row(i), &xs.row(j)),
                };
                for d in 0..p {
                    let u = (xs[[i, d]] - xs[[j, d]]) / self.lengthscales[d];
                    let g = factor * u * u;
                    grads[d][[i, j]] = g;
                    grads[d][[j, i]] = g;
                }
                let kv = self.eval(&xs.row(i), &xs.row(j));
                grads[p][[i, j]] = kv;
                grads[p][[j, i]] = kv;
            }
            grads[p][[i, i]] = self.amplitude;
        }
        grads
    }
}
