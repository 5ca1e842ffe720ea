//! Joint-vs-marginal y* sampling bias study.
//!
//! Fits one fixed posterior on a 20-observation design, then draws y* under
//! the joint (correlated) and marginal (mean-field) samplers across a range
//! of discretization sizes m. The marginal sampler's minimum over m
//! independent draws keeps drifting downward as m grows; the joint sampler's
//! does not.

use crate::problems::Problem;
use cmes::constraint::ConstraintPosterior;
use cmes::gp::{optimize_hyperparameters, GpPosterior, HyperBounds};
use cmes::kernel::KernelKind;
use cmes::math::normal_cdf;
use cmes::thompson::{sample_ystar_joint, sample_ystar_marginal, sobol_points};
use cmes::{Error, Result};
use ndarray::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Output of [`bias_study`]: raw y* draws and summary statistics per m.
/// All y* values are in standardized objective units.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiasReport {
    pub problem: String,
    pub m_values: Vec<usize>,
    pub n_draws: usize,
    pub seed: u64,
    pub joint_mean: Vec<f64>,
    pub marginal_mean: Vec<f64>,
    pub joint_samples: Vec<Vec<f64>>,
    pub marginal_samples: Vec<Vec<f64>>,
    /// Range of the posterior mean over the largest grid; the scale the
    /// joint sampler's stability is judged against.
    pub posterior_range: f64,
    /// marginal mean at max m minus at min m (negative = divergence).
    pub divergence: Option<f64>,
    /// |joint mean at max m minus at min m|.
    pub joint_shift: Option<f64>,
    /// One-sided Welch p-value for marginal(max m) < marginal(min m).
    pub marginal_p_drop: Option<f64>,
}

/// Run the bias study on one problem with real-valued constraint feedback.
pub fn bias_study(
    problem: &Problem,
    m_values: &[usize],
    n_draws: usize,
    seed: u64,
) -> Result<BiasReport> {
    if m_values.is_empty() {
        return Err(Error::InvalidArgument("need at least one m value".into()));
    }
    if m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "m values must be strictly ascending".into(),
        ));
    }
    if n_draws < 2 {
        return Err(Error::InvalidArgument("need at least two draws".into()));
    }

    // fixed 20-observation design: Sobol in the encoded cube
    let dim = problem.space().encoded_dim();
    let design = sobol_points(dim, 20)?;
    let mut ys = Array1::zeros(20);
    let mut cs = Array1::zeros(20);
    for i in 0..20 {
        let point = problem.space().decode(&design.row(i))?;
        let (y, c) = problem.eval(&point)?;
        ys[i] = y;
        cs[i] = c;
    }
    let (y_std, _y_mean, _y_sd) = standardize(&ys);
    let (c_std, c_mean, c_sd) = standardize(&cs);
    let delta_std = (problem.delta() - c_mean) / c_sd;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = HyperBounds::unit_box();
    let py = optimize_hyperparameters(
        &design.view(),
        &y_std.view(),
        KernelKind::Matern52,
        &bounds,
        2,
        &mut rng,
    )?;
    let obj = GpPosterior::fit(design.clone(), &y_std.view(), py)?;
    let pc = optimize_hyperparameters(
        &design.view(),
        &c_std.view(),
        KernelKind::Matern52,
        &bounds,
        2,
        &mut rng,
    )?;
    let con = ConstraintPosterior::RealValued(GpPosterior::fit(design, &c_std.view(), pc)?);

    let mut joint_mean = Vec::new();
    let mut marginal_mean = Vec::new();
    let mut joint_samples = Vec::new();
    let mut marginal_samples = Vec::new();
    for (mi, &m) in m_values.iter().enumerate() {
        let xhat = sobol_points(dim, m)?;
        let mut rj = ChaCha8Rng::seed_from_u64(seed ^ (0x100 + 2 * mi as u64));
        let joint = sample_ystar_joint(&obj, &con, &xhat.view(), delta_std, n_draws, &mut rj)?;
        let mut rm = ChaCha8Rng::seed_from_u64(seed ^ (0x101 + 2 * mi as u64));
        let marg = sample_ystar_marginal(&obj, &con, &xhat.view(), delta_std, n_draws, &mut rm)?;
        joint_mean.push(mean(&joint.values));
        marginal_mean.push(mean(&marg.values));
        joint_samples.push(joint.values);
        marginal_samples.push(marg.values);
    }

    let largest = sobol_points(dim, *m_values.last().unwrap())?;
    let (mu, _) = obj.predict_marginal_batch(&largest.view());
    let posterior_range =
        mu.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - mu.iter().fold(f64::INFINITY, |a, &b| a.min(b));

    let (divergence, joint_shift, marginal_p_drop) = if m_values.len() >= 2 {
        let last = m_values.len() - 1;
        let p = welch_less(&marginal_samples[last], &marginal_samples[0]);
        (
            Some(marginal_mean[last] - marginal_mean[0]),
            Some((joint_mean[last] - joint_mean[0]).abs()),
            Some(p),
        )
    } else {
        (None, None, None)
    };

    Ok(BiasReport {
        problem: problem.name().to_string(),
        m_values: m_values.to_vec(),
        n_draws,
        seed,
        joint_mean,
        marginal_mean,
        joint_samples,
        marginal_samples,
        posterior_range,
        divergence,
        joint_shift,
        marginal_p_drop,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn standardize(v: &Array1<f64>) -> (Array1<f64>, f64, f64) {
    let n = v.len() as f64;
    let m = v.sum() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    let sd = var.sqrt().max(1e-12);
    (v.mapv(|x| (x - m) / sd), m, sd)
}

/// One-sided Welch z-test that mean(a) < mean(b); normal approximation is
/// fine at the sample sizes the study runs with.
fn welch_less(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let var = |v: &[f64], m: f64| {
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    let se = (var(a, ma) / a.len() as f64 + var(b, mb) / b.len() as f64).sqrt();
    if se <= 0.0 {
        return if ma < mb { 0.0 } else { 1.0 };
    }
    normal_cdf((ma - mb) / se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::by_name;

    #[test]
    fn single_m_degenerates_to_histogram_pair() {
        let p = by_name("toy2d").unwrap();
        let report = bias_study(&p, &[40], 50, 11).unwrap();
        assert_eq!(report.m_values, vec![40]);
        assert_eq!(report.joint_samples[0].len(), 50);
        assert_eq!(report.marginal_samples[0].len(), 50);
        assert!(report.divergence.is_none());
        assert!(report.joint_shift.is_none());
        assert!(report.marginal_p_drop.is_none());
        assert!(report.posterior_range > 0.0);
    }

    #[test]
    fn same_seed_reproduces_the_report() {
        let p = by_name("toy2d").unwrap();
        let a = bias_study(&p, &[20, 60], 40, 5).unwrap();
        let b = bias_study(&p, &[20, 60], 40, 5).unwrap();
        assert_eq!(a.joint_samples, b.joint_samples);
        assert_eq!(a.marginal_samples, b.marginal_samples);
    }

    #[test]
    fn marginal_minimum_drifts_down_with_m() {
        // small-scale version of the divergence effect: more independent
        // sites pull the mean-field minimum further down
        let p = by_name("toy2d").unwrap();
        let report = bias_study(&p, &[30, 600], 300, 17).unwrap();
        assert!(
            report.divergence.unwrap() < 0.0,
            "marginal mean should drop: {:?}",
            report.marginal_mean
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = by_name("toy2d").unwrap();
        assert!(bias_study(&p, &[], 100, 0).is_err());
        assert!(bias_study(&p, &[50, 50], 100, 0).is_err());
        assert!(bias_study(&p, &[100, 50], 100, 0).is_err());
        assert!(bias_study(&p, &[50], 1, 0).is_err());
    }
}
