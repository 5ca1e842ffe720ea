//! Competing acquisition strategies: constrained EI with its
//! infeasible-start fallback, the adaptive-percentile heuristic, and
//! random search.

use crate::constraint::ConstraintPosterior;
use crate::driver::Observation;
use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::math::{normal_cdf, normal_pdf};
use crate::space::{Point, SearchSpace};
use ndarray::prelude::*;
use rand::Rng;

/// Best feasible objective observed so far, when one exists.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Incumbent {
    pub value: Option<f64>,
}

impl Incumbent {
    pub fn exists(&self) -> bool {
        self.value.is_some()
    }
}

/// Expected improvement below `incumbent` for a minimization target with
/// posterior N(mu, sigma^2).
pub fn expected_improvement(mu: f64, sigma: f64, incumbent: f64) -> f64 {
    debug_assert!(sigma >= 0.0);
    let gap = incumbent - mu;
    if sigma <= 0.0 {
        return gap.max(0.0);
    }
    let u = gap / sigma;
    gap * normal_cdf(u) + sigma * normal_pdf(u)
}

/// Constrained EI: P(feasible) * EI against the feasible incumbent, or the
/// feasibility probability alone until a feasible point has been observed.
pub fn cei_score(
    x: &ArrayView1<f64>,
    obj: &GpPosterior,
    con: &ConstraintPosterior,
    inc: &Incumbent,
    delta: f64,
) -> f64 {
    let p_feas = con.feasible_prob(x, delta);
    match inc.value {
        Some(best) => {
            let (mu, var) = obj.predict_marginal(x);
            p_feas * expected_improvement(mu, var.max(0.0).sqrt(), best)
        }
        None => p_feas,
    }
}

/// Linear-interpolation percentile of unsorted values, perc in [0, 100].
fn percentile_linear(values: &[f64], perc: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite targets"));
    let h = perc / 100.0 * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Impute targets for a single-GP fit: feasible records keep their observed
/// objective; unfeasible (or unobserved) records receive the
/// perc-percentile of all observed objective values.
pub fn ap_impute(history: &[Observation], delta: f64, perc: f64) -> Result<Array1<f64>> {
    if !(50.0..=100.0).contains(&perc) {
        return Err(Error::invalid("percentile must lie in [50, 100]"));
    }
    let observed: Vec<f64> = history.iter().filter_map(|o| o.z_y).collect();
    if observed.is_empty() {
        return Err(Error::invalid("imputation needs at least one observed objective"));
    }
    let fill = percentile_linear(&observed, perc);
    Ok(Array1::from_iter(history.iter().map(|o| {
        match (o.is_feasible(delta), o.z_y) {
            (true, Some(v)) => v,
            _ => fill,
        }
    })))
}

/// EI on the imputed single-GP model against the best imputed target.
pub fn ap_score(x: &ArrayView1<f64>, single_gp: &GpPosterior, inc: f64) -> f64 {
    let (mu, var) = single_gp.predict_marginal(x);
    expected_improvement(mu, var.max(0.0).sqrt(), inc)
}

/// Uniform draw over the search space.
pub fn random_candidate<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R) -> Point {
    space.random_point(rng)
}
