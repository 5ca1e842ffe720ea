//! Thompson sampling of the constrained minimum y* over a Sobol
//! discretization, with jointly dependent paths (default) or independent
//! marginal draws (known to be biased low; kept for comparison studies).

use crate::constraint::ConstraintPosterior;
use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::sobol::Sobol;
use ndarray::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Which path sampler produced a [`YstarSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Joint,
    Marginal,
}

/// Sampled constrained minima.
#[derive(Clone, Debug)]
pub struct YstarSet {
    pub values: Vec<f64>,
    pub sampler: SamplerKind,
    pub discretization_size: usize,
    /// Samples whose feasible set stayed empty through all retries.
    pub fallback_count: usize,
}

/// First `m` points of the `dim`-dimensional Sobol sequence.
pub fn sobol_points(dim: usize, m: usize) -> Result<Array2<f64>> {
    if m == 0 {
        return Err(Error::invalid("discretization needs at least one point"));
    }
    let mut seq = Sobol::new(dim)?;
    let mut out = Array2::zeros((m, dim));
    for i in 0..m {
        let p = seq.next_point();
        out.row_mut(i).assign(&Array1::from_vec(p));
    }
    Ok(out)
}

/// Sobol points randomized by a per-dimension digital shift.
pub fn sobol_points_shifted(dim: usize, m: usize, shifts: &[u32]) -> Result<Array2<f64>> {
    if m == 0 {
        return Err(Error::invalid("discretization needs at least one point"));
    }
    let mut seq = Sobol::with_digital_shift(dim, shifts)?;
    let mut out = Array2::zeros((m, dim));
    for i in 0..m {
        let p = seq.next_point();
        out.row_mut(i).assign(&Array1::from_vec(p));
    }
    Ok(out)
}

const MAX_RETRIES: usize = 10;

fn feasible_min(y: &Array1<f64>, c: &Array1<f64>, delta: f64) -> Option<f64> {
    let mut best = None;
    for (yi, ci) in y.iter().zip(c.iter()) {
        if *ci <= delta {
            best = Some(match best {
                None => *yi,
                Some(b) if *yi < b => *yi,
                Some(b) => b,
            });
        }
    }
    best
}

fn unconstrained_min(y: &Array1<f64>) -> f64 {
    y.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Draw `k` samples of y* from jointly dependent posterior paths of y and c
/// over the rows of `xhat`. Empty feasible sets retry with fresh path pairs,
/// then fall back to the unconstrained minimum.
pub fn sample_ystar_joint<R: Rng + ?Sized>(
    obj: &GpPosterior,
    con: &ConstraintPosterior,
    xhat: &ArrayView2<f64>,
    delta: f64,
    k: usize,
    rng: &mut R,
) -> Result<YstarSet> {
    if k == 0 {
        return Err(Error::invalid("need at least one y* sample"));
    }
    if xhat.nrows() == 0 {
        return Err(Error::invalid("empty discretization"));
    }
    let belief_y = obj.predict_joint(xhat)?;
    let belief_c = con.latent_joint(xhat)?;
    let sampler_y = belief_y.sampler()?;
    let sampler_c = belief_c.sampler()?;
    let mut values = Vec::with_capacity(k);
    let mut fallback_count = 0;
    for _ in 0..k {
        let mut found = None;
        let mut last_y = None;
        for _ in 0..=MAX_RETRIES {
            let y = sampler_y.draw(rng);
            let c = sampler_c.draw(rng);
            found = feasible_min(&y, &c, delta);
            last_y = Some(y);
            if found.is_some() {
                break;
            }
        }
        match found {
            Some(v) => values.push(v),
            None => {
                values.push(unconstrained_min(&last_y.expect("at least one draw")));
                fallback_count += 1;
            }
        }
    }
    Ok(YstarSet {
        values,
        sampler: SamplerKind::Joint,
        discretization_size: xhat.nrows(),
        fallback_count,
    })
}

/// Same protocol with every y_i and c_i drawn independently from its
/// marginal belief, ignoring posterior correlations.
pub fn sample_ystar_marginal<R: Rng + ?Sized>(
    obj: &GpPosterior,
    con: &ConstraintPosterior,
    xhat: &ArrayView2<f64>,
    delta: f64,
    k: usize,
    rng: &mut R,
) -> Result<YstarSet> {
    if k == 0 {
        return Err(Error::invalid("need at least one y* sample"));
    }
    if xhat.nrows() == 0 {
        return Err(Error::invalid("empty discretization"));
    }
    let m = xhat.nrows();
    let (mu_y, var_y) = obj.predict_marginal_batch(xhat);
    let (mu_c, var_c) = con.latent_marginal_batch(xhat);
    let sd_y = var_y.mapv(f64::sqrt);
    let sd_c = var_c.mapv(f64::sqrt);
    let mut values = Vec::with_capacity(k);
    let mut fallback_count = 0;
    for _ in 0..k {
        let mut found = None;
        let mut last_y = None;
        for _ in 0..=MAX_RETRIES {
            let y = Array1::from_iter(
                (0..m).map(|i| mu_y[i] + sd_y[i] * rng.sample::<f64, _>(StandardNormal)),
            );
            let c = Array1::from_iter(
                (0..m).map(|i| mu_c[i] + sd_c[i] * rng.sample::<f64, _>(StandardNormal)),
            );
            found = feasible_min(&y, &c, delta);
            last_y = Some(y);
            if found.is_some() {
                break;
            }
        }
        match found {
            Some(v) => values.push(v),
            None => {
                values.push(unconstrained_min(&last_y.expect("at least one draw")));
                fallback_count += 1;
            }
        }
    }
    Ok(YstarSet {
        values,
        sampler: SamplerKind::Marginal,
        discretization_size: xhat.nrows(),
        fallback_count,
    })
}

/// Cap each y* at the best feasible observation minus a sliver of the
/// observed spread, so conditioning on y* never becomes vacuous.
pub fn clip_to_incumbent(set: &mut YstarSet, best_feasible: f64, spread: f64) {
    let cap = best_feasible - 1e-8 * spread.abs();
    for v in &mut set.values {
        *v = v.min(cap);
    }
}
