//! Sequential constrained-BO driver: feedback bookkeeping, per-iteration
//! model refits, acquisition maximization over the encoded space, and
//! trajectory recording.

use crate::acquisition::{cmes_score_noisy, noisy_rho, NoisyAdjustment, ScoreMode};
use crate::baselines::{ap_impute, ap_score, cei_score, random_candidate, Incumbent};
use crate::constraint::{optimize_ep_hyperparameters, BinaryPosterior, ConstraintPosterior, EpConfig};
use crate::error::{Error, Result};
use crate::gp::{optimize_hyperparameters, GpPosterior, HyperBounds};
use crate::kernel::{KernelKind, KernelParams};
use crate::math::logit;
use crate::opt::minimize_box;
use crate::space::{Point, SearchSpace};
use crate::thompson::{
    clip_to_incumbent, sample_ystar_joint, sample_ystar_marginal, sobol_points_shifted,
    SamplerKind, YstarSet,
};
use ndarray::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What an evaluation reports back for the constraint channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ZcRecord {
    Real(f64),
    /// -1 feasible, +1 unfeasible.
    Binary(i8),
}

/// How the blackbox reports outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// z_y and a real-valued z_c every evaluation.
    RealValued,
    /// z_y every evaluation, z_c in {-1, +1}.
    Binary,
    /// z_c in {-1, +1}; z_y only when z_c = -1.
    BinaryUnobserved,
}

/// One blackbox response.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub z_y: Option<f64>,
    pub z_c: ZcRecord,
}

/// One completed evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Point,
    pub z_y: Option<f64>,
    pub z_c: ZcRecord,
    pub iteration: usize,
}

impl Observation {
    /// Feasibility under the run's threshold: c <= delta for real feedback,
    /// the observed label for binary feedback.
    pub fn is_feasible(&self, delta: f64) -> bool {
        match self.z_c {
            ZcRecord::Real(c) => c <= delta,
            ZcRecord::Binary(z) => z == -1,
        }
    }
}

/// The evaluation target. Implemented for closures over points.
pub trait Blackbox {
    fn evaluate(&mut self, x: &Point) -> Result<Feedback>;
}

impl<F> Blackbox for F
where
    F: FnMut(&Point) -> Result<Feedback>,
{
    fn evaluate(&mut self, x: &Point) -> Result<Feedback> {
        self(x)
    }
}

/// Which proposal rule drives the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Cmes,
    Cei,
    Ap,
    Random,
}

/// cMES-specific knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmesConfig {
    /// Number of y* Monte-Carlo samples per iteration.
    pub k: usize,
    /// Size of the Sobol discretization the paths are drawn over.
    pub discretization: usize,
    pub sampler: SamplerKind,
    /// Cap y* samples at the incumbent so conditioning never goes vacuous.
    pub clip: bool,
    /// Mixture score for the unobserved-objective setting instead of the
    /// plain binary score.
    pub mixture: bool,
    /// Apply the noisy-target shrinkage to the real-valued score.
    pub noisy: bool,
}

impl Default for CmesConfig {
    fn default() -> Self {
        CmesConfig {
            k: 10,
            discretization: 2000,
            sampler: SamplerKind::Joint,
            clip: true,
            mixture: false,
            noisy: false,
        }
    }
}

/// Full run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub strategy: Strategy,
    pub feedback: FeedbackMode,
    pub budget: usize,
    pub n_init: usize,
    pub seed: u64,
    /// Feasibility threshold on real-valued constraint feedback.
    pub delta: f64,
    /// Confidence p for binary feedback; the latent threshold is logit(p).
    pub confidence: f64,
    /// Sobol candidates scored per proposal.
    pub candidates: usize,
    /// Candidates refined by bounded local search.
    pub refine_top: usize,
    /// Restarts for hyperparameter optimization.
    pub restarts: usize,
    /// Percentile the AP baseline imputes for unfeasible rows.
    pub ap_percentile: f64,
    pub cmes: CmesConfig,
}

impl RunConfig {
    pub fn new(strategy: Strategy, feedback: FeedbackMode, budget: usize, seed: u64) -> Self {
        RunConfig {
            strategy,
            feedback,
            budget,
            n_init: 5,
            seed,
            delta: 0.0,
            confidence: 0.9,
            candidates: 512,
            refine_top: 5,
            restarts: 5,
            ap_percentile: 100.0,
            cmes: CmesConfig::default(),
        }
    }

    /// Threshold in latent-constraint units: delta as given for real
    /// feedback, logit(confidence) for binary feedback.
    pub fn effective_delta(&self) -> f64 {
        match self.feedback {
            FeedbackMode::RealValued => self.delta,
            _ => logit(self.confidence),
        }
    }
}

/// Run provenance stored alongside the observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub strategy: Strategy,
    pub feedback: FeedbackMode,
    pub seed: u64,
    pub budget: usize,
    pub n_init: usize,
    pub delta: f64,
    /// Proposals that fell back to a random point (nonfinite scores).
    pub random_fallbacks: usize,
}

/// Complete record of one optimization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub observations: Vec<Observation>,
    /// Best feasible observed objective after each iteration.
    pub best_feasible: Vec<Option<f64>>,
    pub meta: RunMeta,
}

impl Trajectory {
    /// Best evaluated point with an observed feasible outcome, earliest
    /// iteration on ties.
    pub fn recommendation(&self) -> Option<&Observation> {
        let mut best: Option<&Observation> = None;
        for obs in &self.observations {
            if !obs.is_feasible(self.meta.delta) {
                continue;
            }
            let Some(v) = obs.z_y else { continue };
            if best.is_none_or(|b| v < b.z_y.unwrap()) {
                best = Some(obs);
            }
        }
        best
    }

    /// Final best feasible value, if any evaluation succeeded.
    pub fn final_best(&self) -> Option<f64> {
        self.best_feasible.last().copied().flatten()
    }
}

fn validate_feedback(fb: &Feedback, mode: FeedbackMode) -> Result<()> {
    match mode {
        FeedbackMode::RealValued => {
            if !matches!(fb.z_c, ZcRecord::Real(_)) {
                return Err(Error::invalid("real-valued mode needs real z_c"));
            }
            if fb.z_y.is_none() {
                return Err(Error::invalid("real-valued mode always observes z_y"));
            }
        }
        FeedbackMode::Binary => {
            let ZcRecord::Binary(z) = fb.z_c else {
                return Err(Error::invalid("binary mode needs a +/-1 label"));
            };
            if z != -1 && z != 1 {
                return Err(Error::invalid("binary labels must be -1 or +1"));
            }
        }
        FeedbackMode::BinaryUnobserved => {
            let ZcRecord::Binary(z) = fb.z_c else {
                return Err(Error::invalid("binary mode needs a +/-1 label"));
            };
            if z != -1 && z != 1 {
                return Err(Error::invalid("binary labels must be -1 or +1"));
            }
            if fb.z_y.is_some() != (z == -1) {
                return Err(Error::invalid("z_y must be present iff z_c = -1"));
            }
        }
    }
    Ok(())
}

/// GP fitted on standardized targets, with the transform kept around.
struct StdGp {
    gp: GpPosterior,
    mean: f64,
    sd: f64,
}

impl StdGp {
    fn standardize(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.sd
    }
}

fn fit_std_gp<R: Rng + ?Sized>(
    x: Array2<f64>,
    raw: &[f64],
    restarts: usize,
    rng: &mut R,
) -> Result<StdGp> {
    let n = raw.len();
    let mean = raw.iter().sum::<f64>() / n as f64;
    let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt().max(1e-12);
    let z = Array1::from_iter(raw.iter().map(|v| (v - mean) / sd));
    let params = optimize_hyperparameters(
        &x.view(),
        &z.view(),
        KernelKind::Matern52,
        &HyperBounds::unit_box(),
        restarts,
        rng,
    )?;
    Ok(StdGp {
        gp: GpPosterior::fit(x, &z.view(), params)?,
        mean,
        sd,
    })
}

fn default_prior_params(dim: usize) -> KernelParams {
    KernelParams::matern52(Array1::from_elem(dim, 0.3), 1.0, 100.0)
        .expect("static parameters are valid")
}

/// Everything `propose` needs, rebuilt by `refit` each iteration.
struct Models {
    /// Objective belief in standardized units; prior belief when no z_y yet.
    objective: StdGp,
    constraint: ConstraintPosterior,
    /// Threshold in the constraint model's (standardized or latent) units.
    delta_model: f64,
    incumbent_raw: Option<f64>,
    /// Spread of standardized objective targets, for y* clipping.
    spread_std: f64,
}

/// Incremental run state: history plus per-iteration fitted models.
pub struct BoState<'a> {
    space: &'a SearchSpace,
    cfg: RunConfig,
    observations: Vec<Observation>,
    random_fallbacks: usize,
}

impl<'a> BoState<'a> {
    pub fn new(space: &'a SearchSpace, cfg: RunConfig) -> Self {
        BoState {
            space,
            cfg,
            observations: Vec::new(),
            random_fallbacks: 0,
        }
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn random_fallbacks(&self) -> usize {
        self.random_fallbacks
    }

    /// Record a completed evaluation.
    pub fn record(&mut self, obs: Observation) -> Result<()> {
        validate_feedback(
            &Feedback {
                z_y: obs.z_y,
                z_c: obs.z_c,
            },
            self.cfg.feedback,
        )
        .or_else(|e| {
            // blackbox-failure rows in plain binary mode carry no z_y
            if self.cfg.feedback == FeedbackMode::Binary
                && obs.z_y.is_none()
                && matches!(obs.z_c, ZcRecord::Binary(1))
            {
                Ok(())
            } else {
                Err(e)
            }
        })?;
        self.space.validate(&obs.x)?;
        self.observations.push(obs);
        Ok(())
    }

    /// Best feasible observed objective so far.
    pub fn incumbent(&self) -> Incumbent {
        let delta = self.cfg.effective_delta();
        let mut best = None;
        for obs in &self.observations {
            if !obs.is_feasible(delta) {
                continue;
            }
            let Some(v) = obs.z_y else { continue };
            if best.is_none_or(|b: f64| v < b) {
                best = Some(v);
            }
        }
        Incumbent { value: best }
    }

    fn refit<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Models> {
        let delta = self.cfg.effective_delta();
        let restarts = self.cfg.restarts;
        let dim = self.space.encoded_dim();

        // objective model: every record with an observed z_y
        let mut ox = Vec::new();
        let mut oy = Vec::new();
        for obs in &self.observations {
            if let Some(v) = obs.z_y {
                ox.push(obs.x.clone());
                oy.push(v);
            }
        }
        let objective = if oy.is_empty() {
            StdGp {
                gp: GpPosterior::prior(default_prior_params(dim)),
                mean: 0.0,
                sd: 1.0,
            }
        } else {
            fit_std_gp(self.space.encode_batch(&ox)?, &oy, restarts, rng)?
        };

        // constraint model: every record
        let cx: Vec<Point> = self.observations.iter().map(|o| o.x.clone()).collect();
        let cx_enc = self.space.encode_batch(&cx)?;
        let (constraint, delta_model) = match self.cfg.feedback {
            FeedbackMode::RealValued => {
                let cvals: Vec<f64> = self
                    .observations
                    .iter()
                    .map(|o| match o.z_c {
                        ZcRecord::Real(c) => c,
                        ZcRecord::Binary(_) => unreachable!("validated at record time"),
                    })
                    .collect();
                let std = fit_std_gp(cx_enc, &cvals, restarts, rng)?;
                let delta_std = std.standardize(delta);
                (ConstraintPosterior::RealValued(std.gp), delta_std)
            }
            _ => {
                let labels: Vec<i8> = self
                    .observations
                    .iter()
                    .map(|o| match o.z_c {
                        ZcRecord::Binary(z) => z,
                        ZcRecord::Real(_) => unreachable!("validated at record time"),
                    })
                    .collect();
                let ep_cfg = EpConfig::default();
                let params = optimize_ep_hyperparameters(
                    &cx_enc.view(),
                    &labels,
                    KernelKind::Matern52,
                    &HyperBounds::unit_box(),
                    restarts,
                    &ep_cfg,
                    rng,
                )?;
                let post = BinaryPosterior::fit(cx_enc, &labels, params, &ep_cfg, None)?;
                (ConstraintPosterior::Binary(post), delta)
            }
        };

        let spread_std = if oy.is_empty() {
            1.0
        } else {
            let lo = oy.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = oy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ((hi - lo) / objective.sd).max(1.0)
        };

        Ok(Models {
            objective,
            constraint,
            delta_model,
            incumbent_raw: self.incumbent().value,
            spread_std,
        })
    }

    /// Snap an encoded vector onto representable coordinates.
    fn snap_rows(&self, rows: &Array2<f64>) -> Result<Array2<f64>> {
        let mut out = rows.clone();
        for mut row in out.rows_mut() {
            let p = self.space.decode(&row.view())?;
            row.assign(&self.space.encode(&p)?);
        }
        Ok(out)
    }

    fn sample_ystars<R: Rng + ?Sized>(
        &self,
        models: &Models,
        rng: &mut R,
    ) -> Result<YstarSet> {
        let cm = &self.cfg.cmes;
        let dim = self.space.encoded_dim();
        let shifts: Vec<u32> = (0..dim).map(|_| rng.random::<u32>()).collect();
        let xhat = self.snap_rows(&sobol_points_shifted(dim, cm.discretization, &shifts)?)?;
        let mut set = match cm.sampler {
            SamplerKind::Joint => sample_ystar_joint(
                &models.objective.gp,
                &models.constraint,
                &xhat.view(),
                models.delta_model,
                cm.k,
                rng,
            )?,
            SamplerKind::Marginal => sample_ystar_marginal(
                &models.objective.gp,
                &models.constraint,
                &xhat.view(),
                models.delta_model,
                cm.k,
                rng,
            )?,
        };
        if cm.clip {
            if let Some(best) = models.incumbent_raw {
                clip_to_incumbent(&mut set, models.objective.standardize(best), models.spread_std);
            }
        }
        Ok(set)
    }

    /// Propose the next point by multi-start maximization of the strategy
    /// score over the encoded box.
    pub fn propose<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Point> {
        if self.cfg.strategy == Strategy::Random {
            return Ok(random_candidate(self.space, rng));
        }
        // AP falls back to random until an objective value exists
        let have_y = self.observations.iter().any(|o| o.z_y.is_some());
        if self.cfg.strategy == Strategy::Ap && !have_y {
            return Ok(random_candidate(self.space, rng));
        }
        if self.observations.is_empty() {
            return Ok(random_candidate(self.space, rng));
        }

        let models = self.refit(rng)?;
        let delta_eff = self.cfg.effective_delta();
        let strategy = self.cfg.strategy;

        // strategy-specific per-iteration precomputation
        let ystars = if strategy == Strategy::Cmes {
            Some(self.sample_ystars(&models, rng)?)
        } else {
            None
        };
        let ap_model = if strategy == Strategy::Ap {
            let targets = ap_impute(&self.observations, delta_eff, self.cfg.ap_percentile)?;
            let xs: Vec<Point> = self.observations.iter().map(|o| o.x.clone()).collect();
            let targets_vec = targets.to_vec();
            let fitted = fit_std_gp(
                self.space.encode_batch(&xs)?,
                &targets_vec,
                self.cfg.restarts,
                rng,
            )?;
            let best = targets_vec.iter().copied().fold(f64::INFINITY, f64::min);
            let best_std = fitted.standardize(best);
            Some((fitted, best_std))
        } else {
            None
        };

        let mode = match self.cfg.feedback {
            FeedbackMode::RealValued => ScoreMode::RealValued,
            FeedbackMode::Binary => ScoreMode::Binary,
            FeedbackMode::BinaryUnobserved => {
                if self.cfg.cmes.mixture {
                    ScoreMode::BinaryUnobservedMixture
                } else {
                    ScoreMode::Binary
                }
            }
        };
        let noisy_alpha = if self.cfg.cmes.noisy && mode == ScoreMode::RealValued {
            Some(models.objective.gp.params().noise_precision)
        } else {
            None
        };

        let inc_std = models.incumbent_raw.map(|v| models.objective.standardize(v));
        let incumbent = Incumbent { value: inc_std };

        let score = |v: &Array1<f64>| -> f64 {
            let x = v.view();
            match strategy {
                Strategy::Cmes => {
                    let set = ystars.as_ref().expect("sampled above");
                    let adj = noisy_alpha.map(|alpha_y| {
                        let (_, var_y) = models.objective.gp.predict_marginal(&x);
                        let alpha_c = match &models.constraint {
                            ConstraintPosterior::RealValued(gp) => gp.params().noise_precision,
                            ConstraintPosterior::Binary(_) => 1.0,
                        };
                        let (_, var_c) = models.constraint.latent_marginal(&x);
                        NoisyAdjustment {
                            rho_y: noisy_rho(var_y, alpha_y),
                            rho_c: noisy_rho(var_c, alpha_c),
                        }
                    });
                    cmes_score_noisy(
                        &x,
                        &models.objective.gp,
                        &models.constraint,
                        set,
                        models.delta_model,
                        mode,
                        adj.as_ref(),
                    )
                    .unwrap_or(f64::NAN)
                }
                Strategy::Cei => cei_score(
                    &x,
                    &models.objective.gp,
                    &models.constraint,
                    &incumbent,
                    models.delta_model,
                ),
                Strategy::Ap => {
                    let (fitted, best_std) = ap_model.as_ref().expect("fitted above");
                    ap_score(&x, &fitted.gp, *best_std)
                }
                Strategy::Random => unreachable!("handled above"),
            }
        };

        let dim = self.space.encoded_dim();
        let shifts: Vec<u32> = (0..dim).map(|_| rng.random::<u32>()).collect();
        let cands = sobol_points_shifted(dim, self.cfg.candidates, &shifts)?;
        let mut scored: Vec<(usize, f64)> = (0..cands.nrows())
            .map(|i| (i, score(&cands.row(i).to_owned())))
            .collect();
        scored.retain(|(_, s)| s.is_finite());
        if scored.is_empty() {
            self.random_fallbacks += 1;
            log::warn!("all acquisition scores nonfinite; proposing a random point");
            return Ok(random_candidate(self.space, rng));
        }
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores"));

        let lo = Array1::zeros(dim);
        let hi = Array1::ones(dim);
        let mut best_v = cands.row(scored[0].0).to_owned();
        let mut best_s = scored[0].1;
        for &(idx, _) in scored.iter().take(self.cfg.refine_top) {
            let mut negated = |v: &Array1<f64>| -> (f64, Array1<f64>) {
                let f0 = -score(v);
                let h = 1e-4;
                let mut g = Array1::zeros(dim);
                for d in 0..dim {
                    let mut vp = v.clone();
                    let mut vm = v.clone();
                    vp[d] = (v[d] + h).min(1.0);
                    vm[d] = (v[d] - h).max(0.0);
                    let fp = -score(&vp);
                    let fm = -score(&vm);
                    g[d] = (fp - fm) / (vp[d] - vm[d]).max(1e-12);
                }
                (f0, g)
            };
            let (v, s) = minimize_box(&mut negated, cands.row(idx).to_owned(), &lo, &hi, 40);
            if -s > best_s && v.iter().all(|t| t.is_finite()) {
                best_s = -s;
                best_v = v;
            }
        }

        let point = self.space.decode(&best_v.view())?;
        // never re-evaluate an existing point exactly; nudge in encoded
        // space, then give up gracefully on exhausted (e.g. all-categorical)
        // spaces
        let seen = |p: &Point, obs: &[Observation]| obs.iter().any(|o| &o.x == p);
        if seen(&point, &self.observations) {
            for _ in 0..16 {
                let mut v = best_v.clone();
                for t in v.iter_mut() {
                    *t = (*t + rng.random_range(-1e-6..1e-6)).clamp(0.0, 1.0);
                }
                let cand = self.space.decode(&v.view())?;
                if !seen(&cand, &self.observations) {
                    return Ok(cand);
                }
            }
            for _ in 0..16 {
                let cand = random_candidate(self.space, rng);
                if !seen(&cand, &self.observations) {
                    return Ok(cand);
                }
            }
            // space exhausted; returning the best point is all that's left
        }
        Ok(point)
    }
}

/// Drive a full optimization run: `n_init` random evaluations, then
/// model-guided proposals until the budget is spent. Deterministic given
/// the seed and a deterministic blackbox.
pub fn run(bb: &mut dyn Blackbox, space: &SearchSpace, cfg: &RunConfig) -> Result<Trajectory> {
    if cfg.budget <= cfg.n_init {
        return Err(Error::invalid("budget must exceed n_init"));
    }
    if cfg.n_init == 0 {
        return Err(Error::invalid("need at least one initial evaluation"));
    }
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(Error::invalid("confidence must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = BoState::new(space, cfg.clone());
    let delta_eff = cfg.effective_delta();
    let mut best_feasible: Vec<Option<f64>> = Vec::with_capacity(cfg.budget);

    for iter in 0..cfg.budget {
        let x = if iter < cfg.n_init {
            random_candidate(space, &mut rng)
        } else {
            state.propose(&mut rng)?
        };
        let obs = match bb.evaluate(&x) {
            Ok(fb) => {
                validate_feedback(&fb, cfg.feedback)?;
                Observation {
                    x,
                    z_y: fb.z_y,
                    z_c: fb.z_c,
                    iteration: iter,
                }
            }
            Err(e) => match cfg.feedback {
                FeedbackMode::RealValued => {
                    return Err(Error::invalid(format!(
                        "blackbox failed under real-valued feedback: {e}"
                    )));
                }
                // failures count as unfeasible evaluations
                _ => Observation {
                    x,
                    z_y: None,
                    z_c: ZcRecord::Binary(1),
                    iteration: iter,
                },
            },
        };
        let prev = best_feasible.last().copied().flatten();
        let here = if obs.is_feasible(delta_eff) { obs.z_y } else { None };
        let next = match (prev, here) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        best_feasible.push(next);
        state.record(obs)?;
    }

    Ok(Trajectory {
        observations: state.observations,
        best_feasible,
        meta: RunMeta {
            strategy: cfg.strategy,
            feedback: cfg.feedback,
            seed: cfg.seed,
            budget: cfg.budget,
            n_init: cfg.n_init,
            delta: delta_eff,
            random_fallbacks: state.random_fallbacks,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Coord, Dimension};

    fn unit_space() -> SearchSpace {
        SearchSpace::new(vec![
            Dimension::Continuous { lo: -1.0, hi: 1.0 },
            Dimension::Continuous { lo: -1.0, hi: 1.0 },
        ])
        .unwrap()
    }

    fn coords(x: &Point) -> (f64, f64) {
        let Coord::Real(a) = x[0] else { panic!("real") };
        let Coord::Real(b) = x[1] else { panic!("real") };
        (a, b)
    }

    // smooth bowl with an infeasible band through the unconstrained optimum
    fn bowl_real(x: &Point) -> Result<Feedback> {
        let (a, b) = coords(x);
        Ok(Feedback {
            z_y: Some(a * a + b * b),
            z_c: ZcRecord::Real(0.5 - (a - 0.5).abs()),
        })
    }

    fn bowl_binary(x: &Point) -> Result<Feedback> {
        let (a, b) = coords(x);
        let feasible = a <= 0.0;
        Ok(Feedback {
            z_y: if feasible { Some(a * a + b * b) } else { None },
            z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
        })
    }

    fn small_cfg(strategy: Strategy, feedback: FeedbackMode, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(strategy, feedback, 8, seed);
        cfg.n_init = 3;
        cfg.candidates = 32;
        cfg.refine_top = 2;
        cfg.restarts = 1;
        cfg.cmes.k = 4;
        cfg.cmes.discretization = 64;
        cfg
    }

    #[test]
    fn effective_delta_is_logit_of_confidence() {
        let cfg = RunConfig::new(Strategy::Cmes, FeedbackMode::Binary, 10, 0);
        assert!((cfg.effective_delta() - (0.9f64 / 0.1).ln()).abs() < 1e-12);
        let cfg = RunConfig::new(Strategy::Cmes, FeedbackMode::RealValued, 10, 0);
        assert_eq!(cfg.effective_delta(), 0.0);
    }

    #[test]
    fn feedback_validation_per_mode() {
        let real = Feedback { z_y: Some(0.1), z_c: ZcRecord::Real(0.2) };
        let bin_feas = Feedback { z_y: Some(0.1), z_c: ZcRecord::Binary(-1) };
        let bin_unfeas_with_y = Feedback { z_y: Some(0.1), z_c: ZcRecord::Binary(1) };
        let bin_unfeas = Feedback { z_y: None, z_c: ZcRecord::Binary(1) };
        assert!(validate_feedback(&real, FeedbackMode::RealValued).is_ok());
        assert!(validate_feedback(&bin_feas, FeedbackMode::RealValued).is_err());
        assert!(validate_feedback(&real, FeedbackMode::Binary).is_err());
        assert!(validate_feedback(&bin_feas, FeedbackMode::Binary).is_ok());
        assert!(validate_feedback(&bin_feas, FeedbackMode::BinaryUnobserved).is_ok());
        assert!(validate_feedback(&bin_unfeas, FeedbackMode::BinaryUnobserved).is_ok());
        assert!(validate_feedback(&bin_unfeas_with_y, FeedbackMode::BinaryUnobserved).is_err());
        let bad_label = Feedback { z_y: Some(0.0), z_c: ZcRecord::Binary(2) };
        assert!(validate_feedback(&bad_label, FeedbackMode::Binary).is_err());
    }

    #[test]
    fn run_rejects_budget_not_exceeding_init() {
        let space = unit_space();
        let mut cfg = small_cfg(Strategy::Random, FeedbackMode::RealValued, 0);
        cfg.budget = 3;
        assert!(run(&mut bowl_real, &space, &cfg).is_err());
    }

    #[test]
    fn identical_seeds_give_identical_trajectories() {
        let space = unit_space();
        for strategy in [Strategy::Random, Strategy::Cei, Strategy::Cmes] {
            let cfg = small_cfg(strategy, FeedbackMode::RealValued, 42);
            let a = run(&mut bowl_real, &space, &cfg).unwrap();
            let b = run(&mut bowl_real, &space, &cfg).unwrap();
            assert_eq!(a.observations, b.observations, "{strategy:?}");
            assert_eq!(a.best_feasible, b.best_feasible);
        }
    }

    #[test]
    fn shared_init_across_strategies() {
        // the first n_init points depend only on the seed
        let space = unit_space();
        let a = run(&mut bowl_real, &space, &small_cfg(Strategy::Random, FeedbackMode::RealValued, 7)).unwrap();
        let b = run(&mut bowl_real, &space, &small_cfg(Strategy::Cei, FeedbackMode::RealValued, 7)).unwrap();
        for i in 0..3 {
            assert_eq!(a.observations[i].x, b.observations[i].x);
        }
    }

    #[test]
    fn best_feasible_is_monotone_and_only_after_feasible() {
        let space = unit_space();
        let cfg = small_cfg(Strategy::Cmes, FeedbackMode::Binary, 5);
        let mut bb = |x: &Point| -> Result<Feedback> {
            let (a, b) = coords(x);
            let feasible = a <= 0.0;
            Ok(Feedback {
                z_y: Some(a * a + b * b),
                z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
            })
        };
        let t = run(&mut bb, &space, &cfg).unwrap();
        let mut prev: Option<f64> = None;
        for (i, bf) in t.best_feasible.iter().enumerate() {
            if let (Some(p), Some(c)) = (prev, *bf) {
                assert!(c <= p, "best_feasible increased at {i}");
            }
            if prev.is_some() {
                assert!(bf.is_some(), "best_feasible became undefined at {i}");
            }
            prev = *bf;
        }
        assert_eq!(t.best_feasible.len(), cfg.budget);
    }

    #[test]
    fn unobserved_mode_invariant_holds() {
        let space = unit_space();
        let cfg = small_cfg(Strategy::Cmes, FeedbackMode::BinaryUnobserved, 11);
        let t = run(&mut bowl_binary, &space, &cfg).unwrap();
        for obs in &t.observations {
            let feasible = matches!(obs.z_c, ZcRecord::Binary(-1));
            assert_eq!(obs.z_y.is_some(), feasible);
        }
    }

    #[test]
    fn blackbox_failure_is_unfeasible_in_binary_and_fatal_in_real() {
        let space = unit_space();
        let mut failing = |x: &Point| -> Result<Feedback> {
            let (a, _) = coords(x);
            if a > -2.0 {
                Err(Error::invalid("crashed"))
            } else {
                bowl_binary(x)
            }
        };
        let cfg = small_cfg(Strategy::Cei, FeedbackMode::BinaryUnobserved, 1);
        let t = run(&mut failing, &space, &cfg).unwrap();
        assert_eq!(t.observations.len(), cfg.budget);
        assert!(t
            .observations
            .iter()
            .all(|o| o.z_c == ZcRecord::Binary(1) && o.z_y.is_none()));
        let mut failing_real = |_: &Point| -> Result<Feedback> { Err(Error::invalid("crashed")) };
        let cfg = small_cfg(Strategy::Random, FeedbackMode::RealValued, 1);
        assert!(run(&mut failing_real, &space, &cfg).is_err());
    }

    #[test]
    fn single_candidate_space_returns_that_point() {
        let space = SearchSpace::new(vec![
            Dimension::Categorical { n: 1 },
            Dimension::Categorical { n: 1 },
        ])
        .unwrap();
        let mut cfg = small_cfg(Strategy::Cei, FeedbackMode::Binary, 3);
        cfg.budget = 4;
        cfg.n_init = 2;
        let mut bb = |_: &Point| -> Result<Feedback> {
            Ok(Feedback { z_y: Some(1.0), z_c: ZcRecord::Binary(-1) })
        };
        let t = run(&mut bb, &space, &cfg).unwrap();
        for obs in &t.observations {
            assert_eq!(obs.x, vec![Coord::Cat(0), Coord::Cat(0)]);
        }
    }

    #[test]
    fn recommendation_prefers_best_then_earliest() {
        let meta = RunMeta {
            strategy: Strategy::Random,
            feedback: FeedbackMode::Binary,
            seed: 0,
            budget: 3,
            n_init: 1,
            delta: 0.0,
            random_fallbacks: 0,
        };
        let mk = |v: f64, feasible: bool, it: usize| Observation {
            x: vec![Coord::Real(0.0), Coord::Real(0.0)],
            z_y: Some(v),
            z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
            iteration: it,
        };
        let t = Trajectory {
            observations: vec![mk(0.5, true, 0), mk(0.2, false, 1), mk(0.5, true, 2)],
            best_feasible: vec![Some(0.5), Some(0.5), Some(0.5)],
            meta,
        };
        let rec = t.recommendation().unwrap();
        assert_eq!(rec.iteration, 0);
        assert_eq!(t.final_best(), Some(0.5));
    }

    #[test]
    fn cmes_run_improves_on_binary_bowl() {
        // end-to-end sanity: feasible half-plane, optimum at the boundary
        let space = unit_space();
        let mut cfg = small_cfg(Strategy::Cmes, FeedbackMode::Binary, 17);
        cfg.budget = 12;
        let mut bb = |x: &Point| -> Result<Feedback> {
            let (a, b) = coords(x);
            Ok(Feedback {
                z_y: Some((a - 0.2) * (a - 0.2) + b * b),
                z_c: ZcRecord::Binary(if a <= 0.0 { -1 } else { 1 }),
            })
        };
        let t = run(&mut bb, &space, &cfg).unwrap();
        let final_best = t.final_best().expect("found something feasible");
        let init_best = t.best_feasible[cfg.n_init - 1];
        if let Some(ib) = init_best {
            assert!(final_best <= ib);
        }
        assert!(final_best >= 0.04 - 1e-9, "infeasible optimum leaked: {final_best}");
    }
}
