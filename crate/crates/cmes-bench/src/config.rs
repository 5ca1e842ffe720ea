//! Suite configuration: the (problem x strategy x seed) grid plus driver
//! knobs, loaded from a JSON document.

use crate::error::{BenchError, Result};
use crate::problems::{by_name, Problem};
use cmes::driver::{CmesConfig, FeedbackMode, RunConfig, Strategy};
use cmes::thompson::SamplerKind;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// One strategy column of the grid. `name` keys result cells, so the same
/// kind can appear several times with different parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub name: String,
    pub kind: Strategy,
    /// Confidence p for binary feasibility; the latent threshold is logit(p).
    #[serde(default)]
    pub p: Option<f64>,
    /// Number of y* samples per cMES iteration.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub sampler: Option<SamplerKind>,
    /// Imputation percentile for the adaptive-percentile baseline.
    #[serde(default)]
    pub perc: Option<f64>,
    #[serde(default)]
    pub mixture: Option<bool>,
    #[serde(default)]
    pub noisy: Option<bool>,
}

/// Driver knobs shared by every run of the suite; absent fields keep the
/// driver defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverOverrides {
    #[serde(default)]
    pub candidates: Option<usize>,
    #[serde(default)]
    pub refine_top: Option<usize>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub discretization: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub problems: Vec<String>,
    pub strategies: Vec<StrategySpec>,
    pub seeds: Vec<u64>,
    pub budget: usize,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    pub feedback: FeedbackMode,
    #[serde(default)]
    pub overrides: DriverOverrides,
}

fn default_n_init() -> usize {
    5
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<SuiteConfig> {
        let text = fs::read_to_string(path)?;
        let cfg: SuiteConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// An empty grid (no problems, strategies, or seeds) is valid and runs
    /// zero cells.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        for p in &self.problems {
            if by_name(p).is_none() {
                return bad(format!("unknown problem {p:?}"));
            }
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return bad(format!("strategy name {:?} must be nonempty [A-Za-z0-9_-]", s.name));
            }
            if self.strategies[..i].iter().any(|t| t.name == s.name) {
                return bad(format!("duplicate strategy name {:?}", s.name));
            }
            if let Some(p) = s.p {
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("strategy {:?}: p must lie in (0, 1)", s.name));
                }
            }
            if s.k == Some(0) {
                return bad(format!("strategy {:?}: k must be positive", s.name));
            }
            if let Some(perc) = s.perc {
                if !(perc > 0.0 && perc <= 100.0) {
                    return bad(format!("strategy {:?}: perc must lie in (0, 100]", s.name));
                }
            }
        }
        if !self.strategies.is_empty() || !self.problems.is_empty() {
            if self.n_init == 0 {
                return bad("n_init must be positive".into());
            }
            if self.budget <= self.n_init {
                return bad(format!(
                    "budget {} must exceed n_init {}",
                    self.budget, self.n_init
                ));
            }
        }
        if let Some(c) = self.overrides.candidates {
            if c == 0 {
                return bad("overrides.candidates must be positive".into());
            }
        }
        if self.overrides.discretization == Some(0) {
            return bad("overrides.discretization must be positive".into());
        }
        Ok(())
    }

    /// Grid cells in declaration order: problems outermost, seeds innermost.
    pub fn cells(&self) -> Vec<(String, String, u64)> {
        let mut out = Vec::new();
        for p in &self.problems {
            for s in &self.strategies {
                for &seed in &self.seeds {
                    out.push((p.clone(), s.name.clone(), seed));
                }
            }
        }
        out
    }

    /// Driver configuration for one grid cell.
    pub fn run_config(&self, spec: &StrategySpec, problem: &Problem, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(spec.kind, self.feedback, self.budget, seed);
        cfg.n_init = self.n_init;
        cfg.delta = problem.delta();
        if let Some(p) = spec.p {
            cfg.confidence = p;
        }
        if let Some(c) = self.overrides.candidates {
            cfg.candidates = c;
        }
        if let Some(r) = self.overrides.refine_top {
            cfg.refine_top = r;
        }
        if let Some(r) = self.overrides.restarts {
            cfg.restarts = r;
        }
        if let Some(perc) = spec.perc {
            cfg.ap_percentile = perc;
        }
        let mut cmes_cfg = CmesConfig::default();
        if let Some(k) = spec.k {
            cmes_cfg.k = k;
        }
        if let Some(m) = self.overrides.discretization {
            cmes_cfg.discretization = m;
        }
        if let Some(s) = spec.sampler {
            cmes_cfg.sampler = s;
        }
        if let Some(m) = spec.mixture {
            cmes_cfg.mixture = m;
        }
        if let Some(n) = spec.noisy {
            cmes_cfg.noisy = n;
        }
        cfg.cmes = cmes_cfg;
        cfg
    }

    pub fn strategy(&self, name: &str) -> Option<&StrategySpec> {
        self.strategies.iter().find(|s| s.name == name)
    }
}
