//! Rank-based comparison of optimization strategies.
//!
//! Strategies are ranked within each (problem, iteration, seed) cell by
//! their incumbent value, ascending; strategies without a feasible
//! observation share the midrank of the trailing positions. Cell ranks are
//! averaged over the whole grid and reported with bootstrap intervals.

use cmes::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Ranks for one cell. `values[i]` is strategy i's best feasible objective,
/// or None when the strategy has no feasible observation yet.
pub fn rank_cell(values: &[Option<f64>]) -> Vec<f64> {
    let n = values.len();
    let mut ranks = vec![0.0; n];
    let mut feas: Vec<usize> = (0..n).filter(|&i| values[i].is_some()).collect();
    feas.sort_by(|&i, &j| values[i].unwrap().total_cmp(&values[j].unwrap()));
    let mut pos = 0;
    while pos < feas.len() {
        let mut end = pos;
        while end + 1 < feas.len() && values[feas[end + 1]] == values[feas[pos]] {
            end += 1;
        }
        // midrank of positions pos+1 ..= end+1
        let mid = (pos + end) as f64 / 2.0 + 1.0;
        for &i in &feas[pos..=end] {
            ranks[i] = mid;
        }
        pos = end + 1;
    }
    let u = n - feas.len();
    if u > 0 {
        // the u trailing positions n-u+1 ..= n, shared equally
        let shared = (2 * n - u + 1) as f64 / 2.0;
        for (i, v) in values.iter().enumerate() {
            if v.is_none() {
                ranks[i] = shared;
            }
        }
    }
    ranks
}

/// One strategy's incumbent trace on one (problem, seed) run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunCurve {
    pub problem: String,
    pub strategy: String,
    pub seed: u64,
    /// Best feasible objective after each iteration; None before the first
    /// feasible observation.
    pub best_feasible: Vec<Option<f64>>,
}

/// Ranks for one (problem, iteration, seed) cell, strategy order matching
/// [`RankTable::strategies`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankCell {
    pub problem: String,
    pub seed: u64,
    pub iteration: usize,
    pub ranks: Vec<f64>,
}

/// Per-cell ranks plus grid-level aggregation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankTable {
    pub strategies: Vec<String>,
    pub cells: Vec<RankCell>,
    /// Mean rank per strategy over all cells (lower is better).
    pub mean_rank: Vec<f64>,
    /// Percentile bootstrap 95% interval per strategy, resampled over
    /// (problem, seed) blocks.
    pub ci95: Vec<(f64, f64)>,
}

impl RankTable {
    /// Mean rank per strategy within each iteration, for rank-vs-iteration
    /// curves.
    pub fn mean_by_iteration(&self) -> BTreeMap<usize, Vec<f64>> {
        let k = self.strategies.len();
        let mut sums: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
        for cell in &self.cells {
            let entry = sums
                .entry(cell.iteration)
                .or_insert_with(|| (vec![0.0; k], 0));
            for (s, r) in entry.0.iter_mut().zip(&cell.ranks) {
                *s += r;
            }
            entry.1 += 1;
        }
        sums.into_iter()
            .map(|(it, (sum, count))| (it, sum.iter().map(|s| s / count as f64).collect()))
            .collect()
    }
}

/// Aggregate per-strategy runs into a rank table with the default 1000
/// bootstrap resamples.
pub fn average_rank(runs: &[RunCurve]) -> Result<RankTable> {
    average_rank_with(runs, 1000, 0)
}

/// Same aggregation with explicit bootstrap settings.
pub fn average_rank_with(runs: &[RunCurve], resamples: usize, seed: u64) -> Result<RankTable> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument("no runs to rank".into()));
    }
    let strategies: Vec<String> = {
        let set: BTreeSet<&str> = runs.iter().map(|r| r.strategy.as_str()).collect();
        set.into_iter().map(String::from).collect()
    };
    let k = strategies.len();
    let index: BTreeMap<&str, usize> = strategies
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    // (problem, seed) block -> per-strategy curve
    let mut blocks: BTreeMap<(String, u64), Vec<Option<&RunCurve>>> = BTreeMap::new();
    for run in runs {
        let slot = blocks
            .entry((run.problem.clone(), run.seed))
            .or_insert_with(|| vec![None; k]);
        let i = index[run.strategy.as_str()];
        if slot[i].is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate run for strategy {} on ({}, seed {})",
                run.strategy, run.problem, run.seed
            )));
        }
        slot[i] = Some(run);
    }
    for ((problem, seed), slot) in &blocks {
        let lens: BTreeSet<usize> = slot
            .iter()
            .map(|r| r.map(|r| r.best_feasible.len()).unwrap_or(0))
            .collect();
        if slot.iter().any(|r| r.is_none()) || lens.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "unequal coverage on ({problem}, seed {seed}): every strategy needs one run \
                 of the same length"
            )));
        }
    }

    let mut cells = Vec::new();
    for ((problem, seed), slot) in &blocks {
        let budget = slot[0].unwrap().best_feasible.len();
        for t in 0..budget {
            let values: Vec<Option<f64>> =
                slot.iter().map(|r| r.unwrap().best_feasible[t]).collect();
            cells.push(RankCell {
                problem: problem.clone(),
                seed: *seed,
                iteration: t,
                ranks: rank_cell(&values),
            });
        }
    }

    let mean_rank = mean_over(&cells, k);

    // percentile bootstrap over (problem, seed) blocks
    let mut by_block: BTreeMap<(String, u64), Vec<usize>> = BTreeMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        by_block
            .entry((cell.problem.clone(), cell.seed))
            .or_default()
            .push(ci);
    }
    let block_cells: Vec<&Vec<usize>> = by_block.values().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boots: Vec<Vec<f64>> = vec![Vec::with_capacity(resamples); k];
    for _ in 0..resamples {
        let mut sums = vec![0.0; k];
        let mut count = 0usize;
        for _ in 0..block_cells.len() {
            let pick = block_cells[rng.random_range(0..block_cells.len())];
            for &ci in pick {
                for (s, r) in sums.iter_mut().zip(&cells[ci].ranks) {
                    *s += r;
                }
                count += 1;
            }
        }
        for (i, s) in sums.iter().enumerate() {
            boots[i].push(s / count as f64);
        }
    }
    let ci95 = boots
        .iter_mut()
        .map(|b| {
            if b.is_empty() {
                return (f64::NAN, f64::NAN);
            }
            b.sort_by(f64::total_cmp);
            (percentile(b, 2.5), percentile(b, 97.5))
        })
        .collect();

    Ok(RankTable {
        strategies,
        cells,
        mean_rank,
        ci95,
    })
}

fn mean_over(cells: &[RankCell], k: usize) -> Vec<f64> {
    let mut sums = vec![0.0; k];
    for cell in cells {
        for (s, r) in sums.iter_mut().zip(&cell.ranks) {
            *s += r;
        }
    }
    sums.iter().map(|s| s / cells.len() as f64).collect()
}

/// Linear-interpolation percentile of a sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let idx = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    let w = idx - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}
