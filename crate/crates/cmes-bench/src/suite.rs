//! Suite runner: executes the (problem x strategy x seed) grid, one JSONL
//! results file per cell, with atomic commits and resumable reruns.
//!
//! Cell content depends only on (problem, strategy parameters, seed), never
//! on wall-clock time or worker interleaving, so a rerun of the same config
//! reproduces every results file byte for byte.

use crate::config::{StrategySpec, SuiteConfig};
use crate::error::{BenchError, Result};
use crate::problems::by_name;
use crate::rank::RunCurve;
use cmes::driver::{run, ZcRecord};
use cmes::space::Point;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

/// One evaluation, one line of a cell file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub run: String,
    pub problem: String,
    pub strategy: String,
    pub seed: u64,
    pub iteration: usize,
    pub x: Point,
    /// Observed objective; absent when the scenario hides unfeasible values.
    pub z_y: Option<f64>,
    pub z_c: ZcRecord,
    pub best_feasible: Option<f64>,
}

/// Per-run sidecar row in summary.json.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: String,
    pub problem: String,
    pub strategy: String,
    pub seed: u64,
    pub evaluations: usize,
    pub best_feasible: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOutcome {
    /// Cells evaluated this invocation.
    pub executed: usize,
    /// Complete cells left untouched by --resume.
    pub skipped: usize,
    /// Corrupt cells set aside and re-executed.
    pub quarantined: usize,
    /// Evaluation records on disk across all cells after the run.
    pub records: usize,
}

pub fn run_id(problem: &str, strategy: &str, seed: u64) -> String {
    format!("{problem}--{strategy}--s{seed}")
}

fn cell_file(cells_dir: &Path, problem: &str, strategy: &str, seed: u64) -> PathBuf {
    cells_dir.join(format!("{}.jsonl", run_id(problem, strategy, seed)))
}

enum CellState {
    Missing,
    Complete,
    Corrupt,
}

/// A cell counts as complete when every line parses, the run id matches the
/// file name, and the record count equals the budget.
fn inspect_cell(path: &Path, id: &str, budget: usize) -> CellState {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return CellState::Missing,
        Err(_) => return CellState::Corrupt,
    };
    let mut n = 0;
    for line in text.lines() {
        match serde_json::from_str::<EvalRecord>(line) {
            Ok(r) if r.run == id => n += 1,
            _ => return CellState::Corrupt,
        }
    }
    if n == budget {
        CellState::Complete
    } else {
        CellState::Corrupt
    }
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().expect("cell paths always have a parent");
    let name = path.file_name().expect("cell paths always have a name");
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn execute_cell(cfg: &SuiteConfig, problem: &str, spec: &StrategySpec, seed: u64) -> Result<String> {
    let prob = by_name(problem).expect("problem names are validated at load");
    let rc = cfg.run_config(spec, &prob, seed);
    let mode = cfg.feedback;
    let mut bb = |x: &Point| prob.feedback(x, mode);
    let traj = run(&mut bb, prob.space(), &rc)?;
    let id = run_id(problem, &spec.name, seed);
    let mut out = String::new();
    for (obs, best) in traj.observations.iter().zip(&traj.best_feasible) {
        let rec = EvalRecord {
            run: id.clone(),
            problem: problem.to_string(),
            strategy: spec.name.clone(),
            seed,
            iteration: obs.iteration,
            x: obs.x.clone(),
            z_y: obs.z_y,
            z_c: obs.z_c,
            best_feasible: *best,
        };
        out.push_str(&serde_json::to_string(&rec)?);
        out.push('\n');
    }
    Ok(out)
}

/// Execute the grid. Without `resume`, any existing cell file is an error;
/// with it, complete cells are skipped and corrupt ones are renamed to
/// `<cell>.quarantine` (replacing an older quarantine) and re-executed.
pub fn run_suite(
    cfg: &SuiteConfig,
    out_dir: &Path,
    workers: usize,
    resume: bool,
) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let cells_dir = out_dir.join("cells");
    fs::create_dir_all(&cells_dir)?;

    let mut jobs = VecDeque::new();
    let mut outcome = SuiteOutcome::default();
    for (problem, strategy, seed) in cfg.cells() {
        let id = run_id(&problem, &strategy, seed);
        let path = cell_file(&cells_dir, &problem, &strategy, seed);
        match inspect_cell(&path, &id, cfg.budget) {
            CellState::Missing => jobs.push_back((problem, strategy, seed)),
            CellState::Complete if resume => {
                log::info!("skipping complete cell {id}");
                outcome.skipped += 1;
            }
            CellState::Complete => {
                return Err(BenchError::Config(format!(
                    "results for {id} already exist in {}; pass --resume to continue",
                    out_dir.display()
                )));
            }
            CellState::Corrupt if resume => {
                log::warn!("quarantining corrupt cell {id}");
                let quarantine = path.with_extension("jsonl.quarantine");
                fs::rename(&path, &quarantine)?;
                outcome.quarantined += 1;
                jobs.push_back((problem, strategy, seed));
            }
            CellState::Corrupt => {
                return Err(BenchError::Config(format!(
                    "corrupt results for {id} in {}; pass --resume to quarantine and redo",
                    out_dir.display()
                )));
            }
        }
    }

    let n_workers = workers.max(1).min(jobs.len().max(1));
    let queue = Mutex::new(jobs);
    let failed = AtomicBool::new(false);
    let first_err: Mutex<Option<BenchError>> = Mutex::new(None);
    let executed = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::SeqCst) {
                    break;
                }
                let job = queue.lock().unwrap().pop_front();
                let Some((problem, strategy, seed)) = job else {
                    break;
                };
                let spec = cfg.strategy(&strategy).expect("cells come from the config");
                let result = execute_cell(cfg, &problem, spec, seed).and_then(|content| {
                    write_atomic(&cell_file(&cells_dir, &problem, &strategy, seed), &content)
                });
                match result {
                    Ok(()) => {
                        log::info!("finished cell {}", run_id(&problem, &strategy, seed));
                        executed.fetch_add(1, Ordering::SeqCst);
                    }
                    Err(e) => {
                        let mut slot = first_err.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        failed.store(true, Ordering::SeqCst);
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = first_err.into_inner().unwrap() {
        return Err(e);
    }
    outcome.executed = executed.into_inner();

    // summary.json re-derives every row from the files themselves, so a
    // resumed run and a fresh run agree byte for byte
    let mut summaries = Vec::new();
    for (problem, strategy, seed) in cfg.cells() {
        let id = run_id(&problem, &strategy, seed);
        let path = cell_file(&cells_dir, &problem, &strategy, seed);
        let records = read_cell(&path)?;
        if records.len() != cfg.budget {
            return Err(BenchError::Config(format!(
                "cell {id} holds {} records, expected {}",
                records.len(),
                cfg.budget
            )));
        }
        outcome.records += records.len();
        summaries.push(RunSummary {
            run: id,
            problem,
            strategy,
            seed,
            evaluations: records.len(),
            best_feasible: records.last().and_then(|r| r.best_feasible),
        });
    }
    summaries.sort_by(|a, b| a.run.cmp(&b.run));
    let mut text = serde_json::to_string_pretty(&summaries)?;
    text.push('\n');
    write_atomic(&out_dir.join("summary.json"), &text)?;
    Ok(outcome)
}

fn read_cell(path: &Path) -> Result<Vec<EvalRecord>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        out.push(serde_json::from_str::<EvalRecord>(line)?);
    }
    Ok(out)
}

/// Load every cell under `out_dir` as one best-feasible curve per run,
/// sorted by (problem, strategy, seed) for deterministic downstream order.
pub fn load_curves(out_dir: &Path) -> Result<Vec<RunCurve>> {
    let cells_dir = out_dir.join("cells");
    let mut files = Vec::new();
    for entry in fs::read_dir(&cells_dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "jsonl") {
            files.push(path);
        }
    }
    files.sort();
    let mut curves = Vec::new();
    for path in files {
        let records = read_cell(&path)?;
        let Some(first) = records.first() else {
            return Err(BenchError::Config(format!("empty cell file {}", path.display())));
        };
        if records
            .iter()
            .any(|r| r.problem != first.problem || r.strategy != first.strategy || r.seed != first.seed)
        {
            return Err(BenchError::Config(format!(
                "mixed runs in cell file {}",
                path.display()
            )));
        }
        curves.push(RunCurve {
            problem: first.problem.clone(),
            strategy: first.strategy.clone(),
            seed: first.seed,
            best_feasible: records.iter().map(|r| r.best_feasible).collect(),
        });
    }
    curves.sort_by(|a, b| {
        (&a.problem, &a.strategy, a.seed).cmp(&(&b.problem, &b.strategy, b.seed))
    });
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_ids_key_cells_uniquely() {
        assert_eq!(run_id("toy2d", "cmes", 3), "toy2d--cmes--s3");
        let dir = Path::new("/tmp/x");
        assert_eq!(
            cell_file(dir, "toy2d", "cmes", 3),
            dir.join("toy2d--cmes--s3.jsonl")
        );
    }

    #[test]
    fn inspect_flags_missing_complete_and_corrupt() {
        let dir = std::env::temp_dir().join(format!("cmes-inspect-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p--s--s0.jsonl");
        assert!(matches!(inspect_cell(&path, "p--s--s0", 2), CellState::Missing));

        let rec = EvalRecord {
            run: "p--s--s0".into(),
            problem: "p".into(),
            strategy: "s".into(),
            seed: 0,
            iteration: 0,
            x: Point::new(),
            z_y: Some(1.0),
            z_c: ZcRecord::Real(0.0),
            best_feasible: Some(1.0),
        };
        let line = serde_json::to_string(&rec).unwrap();
        fs::write(&path, format!("{line}\n{line}\n")).unwrap();
        assert!(matches!(inspect_cell(&path, "p--s--s0", 2), CellState::Complete));
        assert!(matches!(inspect_cell(&path, "p--s--s0", 3), CellState::Corrupt));
        assert!(matches!(inspect_cell(&path, "other", 2), CellState::Corrupt));

        fs::write(&path, format!("{line}\nnot json\n")).unwrap();
        assert!(matches!(inspect_cell(&path, "p--s--s0", 2), CellState::Corrupt));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn eval_record_line_roundtrips() {
        let rec = EvalRecord {
            run: "toy2d--cmes--s1".into(),
            problem: "toy2d".into(),
            strategy: "cmes".into(),
            seed: 1,
            iteration: 4,
            x: vec![cmes::space::Coord::Real(0.25), cmes::space::Coord::Real(-0.5)],
            z_y: None,
            z_c: ZcRecord::Binary(1),
            best_feasible: None,
        };
        let line = serde_json::to_string(&rec).unwrap();
        assert!(line.contains("\"z_y\":null"), "unobserved objective stays empty: {line}");
        let back: EvalRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
    }
}
