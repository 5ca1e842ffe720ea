//! End-to-end driver behavior: the acquisition optimizer against a dense
//! grid scan, trajectory replay, and full strategy/feedback-mode sweeps.

use cmes::baselines::{cei_score, Incumbent};
use cmes::constraint::ConstraintPosterior;
use cmes::driver::{
    run, Blackbox, BoState, CmesConfig, Feedback, FeedbackMode, Observation, RunConfig,
    Strategy, ZcRecord,
};
use cmes::gp::{optimize_hyperparameters, GpPosterior, HyperBounds};
use cmes::kernel::KernelKind;
use cmes::space::{Coord, Dimension, Point, SearchSpace};
use ndarray::{arr1, Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_line() -> SearchSpace {
    SearchSpace::new(vec![Dimension::Continuous { lo: 0.0, hi: 1.0 }]).expect("space")
}

fn real_x(p: &Point) -> f64 {
    match p[0] {
        Coord::Real(v) => v,
        _ => panic!("expected a real coordinate"),
    }
}

/// Deterministic replica of the driver's per-iteration refit for one GP:
/// standardize targets, evidence-optimize with the heuristic start only.
fn fit_like_driver(xs: &[f64], raw: &[f64]) -> (GpPosterior, f64, f64) {
    let n = raw.len();
    let mean = raw.iter().sum::<f64>() / n as f64;
    let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt().max(1e-12);
    let x = Array2::from_shape_fn((n, 1), |(i, _)| xs[i]);
    let z = Array1::from_iter(raw.iter().map(|v| (v - mean) / sd));
    let mut rng = ChaCha8Rng::seed_from_u64(0); // restarts = 1 draws nothing
    let params = optimize_hyperparameters(
        &x.view(),
        &z.view(),
        KernelKind::Matern52,
        &HyperBounds::unit_box(),
        1,
        &mut rng,
    )
    .expect("hyperopt");
    (GpPosterior::fit(x, &z.view(), params).expect("fit"), mean, sd)
}

#[test]
fn propose_lands_near_dense_grid_argmax() {
    let space = unit_line();
    let mut cfg = RunConfig::new(Strategy::Cei, FeedbackMode::RealValued, 20, 7);
    cfg.restarts = 1; // deterministic refit: the grid oracle sees the same models
    cfg.delta = 100.0; // constraint satisfied everywhere

    let xs = [0.05, 0.25, 0.45, 0.65, 0.85];
    let mut state = BoState::new(&space, cfg);
    for (i, &x) in xs.iter().enumerate() {
        let y = (x - 0.42) * (x - 0.42);
        state
            .record(Observation {
                x: vec![Coord::Real(x)],
                z_y: Some(y),
                z_c: ZcRecord::Real(x),
                iteration: i,
            })
            .expect("record");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let proposal = state.propose(&mut rng).expect("propose");
    let got = real_x(&proposal);

    // Same models the driver fitted, scored on a dense grid.
    let ys: Vec<f64> = xs.iter().map(|&x| (x - 0.42) * (x - 0.42)).collect();
    let (obj, y_mean, y_sd) = fit_like_driver(&xs, &ys);
    let (con_gp, c_mean, c_sd) = fit_like_driver(&xs, &xs);
    let con = ConstraintPosterior::RealValued(con_gp);
    let delta_std = (100.0 - c_mean) / c_sd;
    let inc = Incumbent {
        value: Some((ys.iter().cloned().fold(f64::INFINITY, f64::min) - y_mean) / y_sd),
    };

    let mut best_u = 0.0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..=10_000 {
        let u = i as f64 / 10_000.0;
        let s = cei_score(&arr1(&[u]).view(), &obj, &con, &inc, delta_std);
        if s > best_score {
            best_score = s;
            best_u = u;
        }
    }

    assert!(
        (got - best_u).abs() < 1e-2,
        "propose at {got} vs dense-grid argmax {best_u}"
    );
    assert!(
        xs.iter().all(|&x| (x - got).abs() > 1e-12),
        "proposed an already-evaluated point"
    );
}

#[test]
fn trajectory_replay_reproduces_incumbents() {
    let space = SearchSpace::new(vec![
        Dimension::Continuous { lo: -1.0, hi: 1.0 },
        Dimension::Continuous { lo: -1.0, hi: 1.0 },
    ])
    .expect("space");
    let mut bb = |p: &Point| {
        let (a, b) = (real_x(p), match p[1] {
            Coord::Real(v) => v,
            _ => unreachable!(),
        });
        Ok(Feedback {
            z_y: Some(a * a + b * b),
            z_c: ZcRecord::Real(a + b),
        })
    };
    let cfg = RunConfig::new(Strategy::Cei, FeedbackMode::RealValued, 12, 3);
    let traj = run(&mut bb, &space, &cfg.clone()).expect("run");

    // Feed the records back through a fresh state: the incumbent after each
    // prefix must equal the stored best_feasible entry.
    let mut state = BoState::new(&space, cfg);
    for (i, obs) in traj.observations.iter().enumerate() {
        state.record(obs.clone()).expect("replay record");
        assert_eq!(
            state.incumbent().value,
            traj.best_feasible[i],
            "incumbent diverged at iteration {i}"
        );
    }
}

#[test]
fn every_strategy_and_mode_completes_and_respects_invariants() {
    let space = SearchSpace::new(vec![
        Dimension::Continuous { lo: 0.0, hi: 1.0 },
        Dimension::Integer { lo: 0, hi: 4 },
        Dimension::Categorical { n: 3 },
    ])
    .expect("space");

    let objective = |p: &Point| {
        let a = real_x(p);
        let b = match p[1] {
            Coord::Int(v) => v as f64 / 4.0,
            _ => unreachable!(),
        };
        let c = match p[2] {
            Coord::Cat(v) => v as f64 * 0.1,
            _ => unreachable!(),
        };
        (a - 0.5) * (a - 0.5) + (b - 0.25) * (b - 0.25) + c
    };
    let constraint = |p: &Point| real_x(p) - 0.8; // feasible iff x0 <= 0.8

    for feedback in [
        FeedbackMode::RealValued,
        FeedbackMode::Binary,
        FeedbackMode::BinaryUnobserved,
    ] {
        for strategy in [Strategy::Cmes, Strategy::Cei, Strategy::Ap, Strategy::Random] {
            let mut bb = |p: &Point| {
                let c = constraint(p);
                let feasible = c <= 0.0;
                Ok(match feedback {
                    FeedbackMode::RealValued => Feedback {
                        z_y: Some(objective(p)),
                        z_c: ZcRecord::Real(c),
                    },
                    FeedbackMode::Binary => Feedback {
                        z_y: Some(objective(p)),
                        z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
                    },
                    FeedbackMode::BinaryUnobserved => Feedback {
                        z_y: feasible.then(|| objective(p)),
                        z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
                    },
                })
            };
            let mut cfg = RunConfig::new(strategy, feedback, 9, 11);
            cfg.delta = 0.0;
            cfg.cmes = CmesConfig {
                k: 4,
                discretization: 64,
                ..CmesConfig::default()
            };
            let traj = run(&mut bb, &space, &cfg).expect("run");

            assert_eq!(traj.observations.len(), 9);
            assert_eq!(traj.best_feasible.len(), 9);
            let mut prev = f64::INFINITY;
            for (i, obs) in traj.observations.iter().enumerate() {
                space.validate(&obs.x).expect("in-space proposal");
                if feedback == FeedbackMode::BinaryUnobserved {
                    let feas = matches!(obs.z_c, ZcRecord::Binary(-1));
                    assert_eq!(obs.z_y.is_some(), feas, "unobserved invariant broke");
                }
                if let Some(b) = traj.best_feasible[i] {
                    assert!(b <= prev + 1e-15, "best_feasible increased");
                    prev = b;
                }
            }
        }
    }
}

#[test]
fn mixture_and_noisy_variants_run_to_completion() {
    let space = unit_line();

    // A.6 mixture scoring in the unobserved-objective setting.
    let mut bb_bin = |p: &Point| {
        let x = real_x(p);
        let feasible = x <= 0.7;
        Ok(Feedback {
            z_y: feasible.then(|| (x - 0.3) * (x - 0.3)),
            z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
        })
    };
    let mut cfg = RunConfig::new(Strategy::Cmes, FeedbackMode::BinaryUnobserved, 10, 5);
    cfg.cmes.mixture = true;
    cfg.cmes.k = 4;
    cfg.cmes.discretization = 64;
    let traj = run(&mut bb_bin, &space, &cfg).expect("mixture run");
    assert_eq!(traj.observations.len(), 10);

    // Noisy-target adjustment in the real-valued setting.
    let mut bb_real = |p: &Point| {
        let x = real_x(p);
        Ok(Feedback {
            z_y: Some((x - 0.3) * (x - 0.3)),
            z_c: ZcRecord::Real(x - 0.7),
        })
    };
    let mut cfg = RunConfig::new(Strategy::Cmes, FeedbackMode::RealValued, 10, 6);
    cfg.cmes.noisy = true;
    cfg.cmes.k = 4;
    cfg.cmes.discretization = 64;
    let traj = run(&mut bb_real, &space, &cfg).expect("noisy run");
    assert_eq!(traj.observations.len(), 10);
    assert!(traj.recommendation().is_some(), "feasible region was sampled");
}

#[test]
fn all_unfeasible_history_still_proposes() {
    // Unobserved mode with no feasible point yet: the objective model is a
    // prior belief and proposing must still work.
    let space = unit_line();
    let cfg = RunConfig::new(Strategy::Cmes, FeedbackMode::BinaryUnobserved, 20, 13);
    let mut state = BoState::new(&space, cfg);
    for (i, &x) in [0.1, 0.5, 0.9].iter().enumerate() {
        state
            .record(Observation {
                x: vec![Coord::Real(x)],
                z_y: None,
                z_c: ZcRecord::Binary(1),
                iteration: i,
            })
            .expect("record");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = state.propose(&mut rng).expect("propose");
    space.validate(&p).expect("in-space");
}

#[test]
fn blackbox_trait_object_is_usable() {
    // `run` takes a dyn Blackbox; closures get the blanket impl.
    let space = unit_line();
    struct Bowl;
    impl Blackbox for Bowl {
        fn evaluate(&mut self, p: &Point) -> cmes::Result<Feedback> {
            let x = match p[0] {
                Coord::Real(v) => v,
                _ => unreachable!(),
            };
            Ok(Feedback {
                z_y: Some(x * x),
                z_c: ZcRecord::Real(x - 0.9),
            })
        }
    }
    let mut bb = Bowl;
    let cfg = RunConfig::new(Strategy::Random, FeedbackMode::RealValued, 7, 17);
    let traj = run(&mut bb, &space, &cfg).expect("run");
    assert_eq!(traj.observations.len(), 7);
    assert_eq!(traj.meta.strategy, Strategy::Random);
}
