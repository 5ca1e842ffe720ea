//! Bundled constrained test problems.
//!
//! Each problem exposes a deterministic (objective, constraint) pair over a
//! mixed search space plus the feasibility threshold on the constraint and a
//! mapping into the three blackbox feedback modes.

use cmes::driver::{Feedback, FeedbackMode, ZcRecord};
use cmes::space::{Coord, Dimension, Point, SearchSpace};
use cmes::{Error, Result};

/// One benchmark problem: objective, real constraint value, and threshold.
pub struct Problem {
    name: &'static str,
    space: SearchSpace,
    delta: f64,
    eval: fn(&Point) -> (f64, f64),
}

impl Problem {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    /// Feasibility threshold: feasible iff constraint value <= delta.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Objective and constraint value at an in-space point.
    pub fn eval(&self, x: &Point) -> Result<(f64, f64)> {
        self.space.validate(x)?;
        Ok((self.eval)(x))
    }

    /// Blackbox response under a feedback mode. Real-valued mode reports
    /// both channels; binary modes threshold the constraint; the unobserved
    /// mode withholds the objective on unfeasible evaluations.
    pub fn feedback(&self, x: &Point, mode: FeedbackMode) -> Result<Feedback> {
        let (y, c) = self.eval(x)?;
        let feasible = c <= self.delta;
        Ok(match mode {
            FeedbackMode::RealValued => Feedback {
                z_y: Some(y),
                z_c: ZcRecord::Real(c),
            },
            FeedbackMode::Binary => Feedback {
                z_y: Some(y),
                z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
            },
            FeedbackMode::BinaryUnobserved => Feedback {
                z_y: feasible.then_some(y),
                z_c: ZcRecord::Binary(if feasible { -1 } else { 1 }),
            },
        })
    }
}

const TOY_CENTERS: [(f64, f64); 3] = [(-0.7, 0.5), (0.5, 0.3), (-0.3, -0.3)];
const TOY_DIVISORS: [f64; 3] = [0.02, 0.2, 0.6];
const TOY_OFFSETS: [f64; 3] = [0.3, 0.6, 0.9];
const TOY_THRESHOLD: f64 = 1.2;

fn toy2d_value(x: f64, y: f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let (cx, cy) = TOY_CENTERS[i];
        let dx = x - cx;
        let dy = y - cy;
        let v = (dx * dx + dy * dy) / TOY_DIVISORS[i] + TOY_OFFSETS[i];
        best = best.min(v);
    }
    best
}

/// The 2D three-quadratics problem on [-1, 1]^2: the objective is the
/// pointwise minimum of three shifted isotropic quadratics and a point is
/// feasible iff that value is below 1.2.
pub fn toy2d(x: f64, y: f64) -> Result<(f64, bool)> {
    if !(x.is_finite() && y.is_finite() && (-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y))
    {
        return Err(Error::InvalidArgument(format!(
            "toy2d needs (x, y) in [-1, 1]^2, got ({x}, {y})"
        )));
    }
    let v = toy2d_value(x, y);
    Ok((v, v < TOY_THRESHOLD))
}

fn real2(x: &Point) -> (f64, f64) {
    match (x[0], x[1]) {
        (Coord::Real(a), Coord::Real(b)) => (a, b),
        _ => unreachable!("space validation guarantees real coordinates"),
    }
}

fn toy2d_eval(x: &Point) -> (f64, f64) {
    let (a, b) = real2(x);
    let v = toy2d_value(a, b);
    // the constraint channel is the objective itself
    (v, v)
}

fn branin_eval(x: &Point) -> (f64, f64) {
    let (a, b) = real2(x);
    let pi = std::f64::consts::PI;
    let bb = 5.1 / (4.0 * pi * pi);
    let cc = 5.0 / pi;
    let tt = 1.0 / (8.0 * pi);
    let inner = b - bb * a * a + cc * a - 6.0;
    let y = inner * inner + 10.0 * (1.0 - tt) * a.cos() + 10.0;
    // feasible region: disk of radius sqrt(50) around (2.5, 7.5)
    let c = (a - 2.5) * (a - 2.5) + (b - 7.5) * (b - 7.5);
    (y, c)
}

const HARTMANN_A: [[f64; 3]; 4] = [
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
];
const HARTMANN_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];
const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

fn hartmann3_eval(x: &Point) -> (f64, f64) {
    let v: Vec<f64> = x
        .iter()
        .map(|c| match c {
            Coord::Real(a) => *a,
            _ => unreachable!("space validation guarantees real coordinates"),
        })
        .collect();
    let mut y = 0.0;
    for i in 0..4 {
        let mut expo = 0.0;
        for j in 0..3 {
            let d = v[j] - HARTMANN_P[i][j];
            expo += HARTMANN_A[i][j] * d * d;
        }
        y -= HARTMANN_ALPHA[i] * (-expo).exp();
    }
    // the unconstrained minimizer violates this budget, so it binds
    let c = v[0] + v[1] + v[2];
    (y, c)
}

fn mixed4_eval(x: &Point) -> (f64, f64) {
    let (a, b, i, k) = match (x[0], x[1], x[2], x[3]) {
        (Coord::Real(a), Coord::Real(b), Coord::Int(i), Coord::Cat(k)) => (a, b, i, k),
        _ => unreachable!("space validation guarantees coordinate kinds"),
    };
    let cat_offset = [0.0, 0.25, 0.5][k];
    let y = (a - 0.3) * (a - 0.3) + (b + 0.2) * (b + 0.2) + 0.15 * ((i - 1) * (i - 1)) as f64
        + cat_offset;
    // excludes the unconstrained minimizer (value there is 0.35 > 0.2)
    let c = a + b + 0.25 * i as f64;
    (y, c)
}

/// All bundled problems, in a stable order.
pub fn bundled() -> Vec<Problem> {
    vec![
        Problem {
            name: "toy2d",
            space: SearchSpace::new(vec![
                Dimension::Continuous { lo: -1.0, hi: 1.0 },
                Dimension::Continuous { lo: -1.0, hi: 1.0 },
            ])
            .expect("static space"),
            delta: TOY_THRESHOLD,
            eval: toy2d_eval,
        },
        Problem {
            name: "branin-disk",
            space: SearchSpace::new(vec![
                Dimension::Continuous { lo: -5.0, hi: 10.0 },
                Dimension::Continuous { lo: 0.0, hi: 15.0 },
            ])
            .expect("static space"),
            delta: 50.0,
            eval: branin_eval,
        },
        Problem {
            name: "hartmann3-sum",
            space: SearchSpace::new(vec![
                Dimension::Continuous { lo: 0.0, hi: 1.0 },
                Dimension::Continuous { lo: 0.0, hi: 1.0 },
                Dimension::Continuous { lo: 0.0, hi: 1.0 },
            ])
            .expect("static space"),
            delta: 1.4,
            eval: hartmann3_eval,
        },
        Problem {
            name: "mixed4",
            space: SearchSpace::new(vec![
                Dimension::Continuous { lo: -1.0, hi: 1.0 },
                Dimension::Continuous { lo: -1.0, hi: 1.0 },
                Dimension::Integer { lo: 0, hi: 4 },
                Dimension::Categorical { n: 3 },
            ])
            .expect("static space"),
            delta: 0.2,
            eval: mixed4_eval,
        },
    ]
}

/// Look a bundled problem up by name.
pub fn by_name(name: &str) -> Option<Problem> {
    bundled().into_iter().find(|p| p.name == name)
}
