//! Property tests: invariants that should hold on whole input regions, not
//! just the hand-picked cases in the unit tests.

use cmes::acquisition::{
    entropy_diff_binary, entropy_diff_marginal_y, entropy_diff_marginal_zc, entropy_diff_real,
    StandardizedInputs,
};
use cmes::baselines::expected_improvement;
use cmes::constraint::{feasibility_stats, local_laplace};
use cmes::math::{hazard, log_phi, logit, logsumexp2, sigmoid};
use cmes::space::{Coord, Dimension, Point, SearchSpace};
use proptest::prelude::*;

fn dim_strategy() -> impl Strategy<Value = Dimension> {
    prop_oneof![
        (-5.0..5.0f64, 0.1..10.0f64)
            .prop_map(|(lo, w)| Dimension::Continuous { lo, hi: lo + w }),
        (-10i64..10, 0i64..20).prop_map(|(lo, extra)| Dimension::Integer {
            lo,
            hi: lo + extra
        }),
        (1usize..6).prop_map(|n| Dimension::Categorical { n }),
    ]
}

fn space_strategy() -> impl Strategy<Value = SearchSpace> {
    prop::collection::vec(dim_strategy(), 1..5)
        .prop_map(|dims| SearchSpace::new(dims).expect("generated dims are valid"))
}

/// Space together with a point inside it, built from unit fractions.
fn space_and_point() -> impl Strategy<Value = (SearchSpace, Point)> {
    space_strategy().prop_flat_map(|space| {
        let n = space.n_dims();
        (
            Just(space),
            prop::collection::vec(0.0..1.0f64, n),
        )
    })
    .prop_map(|(space, fracs)| {
        let point: Point = space
            .dims()
            .iter()
            .zip(&fracs)
            .map(|(dim, &u)| match *dim {
                Dimension::Continuous { lo, hi } => Coord::Real(lo + u * (hi - lo)),
                Dimension::Integer { lo, hi } => {
                    Coord::Int(lo + (u * (hi - lo) as f64).round() as i64)
                }
                Dimension::Categorical { n } => {
                    Coord::Cat(((u * n as f64) as usize).min(n - 1))
                }
            })
            .collect();
        (space, point)
    })
}

proptest! {
    #[test]
    fn encode_decode_roundtrip((space, point) in space_and_point()) {
        let enc = space.encode(&point).expect("point is in space");
        let back = space.decode(&enc.view()).expect("width matches");
        for (orig, got) in point.iter().zip(&back) {
            match (orig, got) {
                (Coord::Real(a), Coord::Real(b)) => {
                    prop_assert!((a - b).abs() <= 1e-12, "real drifted: {a} vs {b}")
                }
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn decode_lands_in_space(
        (space, raw) in space_strategy().prop_flat_map(|space| {
            let w = space.encoded_dim();
            (Just(space), prop::collection::vec(-10.0..10.0f64, w))
        })
    ) {
        let enc = ndarray::Array1::from_vec(raw);
        let point = space.decode(&enc.view()).expect("width matches");
        prop_assert!(space.validate(&point).is_ok(), "decode left the space: {point:?}");
    }

    #[test]
    fn entropy_forms_stay_finite(
        gamma_y in -8.0..8.0f64,
        gamma_c in -8.0..8.0f64,
        mu in -6.0..6.0f64,
        var in 1e-6..9.0f64,
        delta in -3.0..3.0f64,
    ) {
        let real = entropy_diff_real(&StandardizedInputs::from_gammas(gamma_y, gamma_c));
        prop_assert!(real.is_finite(), "real form blew up: {real}");
        prop_assert!(real >= -1e-12, "hard truncation lost information: {real}");

        let local = local_laplace(mu, var);
        let fs = feasibility_stats(&local, delta);
        let log_zy = log_phi(gamma_y);
        let binary = entropy_diff_binary(gamma_y, log_zy, &local, &fs);
        prop_assert!(binary.is_finite(), "binary form blew up: {binary}");

        let marg_y = entropy_diff_marginal_y(gamma_y, log_zy, log_phi(gamma_c));
        prop_assert!(marg_y.is_finite(), "marginal-y form blew up: {marg_y}");

        let marg_zc = entropy_diff_marginal_zc(log_zy, &local, &fs);
        prop_assert!(marg_zc.is_finite(), "marginal-zc form blew up: {marg_zc}");
    }

    #[test]
    fn laplace_weights_normalize_and_track_mu(
        mu in -20.0..20.0f64,
        var in 1e-6..25.0f64,
        bump in 0.01..5.0f64,
    ) {
        let local = local_laplace(mu, var);
        let total = logsumexp2(local.log_q(-1), local.log_q(1));
        prop_assert!(total.abs() <= 1e-10, "Q does not normalize: {total}");

        // larger latent mean => constraint violation more likely
        let shifted = local_laplace(mu + bump, var);
        prop_assert!(
            shifted.log_q(1) >= local.log_q(1) - 1e-12,
            "Q(+1) not monotone in mu"
        );
    }

    #[test]
    fn expected_improvement_nonnegative(
        mu in -10.0..10.0f64,
        sigma in 0.0..5.0f64,
        inc in -10.0..10.0f64,
    ) {
        let ei = expected_improvement(mu, sigma, inc);
        prop_assert!(ei.is_finite(), "EI not finite: {ei}");
        prop_assert!(ei >= 0.0, "EI negative: {ei}");
        // EI is bounded by the certain-improvement payoff plus one sd of slack
        prop_assert!(ei <= (inc - mu).max(0.0) + sigma, "EI above its envelope: {ei}");
    }

    #[test]
    fn log_phi_monotone(x in -150.0..30.0f64, dx in 1e-6..10.0f64) {
        prop_assert!(log_phi(x) <= log_phi(x + dx), "log Phi decreased on [{x}, {}]", x + dx);
        prop_assert!(log_phi(x) < 0.0, "log Phi must be negative, got {}", log_phi(x));
    }

    #[test]
    fn hazard_dominates_identity(x in -100.0..100.0f64) {
        let h = hazard(x);
        prop_assert!(h.is_finite(), "hazard not finite at {x}: {h}");
        prop_assert!(h >= 0.0, "hazard negative at {x}: {h}");
        prop_assert!(h > x, "hazard must exceed x, got {h} at {x}");
        if x >= -30.0 {
            // strictly positive wherever the pdf itself has not underflowed
            prop_assert!(h > 0.0, "hazard vanished at {x}");
        }
    }

    #[test]
    fn logit_inverts_sigmoid(x in -14.0..14.0f64) {
        // beyond |x| ~ 26 sigmoid saturates to within one ulp of 1 and the
        // roundtrip legitimately loses digits; inside this band it is clean
        let back = logit(sigmoid(x));
        prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0), "{x} -> {back}");
    }
}
