//! Scalar numerics: robust normal log-CDF, hazard rate, and log-space
//! utilities that the acquisition formulas are built from.
//!
//! The entropy expressions push `log Phi` far into the lower tail and take
//! ratios of the form `N(x)/Phi(-x)`, so both functions must stay accurate
//! where naive `ln(cdf)` underflows.

pub const LN_2PI: f64 = 1.8378770664093453;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Log density of the standard normal.
pub fn log_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * LN_2PI
}

/// Density of the standard normal.
pub fn normal_pdf(x: f64) -> f64 {
    log_normal_pdf(x).exp()
}

/// Standard normal CDF. Accurate in linear space; use [`log_phi`] when the
/// result may underflow.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// log Phi(x), valid over the whole real line.
///
/// Three regimes: `log1p` of the complementary mass for x >= 0, a direct
/// erfc evaluation down to -30 (erfc is still ~1e-197 there), and the
/// continued asymptotic expansion of Mills' ratio through the 105/x^8 term
/// below that. The branch point keeps the expansion's truncation error under
/// 2e-12 relative.
pub fn log_phi(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        // Phi(x) = 1 - Phi(-x); Phi(-x) <= 1/2 here, so log1p is exact.
        return (-0.5 * libm::erfc(x / SQRT_2)).ln_1p();
    }
    if x >= -30.0 {
        return (0.5 * libm::erfc(-x / SQRT_2)).ln();
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    // Phi(x) = N(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
    let t = 1.0 / (x * x);
    let correction = t * (-1.0 + t * (3.0 + t * (-15.0 + t * 105.0)));
    log_normal_pdf(x) - (-x).ln() + correction.ln_1p()
}

/// Hazard rate of the standard normal: N(x) / Phi(-x).
///
/// Decays like N(x) for x -> -inf and grows like x + 1/x for x -> +inf;
/// computed in log space so neither end overflows.
pub fn hazard(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    (log_normal_pdf(x) - log_phi(-x)).exp()
}

/// Numerically stable log(1 + e^x).
pub fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log sigmoid(x) = -log(1 + e^{-x}).
pub fn log_sigmoid(x: f64) -> f64 {
    -log1pexp(-x)
}

/// Logit transform, the inverse of [`sigmoid`].
pub fn logit(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "logit needs p in (0, 1), got {p}");
    p.ln() - (-p).ln_1p()
}

/// log(e^a + e^b) without overflow; handles -inf inputs.
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// log(1 - e^a) for a <= 0 (Maechler's two-branch form).
pub fn log1mexp(a: f64) -> f64 {
    debug_assert!(a <= 0.0, "log1mexp needs a <= 0, got {a}");
    if a == 0.0 {
        f64::NEG_INFINITY
    } else if a > -std::f64::consts::LN_2 {
        (-libm::expm1(a)).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_phi_spot_values() {
        // references computed at 60-digit precision
        assert!((log_phi(0.0) - (-0.6931471805599453)).abs() < 1e-15);
        assert!((log_phi(-1.0) - (-1.8410216450092636)).abs() < 1e-14);
        assert!((log_phi(1.0) - (-0.17275377902344988)).abs() < 1e-15);
        let r = (log_phi(-40.0) - (-804.6084420137538)).abs() / 804.6084420137538;
        assert!(r < 1e-12, "rel err {r}");
    }

    #[test]
    fn hazard_spot_values() {
        assert!((hazard(0.0) - 0.7978845608028654).abs() < 1e-15);
        assert!((hazard(5.0) - 5.186503967125842).abs() < 1e-13);
        assert!((hazard(-30.0) - 1.4736461348785476e-196).abs() / 1.4736461348785476e-196 < 1e-12);
        assert_eq!(hazard(f64::NEG_INFINITY), 0.0);
        assert_eq!(hazard(f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn log_phi_branch_seam_is_continuous() {
        let below = log_phi(-30.0 - 1e-9);
        let above = log_phi(-30.0 + 1e-9);
        assert!((below - above).abs() < 1e-7, "seam jump {}", below - above);
    }

    #[test]
    fn log_phi_matches_complement_identity() {
        // Phi(x) + Phi(-x) = 1 in a range where both are representable
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            let total = log_phi(x).exp() + log_phi(-x).exp();
            assert!((total - 1.0).abs() < 1e-14, "x={x} total={total}");
        }
    }

    #[test]
    fn sigmoid_pair_sums_to_one() {
        for i in -50..=50 {
            let x = i as f64 * 0.7;
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 2e-15);
        }
        // roundtrip only where 1 - sigmoid(x) is well separated from ulp(1)
        for i in -21..=21 {
            let x = i as f64 * 0.7;
            assert!((logit(sigmoid(x)) - x).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn log_space_helpers() {
        assert!((logsumexp2(0.0, -700.0)).abs() < 1e-15);
        assert_eq!(logsumexp2(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        // log(1 - e^{-0.1})
        assert!((log1mexp(-0.1) - (-libm::expm1(-0.1)).ln()).abs() < 1e-15);
        assert!((log1mexp(-50.0) - (-(-50.0f64).exp()).ln_1p()).abs() < 1e-15);
        assert!((log_sigmoid(3.0) - sigmoid(3.0).ln()).abs() < 1e-14);
    }
}
