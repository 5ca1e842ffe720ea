//! Standard-normal helpers for oracle integrands.
//!
//! These intentionally use the plain erfc route, which is accurate wherever
//! the quadrature oracles evaluate them (|x| well below the erfc underflow
//! near 37). They are not the production code path.

pub const LN_2PI: f64 = 1.8378770664093453;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x - 0.5 * LN_2PI).exp()
}

/// Log of the standard normal density.
pub fn log_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * LN_2PI
}

/// Standard normal CDF via erfc.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Log CDF via erfc; valid while erfc does not underflow (x > -37).
pub fn log_cdf(x: f64) -> f64 {
    (0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)).ln()
}

/// Differential entropy of N(mu, sigma^2) given its variance.
pub fn entropy(variance: f64) -> f64 {
    0.5 * (LN_2PI + 1.0 + variance.ln())
}
