//! Quadrature references for the truncated-entropy scores.
//!
//! Each function evaluates an information gain H[prior] - H[conditional]
//! directly from the defining integrals, in standardized units (latent
//! variables are N(0,1), thresholds are z-scores). No logsumexp tricks, no
//! hazard identities, no shared code with the closed forms under test.

use crate::normal;
use crate::quad;

const WIDE: f64 = 14.0;

fn bounds(knot: f64) -> (f64, f64) {
    (knot.min(0.0) - WIDE, knot.max(0.0) + WIDE)
}

/// Entropy of a two-point distribution given in linear space.
fn discrete_entropy(p: &[f64]) -> f64 {
    p.iter()
        .map(|&q| if q > 0.0 { -q * q.ln() } else { 0.0 })
        .sum()
}

/// Joint real-valued feedback: I((y, c); y*) for y, c ~ N(0,1) truncated by
/// "not (y <= gamma_y and c <= gamma_c)".
pub fn real_valued(gamma_y: f64, gamma_c: f64, tol: f64) -> f64 {
    let zy = normal::cdf(gamma_y);
    let zc = normal::cdf(gamma_c);
    let z = 1.0 - zy * zc;
    let log_z = z.ln();

    let (clo, chi) = bounds(gamma_c);
    let (ylo, yhi) = bounds(gamma_y);

    // Inner c-integrals only depend on whether the c-range is truncated:
    //   i0 = mass of phi(c) over the range, i1 = \int -phi(c) log phi(c).
    let full_i0 = quad::integrate(normal::pdf, clo, chi, tol * 1e-3);
    let full_i1 = quad::integrate(|c| -normal::pdf(c) * normal::log_pdf(c), clo, chi, tol * 1e-3);
    let trunc_i0 = quad::integrate(normal::pdf, gamma_c, chi, tol * 1e-3);
    let trunc_i1 =
        quad::integrate(|c| -normal::pdf(c) * normal::log_pdf(c), gamma_c, chi, tol * 1e-3);

    // H[q] = \int\int -q log q with q = phi(y)phi(c)/Z on the support.
    let h_cond = quad::integrate_split(
        |y| {
            let py = normal::pdf(y);
            let log_py = normal::log_pdf(y);
            let (i0, i1) = if y <= gamma_y {
                (trunc_i0, trunc_i1)
            } else {
                (full_i0, full_i1)
            };
            py / z * ((log_z - log_py) * i0 + i1)
        },
        &[ylo, gamma_y, yhi],
        tol,
    );

    2.0 * normal::entropy(1.0) - h_cond
}

/// Binary constraint feedback: I((y, z_c); y*). `q` holds Q(z_c) and `f`
/// holds F(z_c) = P(c <= delta | z_c), both for z_c = -1 then z_c = +1.
pub fn binary(gamma_y: f64, q: [f64; 2], f: [f64; 2], tol: f64) -> f64 {
    let zy = normal::cdf(gamma_y);
    let ztilde_c = q[0] * f[0] + q[1] * f[1];
    let z = 1.0 - zy * ztilde_c;
    let (ylo, yhi) = bounds(gamma_y);

    let mut h_cond = 0.0;
    for i in 0..2 {
        // r(y, z_c) = phi(y) q kappa / Z, kappa = 1 - 1[y <= gamma_y] f
        let neg_r_log_r = |y: f64, kappa: f64| {
            let r = normal::pdf(y) * q[i] * kappa / z;
            if r > 0.0 {
                -r * r.ln()
            } else {
                0.0
            }
        };
        h_cond += quad::integrate(|y| neg_r_log_r(y, 1.0 - f[i]), ylo, gamma_y, tol / 4.0);
        h_cond += quad::integrate(|y| neg_r_log_r(y, 1.0), gamma_y, yhi, tol / 4.0);
    }

    normal::entropy(1.0) + discrete_entropy(&q) - h_cond
}

/// Objective-only feedback: I(z_y; y*) where only the feasibility mass
/// `z_c_mass` = Z_c of the constraint side enters.
pub fn marginal_y(gamma_y: f64, z_c_mass: f64, tol: f64) -> f64 {
    let z = 1.0 - normal::cdf(gamma_y) * z_c_mass;
    let (ylo, yhi) = bounds(gamma_y);
    let neg_q_log_q = |y: f64, kappa: f64| {
        let qv = normal::pdf(y) * kappa / z;
        if qv > 0.0 {
            -qv * qv.ln()
        } else {
            0.0
        }
    };
    let h_cond = quad::integrate(|y| neg_q_log_q(y, 1.0 - z_c_mass), ylo, gamma_y, tol / 2.0)
        + quad::integrate(|y| neg_q_log_q(y, 1.0), gamma_y, yhi, tol / 2.0);
    normal::entropy(1.0) - h_cond
}

/// Constraint-only binary feedback: I(z_c; y*). Exact two-term sum, no
/// quadrature needed. `z_y_mass` = Z_y = P(y <= y*).
pub fn marginal_zc(z_y_mass: f64, q: [f64; 2], f: [f64; 2]) -> f64 {
    let kappa = [1.0 - z_y_mass * f[0], 1.0 - z_y_mass * f[1]];
    let z = q[0] * kappa[0] + q[1] * kappa[1];
    let post = [q[0] * kappa[0] / z, q[1] * kappa[1] / z];
    discrete_entropy(&q) - discrete_entropy(&post)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_valued_at_origin_matches_closed_value() {
        // gammas = 0: Z = 3/4 and the truncated entropy collapses to
        // 2 H[phi] + log Z, so the gain is exactly -log(3/4).
        let got = real_valued(0.0, 0.0, 1e-10);
        assert!((got - 0.2876820724517809).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn binary_with_unit_mass_matches_real_valued() {
        // F(z_c) = Phi(gamma_c) for both labels makes the constraint side
        // carry Z_c exactly as in the real-valued joint case at that mass.
        let gamma_c: f64 = -0.6;
        let f0 = normal::cdf(gamma_c);
        let got = binary(0.3, [0.5, 0.5], [f0, f0], 1e-10);
        let reference = marginal_y(0.3, f0, 1e-10);
        assert!((got - reference).abs() < 1e-8, "{got} vs {reference}");
    }

    #[test]
    fn marginal_zc_symmetric_case() {
        // q = (1/2, 1/2), f = (1, 0): posterior over z_c after seeing y*
        // reweights to ((1-Zy)/2, 1/2)/Z.
        let zy = 0.37;
        let got = marginal_zc(zy, [0.5, 0.5], [1.0, 0.0]);
        let z = 1.0 - zy * 0.5;
        let p0 = 0.5 * (1.0 - zy) / z;
        let expect =
            std::f64::consts::LN_2 - (-p0 * p0.ln() - (1.0 - p0) * (1.0 - p0).ln());
        assert!((got - expect).abs() < 1e-12);
    }
}
