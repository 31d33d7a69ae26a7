//! Log-gamma, digamma, and gamma ratios.
//!
//! Everything here is computed through the Stirling asymptotic series after
//! lifting the argument above 10 with the recurrence `ln Γ(x) = ln Γ(x+1) − ln x`.
//! The first omitted Bernoulli term at `x = 10` is below 1e-16 relative, so the
//! overall accuracy is limited only by the recurrence products.

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Stirling series coefficients: B_{2n} / (2n (2n − 1)), n = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Asymptotic digamma coefficients: B_{2n} / (2n), n = 1..=7.
const DIGAMMA_TAIL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv2 = (1.0 / x) * (1.0 / x);
    let mut series = 0.0;
    let mut power = 1.0 / x;
    for c in STIRLING {
        series += c * power;
        power *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if x >= 10.0 {
        return Ok(stirling_ln_gamma(x));
    }
    // Lift into the asymptotic region; the shift is at most 10 factors.
    let mut shift_ln = 0.0;
    let mut y = x;
    while y < 10.0 {
        shift_ln += y.ln();
        y += 1.0;
    }
    Ok(stirling_ln_gamma(y) - shift_ln)
}

/// Digamma function ψ(x) = d/dx ln Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut shift = 0.0;
    let mut y = x;
    while y < 10.0 {
        shift += 1.0 / y;
        y += 1.0;
    }
    let inv2 = (1.0 / y) * (1.0 / y);
    let mut series = 0.0;
    let mut power = inv2;
    for c in DIGAMMA_TAIL {
        series += c * power;
        power *= inv2;
    }
    Ok(y.ln() - 0.5 / y - series - shift)
}

/// The ratio Γ(x) / Γ(x + r), evaluated in log space.
///
/// Strictly decreasing in `x` for fixed `r > 0` and strictly increasing for
/// fixed `r < 0`.
pub fn gamma_ratio(x: f64, r: f64) -> Result<f64> {
    if !(x > 0.0) || !(x + r > 0.0) {
        return Err(Error::domain(format!(
            "gamma_ratio requires x > 0 and x + r > 0, got x = {x}, r = {r}"
        )));
    }
    Ok((log_gamma(x)? - log_gamma(x + r)?).exp())
}

/// ln B(a, b) for positive `a`, `b`. Internal; arguments are pre-validated.
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    stir_or_lift(a) + stir_or_lift(b) - stir_or_lift(a + b)
}

fn stir_or_lift(x: f64) -> f64 {
    if x >= 10.0 {
        stirling_ln_gamma(x)
    } else {
        let mut shift_ln = 0.0;
        let mut y = x;
        while y < 10.0 {
            shift_ln += y.ln();
            y += 1.0;
        }
        stirling_ln_gamma(y) - shift_ln
    }
}
