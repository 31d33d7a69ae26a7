//! Equivariant estimator constants.
//!
//! The basic object is the unique α > 0 solving E[L′(α Z^{k/2})] = 0 with
//! Z ~ χ²_df. The best affine equivariant constant c₀ solves the weighted
//! equation E[L′(c V^{k/2}) V^{k/2}] = 0 with V ~ χ²_{p−1}; the weight tilts
//! the χ²_{p−1} density into χ²_{p−1+k}, so c₀ is the unweighted constant at
//! df = p − 1 + k and one solver serves both.
//!
//! Closed forms are used where they exist (quadratic, entropy, symmetric for
//! any k; linex for k = 2) and a quadrature-plus-root-solve path covers the
//! rest. Results are cached by (loss, df, k).

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::losses::{BowlLoss, LossSpec};
use crate::numerics::{integrate, log_gamma, solve_root};

const LN_2: f64 = std::f64::consts::LN_2;

/// Solved constants for one (loss, p₁, p₂, k) problem, together with the
/// gamma degrees of freedom behind each α.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstantsBundle {
    pub c01: f64,
    pub c02: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    #[serde(skip)]
    pub df1: f64,
    #[serde(skip)]
    pub df2: f64,
    #[serde(skip)]
    pub df3: f64,
    #[serde(skip)]
    pub df4: f64,
}

fn validate_df_k(df: f64, k: f64) -> Result<()> {
    if !(df > 0.0) {
        return Err(Error::domain(format!(
            "degrees of freedom must be positive, got {df}"
        )));
    }
    if !(k > 0.0) {
        return Err(Error::domain(format!("power k must be positive, got {k}")));
    }
    Ok(())
}

/// The unique α > 0 with E[L′(α Z^{k/2})] = 0, Z ~ χ²_df.
pub fn equivariant_constant(loss: LossSpec, df: f64, k: f64) -> Result<f64> {
    validate_df_k(df, k)?;
    if let Some(v) = cache_get(loss, df, k) {
        return Ok(v);
    }
    let value = match loss {
        LossSpec::Quadratic => {
            // α = 1 / E[Z^{k/2}]
            (log_gamma(df / 2.0)? - 0.5 * k * LN_2 - log_gamma((df + k) / 2.0)?).exp()
        }
        LossSpec::Entropy => {
            // α = E[Z^{−k/2}], finite only for df > k
            if df <= k {
                return Err(Error::domain(format!(
                    "entropy constant requires df > k, got df = {df}, k = {k}"
                )));
            }
            (log_gamma((df - k) / 2.0)? - 0.5 * k * LN_2 - log_gamma(df / 2.0)?).exp()
        }
        LossSpec::Symmetric => {
            // α² = E[Z^{−k}], finite only for df > 2k
            if df <= 2.0 * k {
                return Err(Error::domain(format!(
                    "symmetric constant requires df > 2k, got df = {df}, k = {k}"
                )));
            }
            (0.5 * (log_gamma((df - 2.0 * k) / 2.0)? - k * LN_2 - log_gamma(df / 2.0)?)).exp()
        }
        LossSpec::Linex { a } => {
            if k == 2.0 {
                // The moment generating function gives α in closed form.
                (1.0 - (-2.0 * a / df).exp()) / (2.0 * a)
            } else {
                equivariant_constant_numeric(&loss, df, k)?
            }
        }
    };
    cache_put(loss, df, k, value);
    Ok(value)
}

/// E[L′(α Z^{k/2})] for Z ~ χ²_df, by adaptive quadrature. This is the
/// residual of the defining equation and vanishes at the solved constant.
pub fn equivariant_residual(loss: &dyn BowlLoss, alpha: f64, df: f64, k: f64) -> Result<f64> {
    validate_df_k(df, k)?;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let half_df = df / 2.0;
    let ln_norm = log_gamma(half_df)? + half_df * LN_2;
    integrate(
        |z| {
            let density = ((half_df - 1.0) * z.ln() - 0.5 * z - ln_norm).exp();
            if density == 0.0 {
                return 0.0;
            }
            match loss.deriv(alpha * z.powf(0.5 * k)) {
                Ok(d) => d * density,
                Err(_) => f64::NAN,
            }
        },
        0.0,
        f64::INFINITY,
        1e-13,
        1e-11,
    )
}

/// Numeric fallback and oracle for [`equivariant_constant`]: solves the
/// defining equation by quadrature plus bracketed root finding. Divergent
/// parameter combinations (linex with a > 0 and k > 2) are rejected.
pub fn equivariant_constant_numeric(loss: &dyn BowlLoss, df: f64, k: f64) -> Result<f64> {
    validate_df_k(df, k)?;
    let mut hi: f64 = 1.0;
    if let Some(limit) = finite_alpha_limit(loss, df, k)? {
        hi = hi.min(limit);
    }
    let f = |alpha: f64| equivariant_residual(loss, alpha, df, k).unwrap_or(f64::NAN);
    // The expectation can be astronomically steep near a divergence boundary;
    // pull the upper end in until it evaluates cleanly.
    let mut tries = 0;
    while !f(hi).is_finite() && tries < 60 {
        hi *= 0.5;
        tries += 1;
    }
    if !f(hi).is_finite() {
        return Err(Error::domain(
            "could not evaluate the defining expectation anywhere in the bracket".to_string(),
        ));
    }
    solve_root(f, 1e-12, hi, 1e-12)
}

/// Upper α limit keeping the defining integral convergent, when one exists.
fn finite_alpha_limit(loss: &dyn BowlLoss, _df: f64, k: f64) -> Result<Option<f64>> {
    // Probe the derivative to detect exponential growth that can outrun the
    // chi-square tail; only losses of linex type with a > 0 behave this way.
    let g1 = loss.deriv(10.0)?;
    let g2 = loss.deriv(20.0)?;
    if g1 > 0.0 && g2.is_finite() && g2 > 1e3 * g1 {
        // Derivative ~ a e^{a t} against the e^{−z/2} tail with t = α z^{k/2}.
        let a_est = (g2 / g1).ln() / 10.0;
        if k > 2.0 {
            return Err(Error::domain(
                "the defining expectation diverges for exponential losses with k > 2".to_string(),
            ));
        }
        if k == 2.0 {
            // Convergence needs a·α < 1/2.
            return Ok(Some(0.5 / a_est * (1.0 - 1e-9)));
        }
    }
    Ok(None)
}

/// The BAEE constant c₀ for samples of size p: the solution of the weighted
/// equation, computed through the density-tilting identity.
pub fn baee_constant(loss: LossSpec, p: u32, k: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::domain(format!(
            "sample size must be at least 2, got {p}"
        )));
    }
    equivariant_constant(loss, (p - 1) as f64 + k, k)
}

/// All constants used by the shrinkage estimators of one two-sample problem.
pub fn stein_constants(loss: LossSpec, p1: u32, p2: u32, k: f64) -> Result<ConstantsBundle> {
    if p1 < 2 || p2 < 2 {
        return Err(Error::domain(format!(
            "sample sizes must be at least 2, got p1 = {p1}, p2 = {p2}"
        )));
    }
    let p = (p1 + p2) as f64;
    let df1 = p + k - 2.0;
    let df2 = p + k - 1.0;
    let df3 = p + k;
    let df4 = df2;
    let alpha1 = equivariant_constant(loss, df1, k)?;
    let alpha2 = equivariant_constant(loss, df2, k)?;
    let alpha3 = equivariant_constant(loss, df3, k)?;
    Ok(ConstantsBundle {
        c01: baee_constant(loss, p1, k)?,
        c02: baee_constant(loss, p2, k)?,
        alpha1,
        alpha2,
        alpha3,
        alpha4: alpha2,
        df1,
        df2,
        df3,
        df4,
    })
}

#[derive(Hash, PartialEq, Eq)]
struct CacheKey {
    kind: u8,
    a_bits: u64,
    df_bits: u64,
    k_bits: u64,
}

impl CacheKey {
    fn new(loss: LossSpec, df: f64, k: f64) -> Self {
        let (kind, a_bits) = match loss {
            LossSpec::Quadratic => (0, 0),
            LossSpec::Entropy => (1, 0),
            LossSpec::Symmetric => (2, 0),
            LossSpec::Linex { a } => (3, a.to_bits()),
        };
        CacheKey {
            kind,
            a_bits,
            df_bits: df.to_bits(),
            k_bits: k.to_bits(),
        }
    }
}

fn cache() -> &'static RwLock<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cache_get(loss: LossSpec, df: f64, k: f64) -> Option<f64> {
    cache()
        .read()
        .expect("constant cache poisoned")
        .get(&CacheKey::new(loss, df, k))
        .copied()
}

fn cache_put(loss: LossSpec, df: f64, k: f64, value: f64) {
    cache()
        .write()
        .expect("constant cache poisoned")
        .insert(CacheKey::new(loss, df, k), value);
}
