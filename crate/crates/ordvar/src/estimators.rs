//! Point estimators of σᵢᵏ from two-sample summary statistics.
//!
//! The baseline is the best affine equivariant estimator c₀ᵢ·Sᵢ^{k/2}. The
//! shrinkage families truncate its coefficient against a data-dependent bound
//! built from the variance ratio and, depending on the variant, the sample
//! means: downward (min) when the smaller scale σ₁ is the target, upward
//! (max) for σ₂. Variants whose mean gate fails fall back to the baseline
//! exactly.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::constants::{baee_constant, stein_constants, ConstantsBundle};
use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::numerics::log_gamma;
use crate::{bz_bayes, Component};

/// Sufficient statistics of the two normal samples: sizes, means, and total
/// (centered) sums of squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSummary")]
pub struct TwoSampleSummary {
    p1: u32,
    p2: u32,
    mean1: f64,
    mean2: f64,
    ss1: f64,
    ss2: f64,
}

#[derive(Deserialize)]
struct RawSummary {
    p1: u32,
    p2: u32,
    mean1: f64,
    mean2: f64,
    ss1: f64,
    ss2: f64,
}

impl TryFrom<RawSummary> for TwoSampleSummary {
    type Error = Error;
    fn try_from(r: RawSummary) -> Result<Self> {
        TwoSampleSummary::new(r.p1, r.p2, r.mean1, r.mean2, r.ss1, r.ss2)
    }
}

impl TwoSampleSummary {
    pub fn new(p1: u32, p2: u32, mean1: f64, mean2: f64, ss1: f64, ss2: f64) -> Result<Self> {
        if p1 < 2 || p2 < 2 {
            return Err(Error::domain(format!(
                "sample sizes must be at least 2, got p1 = {p1}, p2 = {p2}"
            )));
        }
        if !(ss1 > 0.0) || !(ss2 > 0.0) {
            return Err(Error::domain(format!(
                "sums of squares must be strictly positive, got ss1 = {ss1}, ss2 = {ss2} \
                 (constant samples carry no scale information)"
            )));
        }
        if !mean1.is_finite() || !mean2.is_finite() {
            return Err(Error::domain("sample means must be finite".to_string()));
        }
        Ok(TwoSampleSummary {
            p1,
            p2,
            mean1,
            mean2,
            ss1,
            ss2,
        })
    }

    pub fn p1(&self) -> u32 {
        self.p1
    }
    pub fn p2(&self) -> u32 {
        self.p2
    }
    pub fn mean1(&self) -> f64 {
        self.mean1
    }
    pub fn mean2(&self) -> f64 {
        self.mean2
    }
    pub fn ss1(&self) -> f64 {
        self.ss1
    }
    pub fn ss2(&self) -> f64 {
        self.ss2
    }
}

/// The eight dimensionless ratios the estimators are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedStatistics {
    /// ss2 / ss1
    pub u: f64,
    /// mean1 / √ss1
    pub u1: f64,
    /// mean2 / √ss1
    pub u2: f64,
    /// (mean2 − mean1) / √ss1
    pub u3: f64,
    /// ss1 / ss2
    pub w: f64,
    /// mean1 / √ss2
    pub w1: f64,
    /// mean2 / √ss2
    pub w2: f64,
    /// (mean1 − mean2) / √ss2
    pub w3: f64,
}

pub fn derived_statistics(s: &TwoSampleSummary) -> DerivedStatistics {
    let r1 = s.ss1.sqrt();
    let r2 = s.ss2.sqrt();
    DerivedStatistics {
        u: s.ss2 / s.ss1,
        u1: s.mean1 / r1,
        u2: s.mean2 / r1,
        u3: (s.mean2 - s.mean1) / r1,
        w: s.ss1 / s.ss2,
        w1: s.mean1 / r2,
        w2: s.mean2 / r2,
        w3: (s.mean1 - s.mean2) / r2,
    }
}

/// Which parameter is estimated: component i ∈ {1, 2} raised to the power k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub component: Component,
    pub k: f64,
}

impl Target {
    pub fn new(component: Component, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::domain(format!("power k must be positive, got {k}")));
        }
        Ok(Target { component, k })
    }
}

/// The estimator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorVariant {
    /// Best affine equivariant estimator c₀ᵢ Sᵢ^{k/2}.
    Baee,
    /// Unbiased estimator; coincides with the BAEE under entropy loss.
    Umvue,
    /// Truncation against the variance-ratio bound.
    SteinPlain,
    /// Truncation using one sample mean, gated on its sign.
    SteinOneMean,
    /// Truncation using both sample means, gated on both signs.
    SteinTwoMeans,
    /// Truncation using the mean difference, gated on its sign.
    SteinMeanDiff,
    /// Smooth boundary estimator of the improved class.
    BzBoundary,
    /// Generalized Bayes estimator (equals the boundary estimator).
    GenBayes,
}

impl EstimatorVariant {
    pub const ALL: [EstimatorVariant; 8] = [
        EstimatorVariant::Baee,
        EstimatorVariant::Umvue,
        EstimatorVariant::SteinPlain,
        EstimatorVariant::SteinOneMean,
        EstimatorVariant::SteinTwoMeans,
        EstimatorVariant::SteinMeanDiff,
        EstimatorVariant::BzBoundary,
        EstimatorVariant::GenBayes,
    ];

    pub fn cli_name(&self) -> &'static str {
        match self {
            EstimatorVariant::Baee => "baee",
            EstimatorVariant::Umvue => "umvue",
            EstimatorVariant::SteinPlain => "stein-plain",
            EstimatorVariant::SteinOneMean => "stein-one-mean",
            EstimatorVariant::SteinTwoMeans => "stein-two-means",
            EstimatorVariant::SteinMeanDiff => "stein-mean-diff",
            EstimatorVariant::BzBoundary => "bz",
            EstimatorVariant::GenBayes => "gb",
        }
    }
}

impl fmt::Display for EstimatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for EstimatorVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "baee" => EstimatorVariant::Baee,
            "umvue" => EstimatorVariant::Umvue,
            "stein-plain" => EstimatorVariant::SteinPlain,
            "stein-one-mean" => EstimatorVariant::SteinOneMean,
            "stein-two-means" => EstimatorVariant::SteinTwoMeans,
            "stein-mean-diff" => EstimatorVariant::SteinMeanDiff,
            "bz" => EstimatorVariant::BzBoundary,
            "gb" => EstimatorVariant::GenBayes,
            other => {
                return Err(Error::Incompatible(format!(
                    "unknown estimator variant `{other}`"
                )))
            }
        })
    }
}

impl Serialize for EstimatorVariant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.cli_name())
    }
}

impl<'de> Deserialize<'de> for EstimatorVariant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The BAEE of σᵢᵏ: c₀ᵢ · Sᵢ^{k/2}.
pub fn baee(s: &TwoSampleSummary, t: Target, loss: LossSpec) -> Result<f64> {
    let (p, ss) = match t.component {
        Component::Sigma1 => (s.p1, s.ss1),
        Component::Sigma2 => (s.p2, s.ss2),
    };
    Ok(baee_constant(loss, p, t.k)? * ss.powf(0.5 * t.k))
}

/// The unbiased estimator Γ((p−1)/2) / (2^{k/2} Γ((p+k−1)/2)) · S^{k/2}.
pub fn umvue(s: &TwoSampleSummary, t: Target) -> Result<f64> {
    let (p, ss) = match t.component {
        Component::Sigma1 => (s.p1 as f64, s.ss1),
        Component::Sigma2 => (s.p2 as f64, s.ss2),
    };
    let ln_coeff = log_gamma((p - 1.0) / 2.0)?
        - 0.5 * t.k * std::f64::consts::LN_2
        - log_gamma((p + t.k - 1.0) / 2.0)?;
    Ok(ln_coeff.exp() * ss.powf(0.5 * t.k))
}

/// One of the four truncated (Stein-type) estimators.
pub fn stein_estimate(
    s: &TwoSampleSummary,
    t: Target,
    loss: LossSpec,
    variant: EstimatorVariant,
) -> Result<f64> {
    let bundle = stein_constants(loss, s.p1, s.p2, t.k)?;
    stein_with_constants(s, t, variant, &bundle)
}

/// Stein evaluation against precomputed constants; this is the hot path the
/// simulation engine uses so constants are solved once per configuration.
pub(crate) fn stein_with_constants(
    s: &TwoSampleSummary,
    t: Target,
    variant: EstimatorVariant,
    bundle: &ConstantsBundle,
) -> Result<f64> {
    let d = derived_statistics(s);
    let half_k = 0.5 * t.k;
    let p1 = s.p1 as f64;
    let p2 = s.p2 as f64;
    let pooled_weight = 1.0 / (1.0 / p1 + 1.0 / p2);

    let coeff = match t.component {
        Component::Sigma1 => {
            let bound = match variant {
                EstimatorVariant::SteinPlain => Some(bundle.alpha1 * (1.0 + d.u).powf(half_k)),
                EstimatorVariant::SteinOneMean => (d.u1 > 0.0)
                    .then(|| bundle.alpha2 * (1.0 + d.u + p1 * d.u1 * d.u1).powf(half_k)),
                EstimatorVariant::SteinTwoMeans => (d.u1 > 0.0 && d.u2 > 0.0).then(|| {
                    bundle.alpha3 * (1.0 + d.u + p1 * d.u1 * d.u1 + p2 * d.u2 * d.u2).powf(half_k)
                }),
                EstimatorVariant::SteinMeanDiff => (d.u3 > 0.0).then(|| {
                    bundle.alpha4 * (1.0 + d.u + d.u3 * d.u3 * pooled_weight).powf(half_k)
                }),
                other => {
                    return Err(Error::Incompatible(format!(
                        "`{other}` is not a Stein-type variant"
                    )))
                }
            };
            match bound {
                Some(b) => bundle.c01.min(b),
                None => bundle.c01,
            }
        }
        Component::Sigma2 => {
            let bound = match variant {
                EstimatorVariant::SteinPlain => Some(bundle.alpha1 * (1.0 + d.w).powf(half_k)),
                EstimatorVariant::SteinOneMean => (d.w1 < 0.0)
                    .then(|| bundle.alpha2 * (1.0 + d.w + p1 * d.w1 * d.w1).powf(half_k)),
                EstimatorVariant::SteinTwoMeans => (d.w1 < 0.0 && d.w2 < 0.0).then(|| {
                    bundle.alpha3 * (1.0 + d.w + p1 * d.w1 * d.w1 + p2 * d.w2 * d.w2).powf(half_k)
                }),
                EstimatorVariant::SteinMeanDiff => (d.w3 > 0.0).then(|| {
                    bundle.alpha4 * (1.0 + d.w + d.w3 * d.w3 * pooled_weight).powf(half_k)
                }),
                other => {
                    return Err(Error::Incompatible(format!(
                        "`{other}` is not a Stein-type variant"
                    )))
                }
            };
            match bound {
                Some(b) => bundle.c02.max(b),
                None => bundle.c02,
            }
        }
    };
    let ss = match t.component {
        Component::Sigma1 => s.ss1,
        Component::Sigma2 => s.ss2,
    };
    Ok(coeff * ss.powf(half_k))
}

/// Evaluates any estimator variant.
pub fn estimate(
    s: &TwoSampleSummary,
    t: Target,
    loss: LossSpec,
    variant: EstimatorVariant,
) -> Result<f64> {
    match variant {
        EstimatorVariant::Baee => baee(s, t, loss),
        EstimatorVariant::Umvue => umvue(s, t),
        EstimatorVariant::SteinPlain
        | EstimatorVariant::SteinOneMean
        | EstimatorVariant::SteinTwoMeans
        | EstimatorVariant::SteinMeanDiff => stein_estimate(s, t, loss, variant),
        EstimatorVariant::BzBoundary => bz_bayes::bz_estimate(s, t, loss),
        EstimatorVariant::GenBayes => bz_bayes::gb_estimate(s, t, loss),
    }
}
