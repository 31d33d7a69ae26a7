//! Estimation of positive powers of ordered normal standard deviations.
//!
//! Two independent normal samples with σ₁ ≤ σ₂ carry more information about
//! each scale than either sample alone. This crate implements the baseline
//! best affine equivariant estimator of σᵢᵏ under a family of scale-invariant
//! bowl-shaped losses, the truncated (Stein-type) estimators that dominate it
//! under the order restriction — optionally strengthened by sign or ordering
//! information about the means — and the smooth boundary estimators of the
//! improved class, which coincide with generalized Bayes estimators under an
//! improper ordered-scales prior.
//!
//! On top of the estimators sit a reproducible Monte Carlo engine for
//! risk-comparison curves and a small data-analysis pipeline (file loading,
//! normality checks, estimator tables).
//!
//! ```
//! use ordvar::{Component, LossSpec, Target, TwoSampleSummary};
//! use ordvar::estimators::{baee, stein_estimate, EstimatorVariant};
//!
//! let summary = TwoSampleSummary::new(16, 16, 1016.2937, 818.0654,
//!                                     1038675.0494, 438664.9655)?;
//! let target = Target::new(Component::Sigma1, 2.0)?;
//! let baseline = baee(&summary, target, LossSpec::Entropy)?;
//! let improved = stein_estimate(&summary, target, LossSpec::Entropy,
//!                               EstimatorVariant::SteinPlain)?;
//! assert!(improved <= baseline);
//! # Ok::<(), ordvar::Error>(())
//! ```

// Negated comparisons like `!(x > 0.0)` are used deliberately throughout:
// unlike `x <= 0.0` they also reject NaN arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod analysis;
pub mod bz_bayes;
pub mod constants;
mod error;
pub mod estimators;
pub mod losses;
pub mod numerics;
pub mod simulation;

pub use error::{Error, Result};
pub use estimators::{Target, TwoSampleSummary};
pub use losses::LossSpec;

/// Which of the two ordered scales is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "sigma1")]
    Sigma1,
    #[serde(rename = "sigma2")]
    Sigma2,
}

impl Component {
    pub fn index(&self) -> u8 {
        match self {
            Component::Sigma1 => 1,
            Component::Sigma2 => 2,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Sigma1 => f.write_str("sigma1"),
            Component::Sigma2 => f.write_str("sigma2"),
        }
    }
}

impl FromStr for Component {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sigma1" | "1" => Ok(Component::Sigma1),
            "sigma2" | "2" => Ok(Component::Sigma2),
            other => Err(Error::Domain(format!(
                "unknown component `{other}` (expected sigma1 or sigma2)"
            ))),
        }
    }
}

// The guide's code blocks run as doc-tests so the book cannot drift from the
// library. mdBook itself does not test Rust snippets; including each chapter
// as a documented module hands them to `cargo test --doc`, one module per
// chapter so a failure names its origin.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    pub mod model {}
    #[doc = include_str!("../../../book/src/losses.md")]
    pub mod losses {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    pub mod baseline {}
    #[doc = include_str!("../../../book/src/shrinkage.md")]
    pub mod shrinkage {}
    #[doc = include_str!("../../../book/src/boundary.md")]
    pub mod boundary {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    pub mod numerics_guide {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation_guide {}
    #[doc = include_str!("../../../book/src/data-analysis.md")]
    pub mod data_analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
