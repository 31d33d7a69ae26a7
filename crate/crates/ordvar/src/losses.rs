//! Scale-invariant bowl-shaped loss functions.
//!
//! A loss L acts on the ratio t = estimate/parameter. Every member of the
//! family satisfies L(1) = 0, is decreasing on (0, 1], increasing on [1, ∞),
//! and has a nondecreasing derivative. Four named losses are built in:
//!
//! * quadratic: L(t) = (t − 1)²
//! * entropy:   L(t) = t − ln t − 1
//! * symmetric: L(t) = t + 1/t − 2
//! * linex(a):  L(t) = e^{a(t−1)} − a(t−1) − 1, a ≠ 0
//!
//! User-supplied losses can participate through [`CustomLoss`], which
//! validates the shape conditions on a sample grid before accepting the pair.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    Quadratic,
    Entropy,
    Symmetric,
    Linex { a: f64 },
}

impl LossSpec {
    pub fn linex(a: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidLoss(format!(
                "linex requires a finite nonzero shape, got a = {a}"
            )));
        }
        Ok(LossSpec::Linex { a })
    }

    /// L(t) for t > 0.
    pub fn value(&self, t: f64) -> Result<f64> {
        check_ratio(t)?;
        Ok(match *self {
            LossSpec::Quadratic => (t - 1.0) * (t - 1.0),
            LossSpec::Entropy => t - t.ln() - 1.0,
            LossSpec::Symmetric => t + 1.0 / t - 2.0,
            LossSpec::Linex { a } => {
                let s = a * (t - 1.0);
                s.exp() - s - 1.0
            }
        })
    }

    /// L′(t) for t > 0.
    pub fn deriv(&self, t: f64) -> Result<f64> {
        check_ratio(t)?;
        Ok(match *self {
            LossSpec::Quadratic => 2.0 * (t - 1.0),
            LossSpec::Entropy => 1.0 - 1.0 / t,
            LossSpec::Symmetric => 1.0 - 1.0 / (t * t),
            LossSpec::Linex { a } => a * ((a * (t - 1.0)).exp() - 1.0),
        })
    }

    /// The CLI spelling: `quadratic`, `entropy`, `symmetric`, `linex:a=<real>`.
    pub fn cli_name(&self) -> String {
        match *self {
            LossSpec::Quadratic => "quadratic".to_string(),
            LossSpec::Entropy => "entropy".to_string(),
            LossSpec::Symmetric => "symmetric".to_string(),
            LossSpec::Linex { a } => format!("linex:a={a}"),
        }
    }
}

fn check_ratio(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(format!(
            "loss ratio must be positive, got {t}"
        )));
    }
    Ok(())
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cli_name())
    }
}

impl FromStr for LossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "quadratic" => return Ok(LossSpec::Quadratic),
            "entropy" => return Ok(LossSpec::Entropy),
            "symmetric" => return Ok(LossSpec::Symmetric),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("linex:a=") {
            let a: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidLoss(format!("cannot parse linex shape from `{s}`")))?;
            return LossSpec::linex(a);
        }
        Err(Error::InvalidLoss(format!(
            "unknown loss `{s}` (expected quadratic, entropy, symmetric, or linex:a=<real>)"
        )))
    }
}

impl Serialize for LossSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.cli_name())
    }
}

impl<'de> Deserialize<'de> for LossSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The interface the numeric constant solver needs from a loss.
pub trait BowlLoss {
    fn value(&self, t: f64) -> Result<f64>;
    fn deriv(&self, t: f64) -> Result<f64>;
}

impl BowlLoss for LossSpec {
    fn value(&self, t: f64) -> Result<f64> {
        LossSpec::value(self, t)
    }
    fn deriv(&self, t: f64) -> Result<f64> {
        LossSpec::deriv(self, t)
    }
}

/// A user-supplied (L, L′) pair, admitted only after a grid check of the
/// bowl-shape and monotone-derivative conditions.
pub struct CustomLoss {
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    deriv: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomLoss {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        validate_shape(&value, &deriv)?;
        Ok(CustomLoss {
            value: Box::new(value),
            deriv: Box::new(deriv),
        })
    }
}

impl BowlLoss for CustomLoss {
    fn value(&self, t: f64) -> Result<f64> {
        check_ratio(t)?;
        Ok((self.value)(t))
    }
    fn deriv(&self, t: f64) -> Result<f64> {
        check_ratio(t)?;
        Ok((self.deriv)(t))
    }
}

/// Samples a log grid over (1e-2, 1e2) and rejects pairs that violate
/// L(1) = 0, the decreasing/increasing bowl shape, the derivative sign
/// pattern, a nondecreasing derivative, or consistency of L′ with a central
/// difference of L.
fn validate_shape(value: &impl Fn(f64) -> f64, deriv: &impl Fn(f64) -> f64) -> Result<()> {
    if value(1.0).abs() > 1e-9 {
        return Err(Error::InvalidLoss(format!(
            "L(1) must be 0, got {}",
            value(1.0)
        )));
    }
    let n = 257;
    let mut prev_t: Option<f64> = None;
    let mut prev_v = 0.0;
    let mut prev_d = f64::NEG_INFINITY;
    for i in 0..n {
        let t = 10f64.powf(-2.0 + 4.0 * i as f64 / (n - 1) as f64);
        let v = value(t);
        let d = deriv(t);
        if !v.is_finite() || !d.is_finite() || v < 0.0 {
            return Err(Error::InvalidLoss(format!(
                "non-finite or negative loss sample at t = {t}"
            )));
        }
        if (t < 1.0 && d > 1e-9) || (t > 1.0 && d < -1e-9) {
            return Err(Error::InvalidLoss(format!(
                "derivative has the wrong sign at t = {t}: {d}"
            )));
        }
        if d < prev_d - 1e-9 * (1.0 + d.abs()) {
            return Err(Error::InvalidLoss(format!(
                "derivative decreases at t = {t}"
            )));
        }
        if let Some(pt) = prev_t {
            if pt < 1.0 && t <= 1.0 && v > prev_v + 1e-12 {
                return Err(Error::InvalidLoss(format!(
                    "loss increases before t = 1 at t = {t}"
                )));
            }
            if pt >= 1.0 && v < prev_v - 1e-12 {
                return Err(Error::InvalidLoss(format!(
                    "loss decreases after t = 1 at t = {t}"
                )));
            }
            // Central-difference consistency on interior points.
            let h = 1e-5 * t;
            let fd = (value(t + h) - value(t - h)) / (2.0 * h);
            if (fd - d).abs() > 1e-4 * (1.0 + d.abs()) {
                return Err(Error::InvalidLoss(format!(
                    "derivative inconsistent with the loss at t = {t}: {d} vs {fd}"
                )));
            }
        }
        prev_t = Some(t);
        prev_v = v;
        prev_d = d;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [LossSpec; 4] = [
        LossSpec::Quadratic,
        LossSpec::Entropy,
        LossSpec::Symmetric,
        LossSpec::Linex { a: -2.0 },
    ];

    #[test]
    fn minimum_at_one() {
        for loss in ALL {
            assert_eq!(loss.value(1.0).unwrap(), 0.0);
            assert_eq!(loss.deriv(1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn point_values() {
        assert_eq!(LossSpec::Quadratic.value(3.0).unwrap(), 4.0);
        assert!((LossSpec::Symmetric.deriv(2.0).unwrap() - 0.75).abs() < 1e-15);
        let expected = (-2.0f64).exp() + 2.0 - 1.0;
        assert!((LossSpec::linex(-2.0).unwrap().value(2.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference() {
        for loss in ALL {
            let t = 1.7;
            let h = 1e-6;
            let fd = (loss.value(t + h).unwrap() - loss.value(t - h).unwrap()) / (2.0 * h);
            let d = loss.deriv(t).unwrap();
            assert!(((fd - d) / d).abs() < 1e-6, "{loss}: fd {fd} vs deriv {d}");
        }
    }

    #[test]
    fn derivative_sign_pattern() {
        for loss in ALL {
            for i in 0..100 {
                let t = 10f64.powf(-2.0 + 4.0 * i as f64 / 99.0);
                let d = loss.deriv(t).unwrap();
                if t < 1.0 {
                    assert!(d < 0.0, "{loss} at {t}: {d}");
                } else if t > 1.0 {
                    assert!(d > 0.0, "{loss} at {t}: {d}");
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        for loss in ALL {
            assert!(loss.value(0.0).is_err());
            assert!(loss.value(-1.0).is_err());
            assert!(loss.deriv(0.0).is_err());
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(
            "quadratic".parse::<LossSpec>().unwrap(),
            LossSpec::Quadratic
        );
        assert_eq!("entropy".parse::<LossSpec>().unwrap(), LossSpec::Entropy);
        assert_eq!(
            "linex:a=-2".parse::<LossSpec>().unwrap(),
            LossSpec::Linex { a: -2.0 }
        );
        assert!("linex:a=0".parse::<LossSpec>().is_err());
        assert!("bogus".parse::<LossSpec>().is_err());
    }

    #[test]
    fn custom_loss_accepts_scaled_quadratic() {
        let loss = CustomLoss::new(|t| 2.0 * (t - 1.0) * (t - 1.0), |t| 4.0 * (t - 1.0));
        assert!(loss.is_ok());
    }

    #[test]
    fn custom_loss_rejects_violations() {
        // Not zero at 1.
        assert!(CustomLoss::new(|t| t, |_| 1.0).is_err());
        // Decreasing derivative (concave): fails monotone-derivative check.
        assert!(CustomLoss::new(
            |t| ((t - 1.0) * (t - 1.0)).sqrt(),
            |t| if t > 1.0 { 1.0 } else { -1.0 }
        )
        .is_err());
        // Mismatched derivative.
        assert!(CustomLoss::new(|t| (t - 1.0) * (t - 1.0), |t| 7.0 * (t - 1.0)).is_err());
    }
}
