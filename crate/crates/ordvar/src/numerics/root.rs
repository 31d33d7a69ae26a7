//! Bracketed scalar root finding.

use crate::error::{Error, Result};

pub const DEFAULT_ROOT_REL_TOL: f64 = 1e-12;

const MAX_EXPANSIONS: u32 = 60;
const MAX_ITER: usize = 200;

/// Finds a root of `f` inside `[bracket_lo, bracket_hi]` to relative
/// tolerance `rel_tol` with a Brent-style inverse-quadratic / secant /
/// bisection hybrid.
///
/// If the endpoints do not straddle a sign change the bracket is expanded
/// geometrically up to 60 times: the upper end doubles its distance, the
/// lower end halves toward zero while positive (so functions defined only on
/// the positive axis are never probed outside their domain) and otherwise
/// moves down symmetrically. Bracketing failure and iteration-cap failure are
/// reported as distinct errors.
pub fn solve_root<F: Fn(f64) -> f64>(
    f: F,
    bracket_lo: f64,
    bracket_hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !bracket_lo.is_finite() || !bracket_hi.is_finite() || bracket_lo >= bracket_hi {
        return Err(Error::domain(format!(
            "solve_root requires a finite bracket with lo < hi, got [{bracket_lo}, {bracket_hi}]"
        )));
    }
    let mut lo = bracket_lo;
    let mut hi = bracket_hi;
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut expansions = 0u32;
    let mut width = hi - lo;
    // A NaN product also keeps expanding: the bracket is not valid until a
    // genuine sign change is in hand.
    while !(f_lo * f_hi <= 0.0) {
        if expansions >= MAX_EXPANSIONS {
            return Err(Error::Bracket {
                lo,
                hi,
                f_lo,
                f_hi,
                expansions,
            });
        }
        expansions += 1;
        // Brackets starting on the nonnegative axis stay there: the lower end
        // halves toward zero instead of crossing into negative territory.
        lo = if lo > 0.0 {
            lo * 0.5
        } else if lo == 0.0 {
            0.0
        } else {
            lo - width
        };
        hi += width;
        width *= 2.0;
        f_lo = f(lo);
        f_hi = f(hi);
    }
    brent(&f, lo, hi, f_lo, f_hi, rel_tol)
}

fn brent<F: Fn(f64) -> f64>(
    f: &F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    rel_tol: f64,
) -> Result<f64> {
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::domain(
            "function evaluated to NaN at a bracket endpoint".to_string(),
        ));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITER {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs().max(f64::MIN_POSITIVE);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, falling back to secant.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol {
            d
        } else if xm > 0.0 {
            tol
        } else {
            -tol
        };
        fb = f(b);
    }
    Err(Error::RootIterationCap {
        best: b,
        f_best: fb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear() {
        let r = solve_root(|c| c - 2.0, 0.0, 10.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-11);
    }

    #[test]
    fn chi_square_mean_identity() {
        // E[V] = 15 for V ~ χ²₁₅, so E[V] − 1/c vanishes at c = 1/15.
        let r = solve_root(|c| 15.0 - 1.0 / c, 1e-6, 1.0, 1e-13).unwrap();
        assert!(((r - 1.0 / 15.0) / (1.0 / 15.0)).abs() < 1e-12);
    }

    #[test]
    fn bracketing_failure_reported() {
        let err = solve_root(|c| c + 1.0, 0.0, 10.0, 1e-12).unwrap_err();
        match err {
            Error::Bracket { expansions, .. } => assert_eq!(expansions, 60),
            other => panic!("expected bracketing failure, got {other:?}"),
        }
    }

    #[test]
    fn expansion_reaches_distant_roots() {
        // Root far above the initial bracket.
        let r = solve_root(|c| c - 5000.0, 0.0, 1.0, 1e-12).unwrap();
        assert!(((r - 5000.0) / 5000.0).abs() < 1e-11);
        // Root far below a positive bracket: the lower end decays toward 0.
        let r = solve_root(|c| c - 1e-9, 0.5, 1.0, 1e-12).unwrap();
        assert!(((r - 1e-9) / 1e-9).abs() < 1e-9);
        // Negative territory.
        let r = solve_root(|c| c + 300.0, -1.0, 1.0, 1e-12).unwrap();
        assert!(((r + 300.0) / 300.0).abs() < 1e-11);
    }

    #[test]
    fn residual_consistent_with_tolerance() {
        let f = |c: f64| c.exp() - 3.0;
        let rel_tol = 1e-10;
        let root = solve_root(f, 0.0, 5.0, rel_tol).unwrap();
        // |f(root)| should be at most |f'(root)| · rel_tol · |root| up to a
        // small constant; estimate the derivative by central difference.
        let h = 1e-6 * root.abs();
        let deriv = (f(root + h) - f(root - h)) / (2.0 * h);
        assert!(f(root).abs() <= deriv.abs() * rel_tol * root.abs() * 4.0 + 1e-14);
    }

    #[test]
    fn invalid_bracket() {
        assert!(solve_root(|c| c, 1.0, 1.0, 1e-12).is_err());
        assert!(solve_root(|c| c, f64::NAN, 1.0, 1e-12).is_err());
    }
}
