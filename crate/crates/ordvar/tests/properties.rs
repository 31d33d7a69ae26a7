//! Property suites for the numeric kernels, loss family, constants, and
//! estimators.

use proptest::prelude::*;

use ordvar::constants::{
    baee_constant, equivariant_constant, equivariant_constant_numeric, equivariant_residual,
    stein_constants,
};
use ordvar::estimators::{
    baee, derived_statistics, estimate, stein_estimate, EstimatorVariant, Target, TwoSampleSummary,
};
use ordvar::numerics::{
    gamma_ratio, integrate, log_gamma, reg_inc_beta, sample_gamma, sample_normal, solve_root,
    RandomStream,
};
use ordvar::simulation::{mc_risk, ModelParams};
use ordvar::{Component, LossSpec};

fn all_losses() -> [LossSpec; 4] {
    [
        LossSpec::Quadratic,
        LossSpec::Entropy,
        LossSpec::Symmetric,
        LossSpec::Linex { a: -2.0 },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_ratio_monotone_in_x(x in 0.05f64..50.0, step in 0.01f64..5.0, r in 0.01f64..10.0) {
        // Decreasing in x for r > 0, increasing for r < 0.
        let lo = gamma_ratio(x, r).unwrap();
        let hi = gamma_ratio(x + step, r).unwrap();
        prop_assert!(hi < lo, "r > 0: ratio must decrease ({lo} -> {hi})");
        let lo = gamma_ratio(x + r, -r).unwrap();
        let hi = gamma_ratio(x + r + step, -r).unwrap();
        prop_assert!(hi > lo, "r < 0: ratio must increase ({lo} -> {hi})");
    }

    #[test]
    fn quadrature_matches_incomplete_beta(a in 0.5f64..20.0, b in 0.5f64..20.0, u in 1e-3f64..100.0) {
        // ∫₀ᵘ q^{a−1}(1+q)^{−(a+b)} dq = B(a,b) · I_{u/(1+u)}(a,b)
        // Relative tolerance must drive the quadrature here: the integral can
        // be as small as 1e-11 and an absolute floor would dominate it.
        let direct = integrate(
            |q| ((a - 1.0) * q.ln() - (a + b) * (1.0 + q).ln()).exp(),
            0.0,
            u,
            1e-300,
            1e-12,
        )
        .unwrap();
        let ln_beta = log_gamma(a).unwrap() + log_gamma(b).unwrap() - log_gamma(a + b).unwrap();
        let viabeta = ln_beta.exp() * reg_inc_beta(u / (1.0 + u), a, b).unwrap();
        prop_assert!(
            ((direct - viabeta) / viabeta).abs() < 1e-10,
            "a={a} b={b} u={u}: {direct} vs {viabeta}"
        );
    }

    #[test]
    fn root_residual_bound(target in -5.0f64..5.0, scale in 0.1f64..10.0) {
        let f = |x: f64| scale * (x - target);
        let rel_tol = 1e-11;
        let root = solve_root(f, -10.0, 10.0, rel_tol).unwrap();
        // |f(root)| ≤ |f'| · rel_tol · |root| up to a small factor.
        prop_assert!(f(root).abs() <= scale * rel_tol * root.abs().max(1e-12) * 8.0 + 1e-12);
    }

    #[test]
    fn loss_derivative_sign_and_fd(kind in 0usize..4, t in 0.02f64..50.0) {
        let loss = all_losses()[kind];
        let d = loss.deriv(t).unwrap();
        if t < 1.0 - 1e-9 {
            prop_assert!(d < 0.0);
        }
        if t > 1.0 + 1e-9 {
            prop_assert!(d > 0.0);
        }
        let h = 1e-6 * t;
        let fd = (loss.value(t + h).unwrap() - loss.value(t - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - d).abs() <= 1e-6 * (1.0 + d.abs()), "{loss} t={t}: {fd} vs {d}");
    }

    #[test]
    fn affine_equivariance_random_scale(
        b in 0.01f64..100.0,
        mean1 in -5.0f64..5.0,
        mean2 in -5.0f64..5.0,
        ss1 in 0.1f64..100.0,
        ss2 in 0.1f64..100.0,
        kind in 0usize..4,
    ) {
        let loss = all_losses()[kind];
        let k = 2.0;
        let s = TwoSampleSummary::new(6, 9, mean1, mean2, ss1, ss2).unwrap();
        let scaled = TwoSampleSummary::new(6, 9, b * mean1, b * mean2, b * b * ss1, b * b * ss2).unwrap();
        for component in [Component::Sigma1, Component::Sigma2] {
            let t = Target::new(component, k).unwrap();
            for variant in [
                EstimatorVariant::Baee,
                EstimatorVariant::SteinPlain,
                EstimatorVariant::SteinOneMean,
                EstimatorVariant::SteinTwoMeans,
                EstimatorVariant::SteinMeanDiff,
                EstimatorVariant::BzBoundary,
            ] {
                let base = estimate(&s, t, loss, variant).unwrap();
                let big = estimate(&scaled, t, loss, variant).unwrap();
                let expected = b.powf(k) * base;
                prop_assert!(
                    ((big - expected) / expected).abs() < 1e-11,
                    "{variant} {component:?}: {big} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn gate_consistency_random_summaries(
        mean1 in -3.0f64..3.0,
        mean2 in -3.0f64..3.0,
        ss1 in 0.1f64..50.0,
        ss2 in 0.1f64..50.0,
        kind in 0usize..4,
    ) {
        let loss = all_losses()[kind];
        let s = TwoSampleSummary::new(6, 9, mean1, mean2, ss1, ss2).unwrap();
        let d = derived_statistics(&s);
        let t1 = Target::new(Component::Sigma1, 2.0).unwrap();
        let t2 = Target::new(Component::Sigma2, 2.0).unwrap();

        // Shrinkage direction always holds.
        for variant in [
            EstimatorVariant::SteinPlain,
            EstimatorVariant::SteinOneMean,
            EstimatorVariant::SteinTwoMeans,
            EstimatorVariant::SteinMeanDiff,
        ] {
            prop_assert!(stein_estimate(&s, t1, loss, variant).unwrap() <= baee(&s, t1, loss).unwrap());
            prop_assert!(stein_estimate(&s, t2, loss, variant).unwrap() >= baee(&s, t2, loss).unwrap());
        }

        // Failed gates reproduce the baseline bit for bit.
        if d.u1 <= 0.0 {
            prop_assert_eq!(
                stein_estimate(&s, t1, loss, EstimatorVariant::SteinOneMean).unwrap(),
                baee(&s, t1, loss).unwrap()
            );
        }
        if d.u3 <= 0.0 {
            prop_assert_eq!(
                stein_estimate(&s, t1, loss, EstimatorVariant::SteinMeanDiff).unwrap(),
                baee(&s, t1, loss).unwrap()
            );
        }
        if d.w1 >= 0.0 {
            prop_assert_eq!(
                stein_estimate(&s, t2, loss, EstimatorVariant::SteinOneMean).unwrap(),
                baee(&s, t2, loss).unwrap()
            );
        }
        if d.w3 <= 0.0 {
            prop_assert_eq!(
                stein_estimate(&s, t2, loss, EstimatorVariant::SteinMeanDiff).unwrap(),
                baee(&s, t2, loss).unwrap()
            );
        }
    }
}

#[test]
fn numeric_constant_matches_closed_forms_on_grid() {
    for loss in [LossSpec::Quadratic, LossSpec::Entropy, LossSpec::Symmetric] {
        for k in [1.0, 2.0, 3.0] {
            for df in [9.0, 16.0, 33.0, 64.0] {
                if loss == LossSpec::Symmetric && df <= 2.0 * k {
                    continue;
                }
                let closed = equivariant_constant(loss, df, k).unwrap();
                let numeric = equivariant_constant_numeric(&loss, df, k).unwrap();
                assert!(
                    ((numeric - closed) / closed).abs() < 1e-9,
                    "{loss} df={df} k={k}"
                );
            }
        }
    }
}

#[test]
fn plugback_residuals_on_grid() {
    for loss in all_losses() {
        for df in [8.0, 17.0, 40.0] {
            let alpha = equivariant_constant(loss, df, 2.0).unwrap();
            let r = equivariant_residual(&loss, alpha, df, 2.0).unwrap();
            assert!(r.abs() <= 1e-8, "{loss} df={df}: residual {r}");
        }
    }
}

#[test]
fn umvue_coefficient_identity() {
    // The entropy BAEE is the unbiased estimator for every (p, k).
    for p in [4u32, 9, 16, 31] {
        for k in [1.0, 2.0, 3.5] {
            let c = baee_constant(LossSpec::Entropy, p, k).unwrap();
            let pf = p as f64;
            let coeff = gamma_ratio((pf - 1.0) / 2.0, k / 2.0).unwrap() / (2f64).powf(0.5 * k);
            assert!(((c - coeff) / coeff).abs() < 1e-13, "p={p} k={k}");
        }
    }
}

/// Two-sample Kolmogorov–Smirnov distance between sorted samples.
fn two_sample_ks(mut xs: Vec<f64>, mut ys: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    ys.sort_by(|a, b| a.total_cmp(b));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

#[test]
fn gamma_sampler_matches_squared_normal_construction() {
    // χ²₅ drawn through the gamma sampler against the sum of five squared
    // standard normals; the two-sample KS statistic must stay below the 1%
    // critical value c(0.01)·√(2/n).
    let n = 100_000usize;
    let mut s1 = RandomStream::new(2024, 0);
    let gamma_draws: Vec<f64> = (0..n)
        .map(|_| sample_gamma(2.5, 2.0, &mut s1).unwrap())
        .collect();
    let mut s2 = RandomStream::new(2024, 1);
    let normal_draws: Vec<f64> = (0..n)
        .map(|_| {
            (0..5)
                .map(|_| {
                    let z = sample_normal(0.0, 1.0, &mut s2).unwrap();
                    z * z
                })
                .sum()
        })
        .collect();
    let d = two_sample_ks(gamma_draws, normal_draws);
    let critical = 1.62762 * (2.0 / n as f64).sqrt();
    assert!(d < critical, "KS {d} vs critical {critical}");
}

#[test]
fn risk_invariant_under_simultaneous_scaling() {
    // Scaling (σ₁, σ₂, μ₁, μ₂) by b = 2 maps the draws exactly (location-
    // scale sampler), so with k = 2 every per-replicate loss is bit-identical.
    let t = Target::new(Component::Sigma1, 2.0).unwrap();
    let base = ModelParams {
        mu1: 0.3,
        mu2: 0.7,
        sigma1: 0.6,
        sigma2: 1.0,
    };
    let scaled = ModelParams {
        mu1: 2.0 * base.mu1,
        mu2: 2.0 * base.mu2,
        sigma1: 2.0 * base.sigma1,
        sigma2: 2.0 * base.sigma2,
    };
    for variant in [
        EstimatorVariant::Baee,
        EstimatorVariant::SteinPlain,
        EstimatorVariant::SteinTwoMeans,
    ] {
        let a = mc_risk(
            variant,
            &base,
            t,
            LossSpec::Entropy,
            6,
            9,
            4000,
            RandomStream::new(5, 0),
        )
        .unwrap();
        let b = mc_risk(
            variant,
            &scaled,
            t,
            LossSpec::Entropy,
            6,
            9,
            4000,
            RandomStream::new(5, 0),
        )
        .unwrap();
        assert_eq!(a.risk.to_bits(), b.risk.to_bits(), "{variant}");
    }
}

#[test]
fn stein_constant_dominance_gates() {
    // The corollaries require α_j < c₀ᵢ; verify on the simulation and data
    // configurations actually used.
    for loss in all_losses() {
        for (p1, p2) in [(6u32, 9u32), (5, 5), (16, 16)] {
            let b = stein_constants(loss, p1, p2, 2.0).unwrap();
            for (name, alpha) in [
                ("alpha1", b.alpha1),
                ("alpha2", b.alpha2),
                ("alpha3", b.alpha3),
                ("alpha4", b.alpha4),
            ] {
                assert!(alpha > 0.0);
                assert!(
                    alpha < b.c01 && alpha < b.c02,
                    "{loss} ({p1},{p2}): {name} = {alpha} vs c01 = {}, c02 = {}",
                    b.c01,
                    b.c02
                );
            }
        }
    }
}
