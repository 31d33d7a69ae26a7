//! Kolmogorov distribution: the limiting series form and the exact
//! finite-sample CDF.

/// CDF of the limiting Kolmogorov distribution,
/// K(x) = 1 − 2 Σ_{j≥1} (−1)^{j−1} e^{−2 j² x²}.
///
/// The alternating series is truncated once a term drops below 1e-12.
/// Non-positive arguments return 0.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    // Below 0.18 the distribution carries less mass than 1e-13, while the
    // alternating series would need thousands of slowly-shrinking terms.
    if x < 0.18 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=1000u32 {
        let term = (-2.0 * (j as f64) * (j as f64) * x * x).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Exact finite-sample CDF P(D_n < d) of the Kolmogorov–Smirnov statistic,
/// by the matrix-power method: with t = n·d, k = ⌈t⌉, h = k − t, the value is
/// (n!/nⁿ) · (Hⁿ)_{kk} for the (2k−1)-square matrix H built from h. Matrix
/// powers carry a decimal exponent so intermediate growth cannot overflow.
pub fn kolmogorov_exact_cdf(n: u32, d: f64) -> f64 {
    if n == 0 || !(d > 0.0) {
        return 0.0;
    }
    if d >= 1.0 {
        return 1.0;
    }
    let nf = n as f64;
    let t = nf * d;
    let k = t.ceil() as usize;
    let m = 2 * k - 1;
    let h = k as f64 - t;

    let mut mat = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                mat[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        mat[i * m] -= h.powi(i as i32 + 1);
        mat[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        mat[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                for g in 1..=(i + 1 - j) {
                    mat[i * m + j] /= g as f64;
                }
            }
        }
    }

    let (power, mut exponent) = mat_pow(&mat, m, n);
    let mut s = power[(k - 1) * m + (k - 1)];
    for i in 1..=n {
        s *= i as f64 / nf;
        if s < 1e-140 {
            s *= 1e140;
            exponent -= 140;
        }
    }
    (s * 10f64.powi(exponent)).clamp(0.0, 1.0)
}

/// (Aⁿ, decimal exponent) with rescaling of large intermediates.
fn mat_pow(a: &[f64], m: usize, n: u32) -> (Vec<f64>, i32) {
    if n == 1 {
        return (a.to_vec(), 0);
    }
    let (half, mut exponent) = mat_pow(a, m, n / 2);
    let mut out = mat_mul(&half, &half, m);
    exponent *= 2;
    if n % 2 == 1 {
        out = mat_mul(&out, a, m);
    }
    let center = out[(m / 2) * m + m / 2];
    if center > 1e140 {
        for v in &mut out {
            *v *= 1e-140;
        }
        exponent += 140;
    }
    (out, exponent)
}

fn mat_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0f64; m * m];
    for i in 0..m {
        for g in 0..m {
            let aig = a[i * m + g];
            if aig == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i * m + j] += aig * b[g * m + j];
            }
        }
    }
    c
}
