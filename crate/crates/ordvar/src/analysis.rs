//! Data ingestion, normality testing, and estimator tables.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorVariant, Target, TwoSampleSummary};
use crate::losses::LossSpec;
use crate::numerics::{kolmogorov_exact_cdf, normal_cdf};
use crate::Component;

/// Caveat attached to every normality-test report: the null distribution of
/// D treats the fitted mean/sd as known, so the p-value is conservative
/// relative to Lilliefors-corrected critical values.
pub const KS_NOTE: &str = "p-value uses the exact finite-sample Kolmogorov distribution with \
                           estimated mean/sd; Lilliefors-corrected values would be smaller";

/// A univariate data series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub label: String,
}

/// Kolmogorov–Smirnov test result against a fitted normal.
#[derive(Debug, Clone, Copy)]
pub struct KSResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Reads one numeric value per line; blank lines and lines starting with `#`
/// are ignored. Parse failures report the 1-based line number.
pub fn load_series(path: &Path) -> Result<Series> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::EmptyInput(format!("cannot read {}: {e}", path.display())))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("cannot parse `{trimmed}` as a number"),
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} contains no data values",
            path.display()
        )));
    }
    Ok(Series { values, label })
}

/// Builds the two-sample sufficient statistics: sizes, means, and centered
/// sums of squares.
pub fn summarize(s1: &Series, s2: &Series) -> Result<TwoSampleSummary> {
    let (p1, mean1, ss1) = moments(s1)?;
    let (p2, mean2, ss2) = moments(s2)?;
    TwoSampleSummary::new(p1, p2, mean1, mean2, ss1, ss2)
}

fn moments(s: &Series) -> Result<(u32, f64, f64)> {
    let n = s.values.len();
    if n < 2 {
        return Err(Error::domain(format!(
            "series `{}` needs at least 2 values, got {n}",
            s.label
        )));
    }
    let mean = s.values.iter().sum::<f64>() / n as f64;
    let ss = s
        .values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>();
    Ok((n as u32, mean, ss))
}

/// Kolmogorov–Smirnov normality test with fitted mean and sd (divisor n − 1).
/// The statistic is the sup distance between the empirical CDF and the fitted
/// normal CDF; the p-value comes from the exact finite-sample distribution
/// of D_n.
pub fn ks_normal_test(s: &Series) -> Result<KSResult> {
    let n = s.values.len();
    if n < 3 {
        return Err(Error::domain(format!(
            "series `{}` needs at least 3 values for the KS test, got {n}",
            s.label
        )));
    }
    let (_, mean, ss) = moments(s)?;
    if ss <= 0.0 {
        return Err(Error::domain(format!(
            "series `{}` has zero variance",
            s.label
        )));
    }
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    let mut sorted = s.values.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let phi = normal_cdf((x - mean) / sd);
        let upper = (i as f64 + 1.0) / nf - phi;
        let lower = phi - i as f64 / nf;
        d = d.max(upper).max(lower);
    }
    Ok(KSResult {
        statistic: d,
        p_value: 1.0 - kolmogorov_exact_cdf(n as u32, d),
        n,
    })
}

/// One cell of an estimator table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Value(f64),
    /// No form exists for this loss/variant combination.
    Unavailable,
    /// The computation failed; the message is carried, not the run aborted.
    Failed(String),
}

/// A rectangular loss × variant table of point estimates for one component.
#[derive(Debug, Clone)]
pub struct EstimatorTable {
    pub component: Component,
    pub k: f64,
    pub losses: Vec<LossSpec>,
    pub variants: Vec<EstimatorVariant>,
    /// Row-major: `cells[i][j]` is `losses[i]` × `variants[j]`.
    pub cells: Vec<Vec<Cell>>,
}

impl EstimatorTable {
    pub fn cell(&self, loss: LossSpec, variant: EstimatorVariant) -> Option<&Cell> {
        let i = self.losses.iter().position(|&l| l == loss)?;
        let j = self.variants.iter().position(|&v| v == variant)?;
        Some(&self.cells[i][j])
    }

    pub fn write_csv<W: Write + ?Sized>(&self, version: &str, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "# ordvar {version} component={} k={}",
            self.component, self.k
        )?;
        write!(out, "loss")?;
        for v in &self.variants {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
        for (loss, row) in self.losses.iter().zip(&self.cells) {
            write!(out, "{loss}")?;
            for cell in row {
                match cell {
                    Cell::Value(x) => write!(out, ",{x:.10e}")?,
                    Cell::Unavailable => write!(out, ",-")?,
                    Cell::Failed(_) => write!(out, ",!")?,
                }
            }
            writeln!(out)?;
        }
        for (loss, row) in self.losses.iter().zip(&self.cells) {
            for (variant, cell) in self.variants.iter().zip(row) {
                if let Cell::Failed(msg) = cell {
                    writeln!(out, "# failed {loss} x {variant}: {msg}")?;
                }
            }
        }
        Ok(())
    }
}

/// Evaluates every requested estimator under every requested loss for one
/// target component. Per-cell failures become annotated cells; generalized
/// Bayes cells under the linex loss are marked unavailable.
pub fn estimator_table(
    s: &TwoSampleSummary,
    component: Component,
    k: f64,
    losses: &[LossSpec],
    variants: &[EstimatorVariant],
) -> Result<EstimatorTable> {
    let t = Target::new(component, k)?;
    let mut cells = Vec::with_capacity(losses.len());
    for &loss in losses {
        let mut row = Vec::with_capacity(variants.len());
        for &variant in variants {
            if variant == EstimatorVariant::GenBayes && matches!(loss, LossSpec::Linex { .. }) {
                row.push(Cell::Unavailable);
                continue;
            }
            match estimate(s, t, loss, variant) {
                Ok(v) => row.push(Cell::Value(v)),
                Err(e) => row.push(Cell::Failed(e.to_string())),
            }
        }
        cells.push(row);
    }
    Ok(EstimatorTable {
        component,
        k,
        losses: losses.to_vec(),
        variants: variants.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!("ordvar-test-{}-{name}", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn load_series_skips_comments_and_blanks() {
        let path = write_temp("ok.txt", "# header\n1.0\n\n  2.5 \n# tail\n3\n");
        let s = load_series(&path).unwrap();
        assert_eq!(s.values, vec![1.0, 2.5, 3.0]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_series_reports_line_numbers() {
        let path = write_temp("bad.txt", "1.0\n2.0\nabc\n");
        match load_series(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_series_rejects_comment_only_file() {
        let path = write_temp("empty.txt", "# comment only\n");
        assert!(matches!(load_series(&path), Err(Error::EmptyInput(_))));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn summarize_two_point_series() {
        let a = Series {
            values: vec![0.0, 2.0],
            label: "a".into(),
        };
        let b = Series {
            values: vec![1.0, 5.0],
            label: "b".into(),
        };
        let s = summarize(&a, &b).unwrap();
        assert_eq!(s.mean1(), 1.0);
        assert_eq!(s.ss1(), 2.0);
        assert_eq!(s.mean2(), 3.0);
        assert_eq!(s.ss2(), 8.0);
    }

    #[test]
    fn summarize_rejects_constant_series() {
        let a = Series {
            values: vec![2.0, 2.0, 2.0],
            label: "const".into(),
        };
        let b = Series {
            values: vec![1.0, 5.0],
            label: "b".into(),
        };
        assert!(summarize(&a, &b).is_err());
    }

    #[test]
    fn summarize_bundled_rainfall_series() {
        let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        let s1 = load_series(&root.join("bengaluru.txt")).unwrap();
        let s2 = load_series(&root.join("hyderabad.txt")).unwrap();
        assert_eq!(s1.values.len(), 16);
        assert_eq!(s2.values.len(), 16);
        let s = summarize(&s1, &s2).unwrap();
        assert!((s.mean1() - 1016.2937).abs() < 0.01);
        assert!((s.mean2() - 818.0654).abs() < 0.01);
        assert!((s.ss1() - 1038675.0494).abs() < 0.01);
        // The published rounding of ss2 sits 0.11 from the value the listed
        // observations produce; hold the exact arithmetic and check the
        // published figure at the looser tolerance.
        let ss2_direct: f64 = {
            let mean = s2.values.iter().sum::<f64>() / 16.0;
            s2.values.iter().map(|v| (v - mean) * (v - mean)).sum()
        };
        assert!((s.ss2() - ss2_direct).abs() < 1e-6);
        assert!((s.ss2() - 438664.9655).abs() < 0.15);
    }

    #[test]
    fn summarize_translation_consistency() {
        let a = Series {
            values: vec![3.1, -0.2, 5.5, 2.2],
            label: "a".into(),
        };
        let shifted = Series {
            values: a.values.iter().map(|v| v + 100.0).collect(),
            label: "a+100".into(),
        };
        let b = Series {
            values: vec![1.0, 2.0, 4.0],
            label: "b".into(),
        };
        let s0 = summarize(&a, &b).unwrap();
        let s1 = summarize(&shifted, &b).unwrap();
        assert!((s1.mean1() - s0.mean1() - 100.0).abs() < 1e-9);
        assert!((s1.ss1() - s0.ss1()).abs() < 1e-7);
    }

    #[test]
    fn ks_on_exact_normal_quantiles() {
        // The empirical CDF of exact standard-normal quantiles is within the
        // grid spacing of the fitted CDF.
        let n = 100;
        let values: Vec<f64> = (1..=n)
            .map(|i| {
                let p = (i as f64 - 0.5) / n as f64;
                // Bisect the normal CDF for the quantile.
                let (mut lo, mut hi) = (-9.0f64, 9.0f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        let s = Series {
            values,
            label: "quantiles".into(),
        };
        let r = ks_normal_test(&s).unwrap();
        assert!(r.statistic < 0.03, "D = {}", r.statistic);
    }

    #[test]
    fn ks_affine_invariance() {
        let s = Series {
            values: vec![0.2, -1.3, 0.7, 2.2, -0.4, 1.1, 0.3, -0.9],
            label: "s".into(),
        };
        let mapped = Series {
            values: s.values.iter().map(|v| 3.5 * v + 20.0).collect(),
            label: "mapped".into(),
        };
        let a = ks_normal_test(&s).unwrap();
        let b = ks_normal_test(&mapped).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-12);
        assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn ks_rejects_degenerate_input() {
        let s = Series {
            values: vec![1.0, 2.0],
            label: "short".into(),
        };
        assert!(ks_normal_test(&s).is_err());
        let s = Series {
            values: vec![1.0, 1.0, 1.0],
            label: "flat".into(),
        };
        assert!(ks_normal_test(&s).is_err());
    }

    #[test]
    fn table_marks_unavailable_and_failures() {
        let s = TwoSampleSummary::new(16, 16, 1.0, 1.0, 10.0, 20.0).unwrap();
        let losses = [LossSpec::Entropy, LossSpec::Linex { a: -2.0 }];
        let variants = [
            EstimatorVariant::Baee,
            EstimatorVariant::BzBoundary,
            EstimatorVariant::GenBayes,
        ];
        let table = estimator_table(&s, Component::Sigma1, 2.0, &losses, &variants).unwrap();
        assert!(matches!(
            table.cell(LossSpec::Linex { a: -2.0 }, EstimatorVariant::GenBayes),
            Some(Cell::Unavailable)
        ));
        assert!(matches!(
            table.cell(LossSpec::Entropy, EstimatorVariant::GenBayes),
            Some(Cell::Value(_))
        ));
        // The linex boundary itself is computable.
        assert!(matches!(
            table.cell(LossSpec::Linex { a: -2.0 }, EstimatorVariant::BzBoundary),
            Some(Cell::Value(_))
        ));

        // A symmetric-loss table at too-small sample sizes fails per cell,
        // not per run.
        let tiny = TwoSampleSummary::new(2, 2, 1.0, 1.0, 10.0, 20.0).unwrap();
        let table = estimator_table(
            &tiny,
            Component::Sigma1,
            2.0,
            &[LossSpec::Symmetric],
            &[EstimatorVariant::Baee, EstimatorVariant::BzBoundary],
        )
        .unwrap();
        assert!(matches!(
            table.cell(LossSpec::Symmetric, EstimatorVariant::Baee),
            Some(Cell::Failed(_))
        ));
    }

    #[test]
    fn empty_variant_list_gives_empty_table() {
        let s = TwoSampleSummary::new(16, 16, 1.0, 1.0, 10.0, 20.0).unwrap();
        let table = estimator_table(&s, Component::Sigma1, 2.0, &[LossSpec::Entropy], &[]).unwrap();
        assert_eq!(table.cells.len(), 1);
        assert!(table.cells[0].is_empty());
    }
}
