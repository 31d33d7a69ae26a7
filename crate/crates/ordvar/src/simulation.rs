//! Monte Carlo risk and relative-risk-improvement curves.
//!
//! Risks depend on the two scales only through the ratio η = σ₁/σ₂, so each
//! grid point fixes σ₂ = 1 and σ₁ = η while the means stay at their
//! configured absolute values. All estimators of a grid point are evaluated
//! on the same replicate draws (common random numbers) and every grid point
//! owns a substream derived from (seed, η index), which makes the output
//! independent of scheduling and worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::bz_bayes::{gb_estimate, phi_star, psi_star, BoundaryFunctionSpec};
use crate::constants::{stein_constants, ConstantsBundle};
use crate::error::{Error, Result};
use crate::estimators::{
    derived_statistics, stein_with_constants, umvue, EstimatorVariant, Target, TwoSampleSummary,
};
use crate::losses::LossSpec;
use crate::numerics::{sample_gamma, sample_normal, RandomStream};
use crate::Component;

/// Model parameters of the two normal populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// One simulation configuration, mirroring the JSON schema of the
/// `simulate` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub p1: u32,
    pub p2: u32,
    pub mu1: f64,
    pub mu2: f64,
    pub loss: LossSpec,
    pub k: f64,
    pub target: Component,
    /// Estimators to evaluate on the shared replicates. `GenBayes` is valid
    /// here but evaluates nested quadrature on every replicate; `BzBoundary`
    /// produces the same values orders of magnitude faster.
    pub variants: Vec<EstimatorVariant>,
    #[serde(default = "default_eta_grid")]
    pub eta_grid: Vec<f64>,
    /// Replicates per grid point. Standard errors assume at least ~1000.
    #[serde(default = "default_n_rep")]
    pub n_rep: u32,
    pub seed: u64,
}

fn default_n_rep() -> u32 {
    60_000
}

fn default_eta_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.05).collect()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p1 < 2 || self.p2 < 2 {
            return Err(Error::domain(format!(
                "sample sizes must be at least 2, got p1 = {}, p2 = {}",
                self.p1, self.p2
            )));
        }
        if !(self.k > 0.0) {
            return Err(Error::domain(format!(
                "power k must be positive, got {}",
                self.k
            )));
        }
        if self.eta_grid.is_empty() {
            return Err(Error::domain("eta_grid must be nonempty".to_string()));
        }
        if self.eta_grid.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::domain("eta values must lie in (0, 1]".to_string()));
        }
        if self.n_rep == 0 {
            return Err(Error::domain("n_rep must be at least 1".to_string()));
        }
        Ok(())
    }

    fn target(&self) -> Result<Target> {
        Target::new(self.target, self.k)
    }
}

/// Monte Carlo risk of one estimator at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct RiskPoint {
    pub eta: f64,
    pub risk: f64,
    pub stderr: f64,
    pub n: u32,
}

/// One grid point of an RRI curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub eta: f64,
    pub risk: f64,
    pub risk_se: f64,
    pub rri_percent: f64,
    pub rri_se_percent: f64,
    pub n: u32,
}

/// Relative risk improvement of one variant over the BAEE, per η.
#[derive(Debug, Clone)]
pub struct RriCurve {
    pub config: SimConfig,
    pub variant: EstimatorVariant,
    pub points: Vec<CurvePoint>,
}

/// One draw of the sufficient statistics under the model.
pub fn sample_model(
    params: &ModelParams,
    p1: u32,
    p2: u32,
    stream: &mut RandomStream,
) -> Result<TwoSampleSummary> {
    if !(params.sigma1 > 0.0) || !(params.sigma2 > 0.0) {
        return Err(Error::domain(format!(
            "scales must be positive, got sigma1 = {}, sigma2 = {}",
            params.sigma1, params.sigma2
        )));
    }
    let mean1 = sample_normal(params.mu1, params.sigma1 / (p1 as f64).sqrt(), stream)?;
    let ss1 = params.sigma1 * params.sigma1 * sample_gamma((p1 as f64 - 1.0) / 2.0, 2.0, stream)?;
    let mean2 = sample_normal(params.mu2, params.sigma2 / (p2 as f64).sqrt(), stream)?;
    let ss2 = params.sigma2 * params.sigma2 * sample_gamma((p2 as f64 - 1.0) / 2.0, 2.0, stream)?;
    TwoSampleSummary::new(p1, p2, mean1, mean2, ss1, ss2)
}

/// Everything constant across replicates of one grid cell: solved constants,
/// the boundary spec where needed, and the unbiased coefficient.
struct CellEvaluator {
    target: Target,
    loss: LossSpec,
    bundle: ConstantsBundle,
    boundary: Option<BoundaryFunctionSpec>,
}

impl CellEvaluator {
    fn new(
        loss: LossSpec,
        target: Target,
        p1: u32,
        p2: u32,
        variants: &[EstimatorVariant],
    ) -> Result<Self> {
        let bundle = stein_constants(loss, p1, p2, target.k)?;
        let boundary = if variants.contains(&EstimatorVariant::BzBoundary) {
            Some(BoundaryFunctionSpec::new(
                target.component,
                loss,
                p1,
                p2,
                target.k,
            )?)
        } else {
            None
        };
        Ok(CellEvaluator {
            target,
            loss,
            bundle,
            boundary,
        })
    }

    fn baseline_coeff(&self) -> f64 {
        match self.target.component {
            Component::Sigma1 => self.bundle.c01,
            Component::Sigma2 => self.bundle.c02,
        }
    }

    fn evaluate(&self, s: &TwoSampleSummary, variant: EstimatorVariant) -> Result<f64> {
        let half_k = 0.5 * self.target.k;
        let ss = match self.target.component {
            Component::Sigma1 => s.ss1(),
            Component::Sigma2 => s.ss2(),
        };
        match variant {
            EstimatorVariant::Baee => Ok(self.baseline_coeff() * ss.powf(half_k)),
            EstimatorVariant::Umvue => umvue(s, self.target),
            EstimatorVariant::SteinPlain
            | EstimatorVariant::SteinOneMean
            | EstimatorVariant::SteinTwoMeans
            | EstimatorVariant::SteinMeanDiff => {
                stein_with_constants(s, self.target, variant, &self.bundle)
            }
            EstimatorVariant::BzBoundary => {
                let spec = self.boundary.as_ref().expect("boundary spec prepared");
                let d = derived_statistics(s);
                match self.target.component {
                    Component::Sigma1 => Ok(phi_star(spec, d.u)? * ss.powf(half_k)),
                    Component::Sigma2 => Ok(psi_star(spec, d.w)? * ss.powf(half_k)),
                }
            }
            EstimatorVariant::GenBayes => gb_estimate(s, self.target, self.loss),
        }
    }
}

/// Monte Carlo risk E[L(δ/σᵢᵏ)] of one estimator variant over `n` replicates.
#[allow(clippy::too_many_arguments)]
pub fn mc_risk(
    variant: EstimatorVariant,
    params: &ModelParams,
    t: Target,
    loss: LossSpec,
    p1: u32,
    p2: u32,
    n: u32,
    mut stream: RandomStream,
) -> Result<RiskPoint> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1".to_string()));
    }
    let evaluator = CellEvaluator::new(loss, t, p1, p2, &[variant])?;
    let theta = match t.component {
        Component::Sigma1 => params.sigma1.powf(t.k),
        Component::Sigma2 => params.sigma2.powf(t.k),
    };
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for r in 0..n {
        let draw = (|| -> Result<f64> {
            let s = sample_model(params, p1, p2, &mut stream)?;
            let est = evaluator.evaluate(&s, variant)?;
            loss.value(est / theta)
        })()
        .map_err(|e| Error::in_replicate(r as u64, e))?;
        sum += draw;
        sumsq += draw * draw;
    }
    let nf = n as f64;
    let risk = sum / nf;
    let stderr = if n > 1 {
        ((sumsq - nf * risk * risk).max(0.0) / (nf - 1.0)).sqrt() / nf.sqrt()
    } else {
        0.0
    };
    Ok(RiskPoint {
        eta: params.sigma1 / params.sigma2,
        risk,
        stderr,
        n,
    })
}

/// Paired accumulation of one variant's losses against the baseline losses.
#[derive(Clone, Copy, Default)]
struct PairedSums {
    l: f64,
    l2: f64,
    l0: f64,
    l02: f64,
    ll0: f64,
}

/// All variants of one configuration at one η, sharing replicates.
fn simulate_cell(config: &SimConfig, eta_idx: usize) -> Result<Vec<CurvePoint>> {
    let eta = config.eta_grid[eta_idx];
    let target = config.target()?;
    let evaluator =
        CellEvaluator::new(config.loss, target, config.p1, config.p2, &config.variants)?;
    let params = ModelParams {
        mu1: config.mu1,
        mu2: config.mu2,
        sigma1: eta,
        sigma2: 1.0,
    };
    let theta = match target.component {
        Component::Sigma1 => eta.powf(config.k),
        Component::Sigma2 => 1.0,
    };
    let mut stream = RandomStream::new(config.seed, eta_idx as u64);
    let mut sums = vec![PairedSums::default(); config.variants.len()];
    for r in 0..config.n_rep {
        (|| -> Result<()> {
            let s = sample_model(&params, config.p1, config.p2, &mut stream)?;
            let baseline = evaluator.evaluate(&s, EstimatorVariant::Baee)?;
            let l0 = config.loss.value(baseline / theta)?;
            for (variant, acc) in config.variants.iter().zip(&mut sums) {
                let est = evaluator.evaluate(&s, *variant)?;
                let l = config.loss.value(est / theta)?;
                acc.l += l;
                acc.l2 += l * l;
                acc.l0 += l0;
                acc.l02 += l0 * l0;
                acc.ll0 += l * l0;
            }
            Ok(())
        })()
        .map_err(|e| Error::in_replicate(r as u64, e))?;
    }
    let nf = config.n_rep as f64;
    Ok(sums
        .iter()
        .map(|acc| {
            let risk = acc.l / nf;
            let risk0 = acc.l0 / nf;
            let var_l = ((acc.l2 - nf * risk * risk) / (nf - 1.0).max(1.0)).max(0.0);
            let var_l0 = ((acc.l02 - nf * risk0 * risk0) / (nf - 1.0).max(1.0)).max(0.0);
            let cov = (acc.ll0 - nf * risk * risk0) / (nf - 1.0).max(1.0);
            let risk_se = if config.n_rep > 1 {
                (var_l / nf).sqrt()
            } else {
                0.0
            };
            let rri = 100.0 * (risk0 - risk) / risk0;
            // Delta method on the paired means (risk, risk0).
            let ratio = risk / risk0;
            let var_rri = (100.0 / risk0)
                * (100.0 / risk0)
                * (var_l - 2.0 * ratio * cov + ratio * ratio * var_l0)
                / nf;
            let rri_se = if config.n_rep > 1 {
                var_rri.max(0.0).sqrt()
            } else {
                0.0
            };
            CurvePoint {
                eta,
                risk,
                risk_se,
                rri_percent: rri,
                rri_se_percent: rri_se,
                n: config.n_rep,
            }
        })
        .collect())
}

/// RRI curves of every variant in the configuration, one point per η.
pub fn rri_curve(config: &SimConfig) -> Result<Vec<RriCurve>> {
    config.validate()?;
    let cells: Vec<Vec<CurvePoint>> = (0..config.eta_grid.len())
        .map(|idx| simulate_cell(config, idx))
        .collect::<Result<_>>()?;
    Ok(assemble_curves(config, cells))
}

fn assemble_curves(config: &SimConfig, cells: Vec<Vec<CurvePoint>>) -> Vec<RriCurve> {
    config
        .variants
        .iter()
        .enumerate()
        .map(|(vi, &variant)| RriCurve {
            config: config.clone(),
            variant,
            points: cells.iter().map(|cell| cell[vi]).collect(),
        })
        .collect()
}

/// Result of one configuration inside a grid run.
#[derive(Debug)]
pub enum GridEntry {
    Curves {
        config_id: usize,
        curves: Vec<RriCurve>,
    },
    Failed {
        config_id: usize,
        error: String,
    },
}

/// Runs many configurations with the given worker count. Grid cells
/// (configuration × η) execute concurrently; output is deterministic and
/// identical for every `parallelism` value because each cell derives its
/// random stream from (seed, η index) alone.
pub fn run_grid(configs: &[SimConfig], parallelism: usize) -> Result<Vec<GridEntry>> {
    if parallelism == 0 {
        return Err(Error::domain("parallelism must be at least 1".to_string()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::domain(format!("could not build thread pool: {e}")))?;

    // Validate up front so one bad configuration cannot cost a full run.
    let validity: Vec<Result<()>> = configs.iter().map(SimConfig::validate).collect();
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (cid, config) in configs.iter().enumerate() {
        if validity[cid].is_ok() {
            for idx in 0..config.eta_grid.len() {
                cells.push((cid, idx));
            }
        }
    }
    type CellResult = ((usize, usize), Result<Vec<CurvePoint>>);
    let cell_results: Vec<CellResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(cid, idx)| ((cid, idx), simulate_cell(&configs[cid], idx)))
            .collect()
    });

    let mut entries = Vec::with_capacity(configs.len());
    for (cid, config) in configs.iter().enumerate() {
        if let Err(e) = &validity[cid] {
            entries.push(GridEntry::Failed {
                config_id: cid,
                error: e.to_string(),
            });
            continue;
        }
        let mut per_eta: Vec<Option<Vec<CurvePoint>>> = vec![None; config.eta_grid.len()];
        let mut failure: Option<String> = None;
        for ((c, idx), res) in &cell_results {
            if *c != cid {
                continue;
            }
            match res {
                Ok(points) => per_eta[*idx] = Some(points.clone()),
                Err(e) => {
                    let msg = format!("eta index {idx}: {e}");
                    if failure.is_none() {
                        failure = Some(msg);
                    }
                }
            }
        }
        match failure {
            Some(error) => entries.push(GridEntry::Failed {
                config_id: cid,
                error,
            }),
            None => {
                let cells: Vec<Vec<CurvePoint>> = per_eta
                    .into_iter()
                    .map(|c| c.expect("cell computed"))
                    .collect();
                entries.push(GridEntry::Curves {
                    config_id: cid,
                    curves: assemble_curves(config, cells),
                });
            }
        }
    }
    Ok(entries)
}

/// Writes grid results as CSV: a comment line with version and seeds, a
/// header row, then one row per (config, variant, η).
pub fn write_grid_csv<W: Write + ?Sized>(
    entries: &[GridEntry],
    version: &str,
    out: &mut W,
) -> std::io::Result<()> {
    let seeds: Vec<String> = entries
        .iter()
        .filter_map(|e| match e {
            GridEntry::Curves { curves, .. } => curves.first().map(|c| c.config.seed.to_string()),
            GridEntry::Failed { .. } => None,
        })
        .collect();
    writeln!(out, "# ordvar {version} seeds={}", seeds.join(","))?;
    writeln!(
        out,
        "config_id,variant,eta,risk,risk_se,rri_percent,rri_se_percent,n"
    )?;
    for entry in entries {
        match entry {
            GridEntry::Failed { config_id, error } => {
                writeln!(out, "# config {config_id} failed: {error}")?;
            }
            GridEntry::Curves { config_id, curves } => {
                for curve in curves {
                    for p in &curve.points {
                        writeln!(
                            out,
                            "{},{},{},{:.10e},{:.10e},{:.10e},{:.10e},{}",
                            config_id,
                            curve.variant,
                            p.eta,
                            p.risk,
                            p.risk_se,
                            p.rri_percent,
                            p.rri_se_percent,
                            p.n
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}
