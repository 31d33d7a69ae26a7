//! `ordvar` — estimators of powers of ordered normal standard deviations.

// `!(x > 0.0)` instead of `x <= 0.0`: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ordvar::analysis::{estimator_table, ks_normal_test, load_series, summarize, KS_NOTE};
use ordvar::bz_bayes::{check_ierd_conditions, phi_star, psi_star, BoundaryFunctionSpec};
use ordvar::constants::{baee_constant, stein_constants};
use ordvar::estimators::{estimate, EstimatorVariant, Target};
use ordvar::simulation::{run_grid, write_grid_csv, SimConfig};
use ordvar::{Component, LossSpec, TwoSampleSummary};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "ordvar", version, about = "Improved estimators of powers of ordered normal standard deviations", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the BAEE and shrinkage constants for one problem
    Constants(ConstantsArgs),
    /// Evaluate one estimator on a summary file
    Estimate(EstimateArgs),
    /// Evaluate a boundary coefficient at a point or over a grid
    Boundary(BoundaryArgs),
    /// Run Monte Carlo risk-comparison curves from a JSON configuration
    Simulate(SimulateArgs),
    /// Load two data files, test normality, and tabulate the estimators
    Analyze(AnalyzeArgs),
    /// Check a candidate coefficient against the improved-class conditions
    VerifyIerd(VerifyIerdArgs),
}

fn parse_loss(s: &str) -> Result<LossSpec, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_component(s: &str) -> Result<Component, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_variant(s: &str) -> Result<EstimatorVariant, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Args)]
struct ConstantsArgs {
    /// Loss: quadratic, entropy, symmetric, or linex:a=<real>
    #[arg(long, value_parser = parse_loss)]
    loss: LossSpec,
    #[arg(long)]
    p1: u32,
    #[arg(long)]
    p2: u32,
    #[arg(long)]
    k: f64,
}

#[derive(Args)]
struct EstimateArgs {
    /// JSON file with keys p1, p2, mean1, mean2, ss1, ss2
    #[arg(long)]
    input: PathBuf,
    /// sigma1 or sigma2
    #[arg(long, value_parser = parse_component)]
    target: Component,
    #[arg(long)]
    k: f64,
    #[arg(long, value_parser = parse_loss)]
    loss: LossSpec,
    /// baee, umvue, stein-plain, stein-one-mean, stein-two-means,
    /// stein-mean-diff, bz, or gb
    #[arg(long, value_parser = parse_variant)]
    variant: EstimatorVariant,
}

#[derive(Args)]
struct BoundaryArgs {
    /// 1 (smaller scale) or 2 (larger scale)
    #[arg(long, value_parser = parse_component)]
    component: Component,
    #[arg(long, value_parser = parse_loss)]
    loss: LossSpec,
    #[arg(long)]
    p1: u32,
    #[arg(long)]
    p2: u32,
    #[arg(long)]
    k: f64,
    /// Evaluate at a single argument (u for component 1, w for component 2)
    #[arg(long, conflicts_with = "table")]
    arg: Option<f64>,
    /// Write a CSV of (arg, value) over a grid to this file
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    grid_start: f64,
    #[arg(long, default_value_t = 100.0)]
    grid_end: f64,
    #[arg(long, default_value_t = 60)]
    grid_points: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file holding one configuration object or an array of them
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path ("-" for stdout)
    #[arg(long)]
    out: String,
    /// Worker threads
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    data1: PathBuf,
    #[arg(long)]
    data2: PathBuf,
    #[arg(long)]
    k: f64,
    /// Comma-separated losses, e.g. quadratic,entropy,symmetric,linex:a=-2
    #[arg(long, value_delimiter = ',', value_parser = parse_loss)]
    losses: Vec<LossSpec>,
    /// Output CSV for the estimator tables
    #[arg(long)]
    out: String,
    /// Comma-separated variants to tabulate
    #[arg(long, value_delimiter = ',', value_parser = parse_variant,
          default_values_t = vec![
              EstimatorVariant::Baee,
              EstimatorVariant::SteinPlain,
              EstimatorVariant::SteinOneMean,
              EstimatorVariant::SteinTwoMeans,
              EstimatorVariant::BzBoundary,
          ])]
    variants: Vec<EstimatorVariant>,
    /// Also write the two-sample summary as JSON
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyIerdArgs {
    #[arg(long, value_parser = parse_component)]
    component: Component,
    #[arg(long, value_parser = parse_loss)]
    loss: LossSpec,
    #[arg(long)]
    p1: u32,
    #[arg(long)]
    p2: u32,
    #[arg(long)]
    k: f64,
    /// boundary, baee, stein, or a CSV file of (arg, value) pairs
    #[arg(long, default_value = "boundary")]
    candidate: String,
    #[arg(long, default_value_t = 0.01)]
    grid_start: f64,
    #[arg(long, default_value_t = 100.0)]
    grid_end: f64,
    #[arg(long, default_value_t = 60)]
    grid_points: usize,
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (e.g. `ordvar ... | head`)
    // instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Constants(args) => cmd_constants(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Boundary(args) => cmd_boundary(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::VerifyIerd(args) => cmd_verify_ierd(args),
    }
}

fn cmd_constants(args: ConstantsArgs) -> Result<(), Box<dyn std::error::Error>> {
    let bundle = stein_constants(args.loss, args.p1, args.p2, args.k)?;
    println!(
        "loss={} p1={} p2={} k={}",
        args.loss, args.p1, args.p2, args.k
    );
    println!("c01={:.10e}", bundle.c01);
    println!("c02={:.10e}", bundle.c02);
    println!("alpha1={:.10e}", bundle.alpha1);
    println!("alpha2={:.10e}", bundle.alpha2);
    println!("alpha3={:.10e}", bundle.alpha3);
    println!("alpha4={:.10e}", bundle.alpha4);
    println!("df1={}", bundle.df1);
    println!("df2={}", bundle.df2);
    println!("df3={}", bundle.df3);
    println!("df4={}", bundle.df4);
    println!("{}", serde_json::to_string(&bundle)?);
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(&args.input)?;
    let summary: TwoSampleSummary = serde_json::from_str(&text)?;
    let target = Target::new(args.target, args.k)?;
    let value = estimate(&summary, target, args.loss, args.variant)?;
    println!("{value:.10e}");
    Ok(())
}

fn cmd_boundary(args: BoundaryArgs) -> Result<(), Box<dyn std::error::Error>> {
    let spec = BoundaryFunctionSpec::new(args.component, args.loss, args.p1, args.p2, args.k)?;
    let eval = |x: f64| -> ordvar::Result<f64> {
        match args.component {
            Component::Sigma1 => phi_star(&spec, x),
            Component::Sigma2 => psi_star(&spec, x),
        }
    };
    let linex_note = matches!(args.loss, LossSpec::Linex { .. }).then_some(
        "note: linex boundary integrals use the q-exponent (p2-3)/2 for component 1 \
         and (p1-3)/2 for component 2, matching the other losses",
    );
    if let Some(x) = args.arg {
        if let Some(note) = linex_note {
            eprintln!("{note}");
        }
        println!("{:.10e}", eval(x)?);
        return Ok(());
    }
    let table = args
        .table
        .as_deref()
        .ok_or("one of --arg or --table is required")?;
    if !(args.grid_start > 0.0) || args.grid_end <= args.grid_start || args.grid_points < 2 {
        return Err("grid must satisfy 0 < start < end with at least 2 points".into());
    }
    let mut out = BufWriter::new(File::create(table)?);
    writeln!(out, "# ordvar {VERSION}")?;
    if let Some(note) = linex_note {
        writeln!(out, "# {note}")?;
    }
    writeln!(out, "arg,value")?;
    let (ln_lo, ln_hi) = (args.grid_start.ln(), args.grid_end.ln());
    for i in 0..args.grid_points {
        let f = i as f64 / (args.grid_points - 1) as f64;
        let x = (ln_lo + f * (ln_hi - ln_lo)).exp();
        writeln!(out, "{x:.10e},{:.10e}", eval(x)?)?;
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut configs: Vec<SimConfig> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text)?
    } else {
        vec![serde_json::from_str(&text)?]
    };
    if let Ok(seed_text) = std::env::var("ORDVAR_SEED") {
        let seed: u64 = seed_text
            .parse()
            .map_err(|_| format!("ORDVAR_SEED must be an unsigned integer, got `{seed_text}`"))?;
        for config in &mut configs {
            config.seed = seed;
        }
    }
    let jobs = if args.jobs == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        args.jobs
    };
    let entries = run_grid(&configs, jobs)?;
    write_csv_to(&args.out, |out| write_grid_csv(&entries, VERSION, out))?;
    Ok(())
}

fn write_csv_to<F>(dest: &str, write: F) -> std::io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    if dest == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        write(&mut lock)
    } else {
        let mut out = BufWriter::new(File::create(Path::new(dest))?);
        write(&mut out)
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Box<dyn std::error::Error>> {
    if args.losses.is_empty() {
        return Err("at least one loss is required".into());
    }
    let s1 = load_series(&args.data1)?;
    let s2 = load_series(&args.data2)?;
    let summary = summarize(&s1, &s2)?;
    println!(
        "data1: label={} n={} mean={:.10e} ss={:.10e}",
        s1.label,
        s1.values.len(),
        summary.mean1(),
        summary.ss1()
    );
    println!(
        "data2: label={} n={} mean={:.10e} ss={:.10e}",
        s2.label,
        s2.values.len(),
        summary.mean2(),
        summary.ss2()
    );
    for (name, series) in [("data1", &s1), ("data2", &s2)] {
        let ks = ks_normal_test(series)?;
        println!(
            "ks {name}: statistic={:.10e} p_value={:.10e} n={}",
            ks.statistic, ks.p_value, ks.n
        );
    }
    println!("# note: {KS_NOTE}");
    if let Some(path) = &args.summary_out {
        std::fs::write(path, serde_json::to_string_pretty(&summary)?)?;
        println!("summary written to {}", path.display());
    }
    write_csv_to(&args.out, |out| {
        for component in [Component::Sigma1, Component::Sigma2] {
            let table = estimator_table(&summary, component, args.k, &args.losses, &args.variants)
                .map_err(std::io::Error::other)?;
            table.write_csv(VERSION, out)?;
        }
        Ok(())
    })?;
    println!("tables written to {}", args.out);
    Ok(())
}

fn cmd_verify_ierd(args: VerifyIerdArgs) -> Result<(), Box<dyn std::error::Error>> {
    let spec = BoundaryFunctionSpec::new(args.component, args.loss, args.p1, args.p2, args.k)?;
    let boundary = |x: f64| -> ordvar::Result<f64> {
        match args.component {
            Component::Sigma1 => phi_star(&spec, x),
            Component::Sigma2 => psi_star(&spec, x),
        }
    };

    let (grid, values): (Vec<f64>, Vec<f64>) = match args.candidate.as_str() {
        "boundary" => {
            let grid = log_grid(args.grid_start, args.grid_end, args.grid_points)?;
            let values = grid
                .iter()
                .map(|&x| boundary(x))
                .collect::<ordvar::Result<_>>()?;
            (grid, values)
        }
        "baee" => {
            let p = match args.component {
                Component::Sigma1 => args.p1,
                Component::Sigma2 => args.p2,
            };
            let c0 = baee_constant(args.loss, p, args.k)?;
            let grid = log_grid(args.grid_start, args.grid_end, args.grid_points)?;
            let values = vec![c0; grid.len()];
            (grid, values)
        }
        "stein" => {
            let bundle = stein_constants(args.loss, args.p1, args.p2, args.k)?;
            let grid = log_grid(args.grid_start, args.grid_end, args.grid_points)?;
            let values = grid
                .iter()
                .map(|&x| {
                    let bound = bundle.alpha1 * (1.0 + x).powf(0.5 * args.k);
                    match args.component {
                        Component::Sigma1 => bundle.c01.min(bound),
                        Component::Sigma2 => bundle.c02.max(bound),
                    }
                })
                .collect();
            (grid, values)
        }
        path => read_candidate_file(Path::new(path))?,
    };

    let report = check_ierd_conditions(
        |x| {
            let idx = grid
                .iter()
                .position(|&g| g == x)
                .expect("checker only evaluates grid points");
            values[idx]
        },
        &spec,
        &grid,
    )?;

    let fmt_check = |name: &str, check: &ordvar::bz_bayes::ConditionCheck| {
        if check.passed {
            println!("{name}: PASS");
        } else {
            println!(
                "{name}: FAIL (worst violation {:.10e} at arg {:.10e})",
                check.worst_violation, check.worst_arg
            );
        }
    };
    fmt_check("monotone", &report.monotone);
    fmt_check("limit", &report.limit);
    fmt_check("bound", &report.boundary_bound);
    for note in &report.notes {
        println!("# note: {note}");
    }
    println!(
        "result: {}",
        if report.all_passed() { "PASS" } else { "FAIL" }
    );
    Ok(())
}

fn log_grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    if !(start > 0.0) || end <= start || points < 2 {
        return Err("grid must satisfy 0 < start < end with at least 2 points".into());
    }
    let (ln_lo, ln_hi) = (start.ln(), end.ln());
    Ok((0..points)
        .map(|i| (ln_lo + i as f64 / (points - 1) as f64 * (ln_hi - ln_lo)).exp())
        .collect())
}

fn read_candidate_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("arg,") {
            continue;
        }
        let mut parts = trimmed.split(',');
        let parse = |s: Option<&str>| -> Result<f64, Box<dyn std::error::Error>> {
            s.ok_or_else(|| format!("line {}: expected `arg,value`", idx + 1))?
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("line {}: cannot parse number", idx + 1).into())
        };
        grid.push(parse(parts.next())?);
        values.push(parse(parts.next())?);
    }
    if grid.is_empty() {
        return Err(format!("{} contains no candidate points", path.display()).into());
    }
    Ok((grid, values))
}
