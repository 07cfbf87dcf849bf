//! The `stabcv` binary: run configured experiments, render synthetic
//! error heatmaps, and evaluate generalization bounds on finished runs.
//!
//! Exit codes: 0 on success, 2 for configuration or argument errors, 3
//! for data errors, 4 for numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stabcv_cli::{run_experiment, run_heatmap, run_heatmap_config, ExperimentConfig, Mode};
use stabcv_core::{
    generalization_bound, BoundInputs, CvKind, Error, LearnerKind, SelectionReport, SynthConfig,
};

#[derive(Parser)]
#[command(
    name = "stabcv",
    version,
    about = "Hyperparameter selection by stability-regularized cross-validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write its reports.
    Run(RunArgs),
    /// Render CV and test error surfaces for one synthetic instance.
    Heatmap(HeatmapArgs),
    /// Evaluate the generalization bound for a finished selection report.
    Bound(BoundArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a `key = value` experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured mode (kcv, nested, heatmap, or bound).
    #[arg(long)]
    mode: Option<String>,
    /// Override the configured learner (ridge, sparse_ridge, or cart).
    #[arg(long)]
    learner: Option<String>,
    /// Override the fold count.
    #[arg(long)]
    k: Option<usize>,
    /// Override the number of repeats.
    #[arg(long)]
    repeats: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the stability-weight grid (comma-separated values).
    #[arg(long = "lambda-grid")]
    lambda_grid: Option<String>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HeatmapArgs {
    /// Training rows of the synthetic instance.
    #[arg(long)]
    n: usize,
    /// Features of the synthetic instance.
    #[arg(long)]
    p: usize,
    /// True support size of the planted coefficients.
    #[arg(long = "tau-true")]
    tau_true: usize,
    /// Banded feature correlation in [0, 1).
    #[arg(long)]
    rho: f64,
    /// Signal-to-noise ratio (positive).
    #[arg(long)]
    nu: f64,
    /// Cross-validation flavor: loocv or fivefold.
    #[arg(long, default_value = "fivefold")]
    cv: String,
    /// Seed for the instance and the fold partition.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Test rows used for the test-error surface.
    #[arg(long = "n-test", default_value_t = SynthConfig::DEFAULT_N_TEST)]
    n_test: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    /// Path to a report.json written by `stabcv run`.
    report: PathBuf,
    /// Certified upper bound M on the pointwise loss; defaults to the
    /// report's largest observed loss (heuristic).
    #[arg(long = "M")]
    m_bound: Option<f64>,
    /// Failure probability in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

fn parse_lambda_grid(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("--lambda-grid: cannot parse '{s}'")))
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(mode) = &args.mode {
        cfg.mode = Mode::parse(mode)?;
    }
    if let Some(learner) = &args.learner {
        cfg.learner = Some(LearnerKind::parse(learner)?);
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(repeats) = args.repeats {
        cfg.repeats = repeats;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(grid) = &args.lambda_grid {
        cfg.lambda_grid = parse_lambda_grid(grid)?;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    cfg.validate()?;

    if cfg.mode == Mode::Heatmap {
        let result = run_heatmap_config(&cfg)?;
        eprintln!(
            "wrote {}x{} {} heatmaps to {}",
            result.taus.len(),
            result.gammas.len(),
            result.kind,
            cfg.output_dir.display()
        );
    } else {
        let record = run_experiment(&cfg)?;
        eprintln!(
            "wrote {} repeats (mean test MSE {:.6}) to {}",
            record.rows.len(),
            record.aggregate.mean_test_mse,
            cfg.output_dir.display()
        );
    }
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<(), Error> {
    let kind = CvKind::parse(&args.cv)?;
    let synth = SynthConfig {
        n: args.n,
        p: args.p,
        tau_true: args.tau_true,
        rho: args.rho,
        nu: args.nu,
        n_test: args.n_test,
        seed: args.seed,
    };
    let result = run_heatmap(&synth, kind, &args.out)?;
    eprintln!(
        "wrote {}x{} {} heatmaps to {}",
        result.taus.len(),
        result.gammas.len(),
        result.kind,
        args.out.display()
    );
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.report)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", args.report.display())))?;
    let report = SelectionReport::from_json(&text)?;

    let mut warnings = report.warnings.clone();
    let (m_bound, m_source) = match args.m_bound {
        Some(m) => (m, "given"),
        None => {
            warnings.push(format!(
                "no loss bound M was given; using the largest observed loss {} instead, \
                 so the bound is heuristic",
                report.max_observed_loss
            ));
            (report.max_observed_loss, "observed")
        }
    };
    let bound = generalization_bound(&BoundInputs {
        cv_error: report.estimate,
        mu_h: report.stability_at_star,
        m_bound,
        k: report.k,
        delta: args.delta,
    })?;

    let output = serde_json::json!({
        "schema": "stabcv-bound/1",
        "report": args.report.display().to_string(),
        "theta_star": report.theta_star,
        "cv_error": report.estimate,
        "stability": report.stability_at_star,
        "m_bound": m_bound,
        "m_bound_source": m_source,
        "k": report.k,
        "delta": args.delta,
        "bound": bound,
        "warnings": warnings,
    });
    let text = serde_json::to_string_pretty(&output)
        .map_err(|e| Error::Data(format!("bound serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

/// Map an error onto the documented exit classes, looking through
/// fold-fit wrappers at the underlying cause.
fn exit_code_for(error: &Error) -> u8 {
    let mut cause = error;
    while let Error::FoldFit { source, .. } = cause {
        cause = source;
    }
    match cause {
        Error::Data(_)
        | Error::MetricDomain(_)
        | Error::EmptyTrainingSet
        | Error::DimensionMismatch { .. } => 3,
        Error::Numerical(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Heatmap(args) => cmd_heatmap(args),
        Command::Bound(args) => cmd_bound(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
