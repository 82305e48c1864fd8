//! `maxstable`: simulate, fit and diagnose max-stable models from the
//! command line.

mod commands;
mod error;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::{CliResult, Failure};

#[derive(Parser, Debug)]
#[command(name = "maxstable", version, about = "Bayesian inference for multivariate max-stable distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a sample from a model or a named example law.
    Simulate(SimulateArgs),
    /// Sample the posterior and write the chain and a summary.
    Fit(FitArgs),
    /// Summarize a chain and, given the truth, compute distances to it.
    Diagnose(DiagnoseArgs),
    /// Run a consistency experiment over a grid of sample sizes.
    Experiment(ExperimentArgs),
    /// Render SVG charts from a report or summary.
    Plot(PlotArgs),
    /// Re-execute the run recorded in a manifest and check its outputs.
    Rerun(RerunArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Model JSON: {"angular": {...}, "margins": {...}}.
    #[arg(long, conflicts_with = "example")]
    pub model: Option<PathBuf>,
    /// exp-pareto, joe-b5-pareto or biv-exponential.
    #[arg(long)]
    pub example: Option<String>,
    /// Tail indices for the example generators, e.g. "1,2".
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// Joe copula parameter.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// simple, frechet, weibull or gumbel.
    #[arg(long, default_value = "simple")]
    pub family: String,
    /// Prior JSON: {"degree": {...}, "margins": {...}, "eb": {...}}.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Treat the data as raw and fit block maxima of this size, with
    /// empirical-Bayes centred margin priors.
    #[arg(long)]
    pub eb: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long)]
    pub trans_prob: Option<f64>,
    #[arg(long)]
    pub concentration: Option<f64>,
    #[arg(long, default_value = "fit")]
    pub out: PathBuf,
    /// Continue each chain from the last line of its file.
    #[arg(long)]
    pub resume: bool,
    /// Stop after this iteration; resumable later.
    #[arg(long, hide = true)]
    pub until: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// Chain files, or fit output directories.
    #[arg(long, required = true, num_args = 1..)]
    pub chain: Vec<PathBuf>,
    /// Model JSON of the data-generating law.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "diagnose.json")]
    pub out: PathBuf,
    /// Directory for SVG charts.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "experiment")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long, conflicts_with = "summary")]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value = "plots")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Parses and executes one invocation; `args` excludes the program name.
pub fn dispatch(args: Vec<String>) -> CliResult<()> {
    let cli = match Cli::try_parse_from(std::iter::once("maxstable".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(Failure::config(e.to_string().trim_end().to_string()));
        }
    };
    // arguments as recorded in manifests: --resume only changes how the
    // result is reached, not the result
    let canonical: Vec<String> = args.into_iter().filter(|a| a != "--resume").collect();
    match cli.command {
        Command::Simulate(a) => commands::simulate::run(&a, &canonical),
        Command::Fit(a) => commands::fit::run(&a, &canonical),
        Command::Diagnose(a) => commands::diagnose::run(&a, &canonical),
        Command::Experiment(a) => commands::experiment::run(&a, &canonical),
        Command::Plot(a) => commands::plot::run(&a),
        Command::Rerun(a) => commands::rerun::run(&a),
    }
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("MAXSTABLE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::config(format!("MAXSTABLE_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = configure_threads().and_then(|_| dispatch(std::env::args().skip(1).collect()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code as u8)
        }
    }
}
