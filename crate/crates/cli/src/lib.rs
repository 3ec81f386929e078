//! Command implementations behind the `gmfuse` binary.

pub mod config;
pub mod scorefile;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gmfuse::ensemble::{fuse, Combiner, Prediction, TieBreaker, TiePolicy};
use gmfuse::eval::{format_summary, run_experiment, write_reports};
use gmfuse::props::{run_suite, PropsConfig};
use gmfuse::seed::derive_seed;
use gmfuse::Error;

use scorefile::ScoreFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_PROPERTY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gmfuse",
    version,
    about = "Classifier-ensemble fusion with GM functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a cross-validated experiment described by a config file.
    Run(RunArgs),
    /// Fuse one score matrix and print the weight trace and decision.
    Combine(CombineArgs),
    /// Run the algebraic property suite.
    Props(PropsArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file (`key = value` lines).
    #[arg(value_name = "CONFIG", required_unless_present = "config")]
    pub config_file: Option<PathBuf>,
    #[arg(long, conflicts_with = "config_file")]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to the config's `output_dir`, then `results`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate cells one at a time.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// Score file: one comma-separated row per member.
    #[arg(value_name = "SCORES")]
    pub scores: PathBuf,
    #[arg(long, default_value = "h_arith")]
    pub combiner: String,
    #[arg(long, default_value = "lowest-index")]
    pub tie_policy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rescale rows that do not sum to one.
    #[arg(long)]
    pub normalize: bool,
    /// Also write the trace to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    /// Random inputs per property.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Arity(_) | Error::Domain(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

/// Runs a parsed command; `Ok` carries the text for stdout.
pub fn execute(command: &Command) -> Result<String, Failure> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Combine(args) => cmd_combine(args),
        Command::Props(args) => cmd_props(args),
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<String, Failure> {
    let path = args
        .config
        .as_ref()
        .or(args.config_file.as_ref())
        .ok_or_else(|| usage("no config file given".into()))?;
    let mut config = config::load_config(path)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.serial {
        config.parallel = false;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let table = run_experiment(&config)?;
    let files = write_reports(&table, &out, config.alpha, config.timing)?;
    let mut text = format_summary(&table);
    let _ = writeln!(text, "results: {}", files.results.display());
    let _ = writeln!(text, "stats:   {}", files.stats.display());
    Ok(text)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

/// Worked-example style trace of one fusion.
pub fn format_trace(scores: &ScoreFile, combiner: &Combiner, p: &Prediction) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "combiner: {combiner} ({} members, {} classes)",
        scores.matrix.n_members(),
        scores.matrix.n_classes()
    );
    if let Some(calcs) = &p.class_weights {
        for (j, c) in calcs.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}: alpha = {:.6}  d = {:.6}  w = {}",
                scores.class_name(j),
                c.referential,
                c.distance_sum,
                fmt_vec(c.weights.as_slice())
            );
        }
    }
    let _ = writeln!(out, "Value = {}", fmt_vec(&p.fused_scores));
    let _ = writeln!(
        out,
        "decision: {} (index {})",
        scores.class_name(p.class_index),
        p.class_index
    );
    out
}

pub fn cmd_combine(args: &CombineArgs) -> Result<String, Failure> {
    let combiner: Combiner = args.combiner.parse()?;
    let policy: TiePolicy = args.tie_policy.parse()?;
    let scores = scorefile::load_scores(&args.scores, args.normalize)?;
    let mut ties = TieBreaker::new(policy, derive_seed(args.seed, "combine", &[]));
    let prediction = fuse(&scores.matrix, &combiner, &mut ties);
    let text = format_trace(&scores, &combiner, &prediction);
    if let Some(out) = &args.out {
        write_out(out, &text)?;
    }
    Ok(text)
}

pub fn cmd_props(args: &PropsArgs) -> Result<String, Failure> {
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1".into()));
    }
    let report = run_suite(&PropsConfig::new(args.samples, args.seed));
    let mut text = report.to_string();
    text.push('\n');
    if let Some(out) = &args.out {
        write_out(out, &text)?;
    }
    if report.passed() {
        Ok(text)
    } else {
        Err(Failure {
            code: EXIT_PROPERTY,
            message: text,
        })
    }
}
