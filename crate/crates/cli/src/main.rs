use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fdaclust_cli::commands::{self, EvaluateInputs};
use fdaclust_cli::error::exit_code_for;
use fdaclust_cli::{CliError, CliResult, Context, PipelineConfig};
use fdaclust_core::cluster::Route;

#[derive(Parser)]
#[command(name = "fdaclust", version, about = "Functional-data clustering of facial indicator curves")]
struct Cli {
    /// Pipeline configuration (TOML); defaults apply without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for every written artifact.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an annotated default configuration to <out-dir>/fdaclust.toml.
    Init {
        #[arg(long)]
        force: bool,
    },
    /// Extract the configured indicator from a directory of raw measurement files.
    Ingest {
        #[arg(long)]
        raw_dir: PathBuf,
    },
    /// Fit B-spline coefficients to a cohort CSV.
    Smooth {
        #[arg(long)]
        cohort: PathBuf,
    },
    /// Functional PCA of smoothed curves; writes the model and scores.
    Fpca {
        #[arg(long)]
        functional: PathBuf,
    },
    /// Cluster one route's representation of the cohort.
    Cluster {
        #[arg(long)]
        route: Route,
        /// Cohort CSV (ts-*), functional JSON (basis-coeff, fpc-*) or scores CSV (fpc-*).
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare a clustering with clinician grades, or score a stored contingency table.
    Evaluate {
        #[arg(long, required_unless_present = "contingency")]
        clustering: Option<PathBuf>,
        #[arg(long, required_unless_present = "contingency")]
        labels: Option<PathBuf>,
        #[arg(long, required_unless_present = "contingency")]
        cohort: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["clustering", "labels", "cohort", "features"])]
        contingency: Option<PathBuf>,
    },
    /// Generate a synthetic cohort; a spec file (TOML) replaces the configured one.
    Synth {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Also write this many raw measurement files per grade under raw/.
        #[arg(long, default_value_t = 0)]
        raw_per_grade: usize,
    },
    /// Render an artifact (cohort, memberships, scores, FPCA model, report) as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Colour curves or scores by this clustering.
        #[arg(long)]
        clustering: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run every stage and write reports and charts.
    Pipeline,
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("FDACLUST_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("FDACLUST_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let ctx = Context::new(config, cli.out_dir, cli.quiet);
    match cli.command {
        Command::Init { force } => commands::cmd_init(&ctx, force).map(drop),
        Command::Ingest { raw_dir } => commands::cmd_ingest(&ctx, &raw_dir).map(drop),
        Command::Smooth { cohort } => commands::cmd_smooth(&ctx, &cohort).map(drop),
        Command::Fpca { functional } => commands::cmd_fpca(&ctx, &functional).map(drop),
        Command::Cluster { route, input } => commands::cmd_cluster(&ctx, route, &input).map(drop),
        Command::Evaluate {
            contingency: Some(table),
            ..
        } => commands::cmd_evaluate_table(&ctx, &table).map(drop),
        Command::Evaluate {
            clustering,
            labels,
            cohort,
            features,
            ..
        } => {
            let need = |p: Option<PathBuf>, flag: &str| p.ok_or_else(|| CliError::Usage(format!("--{flag} is required")));
            let (clustering, labels, cohort) = (need(clustering, "clustering")?, need(labels, "labels")?, need(cohort, "cohort")?);
            commands::cmd_evaluate(
                &ctx,
                EvaluateInputs {
                    clustering: &clustering,
                    labels: &labels,
                    cohort: &cohort,
                    features: features.as_deref(),
                },
            )
            .map(drop)
        }
        Command::Synth { spec, raw_per_grade } => commands::cmd_synth(&ctx, spec.as_deref(), raw_per_grade).map(drop),
        Command::Plot {
            input,
            clustering,
            output,
        } => commands::cmd_plot(&ctx, &input, clustering.as_deref(), output.as_deref()).map(drop),
        Command::Pipeline => {
            let out = commands::cmd_pipeline(&ctx)?;
            if !out.reports.is_empty() {
                print!("{}", fdaclust_core::eval::text_table(&out.reports));
            }
            Ok(())
        }
    }
}

fn fail(category: &str, message: &str) -> ExitCode {
    let one_line = message.lines().next().unwrap_or("").trim();
    eprintln!("error[{category}]: {one_line}");
    ExitCode::from(exit_code_for(category) as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.trim_start_matches("error: ");
            return fail("usage", msg);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.category(), &e.to_string()),
    }
}
