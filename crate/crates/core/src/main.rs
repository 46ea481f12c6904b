use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use topostat::harness::{self, ExperimentConfig, RawConfig};
use topostat::{Error, Result};

/// Topological statistics of Gaussian random fields: sublevel-set
/// persistence, critical-point censuses and landscape classification.
#[derive(Debug, Parser)]
#[command(name = "topostat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    settings: Settings,

    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

/// Config keys; each flag overrides the key of the same name.
#[derive(Debug, Args)]
struct Settings {
    /// TOML config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master random seed (required).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Field size, e.g. 32x32.
    #[arg(long, global = true, value_name = "RxC")]
    grid: Option<String>,
    /// Landscape grid intervals N.
    #[arg(long, global = true, value_name = "N")]
    points: Option<usize>,
    /// Landscape depth K.
    #[arg(long, global = true, value_name = "K")]
    depth: Option<usize>,
    /// Samples per class for both training and test.
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,
    /// Training samples per class.
    #[arg(long, global = true, value_name = "N")]
    train: Option<usize>,
    /// Test samples per class.
    #[arg(long, global = true, value_name = "N")]
    test: Option<usize>,
    /// SVM cost C.
    #[arg(long, global = true)]
    cost: Option<f64>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, value_name = "T")]
    threads: Option<usize>,
    /// Matérn rows, e.g. "5:1,10:1,5:2".
    #[arg(long, global = true, value_name = "ETA:NU,...")]
    matern: Option<String>,
    /// Models, e.g. "M1:identity,M2:square@10:1".
    #[arg(long, global = true, value_name = "NAME:TRANSFORM,...")]
    models: Option<String>,
    /// Model pairs, e.g. "M1:M2,M1:M3".
    #[arg(long, global = true, value_name = "A:B,...")]
    comparisons: Option<String>,
    /// Field sampler: circulant or cholesky.
    #[arg(long, global = true)]
    sampler: Option<String>,
    /// Field variance.
    #[arg(long, global = true)]
    sigma2: Option<f64>,
    /// Distance between neighbouring grid vertices.
    #[arg(long, global = true)]
    spacing: Option<f64>,
}

impl Settings {
    fn overrides(&self) -> RawConfig {
        RawConfig {
            seed: self.seed,
            out: self.out.clone(),
            grid: self.grid.clone(),
            points: self.points,
            depth: self.depth,
            samples: self.samples,
            train: self.train,
            test: self.test,
            cost: self.cost,
            threads: self.threads,
            matern: self.matern.clone(),
            models: self.models.clone(),
            comparisons: self.comparisons.clone(),
            sampler: self.sampler.clone(),
            sigma2: self.sigma2,
            spacing: self.spacing,
        }
    }

    fn load(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::load(self.config.as_deref(), self.overrides())
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw every sample field and write a manifest.
    Simulate,
    /// Persistence diagrams and critical censuses of simulated fields, or of
    /// a single field file.
    Ph {
        /// Field CSV to process instead of the simulated set.
        #[arg(long, requires = "output")]
        input: Option<PathBuf>,
        /// Diagram CSV for --input.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Census CSV for --input.
        #[arg(long)]
        census: Option<PathBuf>,
    },
    /// Landscape vectors of every diagram.
    Vectorize,
    /// Average landscapes per class and their differences.
    Landscape,
    /// Train, calibrate and evaluate every comparison from vector files.
    Classify,
    /// Run the whole pipeline and write the report.
    Experiment,
    /// Render landscape files as SVG.
    Plot {
        /// Landscape files; defaults to everything under <out>/landscapes.
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ph {
            input: Some(input),
            output,
            census,
        } => {
            let output = output
                .as_deref()
                .ok_or_else(|| Error::Config("--input needs --output".into()))?;
            harness::ph_single(input, output, census.as_deref())
        }
        Command::Plot { input } if !input.is_empty() && cli.settings.seed.is_none() && cli.settings.config.is_none() => {
            // Plotting explicit files needs no seed.
            let raw = RawConfig {
                seed: Some(0),
                ..cli.settings.overrides()
            };
            let cfg = ExperimentConfig::from_raw(raw)?;
            report_paths(&harness::run_plot(&cfg, input)?);
            Ok(())
        }
        command => {
            let cfg = cli.settings.load()?;
            match command {
                Command::Simulate => emit(&format!("{} fields\n", harness::run_simulate(&cfg)?)),
                Command::Ph { .. } => emit(&format!("{} diagrams\n", harness::run_ph(&cfg)?)),
                Command::Vectorize => emit(&format!("{} vectors\n", harness::run_vectorize(&cfg)?)),
                Command::Landscape => report_paths(&harness::run_landscape(&cfg)?),
                Command::Classify => emit(&harness::report_to_csv(&harness::run_classify(&cfg)?)),
                Command::Experiment => emit(&harness::report_to_csv(&harness::run_experiment(&cfg)?)),
                Command::Plot { input } => report_paths(&harness::run_plot(&cfg, input)?),
            }
            Ok(())
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn report_paths(paths: &[PathBuf]) {
    let text: String = paths.iter().map(|p| format!("{}\n", p.display())).collect();
    emit(&text);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
