//! Batch driver for the qudit magic pipelines: instance generation, layered
//! circuit optimization, annealing sweeps, and the analysis passes, all
//! configured by flags or a JSON/TOML file and writing hash-stamped outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use magopt_core::collapse::CollapseForm;
use magopt_core::config::ExperimentConfig;
use magopt_core::pipeline::{
    cmd_analyze, cmd_anneal, cmd_envelopes, cmd_fit_collapse, cmd_generate, cmd_measure,
    cmd_run_qaoa, with_thread_pool, BatchReport,
};
use magopt_core::Error;

#[derive(Parser)]
#[command(
    name = "magopt",
    version,
    about = "Nonstabilizerness tracking through variational and adiabatic optimization of \
             disordered qudit models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the problem instances for every realization and write them as JSON
    Generate(BatchArgs),
    /// Optimize the layered circuit for every (realization, depth) task
    RunQaoa(BatchArgs),
    /// Sweep the interpolated Hamiltonian ground state for every realization
    Anneal(BatchArgs),
    /// Fit a scaling collapse to the per-depth barrier curves
    FitCollapse {
        #[command(flatten)]
        batch: BatchArgs,
        /// Rescaling family to fit
        #[arg(long, value_enum, default_value = "critical-point")]
        form: FormArg,
    },
    /// Tabulate the closed-form fidelity-magic envelopes on a uniform grid
    Envelopes(BatchArgs),
    /// Rebuild every aggregate table from the run files on disk
    Analyze(BatchArgs),
    /// Print the magic measures of one stored state vector
    Measure {
        /// State file: JSON with dim, sites, and an amplitude list
        state: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    /// Shift lambda by xi d^nu and scale by d^mu
    FourParam,
    /// Shift lambda by a depth-independent critical point lambda_c
    CriticalPoint,
}

impl From<FormArg> for CollapseForm {
    fn from(f: FormArg) -> CollapseForm {
        match f {
            FormArg::FourParam => CollapseForm::FourParam,
            FormArg::CriticalPoint => CollapseForm::CriticalPoint,
        }
    }
}

/// Experiment settings. Every flag overrides the config file; unset flags
/// keep the file's (or the built-in default) value.
#[derive(Args)]
struct BatchArgs {
    /// Base configuration file (.json or .toml)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Local dimension of each site (2 or 3)
    #[arg(long)]
    dim: Option<u32>,
    /// Register size
    #[arg(long)]
    sites: Option<usize>,
    /// Circuit depths, comma separated
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    /// Number of disorder realizations
    #[arg(long)]
    realizations: Option<usize>,
    /// Optimizer restarts per task
    #[arg(long)]
    restarts: Option<usize>,
    /// Trust-region radius at which the optimizer stops
    #[arg(long)]
    tolerance: Option<f64>,
    /// Evaluation budget per restart (default: 1000 x depth)
    #[arg(long)]
    max_evals: Option<usize>,
    /// Largest ramp time step used to seed restarts
    #[arg(long)]
    dt_max: Option<f64>,
    /// Variance of the degeneracy-breaking bias fields
    #[arg(long)]
    bias_variance: Option<f64>,
    /// Master seed; realization r uses seed + r
    #[arg(long)]
    seed: Option<u64>,
    /// Track Wigner negativity alongside the stabilizer entropy (odd dim only)
    #[arg(long)]
    measure_mana: bool,
    /// Directory for all outputs
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads (default: hardware parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Keep only couplings with |i - j| <= this range
    #[arg(long)]
    truncation: Option<usize>,
    /// Points per annealing sweep and per envelope table
    #[arg(long)]
    grid_points: Option<usize>,
    /// Demagication thresholds, comma separated
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Fidelity thresholds, comma separated
    #[arg(long, value_delimiter = ',')]
    f_thresholds: Option<Vec<f64>>,
}

impl BatchArgs {
    fn into_config(self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        apply!(
            dim,
            sites,
            depths,
            realizations,
            restarts,
            tolerance,
            dt_max,
            bias_variance,
            seed,
            output_dir,
            grid_points,
            epsilons,
            f_thresholds
        );
        if let Some(v) = self.max_evals {
            cfg.max_evals = Some(v);
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
        if let Some(v) = self.truncation {
            cfg.truncation = Some(v);
        }
        if self.measure_mana {
            cfg.measure_mana = true;
        }
        Ok(cfg)
    }
}

/// Prints the batch outcome; any per-task failure makes the run exit as a
/// numerical failure after the rest of the batch has completed.
fn finish_batch(what: &str, report: BatchReport) -> Result<(), Error> {
    println!(
        "{what}: {} computed, {} reused",
        report.completed, report.reused
    );
    if report.failed.is_empty() {
        return Ok(());
    }
    for f in &report.failed {
        eprintln!(
            "realization {} depth {}: {}",
            f.realization, f.depth, f.message
        );
    }
    Err(Error::BatchFailed {
        failed: report.failed.len(),
        total: report.failed.len() + report.completed + report.reused,
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate(args) => {
            let cfg = args.into_config()?;
            let paths = cmd_generate(&cfg)?;
            println!(
                "wrote {} instances under {}",
                paths.len(),
                cfg.output_dir.display()
            );
        }
        Command::RunQaoa(args) => {
            let cfg = args.into_config()?;
            let report = with_thread_pool(cfg.threads, || cmd_run_qaoa(&cfg))??;
            finish_batch("circuit batch", report)?;
        }
        Command::Anneal(args) => {
            let cfg = args.into_config()?;
            let report = with_thread_pool(cfg.threads, || cmd_anneal(&cfg))??;
            finish_batch("annealing batch", report)?;
        }
        Command::FitCollapse { batch, form } => {
            let cfg = batch.into_config()?;
            let fit = with_thread_pool(cfg.threads, || cmd_fit_collapse(&cfg, form.into()))??;
            println!("{}", serde_json::to_string_pretty(&fit).expect("fit serializes"));
        }
        Command::Envelopes(args) => {
            let cfg = args.into_config()?;
            let path = cmd_envelopes(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Analyze(args) => {
            let cfg = args.into_config()?;
            let n = with_thread_pool(cfg.threads, || cmd_analyze(&cfg))??;
            println!("aggregated {n} runs under {}", cfg.output_dir.display());
        }
        Command::Measure { state } => {
            let report = cmd_measure(&state)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
