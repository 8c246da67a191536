use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use alphaloc_cli::{emit, run_experiment, CliError, ExperimentConfig, ExperimentKind, Format};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alphaloc", version, about = "Verification campaigns for α-localized matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Index-distance constants, elementary lemmas and the d̃ counterexample.
    Axioms,
    /// Separation constants of curvelet and shearlet grids.
    Grid,
    /// Convergence of admissibility sums over nested truncations.
    Admissibility,
    /// Submultiplicativity of the localization norms.
    Submult,
    /// Pseudoinverse identities, the Neumann series and decay of A⁺.
    Pinv,
    /// Molecule decay condition and Gramian localization.
    Molecules,
    /// Weighted Schur operator-norm bounds.
    Schur,
    /// Every campaign in sequence.
    Full,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Axioms => ExperimentKind::Axioms,
            Command::Grid => ExperimentKind::Grid,
            Command::Admissibility => ExperimentKind::Admissibility,
            Command::Submult => ExperimentKind::Submult,
            Command::Pinv => ExperimentKind::Pinv,
            Command::Molecules => ExperimentKind::Molecules,
            Command::Schur => ExperimentKind::Schur,
            Command::Full => ExperimentKind::Full,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration; omitted sections use desk-scale defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ALPHALOC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("ALPHALOC_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let kind = cli.command.kind();
    let mut cfg = match &cli.run.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(CliError::Usage(format!(
                "experiment: config declares {:?} but the subcommand is {:?}",
                declared.name(),
                kind.name()
            )));
        }
    }
    if let Some(seed) = cli.run.seed {
        cfg.seed = seed;
    }
    let report = run_experiment(kind, &cfg);
    match &cli.run.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            emit(&report, cli.run.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            emit(&report, cli.run.format, &mut w)?;
            w.flush()?;
        }
    }
    eprintln!(
        "{}: {}/{} checks passed in {:.1}s",
        report.experiment,
        report.passed(),
        report.checks.len(),
        report.wall_time.as_secs_f64()
    );
    Ok(report.status().exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("alphaloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
