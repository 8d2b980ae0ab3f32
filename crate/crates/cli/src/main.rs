use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use biphoton::gaussfit::LogBase;
use biphoton::Execution;
use biphoton_cli::config::{EstimatorChoice, Format, RunConfig};
use biphoton_cli::{commands, verify, CliError};

#[derive(Parser)]
#[command(name = "biphoton", version, about = "Transverse and temporal correlations of SPDC photon pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (`key = value` lines under [section] headers; SI units, no suffixes).
    #[arg(long, global = true)]
    config: Option<String>,

    /// Output file, or `stdout`.
    #[arg(long, global = true, default_value = "stdout")]
    output: String,

    /// Human-readable report or CSV. density and propagate always emit CSV.
    #[arg(long, global = true)]
    format: Option<FormatArg>,

    /// Overrides [slit_scan] rng_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Double-Gaussian width estimator. Without one, all three are reported.
    #[arg(long, global = true)]
    estimator: Option<EstimatorArg>,

    /// Logarithm base for entropies.
    #[arg(long, global = true)]
    log_base: Option<LogBaseArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Widths, entanglement and coherence summary.
    Analyze,
    /// Exact and fitted k₋ / x₋ densities, or the fit parameters.
    Density,
    /// Correlation coefficient and widths at propagation planes.
    Propagate,
    /// Schmidt eigenvalues.
    Schmidt,
    /// Temporal correlation widths for a tabulated crystal.
    Temporal,
    /// Monte Carlo slit-scan coincidence experiment.
    SlitScan,
    /// Cross-check every closed form against its numerical oracle.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Moment,
    Peak,
    Exact,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogBaseArg {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Report => Format::Report,
        };
    }
    if let Some(e) = cli.estimator {
        cfg.output.estimator = Some(match e {
            EstimatorArg::Moment => EstimatorChoice::One(biphoton::gaussfit::Estimator::MomentMatch),
            EstimatorArg::Peak => EstimatorChoice::One(biphoton::gaussfit::Estimator::PeakMatch),
            EstimatorArg::Exact => EstimatorChoice::One(biphoton::gaussfit::Estimator::ExactVariance),
            EstimatorArg::All => EstimatorChoice::All,
        });
    }
    if let Some(b) = cli.log_base {
        cfg.output.log_base = match b {
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::E => LogBase::E,
        };
    }
    if let Some(seed) = cli.seed {
        cfg.slit_scan.get_or_insert_with(Default::default).rng_seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = effective_config(cli)?;
    let (text, verdict) = match cli.command {
        Command::Analyze => (commands::analyze(&cfg)?, Ok(())),
        Command::Density => (commands::density(&cfg)?, Ok(())),
        Command::Propagate => (commands::propagate(&cfg)?, Ok(())),
        Command::Schmidt => (commands::schmidt(&cfg)?, Ok(())),
        Command::Temporal => (commands::temporal(&cfg)?, Ok(())),
        Command::SlitScan => (commands::slit_scan(&cfg)?, Ok(())),
        Command::Verify => {
            let checks = verify::run_all(Execution::default());
            let failed = checks.iter().filter(|c| !c.passed).count();
            let verdict = if failed == 0 { Ok(()) } else { Err(CliError::VerifyFailed(failed)) };
            (verify::report(&checks), verdict)
        }
    };
    if cli.output == "stdout" {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(&cli.output, text)?;
    }
    verdict
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("biphoton: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
