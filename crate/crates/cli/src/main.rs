use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mereo::Exec;
use mereo_cli::commands;
use mereo_cli::config::{load, RunConfig};
use mereo_cli::output::{emit, Provenance, Report};
use mereo_cli::CliError;

/// Minimally scrambling subsystem decompositions and algebra susceptibility.
#[derive(Parser)]
#[command(name = "mereo", version = mereo_cli::BUILD_ID)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output path (stdout if omitted). The JSON sidecar goes next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long, global = true, env = "MEREO_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal-abelian toy: closed-form angles and metric vs finite differences.
    ToyAbelian,
    /// L/R factor toy: metric compared with the matched abelian toy.
    ToyFactor,
    /// Warm-started TFIM sweep around h = 0.
    SweepIntegrability,
    /// Disorder-line sweeps with identity starts, averaged over realizations.
    SweepDisorder,
    /// Monte-Carlo A-OTOC curve G_A(t).
    OtocProbe,
    /// Oracle checks with observed errors and tolerances.
    Verify,
}

fn exec_for(threads: Option<usize>) -> Result<Exec, CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(1) => Ok(Exec::Sequential),
        Some(n) => {
            mereo::exec::init_threads(n);
            Ok(Exec::Parallel)
        }
        None => Ok(Exec::Parallel),
    }
}

fn run_with<T: RunConfig>(
    cli: &Cli,
    name: &'static str,
    f: impl FnOnce(&T, Exec) -> Result<Report, CliError>,
) -> Result<Option<String>, CliError> {
    let cfg: T = load(cli.config.as_deref(), cli.seed)?;
    let exec = exec_for(cli.threads)?;
    let prov = Provenance::new(name, cfg.seed(), &cfg)?;
    let report = f(&cfg, exec)?;
    emit(&prov, &report, cli.out.as_deref())?;
    Ok(report.failure)
}

fn run(cli: &Cli) -> Result<Option<String>, CliError> {
    match cli.command {
        Command::ToyAbelian => run_with(cli, "toy-abelian", |c, _| commands::toy_abelian(c)),
        Command::ToyFactor => run_with(cli, "toy-factor", |c, _| commands::toy_factor(c)),
        Command::SweepIntegrability => run_with(cli, "sweep-integrability", commands::sweep_integrability),
        Command::SweepDisorder => run_with(cli, "sweep-disorder", commands::sweep_disorder),
        Command::OtocProbe => run_with(cli, "otoc-probe", commands::otoc_probe),
        Command::Verify => run_with(cli, "verify", commands::verify),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("mereo: {failure}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("mereo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
