use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use subgeo_cli::{
    exit_code, list_builtins, list_checks, load_config, run_geodesic, run_suite, CliError, Overrides, SEED_ENV,
};
use subgeo_core::DiffMode;

#[derive(Parser)]
#[command(
    name = "subgeo",
    version,
    about = "Check statistical structure of submersions numerically"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Jet,
    Fd,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a config and report the verdicts.
    Verify {
        config: PathBuf,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Integrate a geodesic job and write its trajectory as CSV.
    Geodesic {
        config: PathBuf,
        #[arg(long)]
        job: String,
        #[arg(long)]
        csv: PathBuf,
    },
    /// List the available checks.
    ListChecks,
    /// List the builtin models.
    ListBuiltins,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if path == Path::new("-") {
        print!("{text}");
        return Ok(());
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify {
            config,
            report,
            mode,
            samples,
            seed,
        } => {
            let mut cfg = load_config(&config)?;
            let env_seed = std::env::var(SEED_ENV).ok();
            let mode = mode.map(|m| match m {
                ModeArg::Jet => DiffMode::Jet,
                ModeArg::Fd => DiffMode::Fd,
            });
            cfg.apply(env_seed.as_deref(), Overrides { mode, samples, seed })?;
            let rep = run_suite(&cfg)?;
            match &report {
                Some(p) if p == Path::new("-") => print!("{}", rep.to_json()),
                Some(p) => {
                    write(p, &rep.to_json())?;
                    print!("{}", rep.to_text());
                }
                None => print!("{}", rep.to_text()),
            }
            Ok(exit_code(&rep))
        }
        Command::Geodesic { config, job, csv } => {
            let mut cfg = load_config(&config)?;
            cfg.apply(std::env::var(SEED_ENV).ok().as_deref(), Overrides::default())?;
            let tr = run_geodesic(&cfg, &job)?;
            write(&csv, &tr.to_csv())?;
            Ok(subgeo_cli::EXIT_PASS)
        }
        Command::ListChecks => {
            print!("{}", list_checks());
            Ok(subgeo_cli::EXIT_PASS)
        }
        Command::ListBuiltins => {
            print!("{}", list_builtins());
            Ok(subgeo_cli::EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
