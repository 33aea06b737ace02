use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chainposet::cli::{self, CliError, RunOptions, Task};

#[derive(Parser)]
#[command(name = "chainposet", version, about = "Chain-component posets of interval maps")]
struct Args {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Omit the timing block so reports are byte-identical across runs.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in the config and report the property checks.
    Analyze { config: PathBuf },
    /// Print the expected model for the configured system.
    Predict { config: PathBuf },
    /// Write one Hasse diagram per resolution.
    Dot {
        config: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
}

fn emit(json: String, path: Option<&PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, json).map_err(|source| CliError::Io { path: p.clone(), source }),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn main_inner(args: Args) -> Result<bool, CliError> {
    let opts = RunOptions { timing: !args.seedless };
    match args.command {
        Command::Analyze { config } => {
            let cfg = cli::load_config(&config)?;
            let report = cli::run(&cfg, opts)?;
            if let Some(dir) = &cfg.dot_dir {
                cli::write_dots(&report, dir)?;
            }
            match args.json.as_ref().or(cfg.json.as_ref()) {
                Some(p) => cli::write_json(&report, p)?,
                None => emit(report.to_json(), None)?,
            }
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {}", c.name);
            }
            Ok(report.passed)
        }
        Command::Predict { config } => {
            let cfg = cli::load_config(&config)?;
            let p = cli::predict(&cfg)?;
            let mut s = serde_json::to_string_pretty(&p).expect("prediction serializes");
            s.push('\n');
            emit(s, args.json.as_ref())?;
            Ok(true)
        }
        Command::Dot { config, out } => {
            let mut cfg = cli::load_config(&config)?;
            cfg.tasks = vec![Task::Components];
            let report = cli::run(&cfg, opts)?;
            for p in cli::write_dots(&report, &out)? {
                eprintln!("wrote {}", p.display());
            }
            if let Some(p) = &args.json {
                cli::write_json(&report, p)?;
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
