use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ffo_lab::run::to_json;
use ffo_lab::{load_scenario, run, RunOutput, Status, Task};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "ffo-lab",
    version,
    about = "Invariants and states of the fermionic forced oscillator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's tasks and write CSV series plus report.json.
    Run {
        scenario: PathBuf,
        /// Output directory (default: the scenario's output_dir, else <stem>.out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario's tasks and print the residual report only.
    Check { scenario: PathBuf },
    /// Compare the integrated free trajectory with both closed forms.
    FreeCompare {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every *.json scenario in a directory in parallel.
    Sweep { dir: PathBuf },
}

fn print_summary(out: &RunOutput) {
    let r = &out.report;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    for (name, t) in &r.tasks {
        match &t.error {
            Some(e) => println!("{name:<14} {:?}: {e}", t.status),
            None => println!("{name:<14} {:?}", t.status),
        }
    }
    println!("status: {:?} (exit {})", r.status, r.exit_code);
}

/// Loads, runs and optionally writes one scenario; returns the exit status.
fn execute(path: &Path, tasks: Option<&[Task]>, out: Option<Option<&Path>>) -> Status {
    let scenario = match load_scenario(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Status::ValidationError;
        }
    };
    let scenario = match tasks {
        Some(t) => scenario.with_tasks(t),
        None => scenario,
    };
    let result = run(&scenario);
    match out {
        None => print!("{}", to_json(&result.report)),
        Some(dir) => {
            let dir = dir
                .map(Path::to_path_buf)
                .unwrap_or_else(|| scenario.default_output_dir());
            if let Err(e) = result.write(&dir) {
                eprintln!("error: writing {}: {e}", dir.display());
                return Status::ValidationError;
            }
            print_summary(&result);
        }
    }
    result.report.status
}

fn sweep(dir: &Path) -> Status {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return Status::ValidationError;
        }
    };
    files.sort();
    let results: Vec<(PathBuf, Result<RunOutput, String>)> = files
        .into_par_iter()
        .map(|p| {
            let r = load_scenario(&p).map_err(|e| e.to_string()).and_then(|s| {
                let out = run(&s);
                out.write(&s.default_output_dir())
                    .map_err(|e| format!("writing outputs: {e}"))?;
                Ok(out)
            });
            (p, r)
        })
        .collect();
    let mut worst = Status::Ok;
    for (p, r) in &results {
        let status = match r {
            Ok(out) => out.report.status,
            Err(e) => {
                eprintln!("{}: error: {e}", p.display());
                Status::ValidationError
            }
        };
        println!("{} {:?}", p.display(), status);
        worst = worst.worst(status);
    }
    worst
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Run { scenario, out } => execute(scenario, None, Some(out.as_deref())),
        Command::Check { scenario } => execute(scenario, None, None),
        Command::FreeCompare { scenario, out } => {
            execute(scenario, Some(&[Task::FreeCompare]), Some(out.as_deref()))
        }
        Command::Sweep { dir } => sweep(dir),
    };
    ExitCode::from(status.exit_code() as u8)
}
