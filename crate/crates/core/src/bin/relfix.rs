use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use relfix::report::{run_command, Command, RunOptions};
use relfix::{parse_problem, Error};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Check the b-metric and simulation-function axioms.
    Axioms,
    /// Check every hypothesis, with the contraction ledger.
    Verify,
    /// Run the Picard iteration and its diagnostics.
    Solve,
    /// Run the iteration and certify the fixed point exhaustively.
    Certify,
    /// Everything above.
    Report,
}

/// Verify and solve relational fixed-point problems on finite b-metric spaces.
#[derive(Debug, Parser)]
#[command(name = "relfix", version)]
struct Cli {
    command: Cmd,
    /// Problem file; `.relfix` is appended when the path does not exist.
    file: PathBuf,
    /// Solver stopping tolerance on the step length.
    #[arg(long)]
    tol: Option<f64>,
    /// Start point, by coordinate.
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Override the coefficient s of the space.
    #[arg(long)]
    s: Option<f64>,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    /// Iterate from a start outside M(F;R), recording relation violations.
    #[arg(long)]
    allow_inadmissible_start: bool,
}

fn resolve(path: &Path) -> PathBuf {
    if !path.exists() {
        let with_ext = path.with_extension("relfix");
        if with_ext.exists() {
            return with_ext;
        }
    }
    path.to_path_buf()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Axioms => Command::Axioms,
        Cmd::Verify => Command::Verify,
        Cmd::Solve => Command::Solve,
        Cmd::Certify => Command::Certify,
        Cmd::Report => Command::Report,
    };
    let path = resolve(&cli.file);
    let result = std::fs::read_to_string(&path)
        .map_err(Error::from)
        .and_then(|text| parse_problem(&text))
        .and_then(|file| {
            let options = RunOptions {
                tol: cli.tol,
                start: cli.start,
                max_iter: cli.max_iter,
                s: cli.s,
                allow_inadmissible_start: cli.allow_inadmissible_start,
            };
            run_command(command, &file, &options)
        });
    match result {
        Ok(report) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::from(report.exit_status())
        }
        Err(err) => {
            eprintln!("relfix: {}: {err}", path.display());
            ExitCode::from(err.exit_code())
        }
    }
}
