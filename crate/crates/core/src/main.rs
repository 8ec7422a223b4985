use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use masslab::config::ExperimentConfig;
use masslab::report::{compare, Tolerances};
use masslab::runner::{exit_code, run};

#[derive(Parser)]
#[command(name = "masslab", version, about = "Harmonic-function mass bounds on asymptotically flat 3-metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its report, tables and meshes.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long, env = "MASSLAB_JOBS")]
        jobs: Option<usize>,
        /// Write un-timestamped outputs, replacing existing files.
        #[arg(long)]
        force: bool,
    },
    /// Per-key relative differences between two reports.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        tol: PathBuf,
    },
    /// Print the JSON schema of experiment configs.
    Schema,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("masslab: {msg}");
    ExitCode::from(code as u8)
}

fn read_json(path: &PathBuf) -> masslab::Result<serde_json::Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&ExperimentConfig::schema()).expect("schema"));
            ExitCode::SUCCESS
        }
        Command::Run { config, jobs, force } => {
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                if n == 0 {
                    return fail(1, "--jobs must be at least 1");
                }
                pool = pool.num_threads(n);
            }
            let pool = match pool.build() {
                Ok(p) => p,
                Err(e) => return fail(1, e),
            };
            match pool.install(|| run(&config, force)) {
                Ok((written, exp, code)) => {
                    println!("{}", written.report.display());
                    for p in written.tables.iter().chain(&written.meshes) {
                        println!("{}", p.display());
                    }
                    for c in exp.report.failed_checks() {
                        eprintln!("masslab: check {} failed: {}", c.name, c.detail);
                    }
                    ExitCode::from(code as u8)
                }
                Err(e) => fail(exit_code(&e), e),
            }
        }
        Command::Compare { a, b, tol } => {
            let loaded = (|| -> masslab::Result<_> {
                let tol = Tolerances::from_json(&std::fs::read_to_string(&tol)?)?;
                compare(&read_json(&a)?, &read_json(&b)?, &tol)
            })();
            match loaded {
                Ok(diff) => {
                    print!("{}", diff.summary());
                    if diff.exceeded() > 0 {
                        ExitCode::from(3)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => fail(1, e),
            }
        }
    }
}
