//! `entroflux run scenario.cfg [...]`: load configs, run scenarios in
//! parallel, write one CSV and one identity report per scenario, and exit
//! with the worst severity seen (0 pass, 1 identity failure, 2 config error,
//! 3 numerical error).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use entroflux_cli::config::{load_config, CliOverrides, ConfigErrors, ScenarioConfig};
use entroflux_cli::report::{write_csv, write_text};
use entroflux_cli::runner::{run_scenario, RunError, RunReport};

#[derive(Parser)]
#[command(name = "entroflux", version, about = "Entropy-rate scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario config files and write CSV + identity reports
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config files (TOML)
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    /// Directory prefixed to relative output paths (created if missing)
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Reject configs that contain unrecognized keys
    #[arg(long)]
    strict: bool,
    /// Override the finite-difference step for every scenario
    #[arg(long)]
    fd_step: Option<f64>,
    /// Override the Fock-space cutoff for cross-validation scenarios
    #[arg(long)]
    cutoff: Option<usize>,
    /// Override the random seed for every scenario
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress per-scenario progress lines on stdout
    #[arg(long)]
    quiet: bool,
}

/// Exit severities, worst one wins.
const EXIT_PASS: u8 = 0;
const EXIT_IDENTITY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

enum Outcome {
    Ran {
        report: RunReport,
        csv_path: PathBuf,
        text_path: PathBuf,
    },
    ConfigError(ConfigErrors),
    WriteError { path: PathBuf, message: String },
    Numerical(RunError),
}

impl Outcome {
    fn severity(&self) -> u8 {
        match self {
            Outcome::Ran { report, .. } => {
                if report.all_passed() {
                    EXIT_PASS
                } else {
                    EXIT_IDENTITY
                }
            }
            Outcome::ConfigError(_) | Outcome::WriteError { .. } => EXIT_CONFIG,
            Outcome::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

fn resolve_output(cfg: &ScenarioConfig, output_dir: Option<&Path>) -> PathBuf {
    let p = Path::new(&cfg.output_path);
    match output_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn run(args: &RunArgs) -> u8 {
    let overrides = CliOverrides {
        strict: args.strict,
        fd_step: args.fd_step,
        cutoff: args.cutoff,
        seed: args.seed,
    };

    // Load every config up front so a broken file is reported even when an
    // earlier scenario fails.
    let loaded: Vec<Result<ScenarioConfig, ConfigErrors>> = args
        .configs
        .iter()
        .map(|path| load_config(path, &overrides))
        .collect();

    // Compute in parallel; report in input order below.
    let outcomes: Vec<Outcome> = loaded
        .into_par_iter()
        .map(|entry| match entry {
            Err(e) => Outcome::ConfigError(e),
            Ok(cfg) => match run_scenario(&cfg) {
                Err(e) => Outcome::Numerical(e),
                Ok(report) => {
                    let csv_path = resolve_output(&cfg, args.output_dir.as_deref());
                    let text_path = csv_path.with_extension("report.txt");
                    if let Some(parent) = csv_path.parent() {
                        if !parent.as_os_str().is_empty() {
                            if let Err(e) = std::fs::create_dir_all(parent) {
                                return Outcome::WriteError {
                                    path: parent.to_path_buf(),
                                    message: e.to_string(),
                                };
                            }
                        }
                    }
                    if let Err(e) = write_csv(&report, &csv_path) {
                        return Outcome::WriteError {
                            path: csv_path,
                            message: e.to_string(),
                        };
                    }
                    if let Err(e) = write_text(&report, &text_path) {
                        return Outcome::WriteError {
                            path: text_path,
                            message: e.to_string(),
                        };
                    }
                    Outcome::Ran {
                        report,
                        csv_path,
                        text_path,
                    }
                }
            },
        })
        .collect();

    let mut worst = EXIT_PASS;
    for outcome in &outcomes {
        worst = worst.max(outcome.severity());
        if args.quiet {
            continue;
        }
        match outcome {
            Outcome::Ran {
                report,
                csv_path,
                text_path,
            } => {
                let verdict = if report.all_passed() { "PASS" } else { "FAIL" };
                println!(
                    "{}: {verdict} ({} rows, {} checks, {:.1} ms) -> {}, {}",
                    report.scenario,
                    report.rows.len(),
                    report.checks.len(),
                    report.wall.as_secs_f64() * 1e3,
                    csv_path.display(),
                    text_path.display()
                );
                for c in report.checks.iter().filter(|c| !c.pass) {
                    println!(
                        "  FAIL {} (max error {:.3e}, tolerance {:.3e})",
                        c.name, c.max_error, c.tolerance
                    );
                }
                for n in &report.notes {
                    println!("  note: {n}");
                }
            }
            Outcome::ConfigError(e) => {
                println!("{e}");
            }
            Outcome::WriteError { path, message } => {
                println!("cannot write {}: {message}", path.display());
            }
            Outcome::Numerical(e) => {
                println!("{e}");
            }
        }
    }
    if !args.quiet {
        let word = match worst {
            EXIT_PASS => "PASS",
            EXIT_IDENTITY => "IDENTITY FAILURE",
            EXIT_CONFIG => "CONFIG ERROR",
            _ => "NUMERICAL ERROR",
        };
        println!("overall: {word} (exit {worst})");
    }
    worst
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => ExitCode::from(run(&args)),
    }
}
