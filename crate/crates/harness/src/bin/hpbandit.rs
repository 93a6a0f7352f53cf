use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hpbandit::exec::Execution;
use hpbandit_harness::output::write_json;
use hpbandit_harness::{run_experiment, EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, validate_freedman, write_outputs, ExperimentConfig, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "hpbandit", version, about = "Run seeded bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write traces and a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Assert every pathwise invariant during the run.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo check of the concentration bound.
    ValidateFreedman {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn out_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    cli.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(command: Command) -> Result<u8, HarnessError> {
    match command {
        Command::Run { config, check, workers, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let execution = Execution::from_workers(workers);
            let result = run_experiment(&cfg, RunOptions { check, execution })?;
            let dir = out_dir(out, &cfg);
            write_outputs(&result, &dir, cfg.output.traces)?;
            let s = &result.summary.learner.final_regret;
            println!(
                "{}: {} runs, final regret mean {:.4} median {:.4} p95 {:.4}; wrote {}",
                cfg.name,
                result.runs.len(),
                s.mean,
                s.median,
                s.p95,
                dir.display()
            );
            for run in result.runs.iter().chain(&result.baseline) {
                if let Some(f) = &run.failure {
                    eprintln!("seed {} stopped at round {}: {}", run.seed, f.round, f.message);
                }
            }
            Ok(result.exit_code(check))
        }
        Command::ValidateFreedman { config, workers, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = validate_freedman(&cfg, Execution::from_workers(workers))?;
            for r in &summary.results {
                println!(
                    "delta {}: {} of {} trials exceed the bound (frequency {:.4}, allowance {:.4}) {}",
                    r.delta,
                    r.report.violations,
                    r.report.trials,
                    r.report.frequency,
                    r.report.allowance,
                    if r.passed { "ok" } else { "FAILED" }
                );
            }
            let dir = out_dir(out, &cfg);
            std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
            write_json(&dir.join("freedman.json"), &summary)?;
            Ok(if summary.passed() { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}
