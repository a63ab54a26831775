use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nonsticky_cli::runner::{self, RunnerError};

/// Monte Carlo laboratory for Euler-Maruyama schemes on degenerate SDEs
/// with non-sticky boundary behaviour.
#[derive(Parser)]
#[command(name = "nonsticky", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Classify every zero-set level of a coefficient config.
    ///
    /// Exit code 0 when all levels admit the non-sticky behaviour,
    /// 1 otherwise, 2 on config errors.
    Classify {
        /// Config file with a [coefficient] section.
        config: PathBuf,
    },
    /// Run a configured study and write manifest.json, results.csv and
    /// summary.json.
    ///
    /// Exit code 0 on verdict pass, 1 on verdict fail, 2 on usage or
    /// config errors. Outputs are identical for identical (config, seed)
    /// regardless of --workers.
    Run {
        /// Config file with [coefficient], [problem] and [study] sections.
        config: PathBuf,
        /// Override the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker pool size (default: NONSTICKY_WORKERS or all cores).
        #[arg(long, env = "NONSTICKY_WORKERS")]
        workers: Option<usize>,
        /// Output directory for the artifacts.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Print one simulated trajectory as CSV (t,x) on stdout.
    DumpPath {
        /// Config file with [coefficient] and [problem] sections.
        config: PathBuf,
        /// Dyadic resolution level (2^level steps).
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        path_index: u64,
        /// Disable the initial shift (diagnostic: starting on the zero
        /// set freezes the scheme).
        #[arg(long)]
        no_shift: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, RunnerError> {
    match cli.command {
        Commands::Classify { config } => {
            let ok = runner::classify_command(&config, &mut std::io::stdout().lock())?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Commands::Run {
            config,
            seed,
            workers,
            out_dir,
        } => {
            let workers = workers
                .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
                .unwrap_or(1)
                .max(1);
            let outcome = runner::run_command(&config, seed, workers, &out_dir)?;
            eprintln!(
                "verdict: {} (summary: {})",
                if outcome.verdict { "pass" } else { "fail" },
                outcome.summary_json.display()
            );
            Ok(if outcome.verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Commands::DumpPath {
            config,
            level,
            seed,
            path_index,
            no_shift,
        } => {
            runner::dump_path_command(
                &config,
                level,
                seed,
                path_index,
                no_shift,
                &mut std::io::stdout().lock(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
