mod compare;
mod config;
mod error;
mod report;
mod runner;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use error::CliError;
use report::RunReport;
use runner::Runner;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fermilab", version, about = "Entanglement entropy and particle-number variance sweeps for free fermions")]
struct Cli {
    /// Worker threads for sweeps; defaults to all cores.
    #[arg(long, short, env = "FERMILAB_JOBS", global = true)]
    jobs: Option<usize>,

    /// Suppress progress output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// RNG seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check config files without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Tabulate measured against predicted coefficients across reports.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        /// Fail if any relative delta from the first report exceeds this.
        #[arg(long)]
        max_delta: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, output, seed } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = output.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
            cfg.output = Some(dir.clone());
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = cli.jobs {
                pool = pool.num_threads(j);
            }
            let pool = pool.build().map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
            let start = Instant::now();
            let outcome = pool.install(|| Runner::new(&cfg, !cli.quiet).execute())?;
            let report = RunReport {
                version: env!("CARGO_PKG_VERSION").to_string(),
                kind: cfg.kind,
                config: cfg,
                columns: outcome.table.columns,
                rows: outcome.table.rows,
                fits: outcome.fits,
                comparisons: outcome.comparisons,
                notes: outcome.notes,
                wall_clock_seconds: start.elapsed().as_secs_f64(),
            };
            report.write_all(&dir)?;
            if !cli.quiet {
                for c in &report.comparisons {
                    eprintln!("{}: measured {:.6e}, predicted {:.6e}, ratio {:.6}", c.quantity, c.measured, c.predicted, c.ratio);
                }
                eprintln!("wrote {}", dir.display());
            }
            Ok(())
        }
        Command::Validate { configs } => {
            for path in &configs {
                ExperimentConfig::from_path(path).map_err(|e| match e {
                    CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                    other => other,
                })?;
                if !cli.quiet {
                    println!("{}: ok", path.display());
                }
            }
            Ok(())
        }
        Command::Compare { reports, max_delta } => {
            let rows = compare::compare(&reports)?;
            print!("{}", compare::render(&rows));
            if let Some(limit) = max_delta {
                if let Some(bad) = rows.iter().find(|r| r.delta.abs() > limit) {
                    return Err(CliError::Compare(format!(
                        "{} in {} differs by {:.3e} (> {limit})",
                        bad.quantity, bad.report, bad.delta
                    )));
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
