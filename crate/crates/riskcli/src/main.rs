//! `riskcli`: descriptive statistics, GJR fits and filtered-historical-simulation
//! risk reports for a panel of daily price series.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{
    all_failed, fit_all, fit_document, load_fits, load_returns, risk, stats, write_output, Document,
};
use crate::config::{Format, Overrides, RunConfig, SEED_ENV};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "riskcli", version, about = "VaR and Expected Shortfall by filtered historical simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Descriptive statistics and the correlation matrix.
    Stats(RunArgs),
    /// Fit AR(1)-GJR(1,1) with Pearson IV innovations and persist one file per asset.
    Fit(RunArgs),
    /// Simulate VaR and ES from persisted fits.
    Risk(RunArgs),
    /// Stats, fit and risk in one combined document.
    Report(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; falls back to the config file, then RISKCLI_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Horizon in trading days.
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated tail probabilities, e.g. 0.05,0.01.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Re-estimate instead of loading persisted fits.
    #[arg(long)]
    refit: bool,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            seed: self.seed,
            trials: self.trials,
            horizon: self.horizon,
            levels: self.levels.clone(),
            format: self.format,
        };
        RunConfig::load(&self.config, &overrides, std::env::var(SEED_ENV).ok().as_deref())
    }
}

fn emit(cfg: &RunConfig, name: &str, doc: &Document) -> Result<String, CliError> {
    let out = doc.render(cfg.format)?;
    write_output(&cfg.output_dir, &format!("{name}.{}", cfg.format.extension()), &out)?;
    Ok(out)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Stats(args) => {
            let cfg = args.load()?;
            let panel = load_returns(&cfg)?;
            emit(&cfg, "stats", &stats(&cfg, &panel)?.1)
        }
        Command::Fit(args) => {
            let cfg = args.load()?;
            let panel = load_returns(&cfg)?;
            let outcomes = fit_all(&cfg, &panel)?;
            let out = emit(&cfg, "fit", &fit_document(&panel, &outcomes)?.1)?;
            if all_failed(&outcomes) {
                print!("{out}");
                return Err(CliError::FitFailed("every asset failed to fit".into()));
            }
            Ok(out)
        }
        Command::Risk(args) => {
            let cfg = args.load()?;
            let panel = load_returns(&cfg)?;
            let fits = if args.refit {
                let outcomes = fit_all(&cfg, &panel)?;
                if all_failed(&outcomes) {
                    return Err(CliError::FitFailed("every asset failed to fit".into()));
                }
                for (s, o) in panel.iter().zip(&outcomes) {
                    if let Err(e) = o {
                        eprintln!("warning: {}: fit failed, skipped: {e}", s.asset_id);
                    }
                }
                outcomes.into_iter().filter_map(Result::ok).collect()
            } else {
                load_fits(&cfg, &panel)?
            };
            emit(&cfg, "risk", &risk(&cfg, &fits)?.1)
        }
        Command::Report(args) => commands::report(&args.load()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
