//! `etconsensus`: run, sweep, validate and inspect consensus scenarios.

mod bundled;
mod error;
mod exec;
mod info;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etconsensus::scenario::Sufficiency;
use etconsensus::Mode;
use log::warn;

use crate::error::CliError;
use crate::exec::Overrides;

#[derive(Parser)]
#[command(name = "etconsensus", version, about = "Event-triggered average consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace and metrics.
    Run {
        /// Scenario file, or the name of a bundled scenario.
        scenario: String,
        #[command(flatten)]
        common: Common,
        /// Uniform trigger parameter for every agent.
        #[arg(long)]
        sigma: Option<f64>,
        /// Sampling period for the periodic modes.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Run a grid over sigma and/or h, one run per point, concurrently.
    Sweep {
        scenario: String,
        #[command(flatten)]
        common: Common,
        /// Comma-separated sigma values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        sigma: Vec<f64>,
        /// Comma-separated sampling periods.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        h: Vec<f64>,
    },
    /// Check a scenario without running it.
    Validate {
        scenario: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Print lambda_2, lambda_N and the rate certificate of the scenario graphs.
    Spectral {
        scenario: String,
        #[arg(long)]
        sigma: Option<f64>,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Disable the cooldown rebroadcast rule (the zeno guard stays armed).
    #[arg(long)]
    no_cooldown: bool,
    /// Run on graphs that are not weight-balanced or strongly connected.
    #[arg(long)]
    allow_unbalanced: bool,
    /// Handling of sampling periods that break the sufficient condition.
    #[arg(long, value_enum)]
    sufficiency: Option<SufficiencyArg>,
    /// Output directory (default: the scenario's `out`, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    EventDriven,
    PeriodicEvent,
    PeriodicLaplacian,
}

#[derive(Clone, Copy, ValueEnum)]
enum SufficiencyArg {
    Off,
    Warn,
    Reject,
}

impl Common {
    fn overrides(&self, sigma: Option<f64>, h: Option<f64>) -> Overrides {
        Overrides {
            mode: self.mode.map(|m| match m {
                ModeArg::EventDriven => Mode::EventDriven,
                ModeArg::PeriodicEvent => Mode::PeriodicEvent,
                ModeArg::PeriodicLaplacian => Mode::PeriodicLaplacian,
            }),
            h,
            horizon: self.horizon,
            sigma,
            no_cooldown: self.no_cooldown,
            allow_unbalanced: self.allow_unbalanced,
            sufficiency: self.sufficiency.map(|s| match s {
                SufficiencyArg::Off => Sufficiency::Off,
                SufficiencyArg::Warn => Sufficiency::Warn,
                SufficiencyArg::Reject => Sufficiency::Reject,
            }),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, common, sigma, h } => {
            let mut cfg = bundled::resolve(&scenario)?;
            common.overrides(sigma, h).apply(&mut cfg);
            let outcome = exec::execute(&cfg)?;
            let dir = exec::output_dir(&cfg, common.out.as_deref());
            let written = exec::write_outputs(&dir, cfg.display_name(), &cfg, &outcome)?;
            println!("{}", exec::summarize(&written.report));
            println!("trace   {}", written.trace.display());
            println!("metrics {}", written.metrics.display());
            Ok(())
        }
        Command::Sweep { scenario, common, sigma, h } => {
            let points = sweep::grid(&sigma, &h)?;
            let mut cfg = bundled::resolve(&scenario)?;
            common.overrides(None, None).apply(&mut cfg);
            let dir = exec::output_dir(&cfg, common.out.as_deref());
            let results = sweep::run_sweep(&cfg, &points, &dir);
            let table = sweep::write_table(&dir, cfg.display_name(), &results)?;
            print!("{}", sweep::table(&results));
            println!("table   {}", table.display());
            let failures: Vec<&CliError> = results.iter().filter_map(|r| r.outcome.as_ref().err()).collect();
            for (r, e) in results.iter().filter_map(|r| r.outcome.as_ref().err().map(|e| (r, e))) {
                warn!("sweep point sigma={:?} h={:?} failed: {e}", r.point.sigma, r.point.h);
            }
            match failures.iter().map(|e| e.exit_code()).max() {
                None => Ok(()),
                Some(1) => Err(CliError::Validation(format!("{} of {} sweep points failed", failures.len(), results.len()))),
                Some(_) => Err(CliError::Runtime(format!("{} of {} sweep points failed", failures.len(), results.len()))),
            }
        }
        Command::Validate { scenario, common, sigma, h } => {
            let mut cfg = bundled::resolve(&scenario)?;
            common.overrides(sigma, h).apply(&mut cfg);
            print!("{}", info::validate(&cfg)?);
            Ok(())
        }
        Command::Spectral { scenario, sigma } => {
            let mut cfg = bundled::resolve(&scenario)?;
            Overrides { sigma, ..Overrides::default() }.apply(&mut cfg);
            print!("{}", info::spectral_report(&cfg)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
