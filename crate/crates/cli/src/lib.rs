//! Command-line front end for the `ballotflow` forecasting library.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Axis;
pub use config::ScenarioConfig;
pub use error::CliError;
pub use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "ballotflow",
    version,
    about = "Election forecasts under a signal-plus-noise information model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ranking and win probabilities, the ordering partition and dead-zone flags
    Forecast(Common),
    /// Win probabilities over a grid of rates, polls or positions
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Axis,
    },
    /// Simulated support and win-probability paths
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Overrides `simulation.seed`
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Which candidates can never come first, and the centre-candidate rate bound
    Deadzone(Common),
    /// Largest attainable election-day support per candidate over a rate grid
    Maxsupport(Common),
    /// Effective rate of correlated information sources
    Aggregate(Common),
    /// Rate estimates from a poll series and/or a target win probability
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Poll CSV with header `t,<name>,...`
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (common, default_format) = match &cli.command {
        Command::Sweep { common, .. } | Command::Simulate { common, .. } => (common, Format::Csv),
        Command::Forecast(c)
        | Command::Deadzone(c)
        | Command::Maxsupport(c)
        | Command::Aggregate(c)
        | Command::Calibrate { common: c, .. } => (c, Format::Json),
    };
    let cfg = ScenarioConfig::load(&common.config)?;
    let report = match &cli.command {
        Command::Forecast(_) => {
            let r = commands::forecast(&cfg)?;
            if let Some(sum) = r.json["ordering_sum"].as_f64() {
                eprintln!(
                    "check: ordering probabilities sum to {}",
                    output::float(sum)
                );
            }
            r
        }
        Command::Sweep { axis, .. } => commands::sweep(&cfg, *axis)?,
        Command::Simulate { seed, .. } => commands::simulate(&cfg, *seed)?,
        Command::Deadzone(_) => commands::deadzone(&cfg)?,
        Command::Maxsupport(_) => commands::maxsupport(&cfg)?,
        Command::Aggregate(_) => commands::aggregate(&cfg)?,
        Command::Calibrate { data, .. } => commands::calibrate(&cfg, data.as_deref())?,
    };
    let bytes = report.render(common.format.unwrap_or(default_format));
    output::emit(&bytes, common.out.as_deref())
}
