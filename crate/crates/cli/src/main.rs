//! `corridor-eq`: solve, compare and verify corridor commuting equilibria.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use corridor_equilibrium::scenarios::{ParadoxGrid, Scenario};
use corridor_equilibrium::CostMode;

use commands::Outcome;
use config::RunConfig;

const EXIT_CONFIG: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Parser)]
#[command(name = "corridor-eq", version, about = "Commuting equilibrium on a bottleneck corridor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Cost evaluation: exact or merged (overrides the config).
    #[arg(long, value_parser = parse_mode)]
    mode: Option<CostMode>,
    /// Output directory (overrides the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Recorded in the summary; every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve scenarios and write report tables and delay series.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Scenario to solve; repeat for several. Defaults to the config's list.
        #[arg(long, value_parser = parse_scenario)]
        scenario: Vec<Scenario>,
    },
    /// Compare two scenarios and evaluate the welfare claims.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Pair of scenarios, e.g. tlc,cs.
        #[arg(long, value_name = "A,B")]
        pair: String,
    },
    /// Check analytic solutions against the discretized optimum, the queue
    /// simulation and the equilibrium residuals.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_scenario)]
        scenario: Vec<Scenario>,
        /// Oracle time step (overrides the config).
        #[arg(long)]
        dt: Option<f64>,
        /// Adds this amount to the first location's cost before the gap
        /// evaluation.
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_lambda: Option<f64>,
    },
    /// Scan remote wage and staggering spacing for the commuting-cost paradox.
    ParadoxScan {
        #[command(flatten)]
        common: Common,
        /// Remote wages as LO:HI:N (default: a quarter of the office wage up
        /// to the office wage, 10 points).
        #[arg(long, value_name = "LO:HI:N")]
        theta_remote: Option<String>,
        /// Spacings of the two preferred times as LO:HI:N (default: a quarter
        /// of the configured spacing up to twice it, 10 points).
        #[arg(long, value_name = "LO:HI:N")]
        spacing: Option<String>,
    },
}

fn parse_mode(s: &str) -> Result<CostMode, String> {
    s.parse()
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse()
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(m) = common.mode {
        cfg.mode = m;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.out.clone());
    Ok((cfg, out))
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Solve { common, scenario } => {
            let (cfg, out) = load(&common)?;
            let chosen = cfg.selection(&scenario)?;
            commands::solve(&cfg, &chosen, &out, common.seed)
        }
        Command::Compare { common, pair } => {
            let pair = commands::parse_pair(&pair)?;
            let (cfg, out) = load(&common)?;
            commands::compare_cmd(&cfg, pair, &out, common.seed)
        }
        Command::Verify {
            common,
            scenario,
            dt,
            perturb_lambda,
        } => {
            let (cfg, out) = load(&common)?;
            let chosen = cfg.selection(&scenario)?;
            let dt = dt.unwrap_or(cfg.dt);
            commands::verify(&cfg, &chosen, dt, perturb_lambda, &out, common.seed)
        }
        Command::ParadoxScan {
            common,
            theta_remote,
            spacing,
        } => {
            let (cfg, out) = load(&common)?;
            let office = cfg.wages.office();
            let d = cfg.base.spacing();
            let remote_wages = match theta_remote {
                Some(r) => commands::parse_range(&r)?,
                None => commands::parse_range(&format!("{}:{}:10", 0.25 * office, office))?,
            };
            let spacings = match spacing {
                Some(r) => commands::parse_range(&r)?,
                None => commands::parse_range(&format!("{}:{}:10", 0.25 * d, 2.0 * d))?,
            };
            let grid = ParadoxGrid { remote_wages, spacings };
            commands::scan(&cfg, &grid, &out, common.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
