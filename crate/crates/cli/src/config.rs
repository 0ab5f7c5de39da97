//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use corridor_equilibrium::scenarios::{Scenario, ScheduleBase};
use corridor_equilibrium::{CorridorSpec, CostMode, Error, WageSpec};
use serde::Deserialize;

/// Relative tolerance for an explicit `population` key against `Σ A_i`.
const POPULATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    capacities: Vec<f64>,
    areas: Vec<f64>,
    free_flow: Vec<f64>,
    beta: f64,
    gamma: f64,
    theta_office: f64,
    theta_remote: f64,
    #[serde(default = "one")]
    days_per_term: u32,
    t_single: f64,
    t_pair: [f64; 2],
    horizon: [f64; 2],
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    scenarios: Option<Vec<String>>,
    #[serde(default)]
    population: Option<f64>,
}

fn one() -> u32 {
    1
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corridor: CorridorSpec,
    pub base: ScheduleBase,
    pub wages: WageSpec,
    pub mode: CostMode,
    pub dt: f64,
    pub out: PathBuf,
    pub scenarios: Vec<Scenario>,
}

/// 1-based line of the first assignment to `key`, if any.
fn line_of(src: &str, key: &str) -> Option<usize> {
    src.lines().position(|l| {
        l.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|n| n + 1)
}

/// Config key most likely responsible for a validation error.
fn blame(err: &Error) -> &'static str {
    match err {
        Error::LengthMismatch { what, .. } => what,
        Error::CapacityOrdering(_) | Error::NonPositiveCapacity(_) => "capacities",
        Error::NonPositiveArea(_) => "areas",
        Error::NegativeFreeFlow(_) => "free_flow",
        Error::InvalidWages(_) => "theta_remote",
        Error::OutsideHorizon(_) => "horizon",
        Error::InvalidSchedule(_) => "t_pair",
        _ => "capacities",
    }
}

fn with_line(src: &str, key: &str, err: impl std::fmt::Display) -> anyhow::Error {
    match line_of(src, key) {
        Some(n) => anyhow!("line {n} ({key}): {err}"),
        None => anyhow!("{key}: {err}"),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&src).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(src: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| anyhow!("{e}"))?;
        let check = |key, r: corridor_equilibrium::Result<_>| r.map_err(|e| with_line(src, key, &e));

        let corridor = CorridorSpec::new(raw.capacities, raw.free_flow, raw.areas).map_err(|e| with_line(src, blame(&e), &e))?;
        let wages = check("theta_remote", WageSpec::new(raw.theta_office, raw.theta_remote, raw.days_per_term))?;
        let base = ScheduleBase::from_times(raw.t_single, raw.t_pair, raw.beta, raw.gamma, (raw.horizon[0], raw.horizon[1]))
            .map_err(|e| with_line(src, blame(&e), &e))?;

        if let Some(q) = raw.population {
            let total = corridor.population();
            if (q - total).abs() > POPULATION_TOL * total.max(1.0) {
                return Err(with_line(src, "population", format!("population {q} differs from the total area {total}")));
            }
        }
        let mode = match raw.mode {
            Some(m) => m.parse().map_err(|e| with_line(src, "mode", e))?,
            None => CostMode::MergedFormula,
        };
        let dt = raw.dt.unwrap_or(0.05);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(with_line(src, "dt", format!("time step must be positive, got {dt}")));
        }
        let scenarios = match raw.scenarios {
            Some(list) => list
                .iter()
                .map(|s| s.parse::<Scenario>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| with_line(src, "scenarios", e))?,
            None => Scenario::ALL.to_vec(),
        };
        Ok(Self {
            corridor,
            base,
            wages,
            mode,
            dt,
            out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
            scenarios,
        })
    }

    /// Scenarios to run: the command-line selection when given, else the
    /// config's.
    pub fn selection(&self, cli: &[Scenario]) -> Result<Vec<Scenario>> {
        let mut chosen = if cli.is_empty() { self.scenarios.clone() } else { cli.to_vec() };
        chosen.dedup();
        if chosen.is_empty() {
            bail!("no scenario selected");
        }
        Ok(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "capacities = [70.0, 40.0, 10.0]\nareas = [750.0, 1500.0, 700.0]\nfree_flow = [1.5, 1.0, 1.0]\nbeta = 0.3\ngamma = 0.6\ntheta_office = 40.0\ntheta_remote = 30.0\nt_single = 60.0\nt_pair = [50.0, 70.0]\nhorizon = [0.0, 100.0]\n";

    #[test]
    fn defaults() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.mode, CostMode::MergedFormula);
        assert_eq!(c.scenarios.len(), 4);
        assert_eq!(c.corridor.location_count(), 3);
    }

    #[test]
    fn rejects_unknown_key() {
        let err = RunConfig::parse(&format!("{BASE}capacitys = [1.0]\n")).unwrap_err();
        assert!(format!("{err:#}").contains("capacitys"), "{err:#}");
    }

    #[test]
    fn validation_errors_carry_line() {
        let src = BASE.replace("[70.0, 40.0, 10.0]", "[40.0, 70.0, 10.0]");
        let err = RunConfig::parse(&src).unwrap_err().to_string();
        assert!(err.starts_with("line 1 (capacities)"), "{err}");
        let src = BASE.replace("theta_remote = 30.0", "theta_remote = 45.0");
        let err = RunConfig::parse(&src).unwrap_err().to_string();
        assert!(err.starts_with("line 7 (theta_remote)"), "{err}");
    }

    #[test]
    fn population_must_match_areas() {
        assert!(RunConfig::parse(&format!("{BASE}population = 2950\n")).is_ok());
        assert!(RunConfig::parse(&format!("{BASE}population = 3000\n")).is_err());
    }

    #[test]
    fn empty_selection() {
        let c = RunConfig::parse(&format!("{BASE}scenarios = []\n")).unwrap();
        assert_eq!(c.selection(&[]).unwrap_err().to_string(), "no scenario selected");
        assert_eq!(c.selection(&[Scenario::Cs]).unwrap(), vec![Scenario::Cs]);
    }
}
