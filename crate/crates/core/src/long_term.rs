//! Long-term equilibrium: residential location, office-work ratio and land
//! rent.

use std::fmt;

use serde::Serialize;

use crate::corridor::{CorridorSpec, WageSpec};
use crate::error::{Error, Result};
use crate::root::bisect;
use crate::schedule::{CostMode, ScheduleSpec};

/// Rents below this are reported as errors.
const RENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Office,
    Mixed,
    Remote,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Office => "office",
            Self::Mixed => "mixed",
            Self::Remote => "remote",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongTermSolution {
    pub tlc_active: bool,
    pub mode: CostMode,
    /// First location where remote work beats full-time commuting.
    pub mixed_zone: Option<usize>,
    pub ratios: Vec<f64>,
    pub commuters: Vec<f64>,
    /// `λ_i = c̄(η_i A_i, μ̄_i)`.
    pub costs: Vec<f64>,
    pub rents: Vec<f64>,
    pub utility: f64,
    pub zones: Vec<Zone>,
}

impl LongTermSolution {
    /// Every location is an office zone although remote work is allowed.
    pub fn all_office(&self) -> bool {
        self.tlc_active && self.mixed_zone.is_none()
    }
}

/// Daily utility of a worker at a location with office-work ratio `h`.
pub fn worker_utility(wages: &WageSpec, commute_cost: f64, free_flow: f64, rent: f64, h: f64) -> f64 {
    h * (wages.office() - commute_cost - free_flow) + (1.0 - h) * wages.remote() - rent
}

/// `G_i(X) = θᴼ − c̄(X, μ̄_i) − Σ_{j≤i} f_j`.
pub fn g_value(
    corridor: &CorridorSpec,
    sched: &ScheduleSpec,
    wages: &WageSpec,
    i: usize,
    mass: f64,
    mode: CostMode,
) -> Result<f64> {
    let ff = corridor.cumulative_free_flow(i)?;
    let mu = corridor.residual_capacities()[i];
    Ok(wages.office() - sched.cbar(mass, mu, mode)? - ff)
}

/// Smallest location whose full-occupancy commuting utility falls below the
/// remote wage.
pub fn find_mixed_zone(
    corridor: &CorridorSpec,
    sched: &ScheduleSpec,
    wages: &WageSpec,
    mode: CostMode,
) -> Result<Option<usize>> {
    for (i, &a) in corridor.areas().iter().enumerate() {
        if g_value(corridor, sched, wages, i, a, mode)? < wages.remote() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Aggregate office-work ratio in the mixed zone, `G⁻¹(θᴿ)/A`, or zero
/// when `G(0)` is already below the remote wage.
pub fn mixed_zone_ratio(
    corridor: &CorridorSpec,
    sched: &ScheduleSpec,
    wages: &WageSpec,
    i_star: usize,
    mode: CostMode,
) -> Result<f64> {
    let area = *corridor
        .areas()
        .get(i_star)
        .ok_or(Error::LocationOutOfRange(i_star + 1))?;
    let mu = corridor.residual_capacities()[i_star];
    let target = wages.office() - wages.remote() - corridor.cumulative_free_flow(i_star)?;
    if target <= 0.0 {
        return Ok(0.0);
    }
    let mass = match mode {
        CostMode::MergedFormula => {
            let k = sched.k_count();
            let d = match (k, sched.uniform_spacing()) {
                (1 | 2, Some(d)) => d,
                _ => return Err(Error::MergedFormulaUnsupported(k)),
            };
            let delta = sched.delta();
            mu * (target + d * (k as f64 - 1.0) * delta) / delta
        }
        CostMode::Exact => {
            let remote = wages.remote();
            let g = |x: f64| g_value(corridor, sched, wages, i_star, x, mode).map(|g| g - remote);
            if g(area)? >= 0.0 {
                area
            } else {
                bisect(g, 0.0, area, 1e-12 * area.max(1.0))?
            }
        }
    };
    Ok((mass / area).clamp(0.0, 1.0))
}

/// Long-term equilibrium with or without the option to work remotely.
pub fn solve_long_term(
    corridor: &CorridorSpec,
    sched: &ScheduleSpec,
    wages: &WageSpec,
    tlc_active: bool,
    mode: CostMode,
) -> Result<LongTermSolution> {
    let n = corridor.location_count();
    let areas = corridor.areas();
    let full: Vec<f64> = (0..n)
        .map(|i| g_value(corridor, sched, wages, i, areas[i], mode))
        .collect::<Result<_>>()?;

    let mixed_zone = if tlc_active {
        full.iter().position(|&g| g < wages.remote())
    } else {
        None
    };
    let (ratios, utility) = match mixed_zone {
        Some(s) => {
            let eta = mixed_zone_ratio(corridor, sched, wages, s, mode)?;
            let ratios = (0..n)
                .map(|i| match i.cmp(&s) {
                    std::cmp::Ordering::Less => 1.0,
                    std::cmp::Ordering::Equal => eta,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect();
            (ratios, wages.remote())
        }
        None => (vec![1.0; n], full[n - 1]),
    };

    let residual = corridor.residual_capacities();
    let commuters: Vec<f64> = ratios.iter().zip(areas).map(|(h, a)| h * a).collect();
    let costs: Vec<f64> = commuters
        .iter()
        .zip(&residual)
        .map(|(&x, &mu)| sched.cbar(x, mu, mode))
        .collect::<Result<_>>()?;
    let mut rents = vec![0.0; n];
    for i in 0..n {
        let office = mixed_zone.is_none_or(|s| i < s);
        if office {
            let r = full[i] - utility;
            if r < -RENT_TOL {
                return Err(Error::NegativeRent {
                    location: i + 1,
                    value: r,
                });
            }
            rents[i] = r.max(0.0);
        }
    }
    let zones = ratios
        .iter()
        .map(|&h| {
            if h >= 1.0 {
                Zone::Office
            } else if h <= 0.0 {
                Zone::Remote
            } else {
                Zone::Mixed
            }
        })
        .collect();
    Ok(LongTermSolution {
        tlc_active,
        mode,
        mixed_zone,
        ratios,
        commuters,
        costs,
        rents,
        utility,
        zones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn corridor() -> CorridorSpec {
        CorridorSpec::new(
            vec![70.0, 40.0, 10.0],
            vec![1.5, 1.0, 1.0],
            vec![750.0, 1500.0, 700.0],
        )
        .unwrap()
    }

    fn single() -> ScheduleSpec {
        ScheduleSpec::new(vec![60.0], 0.3, 0.6, (0.0, 100.0)).unwrap()
    }

    fn pair() -> ScheduleSpec {
        ScheduleSpec::new(vec![50.0, 70.0], 0.3, 0.6, (0.0, 100.0)).unwrap()
    }

    fn wages() -> WageSpec {
        WageSpec::new(40.0, 30.0, 1).unwrap()
    }

    const M: CostMode = CostMode::MergedFormula;

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn g_examples() {
        let (c, s, w) = (corridor(), single(), wages());
        assert_abs_diff_eq!(g_value(&c, &s, &w, 0, 750.0, M).unwrap(), 33.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g_value(&c, &s, &w, 2, 700.0, M).unwrap(), 22.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g_value(&c, &s, &w, 2, 0.0, M).unwrap(), 36.5, epsilon = 1e-12);
    }

    #[test]
    fn mixed_zone_examples() {
        let (c, w) = (corridor(), wages());
        assert_eq!(find_mixed_zone(&c, &single(), &w, M).unwrap(), Some(1));
        assert_eq!(find_mixed_zone(&c, &pair(), &w, M).unwrap(), Some(2));
        let low = WageSpec::new(40.0, 1e-9, 1).unwrap();
        assert_eq!(find_mixed_zone(&c, &single(), &low, M).unwrap(), None);
        for mode in [CostMode::Exact, M] {
            assert_abs_diff_eq!(mixed_zone_ratio(&c, &single(), &w, 1, mode).unwrap(), 0.75, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(mixed_zone_ratio(&c, &pair(), &w, 2, M).unwrap(), 0.75, epsilon = 1e-12);
        // remote wage above θᴼ − Σf at the first location
        let high = WageSpec::new(40.0, 39.0, 1).unwrap();
        assert_eq!(mixed_zone_ratio(&c, &single(), &high, 0, M).unwrap(), 0.0);
    }

    #[test]
    fn no_subsidy() {
        let lt = solve_long_term(&corridor(), &single(), &wages(), false, M).unwrap();
        assert_abs_diff_eq!(lt.utility, 22.5, epsilon = 1e-12);
        close(&lt.rents, &[11.0, 5.0, 0.0]);
        close(&lt.costs, &[5.0, 10.0, 14.0]);
        assert!(lt.zones.iter().all(|&z| z == Zone::Office));
    }

    #[test]
    fn telecommuting() {
        let lt = solve_long_term(&corridor(), &single(), &wages(), true, M).unwrap();
        assert_eq!(lt.utility, 30.0);
        close(&lt.rents, &[3.5, 0.0, 0.0]);
        close(&lt.ratios, &[1.0, 0.75, 0.0]);
        close(&lt.costs, &[5.0, 7.5, 0.0]);
        assert_eq!(lt.zones, vec![Zone::Office, Zone::Mixed, Zone::Remote]);
    }

    #[test]
    fn combined_scheme_merged() {
        let lt = solve_long_term(&corridor(), &pair(), &wages(), true, M).unwrap();
        assert_eq!(lt.utility, 30.0);
        close(&lt.rents, &[7.5, 1.5, 0.0]);
        close(&lt.ratios, &[1.0, 1.0, 0.75]);
        close(&lt.costs, &[1.0, 6.0, 6.5]);
    }

    #[test]
    fn combined_scheme_exact() {
        let lt = solve_long_term(&corridor(), &pair(), &wages(), true, CostMode::Exact).unwrap();
        close(&lt.costs, &[2.5, 6.0, 6.5]);
        close(&lt.rents, &[6.0, 1.5, 0.0]);
        assert_abs_diff_eq!(lt.commuters[2], 525.0, epsilon = 1e-8);
    }

    #[test]
    fn utility_equalization() {
        let (c, w) = (corridor(), wages());
        for (s, tlc) in [(single(), false), (pair(), false), (single(), true), (pair(), true)] {
            let lt = solve_long_term(&c, &s, &w, tlc, M).unwrap();
            for i in 0..3 {
                if lt.commuters[i] > 0.0 {
                    let ff = c.cumulative_free_flow(i).unwrap();
                    let u = worker_utility(&w, lt.costs[i], ff, lt.rents[i], lt.ratios[i]);
                    assert_abs_diff_eq!(u, lt.utility, epsilon = 1e-9);
                }
            }
        }
    }
}
