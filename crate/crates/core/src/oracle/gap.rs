//! Residuals of the integrated equilibrium conditions for an arbitrary
//! candidate state.

use serde::Serialize;

use crate::corridor::{CorridorSpec, WageSpec};
use crate::error::{Error, Result};
use crate::plf::PiecewiseLinearFn;
use crate::scenarios::ScenarioReport;
use crate::schedule::ScheduleSpec;
use crate::short_term::{flow_rates, FlowProfile};

/// Queue delays shorter than this count as no queue.
const QUEUE_EPS: f64 = 1e-9;
/// Pieces narrower than this carry no mass and are skipped.
const PIECE_EPS: f64 = 1e-9;

/// Everything the equilibrium conditions constrain. Fields are public so
/// that callers can test perturbed states.
#[derive(Debug, Clone)]
pub struct IntegratedState {
    pub corridor: CorridorSpec,
    pub schedule: ScheduleSpec,
    pub wages: WageSpec,
    /// Whether any ratio in `[0, 1]` may be chosen; otherwise only 1.
    pub tlc_active: bool,
    /// Households per location.
    pub occupancy: Vec<f64>,
    pub ratios: Vec<f64>,
    pub costs: Vec<f64>,
    pub rents: Vec<f64>,
    pub utility: f64,
    /// `w_i(t)` by destination arrival time.
    pub delays: Vec<PiecewiseLinearFn>,
    /// Daily arrival rates `Σ_h h q_{i,k}(h, t)`.
    pub flows: FlowProfile,
}

impl IntegratedState {
    /// The analytic equilibrium of a scenario run.
    pub fn from_report(report: &ScenarioReport) -> Result<Self> {
        let eq = report
            .equilibrium
            .as_ref()
            .ok_or_else(|| Error::QrpViolated(report.short_term.qrp().first_failure().unwrap_or(0) + 1))?;
        Ok(Self {
            corridor: report.corridor.clone(),
            schedule: report.short_term.schedule().clone(),
            wages: report.wages.clone(),
            tlc_active: report.scenario.tlc_active(),
            occupancy: report.corridor.areas().to_vec(),
            ratios: report.ratios().to_vec(),
            costs: report.costs().to_vec(),
            rents: report.rents().to_vec(),
            utility: report.utility,
            delays: eq.delays().to_vec(),
            flows: flow_rates(eq)?,
        })
    }

    fn commuters(&self, i: usize) -> f64 {
        self.ratios[i] * self.occupancy[i]
    }

    /// `Σ_{j≤i} w_j`.
    fn route_delay(&self, i: usize) -> Result<PiecewiseLinearFn> {
        let mut acc = self.delays[0].clone();
        for w in &self.delays[1..=i] {
            acc = acc.add(w)?;
        }
        Ok(acc)
    }
}

/// Largest violation of each group of conditions.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GapReport {
    /// Worker totals and flow masses, relative.
    pub conservation: f64,
    /// Bottleneck discharge against queue presence, in flow rate.
    pub queueing: f64,
    /// Arrival time choice, in money.
    pub time_choice: f64,
    /// Rent sign and occupancy, relative.
    pub land_market: f64,
    /// Location and ratio choice, in money.
    pub location_choice: f64,
}

impl GapReport {
    pub fn max(&self) -> f64 {
        [
            self.conservation,
            self.queueing,
            self.time_choice,
            self.land_market,
            self.location_choice,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Largest violation over all equilibrium conditions.
pub fn equilibrium_gap(state: &IntegratedState) -> f64 {
    match gap_components(state) {
        Ok(r) => r.max(),
        Err(_) => f64::INFINITY,
    }
}

/// Residuals by condition group. Fails only on malformed states.
pub fn gap_components(state: &IntegratedState) -> Result<GapReport> {
    let n = state.corridor.location_count();
    for (what, len) in [
        ("occupancy", state.occupancy.len()),
        ("ratios", state.ratios.len()),
        ("costs", state.costs.len()),
        ("rents", state.rents.len()),
        ("delays", state.delays.len()),
        ("flows", state.flows.location_count()),
    ] {
        if len != n {
            return Err(Error::LengthMismatch {
                what,
                got: len,
                expected: n,
            });
        }
    }
    let mut report = GapReport::default();
    let sched = &state.schedule;
    let (lo, hi) = sched.horizon();

    // conservation
    let population = state.corridor.population();
    let housed: f64 = state.occupancy.iter().sum();
    report.conservation = (housed - population).abs() / population;
    for i in 0..n {
        let x = state.commuters(i);
        let carried = state.flows.location_mass(i);
        report.conservation = report.conservation.max((carried - x).abs() / x.max(1.0));
    }

    // queueing
    let flow_points = state.flows.breakpoints();
    for b in 0..n {
        let mut xs: Vec<f64> = flow_points.clone();
        for w in &state.delays[..=b] {
            xs.extend_from_slice(w.breakpoints());
        }
        xs.extend([lo, hi]);
        xs.retain(|&t| t >= lo && t <= hi);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for pair in xs.windows(2) {
            if pair[1] - pair[0] <= PIECE_EPS {
                continue;
            }
            let mid = 0.5 * (pair[0] + pair[1]);
            let inflow: f64 = (b..n).map(|j| state.flows.location_rate_at(j, mid)).sum();
            let upstream_slope: f64 = state.delays[..b].iter().map(|w| w.slope_at(mid).unwrap_or(0.0)).sum();
            let capacity = state.corridor.capacity(b) * (1.0 - upstream_slope);
            let queued = state.delays[b].eval(mid).unwrap_or(0.0) > QUEUE_EPS;
            let v = if queued {
                (inflow - capacity).abs()
            } else {
                (inflow - capacity).max(0.0)
            };
            report.queueing = report.queueing.max(v);
        }
    }

    // time choice, and the cheapest entry cost for the location condition
    let mut entry = vec![0.0; n];
    for i in 0..n {
        let route = state.route_delay(i)?;
        let lambda = state.costs[i];
        entry[i] = f64::INFINITY;
        for k in 0..sched.k_count() {
            let g = sched.cost_fn(k).add(&route)?;
            entry[i] = entry[i].min(g.min_value());
            for &t in g.breakpoints() {
                report.time_choice = report.time_choice.max(lambda - g.eval(t).unwrap());
            }
            let rate = state.flows.rate(i, k);
            let xs = rate.breakpoints();
            for (piece, &v) in rate.values().iter().enumerate() {
                let (a, b) = (xs[piece], xs[piece + 1]);
                if v <= 0.0 || b - a <= PIECE_EPS {
                    continue;
                }
                let inner = g.breakpoints().iter().copied().filter(|&t| t > a && t < b);
                for t in [a, b].into_iter().chain(inner) {
                    report.time_choice = report.time_choice.max((g.eval(t).unwrap() - lambda).abs());
                }
            }
        }
    }

    // land market
    for i in 0..n {
        let area = state.corridor.areas()[i];
        let r = state.rents[i];
        let mut v = (-r).max(0.0);
        v = v.max((state.occupancy[i] - area).max(0.0) / area);
        if r > 0.0 {
            v = v.max((state.occupancy[i] - area).abs() / area);
        }
        report.land_market = report.land_market.max(v);
    }

    // location and ratio choice
    let w = &state.wages;
    let candidates: &[f64] = if state.tlc_active { &[0.0, 1.0] } else { &[1.0] };
    for i in 0..n {
        let ff = state.corridor.cumulative_free_flow(i)?;
        let ell = if state.commuters(i) > 0.0 { state.costs[i] } else { entry[i] };
        let utility = |h: f64| h * (w.office() - ell - ff) + (1.0 - h) * w.remote() - state.rents[i];
        if state.occupancy[i] > 0.0 {
            let eta = state.ratios[i];
            report.location_choice = report.location_choice.max((utility(eta) - state.utility).abs());
        }
        for &h in candidates {
            report.location_choice = report.location_choice.max(utility(h) - state.utility);
        }
    }
    Ok(report)
}
