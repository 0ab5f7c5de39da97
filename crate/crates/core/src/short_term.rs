//! Short-term problem: system-optimal arrival pattern by bottleneck
//! decomposition, and the no-toll equilibrium obtained by replacing prices
//! with queues.

use std::fmt;

use serde::Serialize;

use crate::corridor::CorridorSpec;
use crate::error::{Error, Result};
use crate::plf::{PiecewiseLinearFn, StepFn};
use crate::schedule::{CostMode, IntervalSet, ScheduleSpec};

/// Non-fatal findings attached to a solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// The merged formula was used where the level set is not connected,
    /// so the window holds `held` instead of the demanded `mass`.
    MergedOutsideRegime { location: usize, mass: f64, held: f64 },
    /// The window of this location consists of several disjoint pieces.
    NonConvexWindow { location: usize },
    /// Queues cannot replace prices at this bottleneck.
    QrpFailed { bottleneck: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MergedOutsideRegime { location, mass, held } => write!(
                f,
                "location {}: merged formula used outside its regime (window holds {held} for demand {mass})",
                location + 1
            ),
            Self::NonConvexWindow { location } => {
                write!(f, "location {}: arrival window is not connected", location + 1)
            }
            Self::QrpFailed { bottleneck } => write!(
                f,
                "bottleneck {}: queue replacement condition fails, equilibrium not constructed",
                bottleneck + 1
            ),
        }
    }
}

/// Outcome of the queue replacement check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QrpReport {
    pub holds: bool,
    pub early_ok: bool,
    /// `(μ_i − μ_{i+1})/μ_{i+1} − γ`, infinite at the corridor end.
    pub margins: Vec<f64>,
}

impl QrpReport {
    pub fn first_failure(&self) -> Option<usize> {
        if !self.early_ok {
            return Some(0);
        }
        self.margins.iter().position(|&m| m <= 0.0)
    }
}

/// Whether queue delays can take the place of the optimal prices.
pub fn check_qrp(corridor: &CorridorSpec, sched: &ScheduleSpec) -> QrpReport {
    let early_ok = sched.beta() < 1.0;
    let margins: Vec<f64> = (0..corridor.location_count())
        .map(|i| {
            let next = corridor.capacity(i + 1);
            if next > 0.0 {
                (corridor.capacity(i) - next) / next - sched.gamma()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let holds = early_ok && margins.iter().all(|&m| m > 0.0);
    QrpReport {
        holds,
        early_ok,
        margins,
    }
}

/// System-optimal short-term state for fixed commuter masses.
#[derive(Debug, Clone, Serialize)]
pub struct ShortTermSolution {
    corridor: CorridorSpec,
    schedule: ScheduleSpec,
    mode: CostMode,
    demands: Vec<f64>,
    costs: Vec<f64>,
    windows: Vec<IntervalSet>,
    cumulative_prices: Vec<PiecewiseLinearFn>,
    prices: Vec<PiecewiseLinearFn>,
    qrp: QrpReport,
    warnings: Vec<Warning>,
}

/// Solves the short-term optimum location by location.
pub fn solve_st_so(
    corridor: &CorridorSpec,
    sched: &ScheduleSpec,
    demands: &[f64],
    mode: CostMode,
) -> Result<ShortTermSolution> {
    let n = corridor.location_count();
    if demands.len() != n {
        return Err(Error::LengthMismatch {
            what: "demands",
            got: demands.len(),
            expected: n,
        });
    }
    for (i, &x) in demands.iter().enumerate() {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::NegativeDemand(i + 1));
        }
    }
    let occupied = demands.iter().rposition(|&x| x > 0.0).map_or(0, |m| m + 1);
    if let Some(gap) = demands[..occupied].iter().position(|&x| x == 0.0) {
        return Err(Error::DemandGap(gap + 1));
    }
    let residual = corridor.residual_capacities();
    let (lo, hi) = sched.horizon();
    let envelope = sched.envelope_fn();

    let mut costs = vec![0.0; n];
    let mut windows = vec![IntervalSet::empty(); n];
    let mut warnings = Vec::new();
    for i in 0..occupied {
        costs[i] = sched.cbar(demands[i], residual[i], mode)?;
        if i > 0 && costs[i] < costs[i - 1] - 1e-12 {
            return Err(Error::CostOrdering(i, i + 1));
        }
        windows[i] = sched.level_set(costs[i])?;
        let held = windows[i].measure() * residual[i];
        if mode == CostMode::MergedFormula && (held - demands[i]).abs() > 1e-9 * demands[i].max(1.0) {
            warnings.push(Warning::MergedOutsideRegime {
                location: i,
                mass: demands[i],
                held,
            });
        }
    }

    let zero = PiecewiseLinearFn::zero(lo, hi);
    let mut cumulative_prices = Vec::with_capacity(n);
    let mut prices = Vec::with_capacity(n);
    for i in 0..n {
        let p_cum = if i < occupied {
            PiecewiseLinearFn::constant(lo, hi, costs[i])
                .subtract(&envelope)?
                .clamp_zero()
                .simplify()
        } else {
            cumulative_prices.last().cloned().unwrap_or_else(|| zero.clone())
        };
        let prev = cumulative_prices.last().unwrap_or(&zero);
        let p = p_cum.subtract(prev)?.simplify();
        prices.push(p);
        cumulative_prices.push(p_cum);
    }

    let qrp = check_qrp(corridor, sched);
    Ok(ShortTermSolution {
        corridor: corridor.clone(),
        schedule: sched.clone(),
        mode,
        demands: demands.to_vec(),
        costs,
        windows,
        cumulative_prices,
        prices,
        qrp,
        warnings,
    })
}

impl ShortTermSolution {
    pub fn corridor(&self) -> &CorridorSpec {
        &self.corridor
    }

    pub fn schedule(&self) -> &ScheduleSpec {
        &self.schedule
    }

    pub fn mode(&self) -> CostMode {
        self.mode
    }

    pub fn demands(&self) -> &[f64] {
        &self.demands
    }

    /// `λ_i`, excluding free-flow time.
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn windows(&self) -> &[IntervalSet] {
        &self.windows
    }

    /// `P_i = Σ_{j≤i} p_j`.
    pub fn cumulative_prices(&self) -> &[PiecewiseLinearFn] {
        &self.cumulative_prices
    }

    pub fn prices(&self) -> &[PiecewiseLinearFn] {
        &self.prices
    }

    pub fn qrp(&self) -> &QrpReport {
        &self.qrp
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Number of leading locations with positive demand.
    pub fn occupied(&self) -> usize {
        self.demands.iter().rposition(|&x| x > 0.0).map_or(0, |m| m + 1)
    }

    /// Cheapest priced cost available to a commuter from location `i`.
    pub fn entry_cost(&self, i: usize) -> f64 {
        self.schedule
            .envelope_fn()
            .add(&self.cumulative_prices[i])
            .expect("same domain")
            .min_value()
    }

    /// `Σ λ_i X_i`.
    pub fn total_commuting_cost(&self) -> f64 {
        self.costs.iter().zip(&self.demands).map(|(l, x)| l * x).sum()
    }

    /// Objective of the optimal problem: `Σ μ̄_i ∫_{T_i} ĉ`.
    pub fn so_schedule_cost(&self) -> f64 {
        let envelope = self.schedule.envelope_fn();
        self.corridor
            .residual_capacities()
            .iter()
            .zip(&self.windows)
            .map(|(mu, w)| {
                mu * w
                    .intervals()
                    .iter()
                    .map(|&(a, b)| envelope.integral_between(a, b))
                    .sum::<f64>()
            })
            .sum()
    }
}

/// The no-toll equilibrium in which queue delays equal the optimal prices.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumView {
    solution: ShortTermSolution,
    /// `τ_i(t)`: time of entering bottleneck `i` for destination arrival `t`.
    entry_times: Vec<PiecewiseLinearFn>,
    min_entry_slope: f64,
    identity_residual: f64,
    warnings: Vec<Warning>,
}

/// Replaces prices by queue delays; refuses when the replacement condition
/// fails.
pub fn equilibrium_from_qrp(so: &ShortTermSolution) -> Result<EquilibriumView> {
    if let Some(i) = so.qrp.first_failure() {
        return Err(Error::QrpViolated(i + 1));
    }
    let sched = &so.schedule;
    let (lo, hi) = sched.horizon();
    let identity = PiecewiseLinearFn::new(vec![lo, hi], vec![lo, hi])?;
    let mut entry_times = Vec::new();
    let mut min_entry_slope = f64::INFINITY;
    for i in 0..so.corridor.location_count() {
        let ff = so.corridor.cumulative_free_flow(i)?;
        let tau = identity.subtract(&so.cumulative_prices[i])?.add_scalar(-ff).simplify();
        min_entry_slope = tau.slopes().into_iter().fold(min_entry_slope, f64::min);
        entry_times.push(tau);
    }

    let mut identity_residual: f64 = 0.0;
    let mut warnings = Vec::new();
    for i in 0..so.occupied() {
        if !so.windows[i].is_convex() {
            warnings.push(Warning::NonConvexWindow { location: i });
        }
        for (k, &(wlo, whi)) in sched.minimizer_windows().iter().enumerate() {
            let cost = sched.cost_fn(k).add(&so.cumulative_prices[i])?;
            let support = so.windows[i].intersect(wlo, whi);
            let pts = cost
                .breakpoints()
                .iter()
                .copied()
                .filter(|&t| support.contains(t))
                .chain(support.endpoints());
            for t in pts {
                identity_residual = identity_residual.max((cost.eval(t).unwrap() - so.costs[i]).abs());
            }
        }
    }
    Ok(EquilibriumView {
        solution: so.clone(),
        entry_times,
        min_entry_slope,
        identity_residual,
        warnings,
    })
}

impl EquilibriumView {
    pub fn solution(&self) -> &ShortTermSolution {
        &self.solution
    }

    /// Queue delay `w_i(t)` by destination arrival time.
    pub fn delays(&self) -> &[PiecewiseLinearFn] {
        &self.solution.prices
    }

    pub fn entry_times(&self) -> &[PiecewiseLinearFn] {
        &self.entry_times
    }

    /// Smallest slope of any `τ_i`; positive when the construction is
    /// consistent.
    pub fn min_entry_slope(&self) -> f64 {
        self.min_entry_slope
    }

    /// Largest violation of `c_k(t) + Σ_{j≤i} w_j(t) = λ_i` on used times.
    pub fn identity_residual(&self) -> f64 {
        self.identity_residual
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }
}

/// Destination-arrival flow rates by location and preferred time.
#[derive(Debug, Clone, Serialize)]
pub struct FlowProfile {
    rates: Vec<Vec<StepFn>>,
}

impl FlowProfile {
    pub fn new(rates: Vec<Vec<StepFn>>) -> Self {
        Self { rates }
    }

    /// Rate of commuters from location `i` with preferred time `k`.
    pub fn rate(&self, i: usize, k: usize) -> &StepFn {
        &self.rates[i][k]
    }

    pub fn location_rates(&self, i: usize) -> &[StepFn] {
        &self.rates[i]
    }

    pub fn location_count(&self) -> usize {
        self.rates.len()
    }

    pub fn location_rate_at(&self, i: usize, t: f64) -> f64 {
        self.rates[i].iter().map(|f| f.eval(t)).sum()
    }

    pub fn location_mass(&self, i: usize) -> f64 {
        self.rates[i].iter().map(StepFn::integral).sum()
    }

    /// All breakpoints of all rates, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .rates
            .iter()
            .flatten()
            .flat_map(|f| f.breakpoints().iter().copied())
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }
}

/// Arrival rates consistent with the queue delays: the outflow of bottleneck
/// `i` minus the part of it that continues from bottleneck `i + 1`,
/// `μ_i σ̇_i − μ_{i+1} σ̇_{i+1}` with `σ̇_j = 1 + ċ_k` where bottleneck
/// `j − 1` is queued and `σ̇_j = 1` elsewhere.
pub fn flow_rates(eq: &EquilibriumView) -> Result<FlowProfile> {
    let so = &eq.solution;
    let sched = &so.schedule;
    let corridor = &so.corridor;
    let n = corridor.location_count();
    let windows = sched.minimizer_windows();
    let mut rates = Vec::with_capacity(n);
    for i in 0..n {
        let mut per_k = Vec::with_capacity(windows.len());
        let own = &so.windows[i];
        if i >= so.occupied() || own.measure() == 0.0 {
            rates.push(vec![StepFn::zero(); windows.len()]);
            continue;
        }
        let inner = if i > 0 { so.windows[i - 1].clone() } else { IntervalSet::empty() };
        for (k, &(wlo, whi)) in windows.iter().enumerate() {
            let support = own.intersect(wlo, whi);
            if support.measure() == 0.0 {
                per_k.push(StepFn::zero());
                continue;
            }
            let tk = sched.preferred_times()[k];
            let mut xs: Vec<f64> = support
                .endpoints()
                .chain(inner.endpoints())
                .chain([tk])
                .filter(|&t| t >= support.intervals()[0].0 && t <= support.intervals().last().unwrap().1)
                .collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let mut vals = Vec::with_capacity(xs.len());
            for w in xs.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                if !support.contains_interior(mid) {
                    vals.push(0.0);
                    continue;
                }
                let slope = sched.cost_slope(k, mid);
                let sigma_dot = |j: usize| -> f64 {
                    if j > 0 && so.windows[j - 1].contains_interior(mid) {
                        1.0 + slope
                    } else {
                        1.0
                    }
                };
                let rate = corridor.capacity(i) * sigma_dot(i) - corridor.capacity(i + 1) * sigma_dot(i + 1);
                if rate < -1e-12 {
                    return Err(Error::NegativeRate {
                        location: i + 1,
                        k: k + 1,
                        rate,
                        t: mid,
                    });
                }
                vals.push(rate);
            }
            per_k.push(StepFn::new(xs, vals)?);
        }
        rates.push(per_k);
    }
    Ok(FlowProfile { rates })
}

/// Queue-delay and schedule-delay cost totals carried by the flows.
pub fn cost_split(eq: &EquilibriumView, flows: &FlowProfile) -> (f64, f64) {
    let so = &eq.solution;
    let sched = &so.schedule;
    let mut queue = 0.0;
    let mut schedule = 0.0;
    for i in 0..so.occupied() {
        for k in 0..sched.k_count() {
            let f = flows.rate(i, k);
            queue += f.integral_product(&so.cumulative_prices[i]);
            schedule += f.integral_product(&sched.cost_fn(k));
        }
    }
    (queue, schedule)
}
