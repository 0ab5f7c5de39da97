//! Discretized optimum as a min-cost flow on a time-expanded network.
//!
//! Slot `s` covers `[lo + sΔt, lo + (s+1)Δt)` and is priced at its midpoint.
//! Location `i` feeds a chain of capacity arcs `v(s,i) → v(s,i−1) → … →
//! sink`, one per bottleneck, so flow from farther locations shares every
//! bottleneck nearer the CBD.

use serde::Serialize;

use super::min_cost_flow::{MinCostFlow, Status};
use crate::corridor::CorridorSpec;
use crate::error::{Error, Result};
use crate::schedule::ScheduleSpec;
use crate::short_term::ShortTermSolution;

/// Mass units per commuter in the integer network.
pub const FLOW_SCALE: f64 = 1e6;
/// Cost units per unit of money in the integer network.
pub const COST_SCALE: f64 = 1e6;

/// Slot grid and data of the discretized problem.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteInstance {
    pub dt: f64,
    /// Slot midpoints covering the horizon.
    pub slots: Vec<f64>,
    /// `ĉ` at each slot midpoint.
    pub slot_costs: Vec<f64>,
    pub demands: Vec<f64>,
    /// `μ_i Δt` per bottleneck.
    pub slot_capacities: Vec<f64>,
}

impl DiscreteInstance {
    pub fn new(corridor: &CorridorSpec, sched: &ScheduleSpec, demands: &[f64], dt: f64) -> Result<Self> {
        let n = corridor.location_count();
        if demands.len() != n {
            return Err(Error::LengthMismatch {
                what: "demands",
                got: demands.len(),
                expected: n,
            });
        }
        if let Some(i) = demands.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::NegativeDemand(i + 1));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InfeasibleDiscretization(format!("time step {dt} must be positive")));
        }
        let (lo, hi) = sched.horizon();
        let ratio = (hi - lo) / dt;
        let count = if (ratio - ratio.round()).abs() < 1e-9 { ratio.round() } else { ratio.floor() } as usize;
        let slots: Vec<f64> = (0..count).map(|s| lo + (s as f64 + 0.5) * dt).collect();
        let slot_costs = slots
            .iter()
            .map(|&t| sched.envelope(t))
            .collect::<Result<Vec<_>>>()?;
        let inst = Self {
            dt,
            slots,
            slot_costs,
            demands: demands.to_vec(),
            slot_capacities: corridor.capacities().iter().map(|m| m * dt).collect(),
        };
        inst.check_feasible()?;
        Ok(inst)
    }

    /// Mass that must cross bottleneck `i`.
    fn through(&self, i: usize) -> f64 {
        self.demands[i..].iter().sum()
    }

    fn check_feasible(&self) -> Result<()> {
        let m = self.slots.len() as f64;
        for i in 0..self.demands.len() {
            let need = self.through(i);
            if self.slot_capacities[i] * m < need {
                return Err(Error::InfeasibleDiscretization(format!(
                    "bottleneck i={} can pass {} over the horizon but {} must cross it",
                    i + 1,
                    self.slot_capacities[i] * m,
                    need
                )));
            }
        }
        Ok(())
    }

    /// Smallest envelope level whose cheapest slots pass every bottleneck's
    /// load.
    fn cut_level(&self) -> f64 {
        let mut costs = self.slot_costs.clone();
        costs.sort_by(f64::total_cmp);
        let needed = (0..self.demands.len())
            .map(|i| (self.through(i) / self.slot_capacities[i]).ceil() as usize)
            .max()
            .unwrap_or(0);
        if needed == 0 {
            return 0.0;
        }
        costs[(needed - 1).min(costs.len() - 1)]
    }
}

/// Oracle result for one discretized solve.
#[derive(Debug, Clone, Serialize)]
pub struct OracleVerdict {
    pub dt: f64,
    pub objective: f64,
    /// Per-location `λ_i` estimates from the node potentials.
    pub duals: Vec<f64>,
    /// Per-bottleneck slot prices `p_i(t_s)`.
    pub slot_prices: Vec<Vec<f64>>,
    pub slots: Vec<f64>,
    /// Largest relative violation of demand conservation.
    pub conservation_residual: f64,
    /// Largest relative capacity overshoot over slots and bottlenecks.
    pub capacity_residual: f64,
    /// Filled by [`OracleVerdict::against`].
    pub analytic: Option<AnalyticComparison>,
}

/// Deviations of an oracle solve from the analytic optimum.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticComparison {
    pub analytic_objective: f64,
    pub objective_rel_error: f64,
    pub max_dual_deviation: f64,
    pub max_price_deviation: f64,
}

impl OracleVerdict {
    /// Attaches the deviations from an analytic solution of the same inputs.
    pub fn against(mut self, so: &ShortTermSolution) -> Result<Self> {
        if so.demands().len() != self.duals.len() {
            return Err(Error::MismatchedConfig("oracle and analytic location counts differ".into()));
        }
        let analytic_objective = so.so_schedule_cost();
        let objective_rel_error = if analytic_objective.abs() > 0.0 {
            (self.objective - analytic_objective).abs() / analytic_objective.abs()
        } else {
            self.objective.abs()
        };
        let max_dual_deviation = self
            .duals
            .iter()
            .zip(so.costs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mut max_price_deviation: f64 = 0.0;
        for (i, prices) in self.slot_prices.iter().enumerate() {
            let exact = &so.prices()[i];
            for (&t, &p) in self.slots.iter().zip(prices) {
                if let Some(v) = exact.eval(t) {
                    max_price_deviation = max_price_deviation.max((p - v).abs());
                }
            }
        }
        self.analytic = Some(AnalyticComparison {
            analytic_objective,
            objective_rel_error,
            max_dual_deviation,
            max_price_deviation,
        });
        Ok(self)
    }
}

/// Solves the discretized optimum exactly in integer arithmetic.
pub fn lp_st_so(corridor: &CorridorSpec, sched: &ScheduleSpec, demands: &[f64], dt: f64) -> Result<OracleVerdict> {
    let inst = DiscreteInstance::new(corridor, sched, demands, dt)?;
    let (b, g) = (sched.beta(), sched.gamma());
    let mut level = 1.5 * inst.cut_level() + 5.0 * (b + g) * dt + 1.0;
    let top = inst.slot_costs.iter().copied().fold(0.0, f64::max);
    loop {
        if !fits(&inst, level) {
            if level >= top {
                return Err(Error::InfeasibleDiscretization(
                    "rounded demand exceeds the rounded slot capacity".into(),
                ));
            }
            level *= 2.0;
            continue;
        }
        let verdict = solve_restricted(&inst, level)?;
        // a dual at the cut-off means excluded slots could have been used
        let binding = verdict.duals.iter().any(|&l| l >= level - (b + g) * dt);
        if !binding || level >= top {
            return Ok(verdict);
        }
        level *= 2.0;
    }
}

/// Whether the rounded demands pass every bottleneck using only slots with
/// cost at most `level`. Every slot offers the same capacity, so the nested
/// load condition is also sufficient.
fn fits(inst: &DiscreteInstance, level: f64) -> bool {
    let m = inst.slot_costs.iter().filter(|&&c| c <= level).count() as i64;
    let mut load = 0i64;
    for i in (0..inst.demands.len()).rev() {
        load += (inst.demands[i] * FLOW_SCALE).round() as i64;
        if load > m * (inst.slot_capacities[i] * FLOW_SCALE).round() as i64 {
            return false;
        }
    }
    true
}

fn solve_restricted(inst: &DiscreteInstance, level: f64) -> Result<OracleVerdict> {
    let n = inst.demands.len();
    let used: Vec<usize> = (0..inst.slots.len()).filter(|&s| inst.slot_costs[s] <= level).collect();
    let m = used.len();
    let loc = |i: usize| i;
    let sink = n;
    let chain = |u: usize, i: usize| n + 1 + u * n + i;
    let mut net = MinCostFlow::new(n + 1 + m * n);

    let supplies: Vec<i64> = inst.demands.iter().map(|x| (x * FLOW_SCALE).round() as i64).collect();
    for (i, &s) in supplies.iter().enumerate() {
        net.set_supply(loc(i), s);
    }
    net.set_supply(sink, -supplies.iter().sum::<i64>());
    let caps: Vec<i64> = inst.slot_capacities.iter().map(|c| (c * FLOW_SCALE).round() as i64).collect();

    let mut entry_arcs = vec![Vec::with_capacity(m); n];
    let mut cap_arcs = vec![Vec::with_capacity(m); n];
    for (u, &s) in used.iter().enumerate() {
        let cost = (inst.slot_costs[s] * COST_SCALE).round() as i64;
        for i in 0..n {
            entry_arcs[i].push(net.add_arc(loc(i), chain(u, i), None, cost));
            let down = if i == 0 { sink } else { chain(u, i - 1) };
            cap_arcs[i].push(net.add_arc(chain(u, i), down, Some(caps[i]), 0));
        }
    }
    let sol = net.solve();
    if sol.status == Status::Infeasible {
        return Err(Error::InfeasibleDiscretization(format!(
            "no feasible slot assignment below cost level {level}"
        )));
    }

    let mut objective = 0.0;
    let mut conservation_residual: f64 = 0.0;
    for i in 0..n {
        let mut sent = 0i64;
        for (u, &e) in entry_arcs[i].iter().enumerate() {
            let f = sol.flow[e];
            sent += f;
            objective += f as f64 / FLOW_SCALE * inst.slot_costs[used[u]];
        }
        let rel = (sent - supplies[i]).abs() as f64 / (supplies[i].max(1) as f64);
        conservation_residual = conservation_residual.max(rel);
    }
    let mut capacity_residual: f64 = 0.0;
    for i in 0..n {
        for &e in &cap_arcs[i] {
            let over = (sol.flow[e] - caps[i]).max(0) as f64 / caps[i].max(1) as f64;
            capacity_residual = capacity_residual.max(over);
        }
    }

    let pi = &sol.potential;
    let duals: Vec<f64> = (0..n)
        .map(|i| {
            if supplies[i] == 0 {
                0.0
            } else {
                (pi[sink] - pi[loc(i)]) as f64 / COST_SCALE
            }
        })
        .collect();
    let mut slot_prices = vec![vec![0.0; inst.slots.len()]; n];
    for (u, &s) in used.iter().enumerate() {
        for i in 0..n {
            let down = if i == 0 { sink } else { chain(u, i - 1) };
            let price = (pi[down] - pi[chain(u, i)]).max(0);
            slot_prices[i][s] = price as f64 / COST_SCALE;
        }
    }
    Ok(OracleVerdict {
        dt: inst.dt,
        objective,
        duals,
        slot_prices,
        slots: inst.slots.clone(),
        conservation_residual,
        capacity_residual,
        analytic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::CostMode;
    use crate::short_term::solve_st_so;

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

    #[test]
    fn zero_demand_is_free() {
        let v = lp_st_so(&corridor(), &single(), &[0.0, 0.0, 0.0], 0.05).unwrap();
        assert_eq!(v.objective, 0.0);
        assert!(v.duals.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn ns_reference_objective_and_duals() {
        let c = corridor();
        let s = single();
        let x = [750.0, 1500.0, 700.0];
        let so = solve_st_so(&c, &s, &x, CostMode::Exact).unwrap();
        let v = lp_st_so(&c, &s, &x, 0.05).unwrap().against(&so).unwrap();
        let cmp = v.analytic.as_ref().unwrap();
        assert!((cmp.analytic_objective - 14275.0).abs() < 1e-9);
        assert!(cmp.objective_rel_error <= 0.01, "{cmp:?}");
        assert!(cmp.max_dual_deviation <= 5.0 * 0.6 * 0.05, "{cmp:?}");
        assert_eq!(v.capacity_residual, 0.0);
        assert_eq!(v.conservation_residual, 0.0);
    }

    #[test]
    fn disjoint_regime_dual_follows_exact_cost() {
        let c = CorridorSpec::new(vec![30.0], vec![0.0], vec![750.0]).unwrap();
        let s = ScheduleSpec::new(vec![50.0, 70.0], 0.3, 0.6, (0.0, 100.0)).unwrap();
        let v = lp_st_so(&c, &s, &[750.0], 0.01).unwrap();
        assert!((v.duals[0] - 2.5).abs() < 0.05, "{:?}", v.duals);
    }

    #[test]
    fn too_short_horizon_is_infeasible() {
        let c = CorridorSpec::new(vec![10.0], vec![0.0], vec![2000.0]).unwrap();
        let s = ScheduleSpec::new(vec![60.0], 0.3, 0.6, (0.0, 100.0)).unwrap();
        assert!(matches!(
            lp_st_so(&c, &s, &[2000.0], 0.05),
            Err(Error::InfeasibleDiscretization(_))
        ));
    }
}
