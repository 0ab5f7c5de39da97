//! First-in-first-out point queues fed by the analytic departure profile.
//!
//! Time runs on a uniform grid in bottleneck time. Each step a bottleneck
//! discharges at most `μ_i Δt`; its arrivals are the origin departures of
//! location `i` plus the discharge of bottleneck `i + 1` shifted by the
//! link's free-flow time.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::plf::PiecewiseLinearFn;
use crate::short_term::{EquilibriumView, FlowProfile};

/// Comparison of simulated queues with the analytic delays.
#[derive(Debug, Clone, Serialize)]
pub struct QueueReport {
    pub dt: f64,
    /// `max_t |ŵ_i(τ_i(t)) − w_i(t)|` per bottleneck.
    pub delay_deviation: Vec<f64>,
    pub max_delay_deviation: f64,
    /// Largest `|realized cost − λ_i|` over used arrival times.
    pub cost_gap: f64,
    /// Smallest `realized cost − λ_i` over all departure times; negative
    /// values are profitable deviations.
    pub min_deviation_margin: f64,
}

struct Sim {
    s0: f64,
    dt: f64,
    arrivals: Vec<Vec<f64>>,
    exits: Vec<Vec<f64>>,
}

fn interp(series: &[f64], s0: f64, dt: f64, x: f64) -> f64 {
    let pos = (x - s0) / dt;
    if pos <= 0.0 {
        return series[0];
    }
    let j = pos.floor() as usize;
    if j + 1 >= series.len() {
        return *series.last().unwrap();
    }
    let w = pos - j as f64;
    series[j] + w * (series[j + 1] - series[j])
}

impl Sim {
    fn arrivals_at(&self, i: usize, s: f64) -> f64 {
        interp(&self.arrivals[i], self.s0, self.dt, s)
    }

    fn exits_at(&self, i: usize, s: f64) -> f64 {
        interp(&self.exits[i], self.s0, self.dt, s)
    }

    /// Waiting time of a vehicle joining queue `i` at `s`.
    fn delay(&self, i: usize, s: f64) -> f64 {
        let target = self.arrivals_at(i, s);
        let b = &self.exits[i];
        let tol = 1e-9 * b.last().unwrap().max(1.0);
        if self.exits_at(i, s) >= target - tol {
            return 0.0;
        }
        let j = b.partition_point(|&v| v < target - tol);
        if j == 0 {
            return 0.0;
        }
        if j >= b.len() {
            return (self.s0 + (b.len() - 1) as f64 * self.dt - s).max(0.0);
        }
        let (b0, b1) = (b[j - 1], b[j]);
        let w = if b1 > b0 { ((target - b0) / (b1 - b0)).clamp(0.0, 1.0) } else { 1.0 };
        let exit = self.s0 + (j as f64 - 1.0 + w) * self.dt;
        (exit - s).max(0.0)
    }
}

/// Simulates the queues produced by the analytic departures and measures the
/// realized delays and costs against the analytic equilibrium.
pub fn queue_sim(eq: &EquilibriumView, flows: &FlowProfile, dt: f64) -> Result<QueueReport> {
    let so = eq.solution();
    let corridor = so.corridor();
    let sched = so.schedule();
    let n = corridor.location_count();
    if flows.location_count() != n {
        return Err(Error::MismatchedConfig("flow profile and corridor sizes differ".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InfeasibleDiscretization(format!("time step {dt} must be positive")));
    }
    let (lo, hi) = sched.horizon();
    let free_flow = corridor.free_flow();

    let mut departures: Vec<(PiecewiseLinearFn, PiecewiseLinearFn, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        let mut cum = PiecewiseLinearFn::zero(lo, hi);
        for f in flows.location_rates(i) {
            cum = cum.add(&f.cumulative(lo, hi))?;
        }
        let total = cum.eval(hi).unwrap();
        departures.push((eq.entry_times()[i].inverse()?, cum, total));
    }
    let origin = |i: usize, s: f64| -> f64 {
        let (inv, cum, total) = &departures[i];
        let (a, b) = inv.domain();
        if s <= a {
            0.0
        } else if s >= b {
            *total
        } else {
            cum.eval(inv.eval(s).unwrap()).unwrap()
        }
    };

    let s_start = eq
        .entry_times()
        .iter()
        .map(|tau| tau.eval(lo).unwrap())
        .fold(f64::INFINITY, f64::min)
        - dt;
    let s_end = hi + 0.05 * (hi - lo) + 10.0 * dt;
    let steps = ((s_end - s_start) / dt).ceil() as usize + 1;
    let mut sim = Sim {
        s0: s_start,
        dt,
        arrivals: vec![vec![0.0; steps]; n],
        exits: vec![vec![0.0; steps]; n],
    };
    for step in 0..steps {
        let s = s_start + step as f64 * dt;
        for i in (0..n).rev() {
            let upstream = if i + 1 < n {
                let x = s - free_flow[i + 1];
                let pos = (x - s_start) / dt;
                if pos <= 0.0 {
                    sim.exits[i + 1][0]
                } else {
                    // the upstream history is complete through this step
                    let j = pos.floor() as usize;
                    let hist = &sim.exits[i + 1][..=step];
                    if j + 1 >= hist.len() {
                        hist[hist.len() - 1]
                    } else {
                        let w = pos - j as f64;
                        hist[j] + w * (hist[j + 1] - hist[j])
                    }
                }
            } else {
                0.0
            };
            let a = origin(i, s) + upstream;
            sim.arrivals[i][step] = a;
            sim.exits[i][step] = if step == 0 {
                a.min(corridor.capacity(i) * dt)
            } else {
                (sim.exits[i][step - 1] + corridor.capacity(i) * dt).min(a)
            };
        }
    }
    for i in 0..n {
        let a = *sim.arrivals[i].last().unwrap();
        let b = *sim.exits[i].last().unwrap();
        if a - b > 1e-6 * a.max(1.0) {
            return Err(Error::CapacityViolation {
                bottleneck: i + 1,
                excess: a - b,
            });
        }
    }

    let samples = sample_times(lo, hi, dt, eq.delays());
    let mut delay_deviation = vec![0.0f64; n];
    for i in 0..n {
        let tau = &eq.entry_times()[i];
        let w = &eq.delays()[i];
        for &t in &samples {
            let sim_w = sim.delay(i, tau.eval(t).unwrap());
            delay_deviation[i] = delay_deviation[i].max((sim_w - w.eval(t).unwrap()).abs());
        }
    }
    let max_delay_deviation = delay_deviation.iter().copied().fold(0.0, f64::max);

    let trace = |i: usize, s: f64| -> (f64, f64) {
        let mut x = s;
        let mut waited = 0.0;
        for j in (0..=i).rev() {
            let w = sim.delay(j, x);
            waited += w;
            x += w + free_flow[j];
        }
        (x, waited)
    };
    let times = sched.preferred_times();
    let (beta, gamma) = (sched.beta(), sched.gamma());
    let cost_k = |k: usize, t: f64| if t < times[k] { beta * (times[k] - t) } else { gamma * (t - times[k]) };

    let mut cost_gap: f64 = 0.0;
    let mut min_deviation_margin = f64::INFINITY;
    for i in 0..so.occupied() {
        let lambda = so.costs()[i];
        let tau = &eq.entry_times()[i];
        for (k, rate) in flows.location_rates(i).iter().enumerate() {
            let xs = rate.breakpoints();
            for (piece, &v) in rate.values().iter().enumerate() {
                if v <= 0.0 {
                    continue;
                }
                let (a, b) = (xs[piece], xs[piece + 1]);
                let m = (((b - a) / dt).ceil() as usize).max(3);
                for q in 0..m {
                    let t = a + (q as f64 + 0.5) * (b - a) / m as f64;
                    let (arrive, waited) = trace(i, tau.eval(t).unwrap());
                    cost_gap = cost_gap.max((cost_k(k, arrive) + waited - lambda).abs());
                }
            }
        }
        for step in 0..steps {
            let s = s_start + step as f64 * dt;
            let (arrive, waited) = trace(i, s);
            if arrive < lo || arrive > hi {
                continue;
            }
            let best = (0..times.len()).map(|k| cost_k(k, arrive)).fold(f64::INFINITY, f64::min);
            min_deviation_margin = min_deviation_margin.min(best + waited - lambda);
        }
    }
    if !min_deviation_margin.is_finite() {
        min_deviation_margin = 0.0;
    }
    Ok(QueueReport {
        dt,
        delay_deviation,
        max_delay_deviation,
        cost_gap,
        min_deviation_margin,
    })
}

fn sample_times(lo: f64, hi: f64, dt: f64, delays: &[PiecewiseLinearFn]) -> Vec<f64> {
    let count = ((hi - lo) / dt).ceil() as usize;
    let mut ts: Vec<f64> = (0..=count).map(|m| (lo + m as f64 * dt).min(hi)).collect();
    ts.extend(delays.iter().flat_map(|w| w.breakpoints().iter().copied()));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}
