use std::path::Path;

use anyhow::{bail, Context, Result};
use corridor_equilibrium::long_term::g_value;
use corridor_equilibrium::oracle::{gap_components, lp_st_so, queue_sim, GapReport, IntegratedState};
use corridor_equilibrium::scenarios::{compare, paradox_scan, run_scenario, ParadoxGrid, ScanOutcome, Scenario, ScenarioReport};
use corridor_equilibrium::short_term::flow_rates;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{num, write_json, Table};

/// Points per sampled delay series.
pub const SERIES_POINTS: usize = 1000;

/// Whether a command's checks all passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    VerificationFailed,
}

fn run(cfg: &RunConfig, s: Scenario) -> Result<ScenarioReport> {
    run_scenario(&cfg.corridor, &cfg.base, &cfg.wages, s, cfg.mode).with_context(|| format!("scenario {}", s.label()))
}

fn tag(s: Scenario) -> String {
    s.label().to_ascii_lowercase()
}

/// Per-location table of a scenario: enough columns to recompute the total
/// cost and the utility from the file alone.
pub fn report_table(cfg: &RunConfig, r: &ScenarioReport) -> Result<Table> {
    let mut t = Table::new(["location", "zone", "area", "free_flow_cum", "ratio", "commuters", "cost", "rent"]);
    for i in 0..r.corridor.location_count() {
        t.row(vec![
            (i + 1).to_string(),
            r.zones()[i].to_string(),
            num(r.corridor.areas()[i]),
            num(r.corridor.cumulative_free_flow(i)?),
            num(r.ratios()[i]),
            num(r.commuters()[i]),
            num(r.costs()[i]),
            num(r.rents()[i]),
        ]);
    }
    for w in &r.warnings {
        t.note(format!("warning: {w}"));
    }
    if let Some(i) = r.mixed_zone().filter(|&i| r.ratios()[i] > 0.0 && r.ratios()[i] < 1.0) {
        let sched = cfg.base.for_scenario(r.scenario);
        let g = g_value(&r.corridor, sched, &r.wages, i, r.commuters()[i], r.mode)?;
        t.note(format!(
            "location {}: mixed zone, cost pinned by G(X) = theta_remote (G(X) - theta_remote = {})",
            i + 1,
            num(g - r.wages.remote())
        ));
    }
    if r.equilibrium.is_none() {
        t.note("queue replacement fails; no equilibrium delay series");
    }
    Ok(t)
}

/// `w_i(t)` at evenly spaced arrival times spanning all arrival windows.
fn delay_table(r: &ScenarioReport) -> Option<Table> {
    let eq = r.equilibrium.as_ref()?;
    let ends: Vec<f64> = r.short_term.windows().iter().flat_map(|w| w.endpoints()).collect();
    let (lo, hi) = if ends.is_empty() {
        r.short_term.schedule().horizon()
    } else {
        ends.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    };
    let n = r.corridor.location_count();
    let mut t = Table::new(std::iter::once("t".to_string()).chain((1..=n).map(|i| format!("w_{i}"))));
    for k in 0..SERIES_POINTS {
        let x = lo + (hi - lo) * k as f64 / (SERIES_POINTS - 1) as f64;
        let mut cells = vec![num(x)];
        cells.extend(eq.delays().iter().map(|w| num(w.eval(x).unwrap_or(0.0))));
        t.row(cells);
    }
    Some(t)
}

#[derive(Serialize)]
struct ScenarioSummary {
    scenario: &'static str,
    utility: f64,
    total_cost: f64,
    mixed_zone: Option<usize>,
    equilibrium: bool,
    warnings: Vec<String>,
    report: String,
    delays: Option<String>,
}

#[derive(Serialize)]
struct SolveSummary {
    command: &'static str,
    mode: String,
    seed: Option<u64>,
    scenarios: Vec<ScenarioSummary>,
}

pub fn solve(cfg: &RunConfig, chosen: &[Scenario], out: &Path, seed: Option<u64>) -> Result<Outcome> {
    let mut summaries = Vec::new();
    for &s in chosen {
        let r = run(cfg, s)?;
        let report = format!("{}_report.csv", tag(s));
        report_table(cfg, &r)?.write(&out.join(&report))?;
        let delays = match delay_table(&r) {
            Some(t) => {
                let name = format!("{}_delays.csv", tag(s));
                t.write(&out.join(&name))?;
                Some(name)
            }
            None => None,
        };
        println!("{}: rho={} tc={} ({report})", tag(s), num(r.utility), num(r.total_cost));
        for w in &r.warnings {
            println!("  warning: {w}");
        }
        summaries.push(ScenarioSummary {
            scenario: s.label(),
            utility: r.utility,
            total_cost: r.total_cost,
            mixed_zone: r.mixed_zone().map(|i| i + 1),
            equilibrium: r.equilibrium.is_some(),
            warnings: r.warnings.iter().map(ToString::to_string).collect(),
            report,
            delays,
        });
    }
    write_json(
        &out.join("summary.json"),
        &SolveSummary {
            command: "solve",
            mode: cfg.mode.to_string(),
            seed,
            scenarios: summaries,
        },
    )?;
    Ok(Outcome::Pass)
}

/// Parses `A,B` into two scenarios.
pub fn parse_pair(s: &str) -> Result<(Scenario, Scenario)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("invalid pair '{s}': expected two scenarios separated by a comma");
    }
    let parse = |p: &str| p.parse::<Scenario>().map_err(|e| anyhow::anyhow!("invalid pair '{s}': {e}"));
    Ok((parse(parts[0])?, parse(parts[1])?))
}

#[derive(Serialize)]
struct CompareSummary {
    command: &'static str,
    mode: String,
    seed: Option<u64>,
    first: &'static str,
    second: &'static str,
    utility_first: f64,
    utility_second: f64,
    total_cost_first: f64,
    total_cost_second: f64,
    delta_utility: f64,
    delta_total_cost: f64,
    paradox: bool,
    failed_claims: usize,
}

pub fn compare_cmd(cfg: &RunConfig, pair: (Scenario, Scenario), out: &Path, seed: Option<u64>) -> Result<Outcome> {
    let (a, b) = (run(cfg, pair.0)?, run(cfg, pair.1)?);
    let cmp = compare(&a, &b)?;
    let stem = format!("compare_{}_{}", tag(pair.0), tag(pair.1));

    let mut deltas = Table::new([
        "location", "cost_first", "cost_second", "delta_cost", "ratio_first", "ratio_second", "rent_first", "rent_second",
        "delta_rent",
    ]);
    for i in 0..a.corridor.location_count() {
        deltas.row(vec![
            (i + 1).to_string(),
            num(a.costs()[i]),
            num(b.costs()[i]),
            num(cmp.delta_costs[i]),
            num(a.ratios()[i]),
            num(b.ratios()[i]),
            num(a.rents()[i]),
            num(b.rents()[i]),
            num(cmp.delta_rents[i]),
        ]);
    }
    deltas.note(format!("delta_utility = {}", num(cmp.delta_utility)));
    deltas.note(format!("delta_total_cost = {}", num(cmp.delta_total_cost)));
    deltas.note(format!("paradox = {}", cmp.paradox));
    for w in a.warnings.iter().chain(&b.warnings) {
        deltas.note(format!("warning: {w}"));
    }
    deltas.write(&out.join(format!("{stem}.csv")))?;

    let mut verdicts = Table::new(["claim", "location", "expected", "delta", "status"]);
    for v in &cmp.verdicts {
        verdicts.row(vec![
            v.claim.to_string(),
            v.location.map_or(String::new(), |i| (i + 1).to_string()),
            v.expected.to_string(),
            num(v.delta),
            serde_json::to_value(v.status)?.as_str().unwrap_or_default().to_string(),
        ]);
    }
    verdicts.write(&out.join(format!("{stem}_verdicts.csv")))?;

    let failed = cmp.failures().count();
    println!(
        "{} -> {}: delta_rho={} delta_tc={} paradox={} failed_claims={failed}",
        tag(pair.0),
        tag(pair.1),
        num(cmp.delta_utility),
        num(cmp.delta_total_cost),
        cmp.paradox
    );
    for v in cmp.failures() {
        let at = v.location.map_or(String::new(), |i| format!(" at location {}", i + 1));
        println!("  failed: {}{at}: expected {}, delta {}", v.claim, v.expected, num(v.delta));
    }
    write_json(
        &out.join("summary.json"),
        &CompareSummary {
            command: "compare",
            mode: cfg.mode.to_string(),
            seed,
            first: pair.0.label(),
            second: pair.1.label(),
            utility_first: a.utility,
            utility_second: b.utility,
            total_cost_first: a.total_cost,
            total_cost_second: b.total_cost,
            delta_utility: cmp.delta_utility,
            delta_total_cost: cmp.delta_total_cost,
            paradox: cmp.paradox,
            failed_claims: failed,
        },
    )?;
    Ok(Outcome::Pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub scenario: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub budget: f64,
    pub pass: bool,
}

fn check(scenario: Scenario, name: &'static str, value: f64, budget: f64) -> Check {
    Check {
        scenario: scenario.label(),
        name,
        value,
        budget,
        pass: value <= budget,
    }
}

/// Residual budgets of `verify` at time step `dt`.
pub struct Budgets {
    pub objective_rel: f64,
    pub dual: f64,
    pub integer_residual: f64,
    pub simulation: f64,
    pub gap: f64,
}

impl Budgets {
    pub fn at(dt: f64, gamma: f64) -> Self {
        Self {
            // 1% at dt = 0.05, 0.25% at dt = 0.0125
            objective_rel: 0.2 * dt,
            dual: (5.0 * gamma * dt).max(1e-3),
            integer_residual: 1e-9,
            simulation: 5.0 * dt,
            gap: 1e-9,
        }
    }
}

fn verify_scenario(cfg: &RunConfig, s: Scenario, dt: f64, perturb: Option<f64>) -> Result<Vec<Check>> {
    let r = run(cfg, s)?;
    let sched = cfg.base.for_scenario(s);
    let b = Budgets::at(dt, sched.gamma());
    let mut out = Vec::new();

    let lp = lp_st_so(&r.corridor, sched, r.commuters(), dt)?.against(&r.short_term)?;
    let cmp = lp.analytic.as_ref().expect("filled by against");
    out.push(check(s, "lp_objective_rel_error", cmp.objective_rel_error, b.objective_rel));
    out.push(check(s, "lp_dual_deviation", cmp.max_dual_deviation, b.dual));
    out.push(check(s, "lp_conservation_residual", lp.conservation_residual, b.integer_residual));
    out.push(check(s, "lp_capacity_residual", lp.capacity_residual, b.integer_residual));

    match &r.equilibrium {
        Some(eq) => {
            let flows = flow_rates(eq)?;
            match queue_sim(eq, &flows, dt) {
                Ok(q) => {
                    out.push(check(s, "sim_delay_deviation", q.max_delay_deviation, b.simulation));
                    out.push(check(s, "sim_cost_gap", q.cost_gap, b.simulation));
                    out.push(check(s, "sim_deviation_shortfall", (-q.min_deviation_margin).max(0.0), b.simulation));
                }
                Err(e) => {
                    eprintln!("{}: simulation failed: {e}", tag(s));
                    out.push(check(s, "sim_capacity_violation", f64::INFINITY, b.simulation));
                }
            }
        }
        None => out.push(check(s, "equilibrium_constructed", f64::INFINITY, 0.0)),
    }

    let gap = match IntegratedState::from_report(&r) {
        Ok(mut state) => {
            if let Some(p) = perturb {
                state.costs[0] += p;
            }
            gap_components(&state).ok()
        }
        Err(_) => None,
    };
    let gap = gap.unwrap_or(GapReport {
        conservation: f64::INFINITY,
        ..GapReport::default()
    });
    out.push(check(s, "gap_conservation", gap.conservation, b.gap));
    out.push(check(s, "gap_queueing", gap.queueing, b.gap));
    out.push(check(s, "gap_time_choice", gap.time_choice, b.gap));
    out.push(check(s, "gap_land_market", gap.land_market, b.gap));
    out.push(check(s, "gap_location_choice", gap.location_choice, b.gap));
    Ok(out)
}

#[derive(Serialize)]
struct VerifySummary {
    command: &'static str,
    mode: String,
    seed: Option<u64>,
    dt: f64,
    pass: bool,
    checks: Vec<Check>,
}

pub fn verify(
    cfg: &RunConfig,
    chosen: &[Scenario],
    dt: f64,
    perturb: Option<f64>,
    out: &Path,
    seed: Option<u64>,
) -> Result<Outcome> {
    if !(dt.is_finite() && dt > 0.0) {
        bail!("time step must be positive, got {dt}");
    }
    let mut checks = Vec::new();
    for &s in chosen {
        checks.extend(verify_scenario(cfg, s, dt, perturb)?);
    }
    let mut t = Table::new(["scenario", "check", "value", "budget", "status"]);
    for c in &checks {
        t.row(vec![
            c.scenario.to_ascii_lowercase(),
            c.name.to_string(),
            num(c.value),
            num(c.budget),
            if c.pass { "pass" } else { "fail" }.to_string(),
        ]);
    }
    if let Some(p) = perturb {
        t.note(format!("lambda_1 perturbed by {} before the gap evaluation", num(p)));
    }
    t.write(&out.join("verify.csv"))?;
    let pass = checks.iter().all(|c| c.pass);
    for c in checks.iter().filter(|c| !c.pass) {
        println!("fail: {} {} = {} (budget {})", c.scenario.to_ascii_lowercase(), c.name, num(c.value), num(c.budget));
    }
    println!("verify: {} checks, {}", checks.len(), if pass { "all pass" } else { "FAILED" });
    write_json(
        &out.join("summary.json"),
        &VerifySummary {
            command: "verify",
            mode: cfg.mode.to_string(),
            seed,
            dt,
            pass,
            checks,
        },
    )?;
    Ok(if pass { Outcome::Pass } else { Outcome::VerificationFailed })
}

/// Parses `LO:HI:N` into `N` evenly spaced values including both ends.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        bail!("invalid range '{s}': expected LO:HI:N");
    };
    let lo: f64 = lo.trim().parse().with_context(|| format!("invalid range '{s}'"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("invalid range '{s}'"))?;
    let n: usize = n.trim().parse().with_context(|| format!("invalid range '{s}'"))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        bail!("invalid range '{s}': need LO <= HI and N >= 1");
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

#[derive(Serialize)]
struct ScanSummary {
    command: &'static str,
    mode: String,
    seed: Option<u64>,
    points: usize,
    flagged: usize,
    invalid: usize,
    failed: usize,
}

pub fn scan(cfg: &RunConfig, grid: &ParadoxGrid, out: &Path, seed: Option<u64>) -> Result<Outcome> {
    let points = paradox_scan(&cfg.corridor, &cfg.base, &cfg.wages, grid, cfg.mode);
    let mut t = Table::new([
        "theta_remote", "spacing", "status", "paradox", "delta_total_cost", "total_cost_tlc", "total_cost_cs", "message",
    ]);
    let (mut flagged, mut invalid, mut failed) = (0, 0, 0);
    for p in &points {
        let mut cells = vec![num(p.remote_wage), num(p.spacing)];
        match &p.outcome {
            ScanOutcome::Solved {
                paradox,
                delta_total_cost,
                total_cost_tlc,
                total_cost_cs,
            } => {
                flagged += usize::from(*paradox);
                cells.extend([
                    "solved".into(),
                    paradox.to_string(),
                    num(*delta_total_cost),
                    num(*total_cost_tlc),
                    num(*total_cost_cs),
                    String::new(),
                ]);
            }
            ScanOutcome::InvalidConfig { message } => {
                invalid += 1;
                cells.extend(["invalid_config".into(), String::new(), String::new(), String::new(), String::new(), message.clone()]);
            }
            ScanOutcome::Failed { message } => {
                failed += 1;
                cells.extend(["failed".into(), String::new(), String::new(), String::new(), String::new(), message.clone()]);
            }
        }
        t.row(cells);
    }
    t.write(&out.join("paradox_scan.csv"))?;
    println!("paradox-scan: {} points, {flagged} flagged, {invalid} invalid, {failed} failed", points.len());
    write_json(
        &out.join("summary.json"),
        &ScanSummary {
            command: "paradox-scan",
            mode: cfg.mode.to_string(),
            seed,
            points: points.len(),
            flagged,
            invalid,
            failed,
        },
    )?;
    Ok(Outcome::Pass)
}
