//! The four policy scenarios, pairwise comparisons and the paradox scan.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::corridor::{CorridorSpec, WageSpec};
use crate::error::{Error, Result};
use crate::long_term::{solve_long_term, LongTermSolution, Zone};
use crate::schedule::{CostMode, ScheduleSpec};
use crate::short_term::{equilibrium_from_qrp, solve_st_so, EquilibriumView, ShortTermSolution, Warning};

/// Absolute tolerance for equality claims.
pub const CLAIM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    /// Single work start time, office work only.
    Ns,
    /// Staggered work hours, office work only.
    Swh,
    /// Single work start time, remote work allowed.
    Tlc,
    /// Staggered work hours with remote work allowed.
    Cs,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Self::Ns, Self::Swh, Self::Tlc, Self::Cs];

    pub fn tlc_active(self) -> bool {
        matches!(self, Self::Tlc | Self::Cs)
    }

    pub fn staggered(self) -> bool {
        matches!(self, Self::Swh | Self::Cs)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Ns => "NS",
            Self::Swh => "SWH",
            Self::Tlc => "TLC",
            Self::Cs => "CS",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ns" => Ok(Self::Ns),
            "swh" => Ok(Self::Swh),
            "tlc" => Ok(Self::Tlc),
            "cs" => Ok(Self::Cs),
            other => Err(format!("unknown scenario '{other}' (expected ns, swh, tlc or cs)")),
        }
    }
}

/// Single and staggered schedules sharing slopes and horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleBase {
    single: ScheduleSpec,
    staggered: ScheduleSpec,
}

impl ScheduleBase {
    pub fn new(single: ScheduleSpec, staggered: ScheduleSpec) -> Result<Self> {
        if single.k_count() != 1 || staggered.k_count() != 2 {
            return Err(Error::InvalidSchedule(
                "expected one single and two staggered preferred times".into(),
            ));
        }
        if single.beta() != staggered.beta()
            || single.gamma() != staggered.gamma()
            || single.horizon() != staggered.horizon()
        {
            return Err(Error::InvalidSchedule(
                "single and staggered schedules must share slopes and horizon".into(),
            ));
        }
        Ok(Self { single, staggered })
    }

    pub fn from_times(t_single: f64, t_pair: [f64; 2], beta: f64, gamma: f64, horizon: (f64, f64)) -> Result<Self> {
        Self::new(
            ScheduleSpec::new(vec![t_single], beta, gamma, horizon)?,
            ScheduleSpec::new(t_pair.to_vec(), beta, gamma, horizon)?,
        )
    }

    pub fn single(&self) -> &ScheduleSpec {
        &self.single
    }

    pub fn staggered(&self) -> &ScheduleSpec {
        &self.staggered
    }

    pub fn for_scenario(&self, s: Scenario) -> &ScheduleSpec {
        if s.staggered() {
            &self.staggered
        } else {
            &self.single
        }
    }

    pub fn spacing(&self) -> f64 {
        let t = self.staggered.preferred_times();
        t[1] - t[0]
    }

    /// Staggered times moved to spacing `d` around their midpoint.
    pub fn with_spacing(&self, d: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::InvalidSchedule(format!("spacing must be positive, got {d}")));
        }
        let t = self.staggered.preferred_times();
        let mid = 0.5 * (t[0] + t[1]);
        Self::new(
            self.single.clone(),
            self.staggered.with_preferred_times(vec![mid - 0.5 * d, mid + 0.5 * d])?,
        )
    }
}

/// Integrated equilibrium of one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub mode: CostMode,
    pub corridor: CorridorSpec,
    pub wages: WageSpec,
    pub long_term: LongTermSolution,
    pub short_term: ShortTermSolution,
    #[serde(skip)]
    pub equilibrium: Option<EquilibriumView>,
    pub total_cost: f64,
    pub utility: f64,
    pub warnings: Vec<Warning>,
}

impl ScenarioReport {
    pub fn costs(&self) -> &[f64] {
        self.short_term.costs()
    }

    pub fn rents(&self) -> &[f64] {
        &self.long_term.rents
    }

    pub fn ratios(&self) -> &[f64] {
        &self.long_term.ratios
    }

    pub fn zones(&self) -> &[Zone] {
        &self.long_term.zones
    }

    pub fn commuters(&self) -> &[f64] {
        &self.long_term.commuters
    }

    pub fn mixed_zone(&self) -> Option<usize> {
        self.long_term.mixed_zone
    }

    /// Commuting cost per worker-day, `η_i λ_i`.
    pub fn ratio_weighted_costs(&self) -> Vec<f64> {
        self.costs().iter().zip(self.ratios()).map(|(l, h)| l * h).collect()
    }

    /// `Σ λ_i η_i A_i` from the parts.
    pub fn recomputed_total_cost(&self) -> f64 {
        self.costs()
            .iter()
            .zip(self.ratios())
            .zip(self.corridor.areas())
            .map(|((l, h), a)| l * h * a)
            .sum()
    }
}

/// Solves the long-term problem, then the short-term state at the resulting
/// commuter masses.
pub fn run_scenario(
    corridor: &CorridorSpec,
    base: &ScheduleBase,
    wages: &WageSpec,
    scenario: Scenario,
    mode: CostMode,
) -> Result<ScenarioReport> {
    let sched = base.for_scenario(scenario);
    let long_term = solve_long_term(corridor, sched, wages, scenario.tlc_active(), mode)?;
    let short_term = solve_st_so(corridor, sched, &long_term.commuters, mode)?;
    for (i, (a, b)) in long_term.costs.iter().zip(short_term.costs()).enumerate() {
        if (a - b).abs() > CLAIM_TOL {
            return Err(Error::MismatchedConfig(format!(
                "long-term and short-term costs differ at i={}",
                i + 1
            )));
        }
    }
    let mut warnings = short_term.warnings().to_vec();
    let equilibrium = match equilibrium_from_qrp(&short_term) {
        Ok(eq) => {
            warnings.extend(eq.warnings().iter().cloned());
            Some(eq)
        }
        Err(Error::QrpViolated(b)) => {
            warnings.push(Warning::QrpFailed { bottleneck: b - 1 });
            None
        }
        Err(e) => return Err(e),
    };
    Ok(ScenarioReport {
        scenario,
        mode,
        corridor: corridor.clone(),
        wages: wages.clone(),
        total_cost: short_term.total_commuting_cost(),
        utility: long_term.utility,
        long_term,
        short_term,
        equilibrium,
        warnings,
    })
}

/// Direction of the second scenario's value relative to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Lower,
    Equal,
    Higher,
    NotHigher,
}

impl Relation {
    fn holds(self, delta: f64) -> bool {
        match self {
            Self::Lower => delta < -CLAIM_TOL,
            Self::Equal => delta.abs() <= CLAIM_TOL,
            Self::Higher => delta > CLAIM_TOL,
            Self::NotHigher => delta <= CLAIM_TOL,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lower => "lower",
            Self::Equal => "equal",
            Self::Higher => "higher",
            Self::NotHigher => "not higher",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Pass,
    Fail,
    /// Policy leaves every location in office work; the welfare claim does
    /// not apply.
    NotApplicable,
}

/// One evaluated inequality between two scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: &'static str,
    /// 0-based location for per-location claims.
    pub location: Option<usize>,
    pub expected: Relation,
    /// Later-policy value minus earlier-policy value.
    pub delta: f64,
    pub status: ClaimStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub first: Scenario,
    pub second: Scenario,
    pub delta_costs: Vec<f64>,
    pub delta_rents: Vec<f64>,
    pub delta_utility: f64,
    pub delta_total_cost: f64,
    pub verdicts: Vec<Verdict>,
    pub paradox: bool,
}

impl ComparisonReport {
    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| v.status == ClaimStatus::Fail)
    }
}

struct Claims<'a> {
    before: &'a ScenarioReport,
    after: &'a ScenarioReport,
    out: Vec<Verdict>,
}

impl Claims<'_> {
    fn push(&mut self, claim: &'static str, location: Option<usize>, expected: Relation, delta: f64, applicable: bool) {
        let status = if !applicable {
            ClaimStatus::NotApplicable
        } else if expected.holds(delta) {
            ClaimStatus::Pass
        } else {
            ClaimStatus::Fail
        };
        self.out.push(Verdict {
            claim,
            location,
            expected,
            delta,
            status,
        });
    }

    fn per_location_costs(&mut self, claim: &'static str, expected: Relation, select: impl Fn(usize) -> bool) {
        self.per_location_costs_where(claim, expected, select, |_| true);
    }

    fn per_location_costs_where(
        &mut self,
        claim: &'static str,
        expected: Relation,
        select: impl Fn(usize) -> bool,
        applicable: impl Fn(usize) -> bool,
    ) {
        let a = self.before.ratio_weighted_costs();
        let b = self.after.ratio_weighted_costs();
        for i in (0..a.len()).filter(|&i| select(i)) {
            self.push(claim, Some(i), expected, b[i] - a[i], applicable(i));
        }
    }

    fn per_location_rents(&mut self, claim: &'static str, expected: Relation, select: impl Fn(usize) -> bool) {
        let n = self.before.rents().len();
        for i in (0..n).filter(|&i| select(i)) {
            let d = self.after.rents()[i] - self.before.rents()[i];
            self.push(claim, Some(i), expected, d, true);
        }
    }

    fn aggregates(&mut self, prefix: [&'static str; 2], utility: Relation, total: Relation, applicable: bool) {
        let du = self.after.utility - self.before.utility;
        let dt = self.after.total_cost - self.before.total_cost;
        self.push(prefix[0], None, utility, du, applicable);
        self.push(prefix[1], None, total, dt, applicable);
    }
}

fn evaluate_claims(before: &ScenarioReport, after: &ScenarioReport) -> Vec<Verdict> {
    use Scenario::*;
    let n = before.corridor.location_count();
    let mut c = Claims {
        before,
        after,
        out: Vec::new(),
    };
    let all = |_: usize| true;
    match (before.scenario, after.scenario) {
        (x, y) if x == y => {
            c.per_location_costs("same_costs", Relation::Equal, all);
            c.per_location_rents("same_rents", Relation::Equal, all);
            c.aggregates(["same_utility", "same_total_cost"], Relation::Equal, Relation::Equal, true);
        }
        (Ns, Swh) => {
            c.per_location_costs("staggering_lowers_costs", Relation::Lower, all);
            c.per_location_rents("staggering_keeps_rents", Relation::Equal, all);
            c.aggregates(
                ["staggering_raises_utility", "staggering_lowers_total_cost"],
                Relation::Higher,
                Relation::Lower,
                true,
            );
        }
        (Ns, Tlc) | (Swh, Cs) => {
            let s = after.mixed_zone().unwrap_or(n);
            let (eq, low, rent, util, total) = if before.scenario == Ns {
                (
                    "telecommuting_keeps_costs_before_mixed_zone",
                    "telecommuting_lowers_costs_from_mixed_zone",
                    "telecommuting_does_not_raise_rents",
                    "telecommuting_raises_utility",
                    "telecommuting_lowers_total_cost",
                )
            } else {
                (
                    "combined_keeps_costs_before_mixed_zone",
                    "combined_lowers_costs_from_mixed_zone",
                    "combined_does_not_raise_rents",
                    "combined_raises_utility",
                    "combined_lowers_total_cost",
                )
            };
            c.per_location_costs(eq, Relation::Equal, |i| i < s);
            c.per_location_costs(low, Relation::Lower, |i| i >= s);
            c.per_location_rents(rent, Relation::NotHigher, all);
            c.aggregates([util, total], Relation::Higher, Relation::Lower, !after.long_term.all_office());
        }
        (Tlc, Cs) => {
            let s_tlc = before.mixed_zone().unwrap_or(n);
            let s_cs = after.mixed_zone().unwrap_or(n);
            c.per_location_costs("staggering_lowers_costs_before_telecommuting_mixed_zone", Relation::NotHigher, |i| {
                i < s_tlc
            });
            // beyond both mixed zones nobody commutes under either policy
            c.per_location_costs_where(
                "staggering_raises_costs_beyond_telecommuting_mixed_zone",
                Relation::Higher,
                |i| i > s_tlc,
                |i| after.commuters()[i] > 0.0,
            );
            c.per_location_rents("staggering_raises_rents_before_combined_mixed_zone", Relation::Higher, |i| i < s_cs);
            c.per_location_rents("staggering_keeps_rents_from_combined_mixed_zone", Relation::Equal, |i| i >= s_cs);
            let applicable = !before.long_term.all_office() && !after.long_term.all_office();
            let du = after.utility - before.utility;
            c.push("equal_utility_with_remote_work", None, Relation::Equal, du, applicable);
        }
        _ => {}
    }
    c.out
}

fn canonical(a: Scenario, b: Scenario) -> bool {
    use Scenario::*;
    a == b || matches!((a, b), (Ns, Swh) | (Ns, Tlc) | (Swh, Cs) | (Tlc, Cs))
}

/// Deltas are `b − a`. Verdicts are evaluated in the policy order of the
/// pair (e.g. TLC before CS) whichever way round the reports are passed.
pub fn compare(a: &ScenarioReport, b: &ScenarioReport) -> Result<ComparisonReport> {
    if a.corridor != b.corridor {
        return Err(Error::MismatchedConfig("corridors differ".into()));
    }
    if a.wages != b.wages {
        return Err(Error::MismatchedConfig("wages differ".into()));
    }
    if a.mode != b.mode {
        return Err(Error::MismatchedConfig("cost modes differ".into()));
    }
    let delta_costs = a.costs().iter().zip(b.costs()).map(|(x, y)| y - x).collect();
    let delta_rents = a.rents().iter().zip(b.rents()).map(|(x, y)| y - x).collect();
    let delta_utility = b.utility - a.utility;
    let delta_total_cost = b.total_cost - a.total_cost;
    let verdicts = if canonical(a.scenario, b.scenario) {
        evaluate_claims(a, b)
    } else if canonical(b.scenario, a.scenario) {
        evaluate_claims(b, a)
    } else {
        Vec::new()
    };
    let paradox = a.scenario == Scenario::Tlc
        && b.scenario == Scenario::Cs
        && delta_total_cost > CLAIM_TOL
        && delta_utility.abs() <= CLAIM_TOL;
    Ok(ComparisonReport {
        first: a.scenario,
        second: b.scenario,
        delta_costs,
        delta_rents,
        delta_utility,
        delta_total_cost,
        verdicts,
        paradox,
    })
}

/// Grid of remote wages and staggering spacings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadoxGrid {
    pub remote_wages: Vec<f64>,
    pub spacings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScanOutcome {
    Solved {
        paradox: bool,
        delta_total_cost: f64,
        total_cost_tlc: f64,
        total_cost_cs: f64,
    },
    InvalidConfig { message: String },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub remote_wage: f64,
    pub spacing: f64,
    pub outcome: ScanOutcome,
}

fn scan_point(corridor: &CorridorSpec, base: &ScheduleBase, wages: &WageSpec, remote: f64, d: f64, mode: CostMode) -> ScanOutcome {
    let (wages, base) = match (wages.with_remote(remote), base.with_spacing(d)) {
        (Ok(w), Ok(b)) => (w, b),
        (Err(e), _) | (_, Err(e)) => return ScanOutcome::InvalidConfig { message: e.to_string() },
    };
    let run = |s| run_scenario(corridor, &base, &wages, s, mode);
    match run(Scenario::Tlc).and_then(|t| Ok((run(Scenario::Cs)?, t))).and_then(|(c, t)| Ok((compare(&t, &c)?, t, c))) {
        Ok((cmp, t, c)) => ScanOutcome::Solved {
            paradox: cmp.paradox,
            delta_total_cost: cmp.delta_total_cost,
            total_cost_tlc: t.total_cost,
            total_cost_cs: c.total_cost,
        },
        Err(e) => ScanOutcome::Failed { message: e.to_string() },
    }
}

/// TLC-versus-CS comparison over the grid, remote wage varying slowest.
/// Points are solved in parallel; the output order is the grid order.
pub fn paradox_scan(
    corridor: &CorridorSpec,
    base: &ScheduleBase,
    wages: &WageSpec,
    grid: &ParadoxGrid,
    mode: CostMode,
) -> Vec<ScanPoint> {
    let points: Vec<(f64, f64)> = grid
        .remote_wages
        .iter()
        .flat_map(|&r| grid.spacings.iter().map(move |&d| (r, d)))
        .collect();
    points
        .into_par_iter()
        .map(|(r, d)| ScanPoint {
            remote_wage: r,
            spacing: d,
            outcome: scan_point(corridor, base, wages, r, d, mode),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn setup() -> (CorridorSpec, ScheduleBase, WageSpec) {
        (
            CorridorSpec::new(vec![70.0, 40.0, 10.0], vec![1.5, 1.0, 1.0], vec![750.0, 1500.0, 700.0]).unwrap(),
            ScheduleBase::from_times(60.0, [50.0, 70.0], 0.3, 0.6, (0.0, 100.0)).unwrap(),
            WageSpec::new(40.0, 30.0, 1).unwrap(),
        )
    }

    fn run(s: Scenario, mode: CostMode) -> ScenarioReport {
        let (c, b, w) = setup();
        run_scenario(&c, &b, &w, s, mode).unwrap()
    }

    #[test]
    fn scenario_flags() {
        assert!(!Scenario::Ns.tlc_active() && !Scenario::Ns.staggered());
        assert!(!Scenario::Swh.tlc_active() && Scenario::Swh.staggered());
        assert!(Scenario::Tlc.tlc_active() && !Scenario::Tlc.staggered());
        assert!(Scenario::Cs.tlc_active() && Scenario::Cs.staggered());
        assert_eq!("CS".parse::<Scenario>().unwrap(), Scenario::Cs);
        assert!("xx".parse::<Scenario>().is_err());
    }

    #[test]
    fn staggered_merged_report() {
        let r = run(Scenario::Swh, CostMode::MergedFormula);
        assert_abs_diff_eq!(r.utility, 26.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.total_cost, 16750.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.recomputed_total_cost(), r.total_cost, epsilon = 1e-9);
        assert!(matches!(r.warnings[0], Warning::MergedOutsideRegime { location: 0, .. }));
    }

    #[test]
    fn staggering_shifts_costs_uniformly() {
        let cmp = compare(&run(Scenario::Ns, CostMode::MergedFormula), &run(Scenario::Swh, CostMode::MergedFormula)).unwrap();
        for d in &cmp.delta_costs {
            assert_abs_diff_eq!(*d, -4.0, epsilon = 1e-12);
        }
        for d in &cmp.delta_rents {
            assert_abs_diff_eq!(*d, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(cmp.delta_utility, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cmp.delta_total_cost, -11800.0, epsilon = 1e-9);
        assert_eq!(cmp.failures().count(), 0);
        assert!(!cmp.paradox);
    }

    #[test]
    fn paradox_at_reference_point() {
        let cmp = compare(&run(Scenario::Tlc, CostMode::MergedFormula), &run(Scenario::Cs, CostMode::MergedFormula)).unwrap();
        assert_abs_diff_eq!(cmp.delta_utility, 0.0);
        assert_abs_diff_eq!(cmp.delta_total_cost, 975.0, epsilon = 1e-9);
        assert!(cmp.paradox);
        assert_eq!(cmp.failures().count(), 0, "{:?}", cmp.verdicts);
        let exact = compare(&run(Scenario::Tlc, CostMode::Exact), &run(Scenario::Cs, CostMode::Exact)).unwrap();
        assert_abs_diff_eq!(exact.delta_total_cost, 2100.0, epsilon = 1e-6);
    }

    const PAIRS: [(Scenario, Scenario); 4] = [
        (Scenario::Ns, Scenario::Swh),
        (Scenario::Ns, Scenario::Tlc),
        (Scenario::Swh, Scenario::Cs),
        (Scenario::Tlc, Scenario::Cs),
    ];

    #[test]
    fn all_canonical_pairs_pass_merged() {
        for (a, b) in PAIRS {
            let cmp = compare(&run(a, CostMode::MergedFormula), &run(b, CostMode::MergedFormula)).unwrap();
            assert!(!cmp.verdicts.is_empty());
            assert_eq!(cmp.failures().count(), 0, "{a} vs {b}: {:?}", cmp.verdicts);
        }
    }

    #[test]
    fn exact_mode_keeps_aggregates_but_not_first_rent() {
        for (a, b) in PAIRS {
            let cmp = compare(&run(a, CostMode::Exact), &run(b, CostMode::Exact)).unwrap();
            let failed: Vec<_> = cmp.failures().map(|v| (v.claim, v.location)).collect();
            if a == Scenario::Ns && b == Scenario::Swh {
                // the exact first-location cost drops by 2.5 instead of 4
                assert_eq!(failed, vec![("staggering_keeps_rents", Some(0))]);
            } else {
                assert!(failed.is_empty(), "{a} vs {b}: {failed:?}");
            }
        }
    }

    #[test]
    fn reversed_pair_uses_policy_order() {
        let fwd = compare(&run(Scenario::Ns, CostMode::MergedFormula), &run(Scenario::Swh, CostMode::MergedFormula)).unwrap();
        let rev = compare(&run(Scenario::Swh, CostMode::MergedFormula), &run(Scenario::Ns, CostMode::MergedFormula)).unwrap();
        assert_eq!(fwd.verdicts, rev.verdicts);
        assert_abs_diff_eq!(rev.delta_total_cost, 11800.0, epsilon = 1e-9);
    }

    #[test]
    fn self_comparison() {
        for s in Scenario::ALL {
            let cmp = compare(&run(s, CostMode::MergedFormula), &run(s, CostMode::MergedFormula)).unwrap();
            assert!(cmp.delta_costs.iter().chain(&cmp.delta_rents).all(|d| *d == 0.0));
            assert_eq!(cmp.delta_total_cost, 0.0);
            assert!(cmp.verdicts.iter().all(|v| v.status == ClaimStatus::Pass));
        }
    }

    #[test]
    fn mismatched_configs_rejected() {
        let a = run(Scenario::Ns, CostMode::MergedFormula);
        let b = run(Scenario::Ns, CostMode::Exact);
        assert!(matches!(compare(&a, &b), Err(Error::MismatchedConfig(_))));
    }

    #[test]
    fn scan_flags_reference_point_and_invalid_rows() {
        let (c, b, w) = setup();
        let grid = ParadoxGrid {
            remote_wages: vec![1.0, 30.0, 40.0],
            spacings: vec![20.0],
        };
        let pts = paradox_scan(&c, &b, &w, &grid, CostMode::MergedFormula);
        assert_eq!(pts.len(), 3);
        assert!(matches!(pts[0].outcome, ScanOutcome::Solved { paradox: false, .. }));
        match &pts[1].outcome {
            ScanOutcome::Solved { paradox, delta_total_cost, .. } => {
                assert!(paradox);
                assert_abs_diff_eq!(*delta_total_cost, 975.0, epsilon = 1e-9);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(pts[2].outcome, ScanOutcome::InvalidConfig { .. }));
    }

    #[test]
    fn low_remote_wage_leaves_everyone_in_office() {
        let (c, b, w) = setup();
        let w = w.with_remote(1.0).unwrap();
        for s in [Scenario::Tlc, Scenario::Cs] {
            assert!(run_scenario(&c, &b, &w, s, CostMode::MergedFormula).unwrap().long_term.all_office());
        }
    }

    #[test]
    fn flag_switches_on_at_most_once_along_remote_wage() {
        let (c, b, w) = setup();
        let grid = ParadoxGrid {
            remote_wages: (1..40).map(f64::from).collect(),
            spacings: vec![5.0, 10.0, 15.0, 20.0, 25.0],
        };
        let pts = paradox_scan(&c, &b, &w, &grid, CostMode::MergedFormula);
        for (j, d) in grid.spacings.iter().enumerate() {
            let flags: Vec<bool> = pts
                .iter()
                .skip(j)
                .step_by(grid.spacings.len())
                .filter_map(|p| match p.outcome {
                    ScanOutcome::Solved { paradox, .. } => Some(paradox),
                    _ => None,
                })
                .collect();
            assert!(!flags.is_empty());
            // near the office wage commuting vanishes and the flag may drop
            // again; only the false-to-true switch is unique
            let on = flags.windows(2).filter(|w| !w[0] && w[1]).count();
            assert!(!flags[0] && on <= 1, "d={d}: {flags:?}");
        }
    }
}
