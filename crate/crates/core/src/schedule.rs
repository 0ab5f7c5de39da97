//! Schedule-delay costs, their lower envelope, level sets and the
//! window-filling cost `c̄(X, μ)`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::plf::PiecewiseLinearFn;
use crate::root::bisect;

/// Adjacent intervals closer than this are merged.
const MERGE_SLACK: f64 = 1e-12;
/// Absolute tolerance of the exact-mode root solve on the cost level.
pub const ROOT_TOL: f64 = 1e-12;

/// How `c̄(X, μ)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Level-set measure inverted by a monotone root solve.
    Exact,
    /// `(X/μ − d(K−1))δ`, applied without checking that the level set is
    /// connected.
    MergedFormula,
}

impl FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Self::Exact),
            "merged" | "merged_formula" => Ok(Self::MergedFormula),
            other => Err(format!("unknown mode '{other}' (expected exact or merged)")),
        }
    }
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::MergedFormula => "merged",
        })
    }
}

/// Sorted union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts and merges; touching or overlapping pieces become one.
    pub fn from_intervals(mut pieces: Vec<(f64, f64)>) -> Self {
        pieces.retain(|(a, b)| b >= a);
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match out.last_mut() {
                Some(last) if a <= last.1 + MERGE_SLACK => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// A single interval (or nothing).
    pub fn is_convex(&self) -> bool {
        self.intervals.len() <= 1
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| t >= a && t <= b)
    }

    pub fn contains_interior(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| t > a && t < b)
    }

    pub fn is_subset_of(&self, other: &Self, tol: f64) -> bool {
        self.intervals.iter().all(|&(a, b)| {
            other
                .intervals
                .iter()
                .any(|&(c, d)| a >= c - tol && b <= d + tol)
        })
    }

    pub fn intersect(&self, lo: f64, hi: f64) -> Self {
        Self::from_intervals(
            self.intervals
                .iter()
                .filter_map(|&(a, b)| {
                    let (a, b) = (a.max(lo), b.min(hi));
                    (b >= a).then_some((a, b))
                })
                .collect(),
        )
    }

    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.intervals.iter().flat_map(|&(a, b)| [a, b])
    }
}

/// Piecewise-linear schedule-delay costs around `K` preferred arrival times.
/// The value of time is fixed to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSpec {
    preferred_times: Vec<f64>,
    beta: f64,
    gamma: f64,
    horizon: (f64, f64),
}

impl ScheduleSpec {
    pub fn new(preferred_times: Vec<f64>, beta: f64, gamma: f64, horizon: (f64, f64)) -> Result<Self> {
        if preferred_times.is_empty() {
            return Err(Error::InvalidSchedule("no preferred arrival time".into()));
        }
        if !beta.is_finite() || !gamma.is_finite() || preferred_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("schedule"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidSchedule(format!("early slope must lie in (0,1), got {beta}")));
        }
        if gamma <= 0.0 {
            return Err(Error::InvalidSchedule(format!("late slope must be positive, got {gamma}")));
        }
        let (lo, hi) = horizon;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidSchedule("horizon must be a nonempty finite interval".into()));
        }
        if preferred_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSchedule("preferred times must be strictly increasing".into()));
        }
        if preferred_times[0] <= lo || *preferred_times.last().unwrap() >= hi {
            return Err(Error::InvalidSchedule("preferred times must lie inside the horizon".into()));
        }
        Ok(Self {
            preferred_times,
            beta,
            gamma,
            horizon,
        })
    }

    /// Same slopes and horizon around different preferred times.
    pub fn with_preferred_times(&self, times: Vec<f64>) -> Result<Self> {
        Self::new(times, self.beta, self.gamma, self.horizon)
    }

    pub fn k_count(&self) -> usize {
        self.preferred_times.len()
    }

    pub fn preferred_times(&self) -> &[f64] {
        &self.preferred_times
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> (f64, f64) {
        self.horizon
    }

    /// `βγ/(β+γ)`.
    pub fn delta(&self) -> f64 {
        self.beta * self.gamma / (self.beta + self.gamma)
    }

    /// Common spacing of the preferred times; zero for `K = 1`.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let gaps: Vec<f64> = self.preferred_times.windows(2).map(|w| w[1] - w[0]).collect();
        match gaps.first() {
            None => Some(0.0),
            Some(&d) => gaps.iter().all(|g| (g - d).abs() <= 1e-9 * d).then_some(d),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < self.horizon.0 || t > self.horizon.1 || t.is_nan() {
            return Err(Error::OutsideHorizon(t));
        }
        Ok(())
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k >= self.k_count() {
            return Err(Error::PreferenceOutOfRange(k + 1));
        }
        Ok(())
    }

    fn raw_cost(&self, k: usize, t: f64) -> f64 {
        let tk = self.preferred_times[k];
        if t < tk {
            self.beta * (tk - t)
        } else {
            self.gamma * (t - tk)
        }
    }

    /// `c_k(t)` for the 0-based preferred time `k`.
    pub fn cost(&self, k: usize, t: f64) -> Result<f64> {
        self.check_k(k)?;
        self.check_time(t)?;
        Ok(self.raw_cost(k, t))
    }

    /// Right derivative of `c_k` at `t`.
    pub fn cost_slope(&self, k: usize, t: f64) -> f64 {
        if t < self.preferred_times[k] {
            -self.beta
        } else {
            self.gamma
        }
    }

    /// Lower envelope `ĉ(t) = min_k c_k(t)`.
    pub fn envelope(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.raw_cost(self.active_unchecked(t), t))
    }

    /// Crossing times between consecutive preferred times.
    pub fn window_boundaries(&self) -> Vec<f64> {
        let (b, g) = (self.beta, self.gamma);
        self.preferred_times
            .windows(2)
            .map(|w| (g * w[0] + b * w[1]) / (b + g))
            .collect()
    }

    /// Partition of the horizon into the windows where each `c_k` is the
    /// envelope.
    pub fn minimizer_windows(&self) -> Vec<(f64, f64)> {
        let mut edges = vec![self.horizon.0];
        edges.extend(self.window_boundaries());
        edges.push(self.horizon.1);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn active_unchecked(&self, t: f64) -> usize {
        // boundary times belong to the lower index
        self.window_boundaries().iter().take_while(|&&b| t > b).count()
    }

    /// Index of the window containing `t`.
    pub fn active_preference(&self, t: f64) -> Result<usize> {
        self.check_time(t)?;
        Ok(self.active_unchecked(t))
    }

    /// `c_k` as an exact function over the horizon.
    pub fn cost_fn(&self, k: usize) -> PiecewiseLinearFn {
        let (lo, hi) = self.horizon;
        let tk = self.preferred_times[k];
        PiecewiseLinearFn::new(
            vec![lo, tk, hi],
            vec![self.raw_cost(k, lo), 0.0, self.raw_cost(k, hi)],
        )
        .expect("preferred time is interior")
    }

    /// `ĉ` as an exact function over the horizon.
    pub fn envelope_fn(&self) -> PiecewiseLinearFn {
        let (lo, hi) = self.horizon;
        let mut xs = vec![lo];
        for (k, &tk) in self.preferred_times.iter().enumerate() {
            xs.push(tk);
            if let Some(&b) = self.window_boundaries().get(k) {
                xs.push(b);
            }
        }
        xs.push(hi);
        let ys = xs.iter().map(|&t| self.raw_cost(self.active_unchecked(t), t)).collect();
        PiecewiseLinearFn::new(xs, ys).expect("increasing breakpoints")
    }

    /// Largest level whose level set still fits in the horizon.
    pub fn max_level(&self) -> f64 {
        let (lo, hi) = self.horizon;
        let first = self.preferred_times[0];
        let last = *self.preferred_times.last().unwrap();
        (self.beta * (first - lo)).min(self.gamma * (hi - last))
    }

    /// `Γ(c) = {t : ĉ(t) ≤ c}`. Levels that would reach past the horizon
    /// are rejected instead of clipped.
    pub fn level_set(&self, c: f64) -> Result<IntervalSet> {
        if c < 0.0 || c.is_nan() {
            return Err(Error::NegativeLevel(c));
        }
        let (lo, hi) = self.horizon;
        let pieces: Vec<(f64, f64)> = self
            .preferred_times
            .iter()
            .map(|&tk| (tk - c / self.beta, tk + c / self.gamma))
            .collect();
        let set = IntervalSet::from_intervals(pieces);
        let (a, b) = (set.intervals[0].0, set.intervals.last().unwrap().1);
        if a < lo - MERGE_SLACK {
            return Err(Error::OutsideHorizon(a));
        }
        if b > hi + MERGE_SLACK {
            return Err(Error::OutsideHorizon(b));
        }
        Ok(set)
    }

    /// `c̄(X, μ)`: the cost level whose level set, served at rate `μ`,
    /// holds exactly the mass `X`.
    pub fn cbar(&self, mass: f64, capacity: f64, mode: CostMode) -> Result<f64> {
        if mass < 0.0 || mass.is_nan() {
            return Err(Error::InvalidMass(mass));
        }
        if !(capacity > 0.0) {
            return Err(Error::InvalidCapacity(capacity));
        }
        if mass == 0.0 {
            return Ok(0.0);
        }
        match mode {
            CostMode::MergedFormula => {
                let k = self.k_count();
                let d = match (k, self.uniform_spacing()) {
                    (1 | 2, Some(d)) => d,
                    _ => return Err(Error::MergedFormulaUnsupported(k)),
                };
                let c = (mass / capacity - d * (k as f64 - 1.0)) * self.delta();
                if c < 0.0 {
                    return Err(Error::NegativeMergedCost { mass, cost: c });
                }
                if c > self.max_level() + MERGE_SLACK {
                    return Err(Error::HorizonOverflow { mass, capacity });
                }
                Ok(c)
            }
            CostMode::Exact => {
                let top = self.max_level();
                let held = self.level_set(top)?.measure() * capacity;
                if held < mass {
                    return Err(Error::HorizonOverflow { mass, capacity });
                }
                let target = mass / capacity;
                bisect(|c| Ok(self.level_set(c)?.measure() - target), 0.0, top, ROOT_TOL)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single() -> ScheduleSpec {
        ScheduleSpec::new(vec![60.0], 0.3, 0.6, (0.0, 100.0)).unwrap()
    }

    fn pair() -> ScheduleSpec {
        ScheduleSpec::new(vec![50.0, 70.0], 0.3, 0.6, (0.0, 100.0)).unwrap()
    }

    #[test]
    fn cost_examples() {
        let s = single();
        assert_eq!(s.cost(0, 60.0).unwrap(), 0.0);
        assert_abs_diff_eq!(s.cost(0, 50.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.cost(0, 70.0).unwrap(), 6.0, epsilon = 1e-12);
        assert_eq!(s.cost(0, 101.0), Err(Error::OutsideHorizon(101.0)));
        assert_eq!(s.cost(1, 50.0), Err(Error::PreferenceOutOfRange(2)));
    }

    #[test]
    fn envelope_examples() {
        let s = pair();
        assert_abs_diff_eq!(s.envelope(60.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_eq!(s.envelope(50.0).unwrap(), 0.0);
        let b = (0.6 * 50.0 + 0.3 * 70.0) / 0.9;
        assert_abs_diff_eq!(s.envelope(b).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.envelope(b).unwrap(), 20.0 * s.delta(), epsilon = 1e-12);
    }

    #[test]
    fn window_boundaries() {
        let s = pair();
        let w = s.minimizer_windows();
        assert_eq!(w.len(), 2);
        assert_abs_diff_eq!(w[0].1, 56.0 + 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!(w[0].0, 0.0);
        assert_eq!(w[1].1, 100.0);
        assert_eq!(single().minimizer_windows(), vec![(0.0, 100.0)]);
        // the boundary belongs to the lower index
        assert_eq!(s.active_preference(w[0].1).unwrap(), 0);
        assert_eq!(s.active_preference(w[0].1 + 1e-9).unwrap(), 1);
    }

    #[test]
    fn three_preferred_times() {
        let s = ScheduleSpec::new(vec![40.0, 60.0, 80.0], 0.3, 0.6, (0.0, 120.0)).unwrap();
        let b = s.window_boundaries();
        let off = 0.3 * 20.0 / 0.9;
        assert_abs_diff_eq!(b[0], 40.0 + off, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 60.0 + off, epsilon = 1e-12);
        assert_eq!(s.uniform_spacing(), Some(20.0));
    }

    #[test]
    fn level_set_examples() {
        let s = pair();
        let g = s.level_set(2.0).unwrap();
        assert_eq!(g.intervals().len(), 2);
        assert_abs_diff_eq!(g.intervals()[0].0, 50.0 - 2.0 / 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(g.intervals()[1].1, 70.0 + 2.0 / 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(g.measure(), 20.0, epsilon = 1e-12);
        let g = s.level_set(4.0).unwrap();
        assert!(g.is_convex());
        assert_abs_diff_eq!(g.intervals()[0].0, 50.0 - 4.0 / 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(g.intervals()[0].1, 70.0 + 4.0 / 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(g.measure(), 40.0, epsilon = 1e-12);
        let g = s.level_set(0.0).unwrap();
        assert_eq!(g.intervals(), &[(50.0, 50.0), (70.0, 70.0)]);
        assert_eq!(g.measure(), 0.0);
        assert!(s.level_set(-1.0).is_err());
        assert!(s.level_set(40.0).is_err());
    }

    #[test]
    fn cbar_examples() {
        let s1 = single();
        let s2 = pair();
        for mode in [CostMode::Exact, CostMode::MergedFormula] {
            assert_abs_diff_eq!(s1.cbar(750.0, 30.0, mode).unwrap(), 5.0, epsilon = 1e-11);
            assert_eq!(s1.cbar(0.0, 30.0, mode).unwrap(), 0.0);
            assert_abs_diff_eq!(s2.cbar(1500.0, 30.0, mode).unwrap(), 6.0, epsilon = 1e-11);
        }
        assert_abs_diff_eq!(s2.cbar(750.0, 30.0, CostMode::MergedFormula).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s2.cbar(750.0, 30.0, CostMode::Exact).unwrap(), 2.5, epsilon = 1e-11);
    }

    #[test]
    fn cbar_exact_matches_regime_formulas() {
        let s = pair();
        let (mu, d, delta) = (30.0, 20.0, s.delta());
        for x in [10.0, 300.0, 1199.0, 1200.0, 1201.0, 2000.0] {
            let expect = if x < 2.0 * d * mu {
                x * delta / (2.0 * mu)
            } else {
                (x / mu - d) * delta
            };
            let c = s.cbar(x, mu, CostMode::Exact).unwrap();
            assert_abs_diff_eq!(c, expect, epsilon = 1e-11);
            assert_abs_diff_eq!(s.level_set(c).unwrap().measure() * mu, x, epsilon = 1e-9);
        }
    }

    #[test]
    fn cbar_rejects_overflow_and_bad_mode_inputs() {
        let s = single();
        assert!(matches!(s.cbar(1e6, 1.0, CostMode::Exact), Err(Error::HorizonOverflow { .. })));
        assert!(matches!(s.cbar(1e6, 1.0, CostMode::MergedFormula), Err(Error::HorizonOverflow { .. })));
        let s3 = ScheduleSpec::new(vec![40.0, 60.0, 80.0], 0.3, 0.6, (0.0, 120.0)).unwrap();
        assert_eq!(s3.cbar(10.0, 1.0, CostMode::MergedFormula), Err(Error::MergedFormulaUnsupported(3)));
        assert!(matches!(
            pair().cbar(100.0, 30.0, CostMode::MergedFormula),
            Err(Error::NegativeMergedCost { .. })
        ));
    }

    #[test]
    fn envelope_fn_matches_pointwise() {
        let s = pair();
        let f = s.envelope_fn();
        for j in 0..=400 {
            let t = j as f64 * 0.25;
            assert_abs_diff_eq!(f.eval(t).unwrap(), s.envelope(t).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_schedules() {
        assert!(ScheduleSpec::new(vec![60.0], 1.0, 0.6, (0.0, 100.0)).is_err());
        assert!(ScheduleSpec::new(vec![60.0], 0.3, 0.0, (0.0, 100.0)).is_err());
        assert!(ScheduleSpec::new(vec![70.0, 50.0], 0.3, 0.6, (0.0, 100.0)).is_err());
        assert!(ScheduleSpec::new(vec![100.0], 0.3, 0.6, (0.0, 100.0)).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("exact".parse::<CostMode>().unwrap(), CostMode::Exact);
        assert_eq!("merged".parse::<CostMode>().unwrap(), CostMode::MergedFormula);
        assert!("other".parse::<CostMode>().is_err());
    }
}
