//! Randomized invariants across modules.

use proptest::prelude::*;

use crate::instances::generate;
use crate::long_term::g_value;
use crate::oracle::{equilibrium_gap, IntegratedState, MinCostFlow, Status};
use crate::scenarios::{compare, Scenario, CLAIM_TOL};
use crate::{CostMode, PiecewiseLinearFn, ScheduleSpec};

/// Piecewise-linear function on `[0, 10]` with random interior breakpoints.
fn plf() -> impl Strategy<Value = PiecewiseLinearFn> {
    (prop::collection::btree_set(1u32..1000, 0..6), prop::collection::vec(-50.0f64..50.0, 8)).prop_map(|(cuts, vals)| {
        let mut xs = vec![0.0];
        xs.extend(cuts.into_iter().map(|c| f64::from(c) / 100.0));
        xs.push(10.0);
        let ys = xs.iter().enumerate().map(|(i, _)| vals[i % vals.len()]).collect();
        PiecewiseLinearFn::new(xs, ys).unwrap()
    })
}

fn schedule() -> impl Strategy<Value = ScheduleSpec> {
    (0.05f64..0.95, 0.1f64..3.0, 1usize..=3, 5.0f64..40.0).prop_map(|(beta, gamma, k, d)| {
        let times = (0..k).map(|j| 400.0 + d * j as f64).collect();
        ScheduleSpec::new(times, beta, gamma, (-1e4, 1e4)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plf_combinations_are_pointwise(f in plf(), g in plf(), t in 0.0f64..=10.0) {
        let (a, b) = (f.eval(t).unwrap(), g.eval(t).unwrap());
        prop_assert!((f.add(&g).unwrap().eval(t).unwrap() - (a + b)).abs() <= 1e-9);
        prop_assert!((f.subtract(&g).unwrap().eval(t).unwrap() - (a - b)).abs() <= 1e-9);
        prop_assert!((f.max(&g).unwrap().eval(t).unwrap() - a.max(b)).abs() <= 1e-9);
        prop_assert!((f.min(&g).unwrap().eval(t).unwrap() - a.min(b)).abs() <= 1e-9);
        let sum = f.add(&g).unwrap().integral();
        prop_assert!((sum - f.integral() - g.integral()).abs() <= 1e-9 * (1.0 + sum.abs()));
    }

    #[test]
    fn plf_inverse_round_trips(steps in prop::collection::vec(0.01f64..5.0, 1..8), start in -10.0f64..10.0, u in 0.0f64..=1.0) {
        let xs: Vec<f64> = (0..=steps.len()).map(|i| i as f64).collect();
        let ys: Vec<f64> = std::iter::once(start)
            .chain(steps.iter().scan(start, |acc, s| { *acc += s; Some(*acc) }))
            .collect();
        let f = PiecewiseLinearFn::new(xs, ys).unwrap();
        let inv = f.inverse().unwrap();
        let x = u * steps.len() as f64;
        prop_assert!((inv.eval(f.eval(x).unwrap()).unwrap() - x).abs() <= 1e-9);
    }

    #[test]
    fn envelope_is_lowest_cost(s in schedule(), t in 300.0f64..600.0) {
        let env = s.envelope(t).unwrap();
        for k in 0..s.k_count() {
            prop_assert!(env <= s.cost(k, t).unwrap() + 1e-12);
        }
        prop_assert!((s.envelope_fn().eval(t).unwrap() - env).abs() <= 1e-9);
    }

    #[test]
    fn level_sets_grow_and_cbar_inverts_them(s in schedule(), c in 0.1f64..30.0, dc in 0.0f64..10.0, mass in 1.0f64..5000.0, mu in 1.0f64..100.0) {
        let small = s.level_set(c).unwrap();
        let large = s.level_set(c + dc).unwrap();
        prop_assert!(small.is_subset_of(&large, 1e-9));
        prop_assert!(small.measure() <= large.measure() + 1e-9);
        let level = s.cbar(mass, mu, CostMode::Exact);
        prop_assume!(level.is_ok());
        let held = s.level_set(level.unwrap()).unwrap().measure() * mu;
        prop_assert!((held - mass).abs() <= 1e-9 * mass.max(1.0), "held {} for {}", held, mass);
    }

    #[test]
    fn solvers_agree_on_transportation_problems(
        supply in prop::collection::vec(0i64..20, 1..4),
        costs in prop::collection::vec(0i64..30, 16),
        cap in 1i64..15,
    ) {
        let total: i64 = supply.iter().sum();
        let sinks = 3;
        let mut p = MinCostFlow::new(supply.len() + sinks);
        for (i, &s) in supply.iter().enumerate() {
            p.set_supply(i, s);
        }
        for j in 0..sinks {
            let share = total / sinks as i64 + i64::from((j as i64) < total % sinks as i64);
            p.set_supply(supply.len() + j, -share);
        }
        for i in 0..supply.len() {
            for j in 0..sinks {
                p.add_arc(i, supply.len() + j, Some(cap), costs[(i * sinks + j) % costs.len()]);
            }
        }
        let a = p.solve();
        let b = p.solve_network_simplex();
        prop_assert_eq!(a.status, b.status);
        if a.status == Status::Optimal {
            let cost = |f: &[i64]| -> i64 {
                (0..supply.len()).flat_map(|i| (0..sinks).map(move |j| (i, j)))
                    .zip(f)
                    .map(|((i, j), x)| x * costs[(i * sinks + j) % costs.len()])
                    .sum()
            };
            prop_assert_eq!(cost(&a.flow), cost(&b.flow));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_instances_satisfy_the_welfare_claims(seed in any::<u64>()) {
        let inst = generate(seed, 1, CostMode::MergedFormula).remove(0);
        let runs: Vec<_> = Scenario::ALL.iter().map(|&s| inst.run(s, CostMode::MergedFormula).unwrap()).collect();
        for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            let cmp = compare(&runs[a], &runs[b]).unwrap();
            let failed: Vec<_> = cmp.failures().collect();
            prop_assert!(failed.is_empty(), "{:?}", failed);
        }
        prop_assert!((runs[2].utility - runs[3].utility).abs() <= CLAIM_TOL);
        prop_assert!((runs[2].utility - inst.wages.remote()).abs() <= CLAIM_TOL);
        for r in &runs {
            prop_assert!((r.total_cost - r.recomputed_total_cost()).abs() <= 1e-9 * r.total_cost.max(1.0));
            prop_assert!(r.ratios().iter().all(|h| (0.0..=1.0).contains(h)));
            prop_assert!(r.rents().iter().all(|&x| x >= -CLAIM_TOL));
            let occupied = r.short_term.occupied();
            prop_assert!(r.costs()[..occupied].windows(2).all(|w| w[0] <= w[1] + CLAIM_TOL));
            if let Some(i) = r.mixed_zone() {
                let sched = inst.base.for_scenario(r.scenario);
                let g = g_value(&inst.corridor, sched, &inst.wages, i, r.commuters()[i], r.mode).unwrap();
                prop_assert!((g - inst.wages.remote()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn gap_grows_with_perturbations(seed in any::<u64>(), eps in 0.01f64..1.0) {
        let inst = generate(seed, 1, CostMode::MergedFormula).remove(0);
        let r = inst.run(Scenario::Ns, CostMode::MergedFormula).unwrap();
        let state = IntegratedState::from_report(&r).unwrap();
        prop_assert!(equilibrium_gap(&state) <= 1e-9);
        let mut cost = state.clone();
        cost.costs[0] += eps;
        prop_assert!(equilibrium_gap(&cost) >= eps - 1e-9);
        let mut rent = state;
        rent.rents[0] -= eps;
        prop_assert!(equilibrium_gap(&rent) >= eps - 1e-9);
    }
}
