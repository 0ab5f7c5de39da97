//! Integer min-cost flow with balanced supplies.

pub(super) const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub status: Status,
    pub flow: Vec<i64>,
    /// Node potentials `π`; reduced cost of arc `(u, v)` is
    /// `cost + π(u) − π(v)`.
    pub potential: Vec<i64>,
}

/// Builder for a min-cost flow problem. Arc capacities may be `None` for
/// unbounded arcs; costs must be nonnegative.
#[derive(Debug, Default, Clone)]
pub struct MinCostFlow {
    pub(super) supply: Vec<i64>,
    pub(super) source: Vec<usize>,
    pub(super) target: Vec<usize>,
    pub(super) cap: Vec<i64>,
    pub(super) cost: Vec<i64>,
}

impl MinCostFlow {
    pub fn new(node_count: usize) -> Self {
        Self {
            supply: vec![0; node_count],
            ..Self::default()
        }
    }

    pub fn node_count(&self) -> usize {
        self.supply.len()
    }

    pub fn arc_count(&self) -> usize {
        self.source.len()
    }

    pub fn set_supply(&mut self, node: usize, supply: i64) {
        self.supply[node] = supply;
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: Option<i64>, cost: i64) -> usize {
        assert!(cost >= 0, "negative arc cost");
        self.source.push(from);
        self.target.push(to);
        self.cap.push(cap.map_or(INF, |c| c.max(0)));
        self.cost.push(cost);
        self.source.len() - 1
    }

    /// Solves by cost scaling.
    pub fn solve(&self) -> FlowSolution {
        super::cost_scaling::solve(self)
    }

    /// Solves by the primal network simplex; slower on the oracle networks
    /// but independent of the cost-scaling code.
    pub fn solve_network_simplex(&self) -> FlowSolution {
        super::network_simplex::solve(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive optimum of a small transportation problem.
    fn brute_force(supply: &[i64], demand: &[i64], cost: &[Vec<i64>], cap: i64) -> Option<i64> {
        fn rec(i: usize, j: usize, rem_s: &mut Vec<i64>, rem_d: &mut Vec<i64>, cost: &[Vec<i64>], cap: i64, acc: i64, best: &mut Option<i64>) {
            if i == rem_s.len() {
                if rem_d.iter().all(|&d| d == 0) {
                    *best = Some(best.map_or(acc, |b: i64| b.min(acc)));
                }
                return;
            }
            if j == rem_d.len() {
                if rem_s[i] == 0 {
                    rec(i + 1, 0, rem_s, rem_d, cost, cap, acc, best);
                }
                return;
            }
            let top = rem_s[i].min(rem_d[j]).min(cap);
            for x in 0..=top {
                rem_s[i] -= x;
                rem_d[j] -= x;
                rec(i, j + 1, rem_s, rem_d, cost, cap, acc + x * cost[i][j], best);
                rem_s[i] += x;
                rem_d[j] += x;
            }
        }
        let mut best = None;
        rec(0, 0, &mut supply.to_vec(), &mut demand.to_vec(), cost, cap, 0, &mut best);
        best
    }

    fn both(p: &MinCostFlow) -> [FlowSolution; 2] {
        [p.solve(), p.solve_network_simplex()]
    }

    #[test]
    fn matches_brute_force_on_small_transportation_problems() {
        let cases: [(Vec<i64>, Vec<i64>, Vec<Vec<i64>>, i64); 4] = [
            (vec![3, 2], vec![1, 4], vec![vec![4, 1], vec![2, 3]], 3),
            (vec![2, 2, 1], vec![3, 2], vec![vec![1, 5], vec![3, 2], vec![7, 1]], 2),
            (vec![4], vec![2, 2], vec![vec![0, 9]], 4),
            (vec![4], vec![3, 1], vec![vec![1, 1]], 2),
        ];
        for (supply, demand, cost, cap) in cases {
            let ns = supply.len();
            let mut p = MinCostFlow::new(ns + demand.len());
            for (i, &s) in supply.iter().enumerate() {
                p.set_supply(i, s);
            }
            for (j, &d) in demand.iter().enumerate() {
                p.set_supply(ns + j, -d);
            }
            let mut arcs = Vec::new();
            for i in 0..ns {
                for j in 0..demand.len() {
                    arcs.push((p.add_arc(i, ns + j, Some(cap), cost[i][j]), cost[i][j]));
                }
            }
            let expect = brute_force(&supply, &demand, &cost, cap);
            for sol in both(&p) {
                let Some(best) = expect else {
                    assert_eq!(sol.status, Status::Infeasible);
                    continue;
                };
                assert_eq!(sol.status, Status::Optimal);
                let total: i64 = arcs.iter().map(|&(e, c)| sol.flow[e] * c).sum();
                assert_eq!(total, best);
                for &(e, c) in &arcs {
                    let (u, v) = (p.source[e], p.target[e]);
                    let rc = c + sol.potential[u] - sol.potential[v];
                    if sol.flow[e] == 0 {
                        assert!(rc >= 0);
                    } else if sol.flow[e] == cap {
                        assert!(rc <= 0);
                    } else {
                        assert_eq!(rc, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn solvers_agree_on_random_layered_networks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let width = rng.gen_range(2..6);
            let layers = rng.gen_range(2..5);
            let n = 2 + width * layers;
            let mut p = MinCostFlow::new(n);
            let amount = rng.gen_range(1..50);
            p.set_supply(0, amount);
            p.set_supply(1, -amount);
            let node = |l: usize, k: usize| 2 + l * width + k;
            for k in 0..width {
                p.add_arc(0, node(0, k), Some(rng.gen_range(0..30)), rng.gen_range(0..20));
                p.add_arc(node(layers - 1, k), 1, None, rng.gen_range(0..20));
            }
            for l in 0..layers - 1 {
                for a in 0..width {
                    for b in 0..width {
                        if rng.gen_bool(0.6) {
                            p.add_arc(node(l, a), node(l + 1, b), Some(rng.gen_range(1..25)), rng.gen_range(0..20));
                        }
                    }
                }
            }
            let [cs, ns] = both(&p);
            assert_eq!(cs.status, ns.status);
            if cs.status == Status::Optimal {
                let cost = |s: &FlowSolution| -> i64 { s.flow.iter().zip(&p.cost).map(|(f, c)| f * c).sum() };
                assert_eq!(cost(&cs), cost(&ns));
            }
        }
    }

    #[test]
    fn reports_infeasible_capacity() {
        let mut p = MinCostFlow::new(2);
        p.set_supply(0, 5);
        p.set_supply(1, -5);
        p.add_arc(0, 1, Some(3), 1);
        for sol in both(&p) {
            assert_eq!(sol.status, Status::Infeasible);
        }
    }

    #[test]
    fn chain_with_bypass() {
        // 0 -> 1 -> 3 cheap but capacity 2, 0 -> 2 -> 3 expensive
        let mut p = MinCostFlow::new(4);
        p.set_supply(0, 5);
        p.set_supply(3, -5);
        let a = p.add_arc(0, 1, Some(2), 1);
        p.add_arc(1, 3, None, 1);
        let b = p.add_arc(0, 2, None, 3);
        p.add_arc(2, 3, None, 3);
        for sol in both(&p) {
            assert_eq!(sol.status, Status::Optimal);
            assert_eq!(sol.flow[a], 2);
            assert_eq!(sol.flow[b], 3);
            assert_eq!(sol.potential[3] - sol.potential[0], 6);
        }
    }
}
