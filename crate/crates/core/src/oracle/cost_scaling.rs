//! Cost-scaling push-relabel for feasible min-cost flow problems.

use std::collections::VecDeque;

use super::min_cost_flow::{FlowSolution, MinCostFlow, Status};

const ALPHA: i64 = 16;

pub fn solve(p: &MinCostFlow) -> FlowSolution {
    let n = p.supply.len();
    let m = p.source.len();
    let scale = n as i64 + 1;
    // no arc carries more than the total supply
    let bound: i64 = p.supply.iter().filter(|&&s| s > 0).sum();

    // residual arcs: 2e forward, 2e+1 backward
    let mut head = vec![0usize; 2 * m];
    let mut cost = vec![0i64; 2 * m];
    let mut res = vec![0i64; 2 * m];
    let mut degree = vec![0usize; n + 1];
    for e in 0..m {
        head[2 * e] = p.target[e];
        head[2 * e + 1] = p.source[e];
        cost[2 * e] = p.cost[e] * scale;
        cost[2 * e + 1] = -p.cost[e] * scale;
        res[2 * e] = p.cap[e].min(bound);
        degree[p.source[e] + 1] += 1;
        degree[p.target[e] + 1] += 1;
    }
    for u in 0..n {
        degree[u + 1] += degree[u];
    }
    let first = degree;
    let mut fill = first.clone();
    let mut adj = vec![0usize; 2 * m];
    for e in 0..m {
        adj[fill[p.source[e]]] = 2 * e;
        fill[p.source[e]] += 1;
        adj[fill[p.target[e]]] = 2 * e + 1;
        fill[p.target[e]] += 1;
    }
    let tail = |a: usize| head[a ^ 1];

    let mut pi = vec![0i64; n];
    let mut excess = p.supply.clone();
    let mut current = first[..n].to_vec();
    let mut active = vec![false; n];
    let mut queue = VecDeque::new();
    let max_cost = cost.iter().map(|c| c.abs()).max().unwrap_or(0);
    let mut eps = max_cost.max(1);
    loop {
        eps = (eps / ALPHA).max(1);
        // saturate every residual arc that violates optimality
        for a in 0..2 * m {
            if res[a] > 0 && cost[a] + pi[tail(a)] - pi[head[a]] < 0 {
                let d = res[a];
                excess[tail(a)] -= d;
                excess[head[a]] += d;
                res[a ^ 1] += d;
                res[a] = 0;
            }
        }
        // prices fall by at most a small multiple of n times the previous
        // epsilon during one refinement unless the problem is infeasible
        let drop = (3 * (n as i64 + 1)).saturating_mul(eps.saturating_mul(ALPHA));
        let floor: Vec<i64> = pi.iter().map(|&x| x.saturating_sub(drop)).collect();
        for u in 0..n {
            current[u] = first[u];
            active[u] = excess[u] > 0;
            if active[u] {
                queue.push_back(u);
            }
        }
        while let Some(u) = queue.pop_front() {
            active[u] = false;
            while excess[u] > 0 {
                let mut pushed = false;
                while current[u] < first[u + 1] {
                    let a = adj[current[u]];
                    let v = head[a];
                    if res[a] > 0 && cost[a] + pi[u] - pi[v] < 0 {
                        let d = excess[u].min(res[a]);
                        excess[u] -= d;
                        excess[v] += d;
                        res[a] -= d;
                        res[a ^ 1] += d;
                        if excess[v] > 0 && !active[v] {
                            active[v] = true;
                            queue.push_back(v);
                        }
                        pushed = true;
                        if excess[u] == 0 {
                            break;
                        }
                    }
                    current[u] += 1;
                }
                if excess[u] == 0 {
                    break;
                }
                if !pushed || current[u] >= first[u + 1] {
                    // relabel
                    let mut best = i64::MAX;
                    for &a in &adj[first[u]..first[u + 1]] {
                        if res[a] > 0 {
                            best = best.min(cost[a] + pi[u] - pi[head[a]]);
                        }
                    }
                    if best == i64::MAX {
                        return infeasible(n, m);
                    }
                    pi[u] -= best + eps;
                    current[u] = first[u];
                    if pi[u] < floor[u] {
                        return infeasible(n, m);
                    }
                }
            }
        }
        if eps == 1 {
            break;
        }
    }
    let flow = (0..m).map(|e| res[2 * e + 1]).collect();
    // Make the rounded prices exactly dual feasible on the residual graph.
    // They start almost consistent, so label correction settles quickly.
    let mut potential: Vec<i64> = pi.iter().map(|&x| (x as f64 / scale as f64).round() as i64).collect();
    let mut queued = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).collect();
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        for &a in &adj[first[u]..first[u + 1]] {
            if res[a] > 0 {
                let v = head[a];
                let bound = potential[u] + cost[a] / scale;
                if potential[v] > bound {
                    potential[v] = bound;
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    FlowSolution {
        status: if excess.iter().all(|&x| x == 0) { Status::Optimal } else { Status::Infeasible },
        flow,
        potential,
    }
}

fn infeasible(n: usize, m: usize) -> FlowSolution {
    FlowSolution {
        status: Status::Infeasible,
        flow: vec![0; m],
        potential: vec![0; n],
    }
}
