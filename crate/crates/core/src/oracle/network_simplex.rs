//! Primal network simplex with an artificial root, block-search pricing and
//! thread/last-successor tree bookkeeping.

use super::min_cost_flow::{FlowSolution, MinCostFlow, Status, INF};

const NONE: usize = usize::MAX;

const STATE_UPPER: i8 = -1;
const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_DOWN: i8 = -1;
const DIR_UP: i8 = 1;

struct Simplex {
    node_num: usize,
    arc_num: usize,
    root: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
    flow: Vec<i64>,
    state: Vec<i8>,
    pi: Vec<i64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    v_out: usize,
    delta: i64,
    next_arc: usize,
    block_size: usize,
    /// Caller's arc id at each internal position.
    order: Vec<usize>,
}

fn mixed_order(arc_num: usize, node_num: usize) -> Vec<usize> {
    let skip = (arc_num / node_num.max(1)).max(3);
    let mut order = vec![0; arc_num];
    let (mut i, mut j) = (0, 0);
    for e in 0..arc_num {
        order[i] = e;
        i += skip;
        if i >= arc_num {
            j += 1;
            i = j;
        }
    }
    order
}

pub(super) fn solve(p: &MinCostFlow) -> FlowSolution {
    Simplex::new(p).run()
}

impl Simplex {
    fn new(p: &MinCostFlow) -> Self {
        let node_num = p.node_count();
        let arc_num = p.arc_count();
        let all_nodes = node_num + 1;
        let root = node_num;
        let max_cost = p.cost.iter().copied().max().unwrap_or(0);
        let art_cost = (max_cost + 1).saturating_mul(node_num as i64 + 1);

        // interleave the arcs so that pricing blocks sample the whole network
        let order = mixed_order(arc_num, node_num);
        let mut s = Self {
            node_num,
            arc_num,
            root,
            source: order.iter().map(|&e| p.source[e]).collect(),
            target: order.iter().map(|&e| p.target[e]).collect(),
            cap: order.iter().map(|&e| p.cap[e]).collect(),
            cost: order.iter().map(|&e| p.cost[e]).collect(),
            order,
            flow: vec![0; arc_num],
            state: vec![STATE_LOWER; arc_num],
            pi: vec![0; all_nodes],
            parent: vec![NONE; all_nodes],
            pred: vec![NONE; all_nodes],
            thread: vec![0; all_nodes],
            rev_thread: vec![0; all_nodes],
            succ_num: vec![0; all_nodes],
            last_succ: vec![0; all_nodes],
            pred_dir: vec![0; all_nodes],
            dirty_revs: Vec::new(),
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            v_out: 0,
            delta: 0,
            next_arc: 0,
            block_size: ((arc_num as f64).sqrt() as usize).max(10),
        };
        s.source.reserve(node_num);
        s.target.reserve(node_num);
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = all_nodes;
        s.last_succ[root] = root.wrapping_sub(1);
        for u in 0..node_num {
            let e = arc_num + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state.push(STATE_TREE);
            s.cap.push(INF);
            let supply = p.supply[u];
            if supply >= 0 {
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = 0;
                s.source.push(u);
                s.target.push(root);
                s.flow.push(supply);
                s.cost.push(0);
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art_cost;
                s.source.push(root);
                s.target.push(u);
                s.flow.push(-supply);
                s.cost.push(art_cost);
            }
        }
        s
    }

    fn reduced(&self, e: usize) -> i64 {
        self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]]
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = 0i64;
        let mut cnt = self.block_size;
        let m = self.arc_num;
        if m == 0 {
            return false;
        }
        let start = self.next_arc;
        let mut e = start;
        for _ in 0..m {
            let c = self.state[e] as i64 * self.reduced(e);
            if c < min {
                min = c;
                self.in_arc = e;
            }
            e += 1;
            if e == m {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if min < 0 {
                    self.next_arc = e;
                    return true;
                }
                cnt = self.block_size;
            }
        }
        if min < 0 {
            self.next_arc = e;
            return true;
        }
        false
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc];
        let mut v = self.target[self.in_arc];
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let (first, second) = if self.state[self.in_arc] == STATE_LOWER {
            (self.source[self.in_arc], self.target[self.in_arc])
        } else {
            (self.target[self.in_arc], self.source[self.in_arc])
        };
        self.delta = self.cap[self.in_arc];
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            let mut d = self.flow[e];
            if self.pred_dir[u] == DIR_DOWN {
                let c = self.cap[e];
                d = if c >= INF { INF } else { c - d };
            }
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            let mut d = self.flow[e];
            if self.pred_dir[u] == DIR_UP {
                let c = self.cap[e];
                d = if c >= INF { INF } else { c - d };
            }
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self, change: bool) {
        if self.delta > 0 {
            let val = self.state[self.in_arc] as i64 * self.delta;
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
            let mut u = self.target[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
        }
        if change {
            self.state[self.in_arc] = STATE_TREE;
            let out = self.pred[self.u_out];
            self.state[out] = if self.flow[out] == 0 { STATE_LOWER } else { STATE_UPPER };
        } else {
            self.state[self.in_arc] = -self.state[self.in_arc];
        }
    }

    fn update_tree_structure(&mut self) {
        let old_rev_thread = self.rev_thread[self.u_out];
        let old_succ_num = self.succ_num[self.u_out];
        let old_last_succ = self.last_succ[self.u_out];
        self.v_out = self.parent[self.u_out];

        if self.u_in == self.u_out {
            self.parent[self.u_in] = self.v_in;
            self.pred[self.u_in] = self.in_arc;
            self.pred_dir[self.u_in] = if self.u_in == self.source[self.in_arc] { DIR_UP } else { DIR_DOWN };
            if self.thread[self.v_in] != self.u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[self.v_in];
                self.thread[self.v_in] = self.u_out;
                self.rev_thread[self.u_out] = self.v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == self.v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[self.v_in]
            };
            let mut stem = self.u_in;
            let mut par_stem = self.v_in;
            let mut last = self.last_succ[self.u_in];
            let mut after = self.thread[last];
            self.thread[self.v_in] = self.u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(self.v_in);
            while stem != self.u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);
                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;
                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;
                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[self.u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[self.u_out] = last;
            if old_rev_thread != self.v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for i in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[i];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }
            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[self.u_out];
            let mut u = self.u_out;
            while u != self.u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[self.u_in] = self.in_arc;
            self.pred_dir[self.u_in] = if self.u_in == self.source[self.in_arc] { DIR_UP } else { DIR_DOWN };
            self.succ_num[self.u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[self.join] == self.v_in { self.join } else { NONE };
        let last_succ_out = self.last_succ[self.u_out];
        let mut u = self.v_in;
        while u != NONE && self.last_succ[u] == self.v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }
        if self.join != old_rev_thread && self.v_in != old_rev_thread {
            let mut u = self.v_out;
            while u != NONE && u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = self.v_out;
            while u != NONE && u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }
        let mut u = self.v_in;
        while u != self.join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = self.v_out;
        while u != self.join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let sigma = self.pi[self.v_in] - self.pi[self.u_in] - self.pred_dir[self.u_in] as i64 * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[self.u_in]];
        // only differences matter, so shift whichever side is smaller
        if 2 * self.succ_num[self.u_in] <= self.node_num + 1 {
            let mut u = self.u_in;
            while u != end {
                self.pi[u] += sigma;
                u = self.thread[u];
            }
        } else {
            let mut u = end;
            while u != self.u_in {
                self.pi[u] -= sigma;
                u = self.thread[u];
            }
        }
    }

    fn run(mut self) -> FlowSolution {
        while self.find_entering_arc() {
            self.find_join_node();
            let change = self.find_leaving_arc();
            assert!(self.delta < INF, "unbounded cycle with nonnegative costs");
            self.change_flow(change);
            if change {
                self.update_tree_structure();
                self.update_potential();
            }
        }
        let infeasible = (self.arc_num..self.arc_num + self.node_num).any(|e| self.flow[e] != 0);
        let mut flow = vec![0; self.arc_num];
        for (pos, &e) in self.order.iter().enumerate() {
            flow[e] = self.flow[pos];
        }
        self.pi.truncate(self.node_num);
        let _ = self.root;
        FlowSolution {
            status: if infeasible { Status::Infeasible } else { Status::Optimal },
            flow,
            potential: self.pi,
        }
    }
}

