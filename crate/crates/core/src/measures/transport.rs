//! Network simplex for the uncapacitated transportation problem.
//!
//! Because every real arc is uncapacitated, a non-tree arc always carries
//! zero flow, so flows are kept per tree node (the flow on the node's
//! predecessor arc) and no per-arc state is needed.
//!
//! The spanning-tree bookkeeping (thread, reverse thread, successor counts
//! and last successors) follows the layout of the LEMON library.

use num_complex::Complex64 as Complex;
use rayon::prelude::*;

const UP: i8 = 1;
const DOWN: i8 = -1;
const NONE: usize = usize::MAX;

/// Neighbours per node in the initial arc list.
const SHORTLIST: usize = 12;

/// Most negative arcs added per source in one pricing round.
const ADD_PER_ROUND: usize = 8;

/// Optimal transport cost `Σ flow·|a_i - b_j|` between integer supplies
/// `sa` at `a` and demands `sb` at `b` (equal totals).
///
/// The simplex runs on a sparse arc list (nearest neighbours of every
/// node). At its optimum all pairs are priced against the duals in
/// parallel; arcs with negative reduced cost are appended and the simplex
/// resumes from the current tree. When no pair prices out negative the
/// sparse optimum is optimal for the complete graph.
pub(crate) fn transport_cost(a: &[Complex], sa: &[i64], b: &[Complex], sb: &[i64]) -> f64 {
    let dist = |i: usize, j: usize| {
        let d = a[i] - b[j];
        (d.re * d.re + d.im * d.im).sqrt()
    };
    let max_cost = diameter_bound(a, b);
    let mut t = Simplex::new(sa, sb, max_cost);
    t.add_arcs(shortlist(a, b), &dist);
    loop {
        t.run();
        let (m, n) = (a.len(), b.len());
        let pi = &t.pi;
        let eps = t.eps;
        let extra: Vec<(usize, usize)> = (0..m)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut neg: Vec<(f64, usize)> = (0..n)
                    .filter_map(|j| {
                        let rc = dist(i, j) + pi[i] - pi[m + j];
                        (rc < -eps).then_some((rc, j))
                    })
                    .collect();
                if neg.len() > ADD_PER_ROUND {
                    neg.select_nth_unstable_by(ADD_PER_ROUND, |x, y| x.0.total_cmp(&y.0));
                    neg.truncate(ADD_PER_ROUND);
                }
                neg.into_iter().map(move |(_, j)| (i, j))
            })
            .collect();
        if extra.is_empty() {
            break;
        }
        t.add_arcs(extra, &dist);
    }
    t.objective()
}

fn diameter_bound(a: &[Complex], b: &[Complex]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in a.iter().chain(b) {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    (x1 - x0).hypot(y1 - y0)
}

/// Each source's and each sink's nearest partners, deduplicated.
fn shortlist(a: &[Complex], b: &[Complex]) -> Vec<(usize, usize)> {
    fn nearest(p: Complex, q: &[Complex], k: usize) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = q.iter().enumerate().map(|(j, &w)| ((p - w).norm_sqr(), j)).collect();
        if d.len() > k {
            d.select_nth_unstable_by(k, |x, y| x.0.total_cmp(&y.0));
            d.truncate(k);
        }
        d.into_iter().map(|(_, j)| j).collect()
    }
    let mut arcs: Vec<(usize, usize)> = a
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &p)| nearest(p, b, SHORTLIST).into_iter().map(move |j| (i, j)))
        .collect();
    arcs.extend(
        b.par_iter()
            .enumerate()
            .flat_map_iter(|(j, &p)| nearest(p, a, SHORTLIST).into_iter().map(move |i| (i, j)))
            .collect::<Vec<_>>(),
    );
    arcs.sort_unstable();
    arcs.dedup();
    arcs
}

/// Spanning-tree state. Real arcs are indexed into `tail/head/cost`;
/// the artificial arc joining node `u` to the root has id `ART + u`.
struct Simplex {
    m: usize,
    tail: Vec<usize>,
    head: Vec<usize>,
    cost: Vec<f64>,
    art_cost: f64,
    eps: f64,
    root: usize,
    // tree, indexed by node (sources 0..m, sinks m..m+n, root m+n)
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    flow: Vec<i64>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pi: Vec<f64>,
    dirty_revs: Vec<usize>,
    next_arc: usize,
}

const ART: usize = usize::MAX / 2;

impl Simplex {
    fn new(supply: &[i64], demand: &[i64], max_cost: f64) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let nodes = m + n;
        let root = nodes;
        let art_cost = (max_cost + 1.0) * (nodes as f64 + 1.0);
        let mut t = Simplex {
            m,
            tail: Vec::new(),
            head: Vec::new(),
            cost: Vec::new(),
            art_cost,
            eps: 1e-12 * (max_cost + 1.0),
            root,
            parent: vec![root; nodes + 1],
            pred: vec![NONE; nodes + 1],
            pred_dir: vec![UP; nodes + 1],
            flow: vec![0; nodes + 1],
            thread: vec![0; nodes + 1],
            rev_thread: vec![0; nodes + 1],
            succ_num: vec![1; nodes + 1],
            last_succ: vec![0; nodes + 1],
            pi: vec![0.0; nodes + 1],
            dirty_revs: Vec::new(),
            next_arc: 0,
        };
        t.parent[root] = NONE;
        t.thread[root] = 0;
        t.rev_thread[0] = root;
        t.succ_num[root] = nodes + 1;
        t.last_succ[root] = root - 1;
        for u in 0..nodes {
            t.pred[u] = ART + u;
            t.thread[u] = u + 1;
            t.rev_thread[u + 1] = u;
            t.last_succ[u] = u;
            if u < m {
                // artificial arc u -> root
                t.pred_dir[u] = UP;
                t.flow[u] = supply[u];
            } else {
                // artificial arc root -> u
                t.pred_dir[u] = DOWN;
                t.flow[u] = demand[u - m];
                t.pi[u] = art_cost;
            }
        }
        t
    }

    fn add_arcs(&mut self, arcs: Vec<(usize, usize)>, dist: &impl Fn(usize, usize) -> f64) {
        for (i, j) in arcs {
            self.tail.push(i);
            self.head.push(self.m + j);
            self.cost.push(dist(i, j));
        }
    }

    fn source(&self, arc: usize) -> usize {
        if arc < ART {
            self.tail[arc]
        } else if arc - ART < self.m {
            arc - ART
        } else {
            self.root
        }
    }

    fn target(&self, arc: usize) -> usize {
        if arc < ART {
            self.head[arc]
        } else if arc - ART < self.m {
            self.root
        } else {
            arc - ART
        }
    }

    fn arc_cost(&self, arc: usize) -> f64 {
        if arc < ART {
            self.cost[arc]
        } else if arc - ART < self.m {
            0.0
        } else {
            self.art_cost
        }
    }

    /// Block-search pricing over the real arcs.
    fn find_entering(&mut self) -> Option<usize> {
        let total = self.tail.len();
        let block = (total as f64).sqrt().max(10.0) as usize;
        let mut best = None;
        let mut best_rc = -self.eps;
        let mut count = 0;
        let mut e = self.next_arc.min(total.saturating_sub(1));
        for _ in 0..total {
            let rc = self.cost[e] + self.pi[self.tail[e]] - self.pi[self.head[e]];
            if rc < best_rc {
                best_rc = rc;
                best = Some(e);
            }
            e += 1;
            if e == total {
                e = 0;
            }
            count += 1;
            if count == block {
                if best.is_some() {
                    self.next_arc = e;
                    return best;
                }
                count = 0;
            }
        }
        self.next_arc = e;
        best
    }

    fn find_join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    /// Pivots until no arc in the list prices out negative.
    fn run(&mut self) {
        while let Some(in_arc) = self.find_entering() {
            let first = self.source(in_arc);
            let second = self.target(in_arc);
            let join = self.find_join(first, second);

            // leaving arc: smallest flow on an arc traversed backwards
            let mut delta = i64::MAX;
            let mut u_out = NONE;
            let mut side = 0;
            let mut u = first;
            while u != join {
                if self.pred_dir[u] == UP && self.flow[u] < delta {
                    delta = self.flow[u];
                    u_out = u;
                    side = 1;
                }
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                if self.pred_dir[u] == DOWN && self.flow[u] <= delta {
                    delta = self.flow[u];
                    u_out = u;
                    side = 2;
                }
                u = self.parent[u];
            }
            debug_assert!(side != 0, "uncapacitated cycle with negative cost");
            let (u_in, v_in) = if side == 1 { (first, second) } else { (second, first) };

            if delta > 0 {
                let mut u = first;
                while u != join {
                    self.flow[u] -= self.pred_dir[u] as i64 * delta;
                    u = self.parent[u];
                }
                let mut u = second;
                while u != join {
                    self.flow[u] += self.pred_dir[u] as i64 * delta;
                    u = self.parent[u];
                }
            }
            self.update_tree(in_arc, u_in, v_in, u_out, join, delta);
            self.update_potential(in_arc, u_in, v_in);
        }
    }

    /// `Σ flow · cost` over tree arcs, which carry all the flow.
    fn objective(&self) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for u in 0..self.root {
            let arc = self.pred[u];
            if self.flow[u] == 0 {
                continue;
            }
            debug_assert!(arc < ART, "flow left on an artificial arc");
            let term = self.flow[u] as f64 * self.arc_cost(arc);
            // Neumaier summation
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        sum + comp
    }

    fn update_tree(
        &mut self,
        in_arc: usize,
        u_in: usize,
        v_in: usize,
        u_out: usize,
        join: usize,
        in_flow: i64,
    ) {
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];
        let in_dir = if u_in == self.source(in_arc) { UP } else { DOWN };

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.flow[u_in] = in_flow;
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            // re-hang the stem u_in .. u_out under v_in
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
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
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            // shift predecessor arcs (and their flows) down the stem
            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                self.flow[u] = self.flow[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.flow[u_in] = in_flow;
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self, in_arc: usize, u_in: usize, v_in: usize) {
        let sigma =
            self.pi[v_in] - self.pi[u_in] - self.pred_dir[u_in] as f64 * self.arc_cost(in_arc);
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }
}
