//! Transportation feasibility on a fixed positivity pattern, decided by
//! max-flow with lower bounds.
//!
//! The question: does a matrix C >= 0 exist whose support is EXACTLY the
//! given pattern, with prescribed row and column sums? Strict positivity on
//! every pattern cell is enforced by a lower bound of
//! eps = 1e-9 * min(target) on each pattern edge, folded into a feasible-
//! circulation problem and solved with Dinic's algorithm.

use crate::error::{Error, Result};

const INF: f64 = 16.0;
const FLOW_EPS: f64 = 1e-15;
const SATURATION_SLACK: f64 = 1e-12;

struct Dinic {
    // Edge arrays: to[e], cap[e]; paired reverse edge is e ^ 1.
    to: Vec<usize>,
    cap: Vec<f64>,
    head: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n_nodes: usize) -> Self {
        Self {
            to: Vec::new(),
            cap: Vec::new(),
            head: vec![Vec::new(); n_nodes],
            level: vec![0; n_nodes],
            iter: vec![0; n_nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        let e = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.to.push(from);
        self.cap.push(0.0);
        self.head[from].push(e);
        self.head[to].push(e + 1);
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > FLOW_EPS && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, u: usize, sink: usize, pushed: f64) -> f64 {
        if u == sink {
            return pushed;
        }
        while self.iter[u] < self.head[u].len() {
            let e = self.head[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > FLOW_EPS && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, sink, pushed.min(self.cap[e]));
                if got > FLOW_EPS {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(source, sink) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.dfs(source, sink, INF);
                if pushed <= FLOW_EPS {
                    break;
                }
                total += pushed;
            }
        }
        total
    }
}

/// Decides whether a nonnegative matrix with support exactly `pattern`
/// (row-major, n_rows x n_cols) can have the given row and column sums.
///
/// Returns `TARGET_MISMATCH` when the target sums differ by more than
/// 1e-10. Strict positivity on the pattern is what separates this from
/// plain transportation feasibility; see the module docs.
pub fn pattern_feasibility(
    pattern: &[bool],
    row_targets: &[f64],
    col_targets: &[f64],
) -> Result<bool> {
    let n_rows = row_targets.len();
    let n_cols = col_targets.len();
    if pattern.len() != n_rows * n_cols {
        return Err(Error::DimensionMismatch { expected: n_rows * n_cols, got: pattern.len() });
    }
    if row_targets.iter().chain(col_targets.iter()).any(|&t| t <= 0.0 || !t.is_finite()) {
        return Err(Error::Validation("targets must be strictly positive and finite".into()));
    }
    let row_total: f64 = row_targets.iter().sum();
    let col_total: f64 = col_targets.iter().sum();
    let gap = (row_total - col_total).abs();
    if gap > 1e-10 {
        return Err(Error::TargetMismatch { gap });
    }

    // Normalize total mass to one so all tolerances are scale-free.
    let r: Vec<f64> = row_targets.iter().map(|&t| t / row_total).collect();
    let c: Vec<f64> = col_targets.iter().map(|&t| t / row_total).collect();
    let min_target = r.iter().chain(c.iter()).cloned().fold(f64::INFINITY, f64::min);
    let eps = 1e-9 * min_target;

    // A row (column) whose pattern is empty cannot carry its positive target.
    let row_degree: Vec<usize> =
        (0..n_rows).map(|i| (0..n_cols).filter(|&j| pattern[i * n_cols + j]).count()).collect();
    let col_degree: Vec<usize> =
        (0..n_cols).map(|j| (0..n_rows).filter(|&i| pattern[i * n_cols + j]).count()).collect();
    if row_degree.contains(&0) || col_degree.contains(&0) {
        return Ok(false);
    }

    // Circulation with lower bounds, reduced to plain max-flow:
    //   s -> row_i with bounds [r_i, r_i]   (dropped; becomes node demand)
    //   row_i -> col_j with bounds [eps, inf) on pattern cells
    //   col_j -> t with bounds [c_j, c_j]   (dropped; becomes node demand)
    //   t -> s unbounded.
    // Node demands feed a super source/sink; feasible iff the super edges
    // saturate.
    let super_source = 0;
    let super_sink = 1;
    let s = 2;
    let t = 3;
    let row_node = |i: usize| 4 + i;
    let col_node = |j: usize| 4 + n_rows + j;
    let mut net = Dinic::new(4 + n_rows + n_cols);

    let mut required = 0.0;
    for i in 0..n_rows {
        for j in 0..n_cols {
            if pattern[i * n_cols + j] {
                net.add_edge(row_node(i), col_node(j), INF);
            }
        }
    }
    net.add_edge(t, s, INF);
    for i in 0..n_rows {
        let demand = r[i] - eps * row_degree[i] as f64;
        net.add_edge(super_source, row_node(i), demand);
        required += demand;
    }
    for j in 0..n_cols {
        net.add_edge(col_node(j), super_sink, c[j] - eps * col_degree[j] as f64);
    }
    net.add_edge(s, super_sink, 1.0);
    net.add_edge(super_source, t, 1.0);
    required += 1.0;

    let flow = net.max_flow(super_source, super_sink);
    Ok(required - flow <= SATURATION_SLACK)
}
