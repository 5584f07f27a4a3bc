//! Graph-based selector on the weighted clause/variable incidence graph.
//!
//! Nodes `0..N` are variables, nodes `N..N+L` are clauses. Every edge of
//! clause `l` weighs `f(n_l)` where `n_l` counts the false literals of the
//! clause. The selector grows a dense "in" set `I` by swapping the outside
//! node of highest connectivity with the inside node of lowest connectivity,
//! then restores the number of variable nodes in `I` to the target.

use rand::seq::index;
use rand::Rng;

use super::check_m;
use crate::cnf::{CnfFormula, SatState};
use crate::error::Result;

/// Edge weight `f(n) = n^exponent` for a clause with `n` false literals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeWeight {
    exponent: f64,
}

impl EdgeWeight {
    pub fn identity() -> EdgeWeight {
        EdgeWeight { exponent: 1.0 }
    }

    pub fn power(exponent: f64) -> EdgeWeight {
        EdgeWeight { exponent }
    }

    pub fn weight(&self, false_literals: usize) -> f64 {
        (false_literals as f64).powf(self.exponent)
    }
}

#[derive(Clone, Debug)]
pub struct BipartiteGraph<'f> {
    formula: &'f CnfFormula,
    clause_weight: Vec<f64>,
    inside: Vec<bool>,
    conn: Vec<f64>,
    vars_inside: usize,
    /// Total weight of edges with both ends in `I`; Σ_{v∈I} c(v) is twice this.
    internal: f64,
}

pub fn build_graph<'f>(state: &SatState<'f>, f: EdgeWeight) -> BipartiteGraph<'f> {
    let formula = state.formula();
    let values = state.assignment();
    let clause_weight = formula
        .clauses()
        .map(|clause| f.weight(clause.iter().filter(|l| !l.is_satisfied_by(values)).count()))
        .collect();
    let nodes = formula.num_vars() + formula.num_clauses();
    BipartiteGraph {
        formula,
        clause_weight,
        inside: vec![false; nodes],
        conn: vec![0.0; nodes],
        vars_inside: 0,
        internal: 0.0,
    }
}

impl<'f> BipartiteGraph<'f> {
    pub fn num_var_nodes(&self) -> usize {
        self.formula.num_vars()
    }

    pub fn num_nodes(&self) -> usize {
        self.inside.len()
    }

    pub fn is_var_node(&self, node: usize) -> bool {
        node < self.formula.num_vars()
    }

    pub fn clause_weight(&self, clause: usize) -> f64 {
        self.clause_weight[clause]
    }

    /// Every edge as `(variable, clause, weight)`, one per literal occurrence.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.formula
            .clauses()
            .enumerate()
            .flat_map(move |(c, clause)| clause.iter().map(move |l| (l.var(), c, self.clause_weight[c])))
    }

    pub fn is_inside(&self, node: usize) -> bool {
        self.inside[node]
    }

    pub fn connectivity(&self, node: usize) -> f64 {
        self.conn[node]
    }

    pub fn vars_inside(&self) -> usize {
        self.vars_inside
    }

    /// Σ_{v∈I} c(v).
    pub fn inside_connectivity(&self) -> f64 {
        2.0 * self.internal
    }

    /// Connectivity of every node recomputed from the edge list.
    pub fn connectivity_from_scratch(&self) -> Vec<f64> {
        let n = self.formula.num_vars();
        let mut conn = vec![0.0; self.num_nodes()];
        for (v, c, w) in self.edges() {
            if self.inside[n + c] {
                conn[v] += w;
            }
            if self.inside[v] {
                conn[n + c] += w;
            }
        }
        conn
    }

    fn for_each_neighbor(&self, node: usize, mut visit: impl FnMut(usize, f64)) {
        let n = self.formula.num_vars();
        if node < n {
            for &c in self.formula.occurrences(node) {
                visit(n + c as usize, self.clause_weight[c as usize]);
            }
        } else {
            let c = node - n;
            let w = self.clause_weight[c];
            for lit in self.formula.clause(c) {
                visit(lit.var(), w);
            }
        }
    }

    fn move_in(&mut self, node: usize) {
        debug_assert!(!self.inside[node]);
        self.inside[node] = true;
        self.internal += self.conn[node];
        if self.is_var_node(node) {
            self.vars_inside += 1;
        }
        let mut touched = Vec::with_capacity(8);
        self.for_each_neighbor(node, |u, w| touched.push((u, w)));
        for (u, w) in touched {
            self.conn[u] += w;
        }
    }

    fn move_out(&mut self, node: usize) {
        debug_assert!(self.inside[node]);
        self.inside[node] = false;
        self.internal -= self.conn[node];
        if self.is_var_node(node) {
            self.vars_inside -= 1;
        }
        let mut touched = Vec::with_capacity(8);
        self.for_each_neighbor(node, |u, w| touched.push((u, w)));
        for (u, w) in touched {
            self.conn[u] -= w;
        }
    }

    /// Highest-connectivity node outside `I` within `range`, lowest index on ties.
    fn argmax_outside(&self, range: std::ops::Range<usize>) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in range {
            if !self.inside[v] && best.map_or(true, |b| self.conn[v] > self.conn[b]) {
                best = Some(v);
            }
        }
        best
    }

    /// Lowest-connectivity node inside `I` within `range`, lowest index on ties.
    fn argmin_inside(&self, range: std::ops::Range<usize>) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in range {
            if self.inside[v] && best.map_or(true, |b| self.conn[v] < self.conn[b]) {
                best = Some(v);
            }
        }
        best
    }
}

/// Stateful driver for the swap heuristic; exposes single steps for testing.
pub struct GraphSelector<'f> {
    graph: BipartiteGraph<'f>,
    target: usize,
}

impl<'f> GraphSelector<'f> {
    /// Starts with `initial` variable nodes in `I`.
    pub fn new(graph: BipartiteGraph<'f>, initial: &[usize]) -> GraphSelector<'f> {
        let target = initial.len();
        let mut graph = graph;
        for &v in initial {
            graph.move_in(v);
        }
        GraphSelector { graph, target }
    }

    pub fn graph(&self) -> &BipartiteGraph<'f> {
        &self.graph
    }

    /// One swap followed by the variable-count rebalance. Returns `false`
    /// (leaving `I` untouched) when no swap exists or when the step would
    /// lower Σ_{v∈I} c(v). Zero-gain steps are taken, which lets the search
    /// leave regions where every connectivity is zero.
    pub fn step(&mut self) -> bool {
        let g = &self.graph;
        let nodes = g.num_nodes();
        let (Some(out), Some(inn)) = (g.argmax_outside(0..nodes), g.argmin_inside(0..nodes)) else {
            return false;
        };
        let snapshot = (g.inside.clone(), g.conn.clone(), g.vars_inside, g.internal);
        let before = g.inside_connectivity();

        self.graph.move_in(out);
        self.graph.move_out(inn);
        let n = self.graph.num_var_nodes();
        if self.graph.vars_inside < self.target {
            if let Some(v) = self.graph.argmax_outside(0..n) {
                self.graph.move_in(v);
            }
        } else if self.graph.vars_inside > self.target {
            if let Some(v) = self.graph.argmin_inside(0..n) {
                self.graph.move_out(v);
            }
        }

        let after = self.graph.inside_connectivity();
        if after < before - 1e-9 * before.abs().max(1.0) {
            let (inside, conn, vars_inside, internal) = snapshot;
            self.graph.inside = inside;
            self.graph.conn = conn;
            self.graph.vars_inside = vars_inside;
            self.graph.internal = internal;
            return false;
        }
        true
    }

    /// Runs up to `budget` steps.
    pub fn run(&mut self, budget: usize) -> usize {
        let mut steps = 0;
        while steps < budget && self.step() {
            steps += 1;
        }
        steps
    }

    /// Variable nodes currently in `I`, ascending.
    pub fn selected(&self) -> Vec<usize> {
        (0..self.graph.num_var_nodes()).filter(|&v| self.graph.inside[v]).collect()
    }
}

/// Graph selector: random initial `I` of `m` variable nodes, then up to
/// `swap_budget` swap/rebalance steps.
pub fn select_graph<R: Rng + ?Sized>(
    state: &SatState<'_>,
    m: usize,
    f: EdgeWeight,
    swap_budget: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = state.formula().num_vars();
    check_m(m, n)?;
    let initial = index::sample(rng, n, m).into_vec();
    let mut selector = GraphSelector::new(build_graph(state, f), &initial);
    selector.run(swap_budget);
    Ok(selector.selected())
}
