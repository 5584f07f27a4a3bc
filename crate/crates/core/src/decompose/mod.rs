//! Variable selection and sub-problem construction.
//!
//! A selector looks at the current [`SatState`] and returns `m` distinct
//! *dynamic* variables; [`build_subproblem`] then freezes everything else and
//! keeps only the clauses whose truth value can still change.

mod graph;
mod subproblem;

use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::cnf::SatState;
use crate::error::{Error, Result};

pub use graph::{build_graph, select_graph, BipartiteGraph, EdgeWeight, GraphSelector};
pub use subproblem::{build_subproblem, SubProblem};

/// Parameters of the graph selector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphParams {
    /// Edge weight is `n^exponent` for a clause with `n` false literals.
    pub exponent: f64,
    /// Swap iterations; `None` means `3·m` capped at `N + L`.
    pub swap_budget: Option<usize>,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams { exponent: 1.0, swap_budget: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectorKind {
    Random,
    Energy,
    Softmax,
    Graph(GraphParams),
}

impl SelectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            SelectorKind::Random => "random",
            SelectorKind::Energy => "energy",
            SelectorKind::Softmax => "softmax",
            SelectorKind::Graph(_) => "graph",
        }
    }

    /// Picks `m` dynamic variables from `state`.
    pub fn select<R: Rng + ?Sized>(&self, state: &SatState<'_>, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        match *self {
            SelectorKind::Random => select_random(state, m, rng),
            SelectorKind::Energy => select_energy(state, m),
            SelectorKind::Softmax => select_softmax(state, m, rng),
            SelectorKind::Graph(params) => {
                let budget = params.swap_budget.unwrap_or_else(|| default_swap_budget(state, m));
                select_graph(state, m, EdgeWeight::power(params.exponent), budget, rng)
            }
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn default_swap_budget(state: &SatState<'_>, m: usize) -> usize {
    let formula = state.formula();
    (3 * m).min(formula.num_vars() + formula.num_clauses())
}

pub fn check_m(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::param(format!("selection size m={m} must be in 1..={n}")));
    }
    Ok(())
}

/// `m` variables uniformly without replacement, ignoring the state.
pub fn select_random<R: Rng + ?Sized>(state: &SatState<'_>, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = state.formula().num_vars();
    check_m(m, n)?;
    Ok(index::sample(rng, n, m).into_vec())
}

/// The `m` variables whose individual flip lowers the energy most; ties go to
/// the lower index.
pub fn select_energy(state: &SatState<'_>, m: usize) -> Result<Vec<usize>> {
    let n = state.formula().num_vars();
    check_m(m, n)?;
    let mut ranked: Vec<(i64, usize)> = (0..n).map(|v| (state.flip_delta(v), v)).collect();
    if m < n {
        ranked.select_nth_unstable(m - 1);
        ranked.truncate(m);
    }
    ranked.sort_unstable();
    Ok(ranked.into_iter().map(|(_, v)| v).collect())
}

/// Samples `m` variables without replacement with probabilities
/// `softmax(-flip_delta)`, renormalizing over the remaining variables after
/// each draw.
pub fn select_softmax<R: Rng + ?Sized>(state: &SatState<'_>, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = state.formula().num_vars();
    check_m(m, n)?;
    let gains: Vec<f64> = (0..n).map(|v| -(state.flip_delta(v) as f64)).collect();
    Ok(sample_softmax(&gains, m, rng))
}

pub(crate) fn sample_softmax<R: Rng + ?Sized>(gains: &[f64], m: usize, rng: &mut R) -> Vec<usize> {
    let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = gains.iter().map(|g| (g - max).exp()).collect();
    let mut remaining = weights.iter().sum::<f64>();
    let mut chosen = Vec::with_capacity(m);
    let mut taken = vec![false; gains.len()];
    for draw in 0..m {
        let pick = if remaining > 0.0 {
            let target = rng.gen::<f64>() * remaining;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 {
                    acc += w;
                    pick = Some(i);
                    if acc > target {
                        break;
                    }
                }
            }
            pick
        } else {
            None
        };
        // Underflowed weights: fall back to uniform over what is left.
        let pick = pick.unwrap_or_else(|| {
            let k = rng.gen_range(0..gains.len() - draw);
            (0..gains.len()).filter(|&i| !taken[i]).nth(k).expect("enough variables left")
        });
        taken[pick] = true;
        remaining -= weights[pick];
        weights[pick] = 0.0;
        if remaining < 0.0 || weights.iter().all(|&w| w == 0.0) {
            remaining = weights.iter().sum();
        }
        chosen.push(pick);
    }
    chosen
}
