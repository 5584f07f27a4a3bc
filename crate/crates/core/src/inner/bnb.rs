//! Exact Max-SAT by depth-first branch and bound.
//!
//! The lower bound at a node is the number of clauses already falsified plus
//! the number of disjoint pairs of unit clauses `(ℓ)`, `(¬ℓ)`: each pair costs
//! at least one more unsatisfied clause whatever the remaining variables do.

use crate::cnf::{energy_of, Assignment, CnfFormula, Literal};
use crate::decompose::SubProblem;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BnbOutcome {
    pub assignment: Assignment,
    pub energy: usize,
    /// The search finished within the node budget, so `energy` is the optimum.
    pub optimal: bool,
    pub nodes: u64,
}

/// Minimum-energy assignment of the sub-problem, with its base values as the
/// first incumbent.
pub fn exact_bnb(sub: &SubProblem, node_budget: u64) -> Result<BnbOutcome> {
    exact_maxsat(sub.formula(), sub.base(), node_budget)
}

/// Minimum-energy assignment of `formula`, starting from the incumbent
/// `init`. Unconstrained variables keep their value from `init`.
pub fn exact_maxsat(formula: &CnfFormula, init: &[bool], node_budget: u64) -> Result<BnbOutcome> {
    if node_budget == 0 {
        return Err(Error::param("node budget must be at least 1"));
    }
    let energy = energy_of(formula, init)?;
    let mut search = Search::new(formula, init, energy, node_budget);
    if energy > 0 {
        search.dfs();
    }
    Ok(BnbOutcome {
        assignment: Assignment::new(search.best),
        energy: search.best_energy,
        optimal: !search.exhausted,
        nodes: search.nodes,
    })
}

enum Status {
    Satisfied,
    Falsified,
    Unit(Literal),
    Open,
}

struct Search<'a> {
    formula: &'a CnfFormula,
    base: &'a [bool],
    value: Vec<Option<bool>>,
    true_count: Vec<u8>,
    free_count: Vec<u8>,
    falsified: usize,
    unit_pos: Vec<u32>,
    unit_neg: Vec<u32>,
    pairs: usize,
    best: Vec<bool>,
    best_energy: usize,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<'a> Search<'a> {
    fn new(formula: &'a CnfFormula, base: &'a [bool], energy: usize, budget: u64) -> Search<'a> {
        let n = formula.num_vars();
        let mut s = Search {
            formula,
            base,
            value: vec![None; n],
            true_count: vec![0; formula.num_clauses()],
            free_count: formula.clauses().map(|c| c.len() as u8).collect(),
            falsified: 0,
            unit_pos: vec![0; n],
            unit_neg: vec![0; n],
            pairs: 0,
            best: base.to_vec(),
            best_energy: energy,
            nodes: 0,
            budget,
            exhausted: false,
        };
        for c in 0..formula.num_clauses() {
            s.account(c, true);
        }
        s
    }

    fn status(&self, c: usize) -> Status {
        if self.true_count[c] > 0 {
            Status::Satisfied
        } else {
            match self.free_count[c] {
                0 => Status::Falsified,
                1 => Status::Unit(
                    *self.formula.clause(c).iter().find(|l| self.value[l.var()].is_none()).expect("one free literal"),
                ),
                _ => Status::Open,
            }
        }
    }

    /// Adds (or removes) the clause's share of the lower bound.
    fn account(&mut self, c: usize, add: bool) {
        match self.status(c) {
            Status::Falsified => {
                if add {
                    self.falsified += 1;
                } else {
                    self.falsified -= 1;
                }
            }
            Status::Unit(lit) => {
                let v = lit.var();
                let before = self.unit_pos[v].min(self.unit_neg[v]);
                let slot = if lit.is_positive() { &mut self.unit_pos[v] } else { &mut self.unit_neg[v] };
                if add {
                    *slot += 1;
                } else {
                    *slot -= 1;
                }
                let after = self.unit_pos[v].min(self.unit_neg[v]);
                self.pairs = self.pairs + after as usize - before as usize;
            }
            Status::Satisfied | Status::Open => {}
        }
    }

    fn lower_bound(&self) -> usize {
        self.falsified + self.pairs
    }

    fn assign(&mut self, var: usize, val: bool) {
        let formula = self.formula;
        for &c in formula.occurrences(var) {
            self.account(c as usize, false);
        }
        self.value[var] = Some(val);
        for &c in formula.occurrences(var) {
            let c = c as usize;
            self.free_count[c] -= 1;
            let lit = formula.clause(c).iter().find(|l| l.var() == var).expect("occurrence lists are exact");
            if lit.is_positive() == val {
                self.true_count[c] += 1;
            }
            self.account(c, true);
        }
    }

    fn unassign(&mut self, var: usize) {
        let formula = self.formula;
        let val = self.value[var].expect("variable is assigned");
        for &c in formula.occurrences(var) {
            let c = c as usize;
            self.account(c, false);
            self.free_count[c] += 1;
            let lit = formula.clause(c).iter().find(|l| l.var() == var).expect("occurrence lists are exact");
            if lit.is_positive() == val {
                self.true_count[c] -= 1;
            }
        }
        self.value[var] = None;
        for &c in formula.occurrences(var) {
            self.account(c as usize, true);
        }
    }

    /// The free variable in the most not-yet-satisfied clauses, with the
    /// value that satisfies more of them first.
    fn branch(&self) -> Option<(usize, [bool; 2])> {
        let mut pick: Option<(usize, usize, usize)> = None;
        for v in 0..self.formula.num_vars() {
            if self.value[v].is_some() {
                continue;
            }
            let (mut pos, mut neg) = (0, 0);
            for &c in self.formula.occurrences(v) {
                let c = c as usize;
                if self.true_count[c] == 0 {
                    let lit = self.formula.clause(c).iter().find(|l| l.var() == v).expect("exact occurrences");
                    if lit.is_positive() {
                        pos += 1;
                    } else {
                        neg += 1;
                    }
                }
            }
            if pos + neg > 0 && pick.map_or(true, |(_, p, n)| pos + neg > p + n) {
                pick = Some((v, pos, neg));
            }
        }
        pick.map(|(v, pos, neg)| {
            let first = if pos == neg { self.base[v] } else { pos > neg };
            (v, [first, !first])
        })
    }

    fn dfs(&mut self) {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        if self.lower_bound() >= self.best_energy {
            return;
        }
        let Some((var, order)) = self.branch() else {
            // Every clause is satisfied or falsified: this is a leaf.
            self.best_energy = self.falsified;
            for (b, (v, base)) in self.best.iter_mut().zip(self.value.iter().zip(self.base)) {
                *b = v.unwrap_or(*base);
            }
            return;
        };
        for val in order {
            self.assign(var, val);
            self.dfs();
            self.unassign(var);
            if self.exhausted || self.best_energy == 0 {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::seq::index;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::cnf::{generate_random_ksat, SatState};
    use crate::decompose::build_subproblem;

    fn brute_force(f: &CnfFormula) -> usize {
        let n = f.num_vars();
        (0..1u64 << n).map(|m| energy_of(f, &Assignment::from_bits(n, m)).unwrap()).min().unwrap()
    }

    #[test]
    fn contradiction_costs_one() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        for init in [[false], [true]] {
            let out = exact_maxsat(&f, &init, 1_000).unwrap();
            assert_eq!(out.energy, 1);
            assert!(out.optimal);
        }
    }

    #[test]
    fn zero_energy_base_needs_no_search() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2], &[-3]]).unwrap();
        let s = SatState::new(&f, vec![true, false, false].into()).unwrap();
        let sub = build_subproblem(&s, &[0, 1, 2]).unwrap();
        let out = exact_bnb(&sub, 10).unwrap();
        assert_eq!(out.assignment, *sub.base());
        assert!(out.optimal);
        assert_eq!(out.nodes, 0);
    }

    #[test]
    fn matches_brute_force_on_small_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for seed in 0..300 {
            let n = rng.gen_range(1..=15);
            let ratio = rng.gen_range(3.0..=5.0);
            let l = (n as f64 * ratio).round() as usize;
            let k = rng.gen_range(1..=3.min(n));
            let f = generate_random_ksat(n, l, k, seed).unwrap();
            let init = Assignment::random(n, &mut rng);
            let out = exact_maxsat(&f, &init, u64::MAX).unwrap();
            assert!(out.optimal);
            assert_eq!(out.energy, brute_force(&f), "seed {seed}");
            assert_eq!(out.energy, energy_of(&f, &out.assignment).unwrap());
        }
    }

    #[test]
    fn matches_brute_force_on_subproblems() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for seed in 0..100 {
            let f = generate_random_ksat(40, 170, 3, seed).unwrap();
            let s = SatState::new(&f, Assignment::random(40, &mut rng)).unwrap();
            let m = rng.gen_range(1..=15);
            let sub = build_subproblem(&s, &index::sample(&mut rng, 40, m).into_vec()).unwrap();
            let out = exact_bnb(&sub, u64::MAX).unwrap();
            assert_eq!(out.energy, brute_force(sub.formula()));
            assert!(out.energy <= sub.base_energy());
        }
    }

    #[test]
    fn budget_exhaustion_keeps_incumbent() {
        let f = generate_random_ksat(60, 300, 3, 2).unwrap();
        let init = Assignment::random(60, &mut ChaCha8Rng::seed_from_u64(1));
        let start = energy_of(&f, &init).unwrap();
        let out = exact_maxsat(&f, &init, 50).unwrap();
        assert!(!out.optimal);
        assert_eq!(out.nodes, 50);
        assert!(out.energy <= start);
        assert_eq!(out.energy, energy_of(&f, &out.assignment).unwrap());
        assert!(exact_maxsat(&f, &init, 0).is_err());
    }
}
