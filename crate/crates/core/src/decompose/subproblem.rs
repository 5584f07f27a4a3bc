use crate::cnf::{energy_of, Assignment, CnfFormula, Literal, SatState};
use crate::error::{Error, Result};

/// A pruned sub-SAT instance over the dynamic variables.
///
/// Local variable `i` is global variable `dynamic_vars[i]`. For any local
/// assignment `b`, the global energy after writing `b` back equals
/// `frozen_unsat() + sub_energy(b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubProblem {
    dynamic_vars: Vec<usize>,
    formula: CnfFormula,
    source_clauses: Vec<usize>,
    base: Assignment,
    frozen_unsat: usize,
}

impl SubProblem {
    /// Local-to-global variable map.
    pub fn dynamic_vars(&self) -> &[usize] {
        &self.dynamic_vars
    }

    pub fn num_dynamic(&self) -> usize {
        self.dynamic_vars.len()
    }

    /// Reduced clauses over local indices.
    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    /// Global index of each reduced clause.
    pub fn source_clauses(&self) -> &[usize] {
        &self.source_clauses
    }

    /// The current global values of the dynamic variables.
    pub fn base(&self) -> &Assignment {
        &self.base
    }

    /// Clauses unsatisfied in the global state that no dynamic flip can
    /// repair (the constant `C0`).
    pub fn frozen_unsat(&self) -> usize {
        self.frozen_unsat
    }

    pub fn sub_energy(&self, local: &[bool]) -> Result<usize> {
        energy_of(&self.formula, local)
    }

    pub fn base_energy(&self) -> usize {
        energy_of(&self.formula, &self.base).expect("base has M entries")
    }

    /// Number of reduced clauses with exactly three literals.
    pub fn num_ternary(&self) -> usize {
        self.formula.clauses().filter(|c| c.len() == 3).count()
    }

    /// Writes `local` into a copy of `global`.
    pub fn merge(&self, global: &[bool], local: &[bool]) -> Result<Assignment> {
        if local.len() != self.num_dynamic() {
            return Err(Error::LengthMismatch { expected: self.num_dynamic(), found: local.len() });
        }
        let mut merged = Assignment::new(global.to_vec());
        for (i, &g) in self.dynamic_vars.iter().enumerate() {
            merged[g] = local[i];
        }
        Ok(merged)
    }
}

/// Freezes every variable outside `dynamic_vars` at its current value and
/// reduces the formula:
///
/// * clauses without a dynamic variable are dropped;
/// * clauses with a true frozen literal are dropped (they stay satisfied);
/// * the remaining clauses lose their (false) frozen literals.
///
/// Only clauses touching a dynamic variable are visited, in ascending global
/// order, with literal order preserved.
pub fn build_subproblem(state: &SatState<'_>, dynamic_vars: &[usize]) -> Result<SubProblem> {
    let formula = state.formula();
    let n = formula.num_vars();
    if dynamic_vars.is_empty() {
        return Err(Error::param("dynamic variable set is empty"));
    }
    let mut local_of = vec![u32::MAX; n];
    for (i, &v) in dynamic_vars.iter().enumerate() {
        if v >= n {
            return Err(Error::VariableOutOfRange { var: v, num_vars: n });
        }
        if local_of[v] != u32::MAX {
            return Err(Error::DuplicateVariable(v));
        }
        local_of[v] = i as u32;
    }

    let mut touched: Vec<u32> = dynamic_vars.iter().flat_map(|&v| formula.occurrences(v).iter().copied()).collect();
    touched.sort_unstable();
    touched.dedup();

    let values = state.assignment();
    let mut clauses = Vec::new();
    let mut source_clauses = Vec::new();
    let mut base_unsat = 0;
    for c in touched {
        let c = c as usize;
        let clause = formula.clause(c);
        let frozen_true = clause.iter().any(|l| local_of[l.var()] == u32::MAX && l.is_satisfied_by(values));
        if frozen_true {
            continue;
        }
        let reduced: Vec<Literal> = clause
            .iter()
            .filter(|l| local_of[l.var()] != u32::MAX)
            .map(|l| l.with_var(local_of[l.var()] as usize))
            .collect();
        if state.sat_count(c) == 0 {
            base_unsat += 1;
        }
        clauses.push(reduced);
        source_clauses.push(c);
    }

    let base = Assignment::new(dynamic_vars.iter().map(|&v| values[v]).collect());
    Ok(SubProblem {
        dynamic_vars: dynamic_vars.to_vec(),
        formula: CnfFormula::new(dynamic_vars.len(), clauses)?,
        source_clauses,
        base,
        frozen_unsat: state.energy() - base_unsat,
    })
}

#[cfg(test)]
mod tests {
    use rand::seq::index;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::cnf::generate_random_ksat;

    #[test]
    fn frozen_true_literal_drops_clause() {
        // (x1 ∨ ¬x2 ∨ x3) with x2 frozen false
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, -2, 3]]).unwrap();
        let s = SatState::new(&f, Assignment::all_false(3)).unwrap();
        let sub = build_subproblem(&s, &[0, 2]).unwrap();
        assert_eq!(sub.formula().num_clauses(), 0);
        assert_eq!(sub.frozen_unsat(), 0);
    }

    #[test]
    fn frozen_false_literals_are_removed() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2, 3]]).unwrap();
        let s = SatState::new(&f, Assignment::all_false(3)).unwrap();
        let sub = build_subproblem(&s, &[0]).unwrap();
        assert_eq!(sub.formula(), &CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap());
        assert_eq!(sub.frozen_unsat(), 0);
        assert_eq!(sub.base_energy(), 1);
        for local in [[false], [true]] {
            let merged = sub.merge(s.assignment(), &local).unwrap();
            assert_eq!(energy_of(&f, &merged).unwrap(), sub.frozen_unsat() + sub.sub_energy(&local).unwrap());
        }
    }

    #[test]
    fn all_dynamic_keeps_formula() {
        let f = generate_random_ksat(20, 85, 3, 4).unwrap();
        let s = SatState::new(&f, Assignment::all_false(20)).unwrap();
        let sub = build_subproblem(&s, &(0..20).collect::<Vec<_>>()).unwrap();
        // every variable occurs somewhere, so nothing is dropped
        let used = (0..20).all(|v| !f.occurrences(v).is_empty());
        assert!(used);
        assert_eq!(sub.formula(), &f);
        assert_eq!(sub.frozen_unsat(), 0);
        assert_eq!(sub.source_clauses(), (0..85).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn untouched_unsat_clauses_count_towards_c0() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1], &[2], &[3, 1]]).unwrap();
        let s = SatState::new(&f, Assignment::all_false(3)).unwrap();
        let sub = build_subproblem(&s, &[2]).unwrap();
        assert_eq!(sub.frozen_unsat(), 2);
        assert_eq!(sub.formula().num_clauses(), 1);
    }

    #[test]
    fn rejects_bad_dynamic_sets() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2, 3]]).unwrap();
        let s = SatState::new(&f, Assignment::all_false(3)).unwrap();
        assert!(matches!(build_subproblem(&s, &[1, 1]), Err(Error::DuplicateVariable(1))));
        assert!(matches!(build_subproblem(&s, &[3]), Err(Error::VariableOutOfRange { .. })));
        assert!(build_subproblem(&s, &[]).is_err());
    }

    #[test]
    fn prune_soundness_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..40 {
            let n = rng.gen_range(8..30);
            let l = rng.gen_range(0..5 * n);
            let f = generate_random_ksat(n, l, 3, trial).unwrap();
            let s = SatState::new(&f, Assignment::random(n, &mut rng)).unwrap();
            let m = rng.gen_range(1..=n.min(10));
            let dynamic = index::sample(&mut rng, n, m).into_vec();
            let sub = build_subproblem(&s, &dynamic).unwrap();
            assert!(sub.formula().clauses().all(|c| !c.is_empty() && c.len() <= 3));
            for bits in 0..1u64 << m {
                let local = Assignment::from_bits(m, bits);
                let merged = sub.merge(s.assignment(), &local).unwrap();
                assert_eq!(
                    energy_of(&f, &merged).unwrap(),
                    sub.frozen_unsat() + sub.sub_energy(&local).unwrap()
                );
            }
        }
    }
}
