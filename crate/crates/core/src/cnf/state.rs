//! Incremental energy bookkeeping.
//!
//! Every clause carries the number of its literals currently true. Every
//! variable carries a `make` count (unsatisfied clauses that flipping it would
//! satisfy) and a `break` count (clauses for which it is the only true
//! literal). The flip delta of a variable is `break - make`. Counts change
//! only when a clause crosses 0↔1 or 1↔2 true literals, so a flip costs time
//! proportional to the occurrences of the flipped variable.

use super::{Assignment, CnfFormula};
use crate::error::{Error, Result};

const NOT_LISTED: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct SatState<'f> {
    formula: &'f CnfFormula,
    assignment: Assignment,
    sat_count: Vec<u8>,
    make: Vec<u32>,
    brk: Vec<u32>,
    unsat: Vec<u32>,
    unsat_pos: Vec<u32>,
}

impl<'f> SatState<'f> {
    pub fn new(formula: &'f CnfFormula, assignment: Assignment) -> Result<SatState<'f>> {
        let n = formula.num_vars();
        if assignment.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: assignment.len() });
        }
        let l = formula.num_clauses();
        let mut state = SatState {
            formula,
            assignment,
            sat_count: vec![0; l],
            make: vec![0; n],
            brk: vec![0; n],
            unsat: Vec::new(),
            unsat_pos: vec![NOT_LISTED; l],
        };
        for c in 0..l {
            let clause = formula.clause(c);
            let count = clause.iter().filter(|lit| lit.is_satisfied_by(&state.assignment)).count();
            state.sat_count[c] = count as u8;
            match count {
                0 => {
                    state.push_unsat(c);
                    for lit in clause {
                        state.make[lit.var()] += 1;
                    }
                }
                1 => {
                    let lit = clause.iter().find(|l| l.is_satisfied_by(&state.assignment)).unwrap();
                    state.brk[lit.var()] += 1;
                }
                _ => {}
            }
        }
        Ok(state)
    }

    pub fn formula(&self) -> &'f CnfFormula {
        self.formula
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn value(&self, var: usize) -> bool {
        self.assignment[var]
    }

    /// Number of unsatisfied clauses.
    pub fn energy(&self) -> usize {
        self.unsat.len()
    }

    /// Indices of the currently unsatisfied clauses, in no particular order.
    pub fn unsat_clauses(&self) -> &[u32] {
        &self.unsat
    }

    pub fn sat_count(&self, clause: usize) -> usize {
        self.sat_count[clause] as usize
    }

    pub fn make_count(&self, var: usize) -> usize {
        self.make[var] as usize
    }

    pub fn break_count(&self, var: usize) -> usize {
        self.brk[var] as usize
    }

    /// Energy change if `var` alone were flipped.
    #[inline]
    pub fn flip_delta(&self, var: usize) -> i64 {
        i64::from(self.brk[var]) - i64::from(self.make[var])
    }

    pub fn flip_deltas(&self) -> Vec<i64> {
        (0..self.formula.num_vars()).map(|v| self.flip_delta(v)).collect()
    }

    pub fn flip(&mut self, var: usize) -> Result<()> {
        let n = self.formula.num_vars();
        if var >= n {
            return Err(Error::VariableOutOfRange { var, num_vars: n });
        }
        self.flip_unchecked(var);
        Ok(())
    }

    /// Sets `var` to `value`, flipping only if it differs.
    pub fn set(&mut self, var: usize, value: bool) -> Result<()> {
        if var < self.formula.num_vars() && self.assignment[var] == value {
            return Ok(());
        }
        self.flip(var)
    }

    pub(crate) fn flip_unchecked(&mut self, var: usize) {
        let formula = self.formula;
        let new_value = !self.assignment[var];
        self.assignment[var] = new_value;
        for &c in formula.occurrences(var) {
            let c = c as usize;
            let clause = formula.clause(c);
            let lit = *clause.iter().find(|l| l.var() == var).expect("occurrence index");
            if lit.is_positive() == new_value {
                // literal became true
                self.sat_count[c] += 1;
                match self.sat_count[c] {
                    1 => {
                        self.remove_unsat(c);
                        for l in clause {
                            self.make[l.var()] -= 1;
                        }
                        self.brk[var] += 1;
                    }
                    2 => {
                        let other = clause
                            .iter()
                            .find(|l| l.var() != var && l.is_satisfied_by(&self.assignment))
                            .expect("second true literal");
                        self.brk[other.var()] -= 1;
                    }
                    _ => {}
                }
            } else {
                self.sat_count[c] -= 1;
                match self.sat_count[c] {
                    0 => {
                        self.push_unsat(c);
                        self.brk[var] -= 1;
                        for l in clause {
                            self.make[l.var()] += 1;
                        }
                    }
                    1 => {
                        let other = clause
                            .iter()
                            .find(|l| l.is_satisfied_by(&self.assignment))
                            .expect("remaining true literal");
                        self.brk[other.var()] += 1;
                    }
                    _ => {}
                }
            }
        }
    }

    fn push_unsat(&mut self, c: usize) {
        self.unsat_pos[c] = self.unsat.len() as u32;
        self.unsat.push(c as u32);
    }

    fn remove_unsat(&mut self, c: usize) {
        let pos = self.unsat_pos[c] as usize;
        let last = *self.unsat.last().expect("clause listed as unsat");
        self.unsat[pos] = last;
        self.unsat_pos[last as usize] = pos as u32;
        self.unsat.pop();
        self.unsat_pos[c] = NOT_LISTED;
    }

    pub fn into_assignment(self) -> Assignment {
        self.assignment
    }
}

/// Equality on the logical state; the unsatisfied-clause list is compared as
/// a set since its order depends on the flip history.
impl PartialEq for SatState<'_> {
    fn eq(&self, other: &Self) -> bool {
        let sorted = |v: &[u32]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v
        };
        self.formula == other.formula
            && self.assignment == other.assignment
            && self.sat_count == other.sat_count
            && self.make == other.make
            && self.brk == other.brk
            && sorted(&self.unsat) == sorted(&other.unsat)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::cnf::{energy_of, generate_random_ksat};

    /// Recomputes every flip delta by flipping a copy of the assignment.
    fn brute_deltas(f: &CnfFormula, a: &[bool]) -> Vec<i64> {
        let base = energy_of(f, a).unwrap() as i64;
        (0..f.num_vars())
            .map(|v| {
                let mut b = a.to_vec();
                b[v] = !b[v];
                energy_of(f, &b).unwrap() as i64 - base
            })
            .collect()
    }

    fn assert_consistent(state: &SatState<'_>) {
        let f = state.formula();
        let fresh = SatState::new(f, state.assignment().clone()).unwrap();
        assert_eq!(*state, fresh);
        assert_eq!(state.energy(), energy_of(f, state.assignment()).unwrap());
        assert_eq!(state.flip_deltas(), brute_deltas(f, state.assignment()));
    }

    #[test]
    fn small_example() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2], &[-1]]).unwrap();
        let mut s = SatState::new(&f, vec![true, false].into()).unwrap();
        assert_eq!(s.energy(), 1);
        assert_eq!(s.unsat_clauses(), &[1]);
        // brute force: flipping x1 trades clause 2 for clause 1
        assert_eq!(s.flip_delta(0), 0);
        assert_eq!(s.flip_delta(1), 0);
        assert_eq!(s.flip_deltas(), brute_deltas(&f, &[true, false]));
        s.flip(0).unwrap();
        assert_eq!(s.energy(), 1);
        assert_eq!(s.energy(), energy_of(&f, &[false, false]).unwrap());
        assert_consistent(&s);
    }

    #[test]
    fn unit_clause_and_empty_formula() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        assert_eq!(SatState::new(&f, vec![false].into()).unwrap().energy(), 1);
        assert_eq!(SatState::new(&f, vec![true].into()).unwrap().energy(), 0);
        let empty = CnfFormula::new(4, vec![]).unwrap();
        assert_eq!(SatState::new(&empty, Assignment::all_false(4)).unwrap().energy(), 0);
    }

    #[test]
    fn errors() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        assert!(matches!(SatState::new(&f, vec![true].into()), Err(Error::LengthMismatch { .. })));
        let mut s = SatState::new(&f, Assignment::all_false(2)).unwrap();
        assert!(matches!(s.flip(2), Err(Error::VariableOutOfRange { var: 2, num_vars: 2 })));
    }

    #[test]
    fn flip_is_involution() {
        let f = generate_random_ksat(30, 130, 3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = SatState::new(&f, Assignment::random(30, &mut rng)).unwrap();
        for v in 0..30 {
            let before = s.clone();
            s.flip(v).unwrap();
            s.flip(v).unwrap();
            assert_eq!(s, before);
        }
    }

    #[test]
    fn thousand_random_flips_match_recount() {
        let f = generate_random_ksat(500, 2250, 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = SatState::new(&f, Assignment::random(500, &mut rng)).unwrap();
        for _ in 0..1000 {
            let v = rng.gen_range(0..500);
            let expected = s.energy() as i64 + s.flip_delta(v);
            s.flip(v).unwrap();
            assert_eq!(s.energy() as i64, expected);
            assert_eq!(s.energy(), energy_of(&f, s.assignment()).unwrap());
        }
        assert_consistent(&s);
    }

    #[test]
    fn exhaustive_small_formulas() {
        for seed in 0..4 {
            let f = generate_random_ksat(10, 42, 3, seed).unwrap();
            for bits in 0..1u64 << 10 {
                let a = Assignment::from_bits(10, bits);
                let s = SatState::new(&f, a.clone()).unwrap();
                assert_eq!(s.energy(), energy_of(&f, &a).unwrap());
            }
        }
    }

    mod props {
        use proptest::prelude::*;

        use super::*;
        use crate::cnf::Literal;

        fn formula_strategy() -> impl Strategy<Value = CnfFormula> {
            (1usize..12).prop_flat_map(|n| {
                let clause = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n.min(3))
                    .prop_flat_map(|vars| {
                        let k = vars.len();
                        (Just(vars), proptest::collection::vec(any::<bool>(), k))
                    })
                    .prop_map(|(vars, pols)| {
                        vars.into_iter().zip(pols).map(|(v, p)| Literal::new(v, p)).collect::<Vec<_>>()
                    });
                (Just(n), proptest::collection::vec(clause, 0..40))
                    .prop_map(|(n, clauses)| CnfFormula::new(n, clauses).unwrap())
            })
        }

        proptest! {
            #[test]
            fn deltas_exact_under_flip_sequences(
                f in formula_strategy(),
                init in any::<u64>(),
                flips in proptest::collection::vec(any::<usize>(), 0..30),
            ) {
                let n = f.num_vars();
                let mut s = SatState::new(&f, Assignment::from_bits(n, init)).unwrap();
                for v in flips {
                    s.flip(v % n).unwrap();
                    prop_assert_eq!(s.flip_deltas(), brute_deltas(&f, s.assignment()));
                    prop_assert_eq!(s.energy(), energy_of(&f, s.assignment()).unwrap());
                }
                let fresh = SatState::new(&f, s.assignment().clone()).unwrap();
                prop_assert!(s == fresh);
            }
        }
    }
}
