use std::fmt;

use rand::Rng;

use crate::cnf::{Assignment, CnfFormula, SatState};
use crate::decompose::SubProblem;
use crate::error::{Error, Result};

/// How the greedy (non-noise) move inside an unsatisfied clause is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WalkScore {
    /// Fewest satisfied clauses turned unsatisfied.
    Break,
    /// Most unsatisfied clauses turned satisfied.
    Make,
    /// Largest net energy decrease (`make - break`).
    Energy,
}

impl WalkScore {
    pub fn name(self) -> &'static str {
        match self {
            WalkScore::Break => "break",
            WalkScore::Make => "make",
            WalkScore::Energy => "energy",
        }
    }

    /// Lower is better.
    fn cost(self, state: &SatState<'_>, var: usize) -> i64 {
        match self {
            WalkScore::Break => state.break_count(var) as i64,
            WalkScore::Make => -(state.make_count(var) as i64),
            WalkScore::Energy => state.flip_delta(var),
        }
    }
}

impl fmt::Display for WalkScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkOutcome {
    /// Best assignment seen.
    pub assignment: Assignment,
    pub energy: usize,
    /// Flips actually performed.
    pub flips: usize,
}

/// WalkSAT from `init`: each step picks a uniformly random unsatisfied clause
/// and flips one of its variables, a random one with probability `p`, the
/// best-scoring one otherwise (ties to the lowest variable index). Stops early
/// at energy 0.
pub fn walksat<R: Rng + ?Sized>(
    formula: &CnfFormula,
    init: Assignment,
    p: f64,
    max_flips: usize,
    score: WalkScore,
    rng: &mut R,
) -> Result<WalkOutcome> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("noise probability {p} outside [0, 1]")));
    }
    let mut state = SatState::new(formula, init)?;
    let mut best = state.assignment().clone();
    let mut best_energy = state.energy();
    let mut flips = 0;
    while flips < max_flips && best_energy > 0 {
        let unsat = state.unsat_clauses();
        let clause = formula.clause(unsat[rng.gen_range(0..unsat.len())] as usize);
        let var = if rng.gen_bool(p) {
            clause[rng.gen_range(0..clause.len())].var()
        } else {
            clause
                .iter()
                .map(|l| (score.cost(&state, l.var()), l.var()))
                .min()
                .expect("clauses are non-empty")
                .1
        };
        state.flip_unchecked(var);
        flips += 1;
        if state.energy() < best_energy {
            best_energy = state.energy();
            best.copy_from_slice(state.assignment());
        }
    }
    Ok(WalkOutcome { assignment: best, energy: best_energy, flips })
}

/// Break-scored WalkSAT on a sub-problem, starting from its base values.
pub fn walksat_optimize<R: Rng + ?Sized>(
    sub: &SubProblem,
    p: f64,
    max_flips: usize,
    rng: &mut R,
) -> Result<Assignment> {
    Ok(walksat(sub.formula(), sub.base().clone(), p, max_flips, WalkScore::Break, rng)?.assignment)
}
