//! The decompose-after-conversion baseline: the whole formula becomes one
//! QUBO, and each iteration optimizes a clamped sub-QUBO of it.

use std::fmt;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{energy_of, Assignment, CnfFormula, SatState};
use crate::decompose::build_subproblem;
use crate::error::{Error, Result};
use crate::inner::TabuSchedule;
use crate::qubo::{encode_assignment, subsat_to_qubo, tabu_search, QuboBuilder, QuboProblem, VarRole};
use crate::solve::{Incumbent, IterationRecord, PhaseTimes, RunTrace, StopReason, DEFAULT_CONV, DEFAULT_MAX_ITERS};

/// Upper end of the tie-breaking noise added to energy-selector scores.
pub const SELECTION_NOISE: f64 = 1e-6;

/// The QUBO of the whole formula plus the current bits and the local field
/// `h_i = linear_i + Σ_j q_ij b_j` (flipping `i` changes the objective by
/// `±h_i`).
#[derive(Clone, Debug)]
pub struct QuboState {
    problem: QuboProblem,
    bits: Vec<bool>,
    field: Vec<f64>,
    objective: f64,
}

impl QuboState {
    pub fn new(problem: QuboProblem, bits: Vec<bool>) -> Result<QuboState> {
        let objective = problem.energy(&bits)?;
        let field = fields(&problem, &bits);
        Ok(QuboState { problem, bits, field, objective })
    }

    /// Full QUBO of `formula` with bits encoding `x` (auxiliary bits optimal).
    pub fn from_formula(formula: &CnfFormula, x: Assignment) -> Result<QuboState> {
        let state = SatState::new(formula, x)?;
        let whole = build_subproblem(&state, &(0..formula.num_vars()).collect::<Vec<_>>())?;
        let problem = subsat_to_qubo(&whole)?;
        let bits = encode_assignment(&whole, &problem, state.assignment())?;
        QuboState::new(problem, bits)
    }

    pub fn problem(&self) -> &QuboProblem {
        &self.problem
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn flip_delta(&self, i: usize) -> f64 {
        if self.bits[i] {
            -self.field[i]
        } else {
            self.field[i]
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.objective += self.flip_delta(i);
        self.bits[i] = !self.bits[i];
        let sign = if self.bits[i] { 1.0 } else { -1.0 };
        for &(j, c) in self.problem.neighbors(i) {
            self.field[j] += sign * c;
        }
    }

    /// The SAT variables of the current bits.
    pub fn sat_projection(&self) -> Assignment {
        let n = self.problem.roles().iter().filter(|r| matches!(r, VarRole::Sat(_))).count();
        let mut x = vec![false; n];
        for (b, role) in self.bits.iter().zip(self.problem.roles()) {
            if let VarRole::Sat(i) = *role {
                x[i] = *b;
            }
        }
        Assignment::new(x)
    }
}

fn fields(problem: &QuboProblem, bits: &[bool]) -> Vec<f64> {
    let mut field = problem.linear().to_vec();
    for &(i, j, c) in problem.quadratic() {
        if bits[j] {
            field[i] += c;
        }
        if bits[i] {
            field[j] += c;
        }
    }
    field
}

/// A sub-QUBO over `chosen` with every other bit fixed at its current value.
#[derive(Clone, Debug)]
pub struct SubQubo {
    pub chosen: Vec<usize>,
    pub problem: QuboProblem,
}

/// Folds the frozen bits into the linear terms and constant of a QUBO over
/// `chosen`, so that its objective at `b` equals the full objective with `b`
/// substituted for the chosen bits.
pub fn clamp(qs: &QuboState, chosen: &[usize]) -> Result<SubQubo> {
    let size = qs.problem.size();
    let mut local_of = vec![usize::MAX; size];
    for (k, &i) in chosen.iter().enumerate() {
        if i >= size {
            return Err(Error::VariableOutOfRange { var: i, num_vars: size });
        }
        if local_of[i] != usize::MAX {
            return Err(Error::DuplicateVariable(i));
        }
        local_of[i] = k;
    }
    let roles = chosen.iter().map(|&i| qs.problem.roles()[i]).collect();
    let mut b = QuboBuilder::with_roles(roles);
    b.add_constant(qs.problem.constant());
    for (i, &c) in qs.problem.linear().iter().enumerate() {
        match local_of[i] {
            usize::MAX if qs.bits[i] => b.add_constant(c),
            usize::MAX => {}
            k => b.add_linear(k, c),
        }
    }
    for &(i, j, c) in qs.problem.quadratic() {
        match (local_of[i], local_of[j]) {
            (usize::MAX, usize::MAX) => {
                if qs.bits[i] && qs.bits[j] {
                    b.add_constant(c);
                }
            }
            (usize::MAX, k) => {
                if qs.bits[i] {
                    b.add_linear(k, c);
                }
            }
            (k, usize::MAX) => {
                if qs.bits[j] {
                    b.add_linear(k, c);
                }
            }
            (k, l) => b.add_quadratic(k, l, c),
        }
    }
    Ok(SubQubo { chosen: chosen.to_vec(), problem: b.build() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubQuboSelector {
    Energy,
    Random,
}

impl SubQuboSelector {
    pub fn name(self) -> &'static str {
        match self {
            SubQuboSelector::Energy => "energy",
            SubQuboSelector::Random => "random",
        }
    }

    pub fn select<R: Rng + ?Sized>(self, qs: &QuboState, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        match self {
            SubQuboSelector::Energy => subqubo_select_energy(qs, m, rng),
            SubQuboSelector::Random => subqubo_select_random(qs, m, rng),
        }
    }
}

impl fmt::Display for SubQuboSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_size(m: usize, size: usize) -> Result<()> {
    if m == 0 || m > size {
        return Err(Error::param(format!("sub-QUBO size {m} must be in 1..={size}")));
    }
    Ok(())
}

/// The `m` bits whose flip lowers the objective most, each score perturbed by
/// uniform noise in `[0, 1e-6)` so that ties break at random.
pub fn subqubo_select_energy<R: Rng + ?Sized>(qs: &QuboState, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    let size = qs.problem.size();
    check_size(m, size)?;
    let mut ranked: Vec<(f64, usize)> =
        (0..size).map(|i| (qs.flip_delta(i) + rng.gen_range(0.0..SELECTION_NOISE), i)).collect();
    let by_score = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if m < size {
        ranked.select_nth_unstable_by(m - 1, by_score);
        ranked.truncate(m);
    }
    ranked.sort_unstable_by(by_score);
    Ok(ranked.into_iter().map(|(_, i)| i).collect())
}

pub fn subqubo_select_random<R: Rng + ?Sized>(qs: &QuboState, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    let size = qs.problem.size();
    check_size(m, size)?;
    Ok(index::sample(rng, size, m).into_vec())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubQuboConfig {
    /// Sub-QUBO size.
    pub q: usize,
    pub selector: SubQuboSelector,
    pub tabu: TabuSchedule,
    pub max_iters: usize,
    pub conv: usize,
    pub seed: u64,
}

impl SubQuboConfig {
    pub fn new(q: usize, selector: SubQuboSelector, seed: u64) -> SubQuboConfig {
        SubQuboConfig {
            q,
            selector,
            tabu: TabuSchedule::default(),
            max_iters: DEFAULT_MAX_ITERS,
            conv: DEFAULT_CONV,
            seed,
        }
    }
}

/// Number of variables of the full-formula QUBO: `N` plus one per 3-literal
/// clause.
pub fn full_qubo_size(formula: &CnfFormula) -> usize {
    formula.num_vars() + formula.clauses().filter(|c| c.len() == 3).count()
}

/// Runs the baseline from a uniformly random assignment drawn from the seed.
/// A clamped optimum is written back when it does not raise the clamped
/// objective. The trace energies are SAT energies of the projected bits;
/// `qubo_objective` holds the full-QUBO objective.
pub fn subqubo_solve(formula: &CnfFormula, config: &SubQuboConfig) -> Result<RunTrace> {
    if config.max_iters == 0 || config.conv == 0 {
        return Err(Error::param("max_iters and conv must be at least 1"));
    }
    config.tabu.validate()?;
    let full = full_qubo_size(formula);
    check_size(config.q, full)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x = Assignment::random(formula.num_vars(), &mut rng);
    let mut qs = QuboState::from_formula(formula, x)?;
    let initial_energy = energy_of(formula, &qs.sat_projection())?;
    let mut best = Incumbent::new(initial_energy, qs.sat_projection());
    let mut records = Vec::new();
    let mut stop = if initial_energy == 0 { Some(StopReason::ZeroEnergy) } else { None };
    let mut iteration = 0;
    while stop.is_none() {
        iteration += 1;
        let mut times = PhaseTimes::default();
        let t0 = Instant::now();
        let chosen = config.selector.select(&qs, config.q, &mut rng)?;
        let sub = clamp(&qs, &chosen)?;
        times.select = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let init: Vec<bool> = chosen.iter().map(|&i| qs.bits[i]).collect();
        let before = sub.problem.energy(&init)?;
        let sol = tabu_search(&sub.problem, &init, &config.tabu.params_for(config.q, rng.gen()))?;
        times.inner = t1.elapsed().as_secs_f64();
        let t2 = Instant::now();
        let accepted = sol.objective <= before;
        if accepted {
            for (&i, &b) in chosen.iter().zip(&sol.bits) {
                if qs.bits[i] != b {
                    qs.flip(i);
                }
            }
        }
        let x = qs.sat_projection();
        let energy = energy_of(formula, &x)?;
        times.compose = t2.elapsed().as_secs_f64();
        stop = best.update(iteration, energy, &x, (config.max_iters, config.conv));
        records.push(IterationRecord {
            iteration,
            m_used: config.q,
            q_used: Some(config.q),
            probes: None,
            sub_energy_before: before.round() as i64,
            sub_energy_after: sol.objective.round() as i64,
            accepted,
            energy,
            best_energy: best.energy,
            qubo_objective: Some(qs.objective()),
            times,
        });
    }
    Ok(RunTrace {
        initial_energy,
        records,
        best_energy: best.energy,
        best_assignment: best.assignment,
        best_iteration: best.iteration,
        iterations_run: iteration,
        stop_reason: stop.expect("loop exits with a reason"),
        total_seconds: start.elapsed().as_secs_f64(),
    })
}
