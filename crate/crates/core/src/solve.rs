//! The outer loop: select, optimize the sub-problem, compose, repeat.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Assignment, CnfFormula, SatState};
use crate::decompose::{build_subproblem, check_m, SelectorKind, SubProblem};
use crate::error::{Error, Result};
use crate::inner::{exact_bnb, qubo_inner_optimize, walksat_optimize, InnerOptimizerKind, MController};

pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_CONV: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub selector: SelectorKind,
    pub inner: InnerOptimizerKind,
    /// Sub-problem size; the QUBO inner optimizer sizes itself from `q_max`
    /// and ignores it.
    pub m: usize,
    pub max_iters: usize,
    pub conv: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(selector: SelectorKind, inner: InnerOptimizerKind, m: usize, seed: u64) -> SolverConfig {
        SolverConfig { selector, inner, m, max_iters: DEFAULT_MAX_ITERS, conv: DEFAULT_CONV, seed }
    }

    /// The sub-problem size column: `q_max` for the QUBO inner optimizer,
    /// `m` otherwise.
    pub fn size_param(&self) -> usize {
        match &self.inner {
            InnerOptimizerKind::QuboTabu(cfg) => cfg.q_max,
            _ => self.m,
        }
    }

    pub fn validate(&self, formula: &CnfFormula) -> Result<()> {
        if self.max_iters == 0 || self.conv == 0 {
            return Err(Error::param("max_iters and conv must be at least 1"));
        }
        if let SelectorKind::Graph(g) = self.selector {
            if !g.exponent.is_finite() {
                return Err(Error::param("graph edge exponent must be finite"));
            }
        }
        self.inner.validate()?;
        if formula.num_vars() == 0 {
            return Err(Error::param("formula has no variables"));
        }
        if !matches!(self.inner, InnerOptimizerKind::QuboTabu(_)) {
            check_m(self.m, formula.num_vars())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    Converged,
    MaxIters,
    ZeroEnergy,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIters => "max_iters",
            StopReason::ZeroEnergy => "zero_energy",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Wall-clock seconds per phase of one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub select: f64,
    pub inner: f64,
    pub compose: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub m_used: usize,
    /// QUBO size, for QUBO-based inner optimizers.
    pub q_used: Option<usize>,
    /// Selections tried by the QUBO size search.
    pub probes: Option<usize>,
    pub sub_energy_before: i64,
    pub sub_energy_after: i64,
    pub accepted: bool,
    /// Global energy after composing.
    pub energy: usize,
    pub best_energy: usize,
    /// Full-QUBO objective after the iteration (sub-QUBO baseline only).
    pub qubo_objective: Option<f64>,
    pub times: PhaseTimes,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub initial_energy: usize,
    pub records: Vec<IterationRecord>,
    pub best_energy: usize,
    pub best_assignment: Assignment,
    /// Iteration at which `best_energy` was first reached (0 = initial).
    pub best_iteration: usize,
    pub iterations_run: usize,
    pub stop_reason: StopReason,
    pub total_seconds: f64,
}

impl RunTrace {
    /// `best_energy` after each iteration.
    pub fn best_energies(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.best_energy).collect()
    }
}

/// Tracks the best-so-far assignment and the stopping rules shared by every
/// loop.
#[derive(Clone, Debug)]
pub(crate) struct Incumbent {
    pub energy: usize,
    pub assignment: Assignment,
    pub iteration: usize,
    stale: usize,
}

impl Incumbent {
    pub fn new(energy: usize, assignment: Assignment) -> Incumbent {
        Incumbent { energy, assignment, iteration: 0, stale: 0 }
    }

    /// Records the state after `iteration`; returns the stop reason if one
    /// applies.
    pub fn update(&mut self, iteration: usize, energy: usize, values: &[bool], config: (usize, usize)) -> Option<StopReason> {
        let (max_iters, conv) = config;
        if energy < self.energy {
            self.energy = energy;
            self.assignment.copy_from_slice(values);
            self.iteration = iteration;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        if self.energy == 0 {
            Some(StopReason::ZeroEnergy)
        } else if self.stale >= conv {
            Some(StopReason::Converged)
        } else if iteration >= max_iters {
            Some(StopReason::MaxIters)
        } else {
            None
        }
    }
}

/// Outcome of writing a local assignment back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Composed {
    pub accepted: bool,
    pub sub_before: usize,
    pub sub_after: usize,
}

/// Writes `local` into `state` if it does not increase the sub-problem
/// energy (ties are accepted). An accepted write changes the global energy
/// by exactly `sub_after - sub_before`; a rejected one leaves `state` as is.
pub fn compose(state: &mut SatState<'_>, sub: &SubProblem, local: &[bool]) -> Result<Composed> {
    if local.len() != sub.num_dynamic() {
        return Err(Error::LengthMismatch { expected: sub.num_dynamic(), found: local.len() });
    }
    let sub_before = sub.base_energy();
    let sub_after = sub.sub_energy(local)?;
    let accepted = sub_after <= sub_before;
    if accepted {
        for (&var, &value) in sub.dynamic_vars().iter().zip(local) {
            state.set(var, value)?;
        }
    }
    Ok(Composed { accepted, sub_before, sub_after })
}

/// Runs the decomposition heuristic from a uniformly random assignment drawn
/// from `config.seed`.
pub fn solve(formula: &CnfFormula, config: &SolverConfig) -> Result<RunTrace> {
    config.validate(formula)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = formula.num_vars();
    let mut state = SatState::new(formula, Assignment::random(n, &mut rng))?;
    let initial_energy = state.energy();
    let mut best = Incumbent::new(initial_energy, state.assignment().clone());
    let mut ctrl = match &config.inner {
        InnerOptimizerKind::QuboTabu(cfg) => Some(MController::from_sizing(formula, &cfg.sizing, cfg.q_max)),
        _ => None,
    };
    let mut records = Vec::new();
    let mut stop = if initial_energy == 0 { Some(StopReason::ZeroEnergy) } else { None };
    let mut iteration = 0;
    while stop.is_none() {
        iteration += 1;
        let mut times = PhaseTimes::default();
        let t0 = Instant::now();
        let (sub, local, q_used, probes) = match &config.inner {
            InnerOptimizerKind::QuboTabu(cfg) => {
                let ctrl = ctrl.as_mut().expect("controller exists for the QUBO inner optimizer");
                let step =
                    qubo_inner_optimize(&state, &config.selector, ctrl, cfg.q_max, &cfg.tabu, &cfg.sizing, &mut rng)?;
                times.inner = t0.elapsed().as_secs_f64();
                (step.sub, step.local, Some(step.q_size), Some(step.probes))
            }
            inner => {
                let vars = config.selector.select(&state, config.m, &mut rng)?;
                let sub = build_subproblem(&state, &vars)?;
                times.select = t0.elapsed().as_secs_f64();
                let t1 = Instant::now();
                let local = match *inner {
                    InnerOptimizerKind::WalkSat { p, iters_per_var } => {
                        walksat_optimize(&sub, p, iters_per_var * sub.num_dynamic(), &mut rng)?
                    }
                    InnerOptimizerKind::ExactBnb { node_budget } => exact_bnb(&sub, node_budget)?.assignment,
                    InnerOptimizerKind::QuboTabu(_) => unreachable!(),
                };
                times.inner = t1.elapsed().as_secs_f64();
                (sub, local, None, None)
            }
        };
        let t2 = Instant::now();
        let composed = compose(&mut state, &sub, &local)?;
        times.compose = t2.elapsed().as_secs_f64();
        stop = best.update(iteration, state.energy(), state.assignment(), (config.max_iters, config.conv));
        records.push(IterationRecord {
            iteration,
            m_used: sub.num_dynamic(),
            q_used,
            probes,
            sub_energy_before: composed.sub_before as i64,
            sub_energy_after: composed.sub_after as i64,
            accepted: composed.accepted,
            energy: state.energy(),
            best_energy: best.energy,
            qubo_objective: None,
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
