use rand::Rng;

use super::sizing::{features, fit_sizing, SizingModel};
use crate::cnf::{Assignment, CnfFormula, SatState};
use crate::decompose::{build_subproblem, SelectorKind, SubProblem};
use crate::error::{Error, Result};
use crate::qubo::{decode_solution, encode_assignment, subsat_to_qubo, tabu_search, QuboProblem, TabuParams};

/// Tabu settings that scale with the QUBO size of each call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TabuSchedule {
    /// Fixed tenure; `None` means `clamp(Q/4, 4, 20)`.
    pub tenure: Option<usize>,
    pub steps_per_var: usize,
    pub restarts: usize,
}

impl Default for TabuSchedule {
    fn default() -> Self {
        TabuSchedule { tenure: None, steps_per_var: 100, restarts: 1 }
    }
}

impl TabuSchedule {
    /// Parameters for a sub-SAT QUBO of `size` variables. The objective of
    /// such a QUBO is never negative, so the search stops once it hits 0.
    pub fn params_for(&self, size: usize, seed: u64) -> TabuParams {
        let d = TabuParams::defaults_for(size, seed);
        TabuParams {
            tenure: self.tenure.unwrap_or(d.tenure),
            max_steps: (self.steps_per_var * size).max(1),
            restarts: self.restarts,
            seed,
            target: Some(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tenure == Some(0) || self.steps_per_var == 0 || self.restarts == 0 {
            return Err(Error::param("tabu tenure, steps per variable and restarts must be at least 1"));
        }
        Ok(())
    }
}

/// Adaptive sub-problem size for the QUBO path.
#[derive(Clone, Debug, PartialEq)]
pub struct MController {
    current_m: usize,
    m_max: usize,
    /// Grow `M` after a call whose QUBO used at most this fraction of `q_max`.
    pub slack_threshold: f64,
    /// Growth per call; `None` means `max(1, M/10)`.
    pub step_up: Option<usize>,
}

impl MController {
    pub const M_MIN: usize = 1;

    pub fn new(num_vars: usize, initial_m: usize) -> MController {
        let m_max = num_vars.max(1);
        MController { current_m: initial_m.clamp(Self::M_MIN, m_max), m_max, slack_threshold: 0.9, step_up: None }
    }

    /// Starts from the sizing model's prediction for `q_max`.
    pub fn from_sizing(formula: &CnfFormula, sizing: &SizingModel, q_max: usize) -> MController {
        MController::new(formula.num_vars(), sizing.predict_m(formula, q_max))
    }

    pub fn current_m(&self) -> usize {
        self.current_m
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn set(&mut self, m: usize) {
        self.current_m = m.clamp(Self::M_MIN, self.m_max);
    }

    pub fn grow(&mut self) {
        let step = self.step_up.unwrap_or(self.current_m / 10).max(1);
        self.set(self.current_m.saturating_add(step));
    }
}

/// Result of one QUBO inner call.
#[derive(Clone, Debug)]
pub struct QuboStep {
    pub sub: SubProblem,
    pub local: Assignment,
    /// Size of the QUBO that was optimized.
    pub q_size: usize,
    /// Selections tried, including the first.
    pub probes: usize,
}

fn probe<R: Rng + ?Sized>(
    state: &SatState<'_>,
    selector: &SelectorKind,
    m: usize,
    rng: &mut R,
) -> Result<(SubProblem, QuboProblem)> {
    let vars = selector.select(state, m, rng)?;
    let sub = build_subproblem(state, &vars)?;
    let q = subsat_to_qubo(&sub)?;
    Ok((sub, q))
}

/// Selects a sub-problem whose QUBO fits in `q_max` variables and minimizes it
/// with tabu search.
///
/// The first selection uses `ctrl.current_m()`. If its QUBO is too large, `M`
/// is binary-searched downward with a fresh selection per probe until one
/// fits. The first pivot is the sizing model's prediction (capped below the
/// failed size), later pivots bisect. `M = 1` always fits because a single
/// dynamic variable leaves only unit clauses. The controller then keeps the
/// `M` that fit and grows it when the QUBO left slack.
pub fn qubo_inner_optimize<R: Rng + ?Sized>(
    state: &SatState<'_>,
    selector: &SelectorKind,
    ctrl: &mut MController,
    q_max: usize,
    tabu: &TabuSchedule,
    sizing: &SizingModel,
    rng: &mut R,
) -> Result<QuboStep> {
    if q_max < 2 {
        return Err(Error::param(format!("q_max={q_max} must be at least 2")));
    }
    let formula = state.formula();
    let mut m = ctrl.current_m().min(formula.num_vars());
    let (mut sub, mut q) = probe(state, selector, m, rng)?;
    let mut probes = 1;
    if q.size() > q_max {
        let mut hi = m - 1;
        let mut pivot = sizing.predict_m(formula, q_max).clamp(1, hi);
        loop {
            m = pivot;
            (sub, q) = probe(state, selector, m, rng)?;
            probes += 1;
            if q.size() <= q_max {
                break;
            }
            if m == 1 {
                return Err(Error::param("QUBO of a single dynamic variable exceeds q_max"));
            }
            hi = m - 1;
            pivot = (1 + hi) / 2;
        }
        ctrl.set(m);
    }
    if q.size() as f64 <= ctrl.slack_threshold * q_max as f64 {
        ctrl.grow();
    }
    let init = encode_assignment(&sub, &q, sub.base())?;
    let sol = tabu_search(&q, &init, &tabu.params_for(q.size(), rng.gen()))?;
    let local = decode_solution(&sub, &q, &sol)?;
    Ok(QuboStep { sub, local, q_size: q.size(), probes })
}

/// One calibration sample per `M` on a geometric grid from `q_max/20` to
/// `q_max` (capped at `N`): select, prune, convert, and record the QUBO size.
pub fn calibration_samples<R: Rng + ?Sized>(
    formula: &CnfFormula,
    selector: &SelectorKind,
    q_max: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(super::sizing::Features, f64)>> {
    let n = formula.num_vars();
    if n == 0 || q_max < 2 {
        return Err(Error::param("calibration needs N ≥ 1 and q_max ≥ 2"));
    }
    let hi = q_max.min(n) as f64;
    let lo = (q_max as f64 / 20.0).max(1.0).min(hi);
    let state = SatState::new(formula, Assignment::random(n, rng))?;
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 1.0 };
        let m = (lo * (hi / lo).powf(t)).round().clamp(1.0, n as f64) as usize;
        let (_, q) = probe(&state, selector, m, rng)?;
        samples.push((features(formula, q.size()), m as f64));
    }
    Ok(samples)
}

/// Fits a sizing model from `count` calibration probes.
pub fn calibrate<R: Rng + ?Sized>(
    formula: &CnfFormula,
    selector: &SelectorKind,
    q_max: usize,
    count: usize,
    rng: &mut R,
) -> Result<SizingModel> {
    Ok(fit_sizing(&calibration_samples(formula, selector, q_max, count, rng)?))
}
