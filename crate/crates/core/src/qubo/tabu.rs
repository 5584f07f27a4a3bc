use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::QuboProblem;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TabuParams {
    /// Steps a flipped variable stays tabu.
    pub tenure: usize,
    /// Steps per restart.
    pub max_steps: usize,
    /// The first restart starts from the given bits, later ones from random bits.
    pub restarts: usize,
    pub seed: u64,
    /// Stop as soon as the best objective reaches this value (a known lower
    /// bound, e.g. 0 for QUBOs built from sub-SAT problems).
    pub target: Option<f64>,
}

impl TabuParams {
    /// `tenure = clamp(Q/4, 4, 20)`, `max_steps = 100·Q`, one restart.
    pub fn defaults_for(size: usize, seed: u64) -> TabuParams {
        TabuParams {
            tenure: (size / 4).clamp(4, 20),
            max_steps: (100 * size).max(1),
            restarts: 1,
            seed,
            target: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tenure == 0 || self.max_steps == 0 || self.restarts == 0 {
            return Err(Error::param("tabu tenure, max_steps and restarts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuboSolution {
    pub bits: Vec<bool>,
    pub objective: f64,
}

/// Single-flip tabu search with aspiration and multistart. Returns the best
/// bit vector visited; its objective is never above that of `init`.
pub fn tabu_search(q: &QuboProblem, init: &[bool], params: &TabuParams) -> Result<QuboSolution> {
    params.validate()?;
    let size = q.size();
    if init.len() != size {
        return Err(Error::LengthMismatch { expected: size, found: init.len() });
    }
    let mut best = QuboSolution { bits: init.to_vec(), objective: q.energy(init)? };
    if size == 0 {
        return Ok(best);
    }
    let reached = |obj: f64| params.target.is_some_and(|t| obj <= t);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for restart in 0..params.restarts {
        if reached(best.objective) {
            break;
        }
        let start: Vec<bool> = if restart == 0 { init.to_vec() } else { (0..size).map(|_| rng.gen()).collect() };
        let mut walk = Walk::new(q, start)?;
        if walk.objective < best.objective {
            best = QuboSolution { bits: walk.bits.clone(), objective: walk.objective };
        }
        let mut tabu_until = vec![0usize; size];
        for step in 1..=params.max_steps {
            if reached(best.objective) {
                break;
            }
            let mut pick: Option<(f64, usize)> = None;
            let mut fallback: Option<(f64, usize)> = None;
            for i in 0..size {
                let d = walk.delta(i);
                let allowed = tabu_until[i] < step || walk.objective + d < best.objective;
                let slot = if allowed { &mut pick } else { &mut fallback };
                if slot.map_or(true, |(bd, _)| d < bd) {
                    *slot = Some((d, i));
                }
            }
            // Everything tabu and nothing aspirates: take the least bad move.
            let Some((_, i)) = pick.or(fallback) else { break };
            walk.flip(q, i);
            tabu_until[i] = step + params.tenure;
            if cfg!(debug_assertions) && size <= 20 {
                walk.check(q);
            }
            if walk.objective < best.objective {
                best = QuboSolution { bits: walk.bits.clone(), objective: walk.objective };
            }
        }
    }
    best.objective = q.energy(&best.bits)?;
    Ok(best)
}

/// Current bits with the local field `h_i = linear_i + Σ_j q_ij b_j`, from
/// which flipping `i` changes the objective by `±h_i`.
struct Walk {
    bits: Vec<bool>,
    field: Vec<f64>,
    objective: f64,
}

impl Walk {
    fn new(q: &QuboProblem, bits: Vec<bool>) -> Result<Walk> {
        let objective = q.energy(&bits)?;
        let field = Walk::fields(q, &bits);
        Ok(Walk { bits, field, objective })
    }

    fn fields(q: &QuboProblem, bits: &[bool]) -> Vec<f64> {
        let mut field = q.linear().to_vec();
        for &(i, j, c) in q.quadratic() {
            if bits[j] {
                field[i] += c;
            }
            if bits[i] {
                field[j] += c;
            }
        }
        field
    }

    fn delta(&self, i: usize) -> f64 {
        if self.bits[i] {
            -self.field[i]
        } else {
            self.field[i]
        }
    }

    fn flip(&mut self, q: &QuboProblem, i: usize) {
        self.objective += self.delta(i);
        self.bits[i] = !self.bits[i];
        let sign = if self.bits[i] { 1.0 } else { -1.0 };
        for &(j, c) in q.neighbors(i) {
            self.field[j] += sign * c;
        }
    }

    /// Compares the incremental bookkeeping with a recount.
    fn check(&self, q: &QuboProblem) {
        let fresh = Walk::fields(q, &self.bits);
        for (i, (&a, &b)) in self.field.iter().zip(&fresh).enumerate() {
            assert!((a - b).abs() < 1e-9, "field of {i} drifted: {a} vs {b}");
        }
        let e = q.energy(&self.bits).expect("sizes match");
        assert!((self.objective - e).abs() < 1e-9, "objective drifted: {} vs {e}", self.objective);
    }
}
