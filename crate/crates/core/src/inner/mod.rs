//! Size-constrained optimizers for a single sub-problem.

mod bnb;
mod qubo_inner;
mod sizing;
mod walksat;

use std::fmt;

use crate::error::{Error, Result};

pub use bnb::{exact_bnb, exact_maxsat, BnbOutcome};
pub use qubo_inner::{
    calibrate, calibration_samples, qubo_inner_optimize, MController, QuboStep, TabuSchedule,
};
pub use sizing::{features, fit_sizing, Features, SizingModel, NUM_FEATURES};
pub use walksat::{walksat, walksat_optimize, WalkOutcome, WalkScore};

#[derive(Clone, Debug, PartialEq)]
pub struct QuboTabuConfig {
    /// Largest QUBO the inner optimizer may build.
    pub q_max: usize,
    pub tabu: TabuSchedule,
    pub sizing: SizingModel,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InnerOptimizerKind {
    /// Break-scored WalkSAT with `iters_per_var · M` flips.
    WalkSat { p: f64, iters_per_var: usize },
    ExactBnb { node_budget: u64 },
    QuboTabu(QuboTabuConfig),
}

impl InnerOptimizerKind {
    pub fn walksat_default() -> InnerOptimizerKind {
        InnerOptimizerKind::WalkSat { p: 0.5, iters_per_var: 20 }
    }

    pub fn exact_default() -> InnerOptimizerKind {
        InnerOptimizerKind::ExactBnb { node_budget: 1_000_000 }
    }

    pub fn qubo_tabu(q_max: usize) -> InnerOptimizerKind {
        InnerOptimizerKind::QuboTabu(QuboTabuConfig {
            q_max,
            tabu: TabuSchedule::default(),
            sizing: SizingModel::untrained(),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            InnerOptimizerKind::WalkSat { .. } => "walksat",
            InnerOptimizerKind::ExactBnb { .. } => "exact",
            InnerOptimizerKind::QuboTabu(_) => "qubo-tabu",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InnerOptimizerKind::WalkSat { p, iters_per_var } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::param(format!("WalkSAT noise {p} outside [0, 1]")));
                }
                if *iters_per_var == 0 {
                    return Err(Error::param("WalkSAT iterations per variable must be at least 1"));
                }
            }
            InnerOptimizerKind::ExactBnb { node_budget } => {
                if *node_budget == 0 {
                    return Err(Error::param("node budget must be at least 1"));
                }
            }
            InnerOptimizerKind::QuboTabu(cfg) => {
                if cfg.q_max < 2 {
                    return Err(Error::param(format!("q_max={} must be at least 2", cfg.q_max)));
                }
                cfg.tabu.validate()?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for InnerOptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
