//! Linear model predicting the sub-problem size `M` that yields a QUBO of a
//! given size.

use crate::cnf::CnfFormula;

pub const NUM_FEATURES: usize = 5;
const RIDGE: f64 = 1e-8;

/// `[Q, max literals per clause, total literals, N, L]`.
pub type Features = [f64; NUM_FEATURES];

pub fn features(formula: &CnfFormula, q: usize) -> Features {
    [
        q as f64,
        formula.max_clause_width() as f64,
        formula.num_literals() as f64,
        formula.num_vars() as f64,
        formula.num_clauses() as f64,
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizingModel {
    pub weights: Features,
    pub intercept: f64,
    pub trained: bool,
    pub training_samples: Vec<(Features, f64)>,
}

impl Default for SizingModel {
    fn default() -> Self {
        SizingModel::untrained()
    }
}

impl SizingModel {
    /// Predicts `M = Q / 2`.
    pub fn untrained() -> SizingModel {
        SizingModel { weights: [0.0; NUM_FEATURES], intercept: 0.0, trained: false, training_samples: Vec::new() }
    }

    pub fn predict(&self, x: &Features) -> f64 {
        if self.trained {
            self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        } else {
            x[0] / 2.0
        }
    }

    /// Predicted `M` for a QUBO of size `q`, rounded and clamped to `[1, N]`.
    pub fn predict_m(&self, formula: &CnfFormula, q: usize) -> usize {
        let raw = self.predict(&features(formula, q));
        let hi = formula.num_vars().max(1);
        if raw.is_finite() {
            (raw.round().max(1.0) as usize).min(hi)
        } else {
            (q / 2).clamp(1, hi)
        }
    }

    /// Mean absolute error over the training samples.
    pub fn training_mae(&self) -> f64 {
        if self.training_samples.is_empty() {
            return 0.0;
        }
        let total: f64 = self.training_samples.iter().map(|(x, m)| (self.predict(x) - m).abs()).sum();
        total / self.training_samples.len() as f64
    }
}

/// Least squares with a tiny ridge term on standardized features. A feature
/// that is constant across the samples gets weight 0 (its effect is absorbed
/// by the intercept). Fewer than `NUM_FEATURES + 1` samples, no varying
/// feature, or a singular system give the untrained model.
pub fn fit_sizing(samples: &[(Features, f64)]) -> SizingModel {
    let mut model = SizingModel { training_samples: samples.to_vec(), ..SizingModel::untrained() };
    let n = samples.len();
    if n < NUM_FEATURES + 1 || samples.iter().any(|(x, m)| !m.is_finite() || x.iter().any(|v| !v.is_finite())) {
        return model;
    }
    let nf = n as f64;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / nf;
    let mut mean = [0.0; NUM_FEATURES];
    let mut scale = [0.0; NUM_FEATURES];
    for j in 0..NUM_FEATURES {
        mean[j] = samples.iter().map(|s| s.0[j]).sum::<f64>() / nf;
        scale[j] = (samples.iter().map(|s| (s.0[j] - mean[j]).powi(2)).sum::<f64>() / nf).sqrt();
    }
    let active: Vec<usize> = (0..NUM_FEATURES).filter(|&j| scale[j] > 1e-12 * mean[j].abs().max(1.0)).collect();
    if active.is_empty() {
        return model;
    }
    let k = active.len();
    let z = |x: &Features, a: usize| (x[active[a]] - mean[active[a]]) / scale[active[a]];
    let mut gram = vec![vec![0.0; k + 1]; k];
    for (x, y) in samples {
        for a in 0..k {
            let za = z(x, a);
            for b in 0..k {
                gram[a][b] += za * z(x, b);
            }
            gram[a][k] += za * (y - mean_y);
        }
    }
    for (a, row) in gram.iter_mut().enumerate() {
        row[a] += RIDGE;
    }
    let Some(beta) = solve_augmented(gram) else { return model };
    let mut intercept = mean_y;
    for (a, &j) in active.iter().enumerate() {
        model.weights[j] = beta[a] / scale[j];
        intercept -= model.weights[j] * mean[j];
    }
    model.intercept = intercept;
    model.trained = true;
    model
}

/// Gaussian elimination with partial pivoting on an augmented `k × (k+1)`
/// matrix.
fn solve_augmented(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let pivot = (col..k).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            for c in col..=k {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let tail: f64 = (r + 1..k).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][k] - tail) / a[r][r];
    }
    Some(x)
}
