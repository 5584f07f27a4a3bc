use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CnfFormula, Literal, MAX_CLAUSE_WIDTH};
use crate::error::{Error, Result};

/// Uniform random k-CNF: every clause draws `k` distinct variables uniformly
/// without replacement and an independent fair polarity for each.
/// Variables within a clause are listed in ascending order.
pub fn generate_random_ksat(n: usize, l: usize, k: usize, seed: u64) -> Result<CnfFormula> {
    if k == 0 || k > MAX_CLAUSE_WIDTH {
        return Err(Error::param(format!("clause width k={k} must be in 1..={MAX_CLAUSE_WIDTH}")));
    }
    if n < k {
        return Err(Error::param(format!("need at least k={k} variables, got n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..l)
        .map(|_| {
            let mut vars = index::sample(&mut rng, n, k).into_vec();
            vars.sort_unstable();
            vars.into_iter().map(|v| Literal::new(v, rng.gen_bool(0.5))).collect()
        })
        .collect();
    CnfFormula::new(n, clauses)
}
