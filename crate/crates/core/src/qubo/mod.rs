//! Quadratic unconstrained binary optimization.
//!
//! Objectives are minimized: `constant + Σ linear_i b_i + Σ_{i<j} q_ij b_i b_j`.

mod encode;
mod tabu;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub use encode::{decode_solution, encode_assignment, optimal_aux, subsat_to_qubo};
pub use tabu::{tabu_search, QuboSolution, TabuParams};

/// What a QUBO variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// A SAT variable (local index in the sub-problem).
    Sat(usize),
    /// The auxiliary bit of a 3-literal clause (index of the reduced clause).
    Aux(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuboProblem {
    linear: Vec<f64>,
    quadratic: Vec<(usize, usize, f64)>,
    constant: f64,
    roles: Vec<VarRole>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl QuboProblem {
    /// A plain QUBO; every variable gets role `Sat(i)`.
    pub fn new(linear: Vec<f64>, quadratic: &[(usize, usize, f64)], constant: f64) -> Result<QuboProblem> {
        let mut b = QuboBuilder::new(linear.len());
        b.add_constant(constant);
        for (i, c) in linear.into_iter().enumerate() {
            b.add_linear(i, c);
        }
        for &(i, j, c) in quadratic {
            if i >= b.size() || j >= b.size() {
                return Err(Error::VariableOutOfRange { var: i.max(j), num_vars: b.size() });
            }
            b.add_quadratic(i, j, c);
        }
        Ok(b.build())
    }

    pub fn size(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Strictly upper-triangular nonzero terms `(i, j, q_ij)`, sorted.
    pub fn quadratic(&self) -> &[(usize, usize, f64)] {
        &self.quadratic
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    /// Variables sharing a quadratic term with `i`, with the coefficient.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn num_aux(&self) -> usize {
        self.roles.iter().filter(|r| matches!(r, VarRole::Aux(_))).count()
    }

    pub fn energy(&self, bits: &[bool]) -> Result<f64> {
        if bits.len() != self.size() {
            return Err(Error::LengthMismatch { expected: self.size(), found: bits.len() });
        }
        let mut e = self.constant;
        for (i, &c) in self.linear.iter().enumerate() {
            if bits[i] {
                e += c;
            }
        }
        for &(i, j, c) in &self.quadratic {
            if bits[i] && bits[j] {
                e += c;
            }
        }
        Ok(e)
    }

    /// Coordinate text format: `q <Q> <nnz> <constant>` then one `i j coeff`
    /// line per nonzero term, `i = j` for linear terms.
    pub fn to_coo_string(&self) -> String {
        let nnz = self.linear.iter().filter(|&&c| c != 0.0).count() + self.quadratic.len();
        let mut out = String::new();
        let _ = writeln!(out, "q {} {} {}", self.size(), nnz, self.constant);
        for (i, &c) in self.linear.iter().enumerate() {
            if c != 0.0 {
                let _ = writeln!(out, "{i} {i} {c}");
            }
        }
        for &(i, j, c) in &self.quadratic {
            let _ = writeln!(out, "{i} {j} {c}");
        }
        out
    }

    pub fn from_coo_str(text: &str) -> Result<QuboProblem> {
        let bad = |line: usize, what: &str| Error::param(format!("coordinate QUBO line {line}: {what}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "q" {
            return Err(bad(hl + 1, "expected `q <Q> <nnz> <constant>`"));
        }
        let size: usize = h[1].parse().map_err(|_| bad(hl + 1, "bad size"))?;
        let nnz: usize = h[2].parse().map_err(|_| bad(hl + 1, "bad nnz"))?;
        let constant: f64 = h[3].parse().map_err(|_| bad(hl + 1, "bad constant"))?;
        let mut b = QuboBuilder::new(size);
        b.add_constant(constant);
        let mut count = 0;
        for (ln, line) in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            let parsed = (t.len() == 3)
                .then(|| Some((t[0].parse::<usize>().ok()?, t[1].parse::<usize>().ok()?, t[2].parse::<f64>().ok()?)))
                .flatten();
            let (i, j, c) = parsed.ok_or_else(|| bad(ln + 1, "expected `i j coeff`"))?;
            if i >= size || j >= size {
                return Err(bad(ln + 1, "index out of range"));
            }
            b.add_quadratic(i, j, c);
            count += 1;
        }
        if count != nnz {
            return Err(bad(hl + 1, "entry count does not match header"));
        }
        Ok(b.build())
    }
}

pub fn qubo_energy(q: &QuboProblem, bits: &[bool]) -> Result<f64> {
    q.energy(bits)
}

/// Accumulates terms; `x_i x_i` folds into the linear term and `(j, i)`
/// into `(i, j)`.
#[derive(Clone, Debug)]
pub struct QuboBuilder {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    constant: f64,
    roles: Vec<VarRole>,
}

impl QuboBuilder {
    pub fn new(size: usize) -> QuboBuilder {
        QuboBuilder {
            linear: vec![0.0; size],
            quadratic: BTreeMap::new(),
            constant: 0.0,
            roles: (0..size).map(VarRole::Sat).collect(),
        }
    }

    pub fn with_roles(roles: Vec<VarRole>) -> QuboBuilder {
        QuboBuilder { linear: vec![0.0; roles.len()], quadratic: BTreeMap::new(), constant: 0.0, roles }
    }

    pub fn size(&self) -> usize {
        self.linear.len()
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        self.linear[i] += c;
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            self.linear[i] += c;
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
        }
    }

    pub fn build(self) -> QuboProblem {
        let quadratic: Vec<(usize, usize, f64)> =
            self.quadratic.into_iter().filter(|&(_, c)| c != 0.0).map(|((i, j), c)| (i, j, c)).collect();
        let mut neighbors = vec![Vec::new(); self.linear.len()];
        for &(i, j, c) in &quadratic {
            neighbors[i].push((j, c));
            neighbors[j].push((i, c));
        }
        QuboProblem { linear: self.linear, quadratic, constant: self.constant, roles: self.roles, neighbors }
    }
}


#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::test_support::*;
    use super::*;

    #[test]
    fn builder_folds_terms() {
        let mut b = QuboBuilder::new(3);
        b.add_quadratic(2, 0, 1.5);
        b.add_quadratic(0, 2, 0.5);
        b.add_quadratic(1, 1, 2.0);
        b.add_quadratic(0, 1, 1.0);
        b.add_quadratic(1, 0, -1.0);
        let q = b.build();
        assert_eq!(q.quadratic(), &[(0, 2, 2.0)]);
        assert_eq!(q.linear(), &[0.0, 2.0, 0.0]);
        assert_eq!(q.neighbors(2), &[(0, 2.0)]);
    }

    #[test]
    fn energy_of_zero_vector_is_constant() {
        let q = QuboProblem::new(vec![1.0, -2.0], &[(0, 1, 3.0)], 4.5).unwrap();
        assert_eq!(q.energy(&[false, false]).unwrap(), 4.5);
        assert_eq!(q.energy(&[true, true]).unwrap(), 6.5);
        assert!(q.energy(&[true]).is_err());
    }

    #[test]
    fn matches_dense_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for size in [1, 5, 12, 20] {
            let q = random_qubo(size, 0.4, &mut rng);
            let mut dense = vec![vec![0.0; size]; size];
            for (i, &c) in q.linear().iter().enumerate() {
                dense[i][i] = c;
            }
            for &(i, j, c) in q.quadratic() {
                dense[i][j] = c;
            }
            for _ in 0..50 {
                let bits: Vec<bool> = (0..size).map(|_| rng.gen_bool(0.5)).collect();
                let x: Vec<f64> = bits.iter().map(|&b| f64::from(u8::from(b))).collect();
                let mut want = q.constant();
                for i in 0..size {
                    for j in i..size {
                        want += dense[i][j] * x[i] * x[j];
                    }
                }
                assert_eq!(q.energy(&bits).unwrap(), want);
            }
        }
    }

    #[test]
    fn coo_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_qubo(9, 0.5, &mut rng);
        let text = q.to_coo_string();
        assert!(text.starts_with(&"q 9 "));
        let back = QuboProblem::from_coo_str(&text).unwrap();
        assert_eq!(back.linear(), q.linear());
        assert_eq!(back.quadratic(), q.quadratic());
        assert_eq!(back.constant(), q.constant());
        assert!(QuboProblem::from_coo_str("q 2 1 0\n0 5 1\n").is_err());
        assert!(QuboProblem::from_coo_str("q 2 2 0\n0 1 1\n").is_err());
    }
}
