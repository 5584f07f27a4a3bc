//! CNF data model: literals, immutable clause database, assignments and the
//! from-scratch energy count.
//!
//! Variables are 0-indexed internally. DIMACS 1-indexing is only used at the
//! text boundary (see [`dimacs`]).

pub mod dimacs;
pub mod generate;
pub mod state;

use std::fmt;
use std::ops::{Deref, DerefMut};

use rand::Rng;

use crate::error::{Error, Result};

pub use dimacs::{parse_dimacs, serialize_dimacs, DimacsError};
pub use generate::generate_random_ksat;
pub use state::SatState;

/// Widest clause accepted anywhere in the crate.
pub const MAX_CLAUSE_WIDTH: usize = 3;

/// A variable together with a polarity, packed as `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(u32);

impl Literal {
    pub fn new(var: usize, positive: bool) -> Literal {
        Literal(((var as u32) << 1) | u32::from(!positive))
    }

    pub fn positive(var: usize) -> Literal {
        Literal::new(var, true)
    }

    pub fn negative(var: usize) -> Literal {
        Literal::new(var, false)
    }

    /// Converts a nonzero DIMACS integer (1-indexed, sign = polarity).
    pub fn from_dimacs(lit: i64) -> Literal {
        debug_assert!(lit != 0);
        Literal::new(lit.unsigned_abs() as usize - 1, lit > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    #[inline]
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// True when the literal evaluates to true under `values`.
    #[inline]
    pub fn is_satisfied_by(self, values: &[bool]) -> bool {
        values[self.var()] == self.is_positive()
    }

    /// Same literal over a different variable index.
    pub fn with_var(self, var: usize) -> Literal {
        Literal::new(var, self.is_positive())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.var())
        } else {
            write!(f, "¬x{}", self.var())
        }
    }
}

/// Immutable clause database over `num_vars` variables.
///
/// Clauses are stored flat; a variable-to-clause occurrence index is built at
/// construction so that incremental bookkeeping touches only the clauses
/// containing a flipped variable.
#[derive(Clone)]
pub struct CnfFormula {
    num_vars: usize,
    lits: Vec<Literal>,
    clause_start: Vec<u32>,
    occ_start: Vec<u32>,
    occ_clause: Vec<u32>,
}

impl CnfFormula {
    /// Validates and builds a formula. Every clause must hold 1..=3 literals
    /// over distinct in-range variables; tautologies and repeated literals
    /// are rejected.
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<CnfFormula> {
        let mut lits = Vec::with_capacity(clauses.iter().map(Vec::len).sum());
        let mut clause_start = Vec::with_capacity(clauses.len() + 1);
        clause_start.push(0);
        for (ci, clause) in clauses.iter().enumerate() {
            if clause.is_empty() || clause.len() > MAX_CLAUSE_WIDTH {
                return Err(Error::ClauseWidth { clause: ci, len: clause.len() });
            }
            for (i, lit) in clause.iter().enumerate() {
                if lit.var() >= num_vars {
                    return Err(Error::VariableOutOfRange { var: lit.var(), num_vars });
                }
                if clause[..i].iter().any(|l| l.var() == lit.var()) {
                    return Err(Error::DuplicateVariable(lit.var()));
                }
            }
            lits.extend_from_slice(clause);
            clause_start.push(lits.len() as u32);
        }
        Ok(CnfFormula::from_parts(num_vars, lits, clause_start))
    }

    /// Builds from DIMACS-style signed integers. Handy in tests.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<CnfFormula> {
        CnfFormula::new(
            num_vars,
            clauses
                .iter()
                .map(|c| c.iter().map(|&l| Literal::from_dimacs(l)).collect())
                .collect(),
        )
    }

    fn from_parts(num_vars: usize, lits: Vec<Literal>, clause_start: Vec<u32>) -> CnfFormula {
        let mut counts = vec![0u32; num_vars + 1];
        for lit in &lits {
            counts[lit.var() + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let occ_start = counts.clone();
        let mut fill = counts;
        let mut occ_clause = vec![0u32; lits.len()];
        for c in 0..clause_start.len() - 1 {
            for lit in &lits[clause_start[c] as usize..clause_start[c + 1] as usize] {
                let slot = &mut fill[lit.var()];
                occ_clause[*slot as usize] = c as u32;
                *slot += 1;
            }
        }
        CnfFormula { num_vars, lits, clause_start, occ_start, occ_clause }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clause_start.len() - 1
    }

    pub fn num_literals(&self) -> usize {
        self.lits.len()
    }

    #[inline]
    pub fn clause(&self, index: usize) -> &[Literal] {
        &self.lits[self.clause_start[index] as usize..self.clause_start[index + 1] as usize]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &[Literal]> + '_ {
        (0..self.num_clauses()).map(move |c| self.clause(c))
    }

    /// Indices of the clauses containing `var`, ascending.
    #[inline]
    pub fn occurrences(&self, var: usize) -> &[u32] {
        &self.occ_clause[self.occ_start[var] as usize..self.occ_start[var + 1] as usize]
    }

    /// Width of the longest clause, 0 for an empty formula.
    pub fn max_clause_width(&self) -> usize {
        self.clauses().map(<[Literal]>::len).max().unwrap_or(0)
    }

    pub fn is_clause_satisfied(&self, clause: usize, values: &[bool]) -> bool {
        self.clause(clause).iter().any(|l| l.is_satisfied_by(values))
    }
}

impl PartialEq for CnfFormula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars
            && self.clause_start == other.clause_start
            && self.lits == other.lits
    }
}

impl Eq for CnfFormula {}

impl fmt::Debug for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CnfFormula")
            .field("num_vars", &self.num_vars)
            .field("clauses", &self.clauses().collect::<Vec<_>>())
            .finish()
    }
}

/// Truth values for every variable of a formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment(values)
    }

    pub fn all_false(len: usize) -> Assignment {
        Assignment(vec![false; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Assignment {
        Assignment((0..len).map(|_| rng.gen_bool(0.5)).collect())
    }

    /// Bit `i` of `bits` is variable `i`; used for exhaustive enumeration.
    pub fn from_bits(len: usize, bits: u64) -> Assignment {
        Assignment((0..len).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl Deref for Assignment {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl DerefMut for Assignment {
    fn deref_mut(&mut self) -> &mut [bool] {
        &mut self.0
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(values: Vec<bool>) -> Self {
        Assignment(values)
    }
}

/// Number of clauses of `formula` left unsatisfied by `values`, counted from
/// scratch.
pub fn energy_of(formula: &CnfFormula, values: &[bool]) -> Result<usize> {
    if values.len() != formula.num_vars() {
        return Err(Error::LengthMismatch { expected: formula.num_vars(), found: values.len() });
    }
    Ok((0..formula.num_clauses()).filter(|&c| !formula.is_clause_satisfied(c, values)).count())
}
