//! Sub-SAT to QUBO conversion with one auxiliary bit per 3-literal clause.
//!
//! The objective counts unsatisfied clauses. With `ℓ = x` for a positive
//! literal and `ℓ = 1 - x` for a negative one, each clause contributes
//!
//! * one literal: `1 - ℓ1`
//! * two literals: `(1 - ℓ1)(1 - ℓ2)`
//! * three literals: `1 - [(1 + w)(ℓ1 + ℓ2 + ℓ3) - ℓ1ℓ2 - ℓ1ℓ3 - ℓ2ℓ3 - 2w]`
//!
//! The bracket equals the satisfied indicator once `w` is chosen optimally
//! (`w = 1` iff all three literals are true), so `min_w E(x, w)` is exactly
//! the number of unsatisfied clauses under `x`.

use super::{QuboBuilder, QuboProblem, QuboSolution, VarRole};
use crate::cnf::{Assignment, Literal};
use crate::decompose::SubProblem;
use crate::error::{Error, Result};

/// `offset + scale * x_var`.
#[derive(Clone, Copy)]
struct Affine {
    offset: f64,
    scale: f64,
    var: usize,
}

impl Affine {
    fn of_literal(lit: Literal) -> Affine {
        if lit.is_positive() {
            Affine { offset: 0.0, scale: 1.0, var: lit.var() }
        } else {
            Affine { offset: 1.0, scale: -1.0, var: lit.var() }
        }
    }

    fn of_var(var: usize) -> Affine {
        Affine { offset: 0.0, scale: 1.0, var }
    }

    fn complement(self) -> Affine {
        Affine { offset: 1.0 - self.offset, scale: -self.scale, var: self.var }
    }
}

impl QuboBuilder {
    fn add_affine(&mut self, k: f64, a: Affine) {
        self.add_constant(k * a.offset);
        self.add_linear(a.var, k * a.scale);
    }

    fn add_product(&mut self, k: f64, a: Affine, b: Affine) {
        self.add_constant(k * a.offset * b.offset);
        self.add_linear(b.var, k * a.offset * b.scale);
        self.add_linear(a.var, k * b.offset * a.scale);
        self.add_quadratic(a.var, b.var, k * a.scale * b.scale);
    }
}

/// Builds the QUBO of a sub-problem. SAT variables occupy indices `0..M` in
/// local order; auxiliary bits follow in reduced-clause order.
pub fn subsat_to_qubo(sub: &SubProblem) -> Result<QuboProblem> {
    let formula = sub.formula();
    let m = sub.num_dynamic();
    let mut roles: Vec<VarRole> = (0..m).map(VarRole::Sat).collect();
    for (c, clause) in formula.clauses().enumerate() {
        match clause.len() {
            1 | 2 => {}
            3 => roles.push(VarRole::Aux(c)),
            len => return Err(Error::ClauseWidth { clause: c, len }),
        }
    }
    let mut b = QuboBuilder::with_roles(roles);
    let mut next_aux = m;
    for clause in formula.clauses() {
        let lits: Vec<Affine> = clause.iter().map(|&l| Affine::of_literal(l)).collect();
        match lits[..] {
            [a] => {
                b.add_constant(1.0);
                b.add_affine(-1.0, a);
            }
            [a, c] => b.add_product(1.0, a.complement(), c.complement()),
            [l1, l2, l3] => {
                let w = Affine::of_var(next_aux);
                next_aux += 1;
                b.add_constant(1.0);
                for l in [l1, l2, l3] {
                    b.add_affine(-1.0, l);
                    b.add_product(-1.0, w, l);
                }
                b.add_product(1.0, l1, l2);
                b.add_product(1.0, l1, l3);
                b.add_product(1.0, l2, l3);
                b.add_affine(2.0, w);
            }
            _ => unreachable!("width checked above"),
        }
    }
    Ok(b.build())
}

/// Optimal auxiliary bit of a 3-literal clause: set iff all literals are true.
pub fn optimal_aux(clause: &[Literal], local: &[bool]) -> bool {
    clause.iter().all(|l| l.is_satisfied_by(local))
}

/// QUBO bits for a local SAT assignment with every auxiliary bit optimal, so
/// that the QUBO objective equals the sub-problem energy.
pub fn encode_assignment(sub: &SubProblem, q: &QuboProblem, local: &[bool]) -> Result<Vec<bool>> {
    if local.len() != sub.num_dynamic() {
        return Err(Error::LengthMismatch { expected: sub.num_dynamic(), found: local.len() });
    }
    q.roles()
        .iter()
        .map(|role| match *role {
            VarRole::Sat(i) => Ok(local[i]),
            VarRole::Aux(c) if c < sub.formula().num_clauses() => Ok(optimal_aux(sub.formula().clause(c), local)),
            VarRole::Aux(c) => Err(Error::param(format!("auxiliary bit refers to missing clause {c}"))),
        })
        .collect()
}

/// Projects a QUBO solution onto the SAT variables, dropping auxiliary bits.
pub fn decode_solution(sub: &SubProblem, q: &QuboProblem, sol: &QuboSolution) -> Result<Assignment> {
    if sol.bits.len() != q.size() {
        return Err(Error::LengthMismatch { expected: q.size(), found: sol.bits.len() });
    }
    let m = sub.num_dynamic();
    let mut local = vec![None; m];
    for (bit, role) in sol.bits.iter().zip(q.roles()) {
        if let VarRole::Sat(i) = *role {
            let slot = local.get_mut(i).ok_or(Error::VariableOutOfRange { var: i, num_vars: m })?;
            *slot = Some(*bit);
        }
    }
    local
        .into_iter()
        .collect::<Option<Vec<bool>>>()
        .map(Assignment::new)
        .ok_or_else(|| Error::param("QUBO role map does not cover every dynamic variable"))
}
