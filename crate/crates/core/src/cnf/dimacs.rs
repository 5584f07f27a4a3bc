//! DIMACS CNF reader and writer.
//!
//! The reader is strict: it accepts `c` comment lines, exactly one
//! `p cnf N L` header, and clauses of 1..=3 literals terminated by `0`
//! (possibly spanning lines). Anything else is an error carrying the line
//! number where it was detected.

use std::fmt::Write as _;

use thiserror::Error;

use super::{CnfFormula, Literal, MAX_CLAUSE_WIDTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: clause data before the `p cnf` header")]
    MissingHeader { line: usize },
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange { line: usize, literal: i64, num_vars: usize },
    #[error("line {line}: variable {var} repeated in clause")]
    DuplicateLiteral { line: usize, var: i64 },
    #[error("line {line}: tautological clause (contains {var} and -{var})")]
    Tautology { line: usize, var: i64 },
    #[error("line {line}: clause has more than {MAX_CLAUSE_WIDTH} literals")]
    ClauseTooWide { line: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: header declares {declared} clauses, found {found}")]
    ClauseCountMismatch { line: usize, declared: usize, found: usize },
    #[error("line {line}: last clause is not terminated by 0")]
    UnterminatedClause { line: usize },
}

impl DimacsError {
    pub fn line(&self) -> usize {
        match *self {
            DimacsError::MalformedHeader { line, .. }
            | DimacsError::MissingHeader { line }
            | DimacsError::InvalidToken { line, .. }
            | DimacsError::LiteralOutOfRange { line, .. }
            | DimacsError::DuplicateLiteral { line, .. }
            | DimacsError::Tautology { line, .. }
            | DimacsError::ClauseTooWide { line }
            | DimacsError::EmptyClause { line }
            | DimacsError::ClauseCountMismatch { line, .. }
            | DimacsError::UnterminatedClause { line } => line,
        }
    }
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader { line, reason: "duplicate header".into() });
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(DimacsError::MissingHeader { line });
        };
        for token in trimmed.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| DimacsError::InvalidToken { line, token: token.to_string() })?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(DimacsError::EmptyClause { line });
                }
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if lit.unsigned_abs() as usize > num_vars {
                return Err(DimacsError::LiteralOutOfRange { line, literal: lit, num_vars });
            }
            let literal = Literal::from_dimacs(lit);
            if let Some(prev) = current.iter().find(|l| l.var() == literal.var()) {
                let var = lit.abs();
                return Err(if *prev == literal {
                    DimacsError::DuplicateLiteral { line, var }
                } else {
                    DimacsError::Tautology { line, var }
                });
            }
            if current.len() == MAX_CLAUSE_WIDTH {
                return Err(DimacsError::ClauseTooWide { line });
            }
            current.push(literal);
        }
    }

    let Some((num_vars, declared)) = header else {
        return Err(DimacsError::MalformedHeader { line: last_line.max(1), reason: "missing `p cnf` line".into() });
    };
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause { line: last_line });
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCountMismatch { line: last_line.max(1), declared, found: clauses.len() });
    }
    // Validation already happened above, so construction cannot fail.
    Ok(CnfFormula::new(num_vars, clauses).expect("validated clauses"))
}

fn parse_header(line_text: &str, line: usize) -> Result<(usize, usize), DimacsError> {
    let mut parts = line_text.split_whitespace();
    let malformed = |reason: &str| DimacsError::MalformedHeader { line, reason: reason.to_string() };
    if parts.next() != Some("p") {
        return Err(malformed("expected `p`"));
    }
    if parts.next() != Some("cnf") {
        return Err(malformed("expected format `cnf`"));
    }
    let n = parts
        .next()
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| malformed("variable count is not a non-negative integer"))?;
    let l = parts
        .next()
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| malformed("clause count is not a non-negative integer"))?;
    if parts.next().is_some() {
        return Err(malformed("trailing tokens"));
    }
    Ok((n, l))
}

/// Writes `p cnf N L` followed by one clause per line.
pub fn serialize_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::with_capacity(16 + formula.num_literals() * 5);
    write_clauses(&mut out, formula);
    out
}

/// Same as [`serialize_dimacs`] with leading comment lines.
pub fn serialize_dimacs_with_comments(formula: &CnfFormula, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    write_clauses(&mut out, formula);
    out
}

fn write_clauses(out: &mut String, formula: &CnfFormula) {
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        for lit in clause {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
}
