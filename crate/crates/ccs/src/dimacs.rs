//! DIMACS CNF reading and writing.
//!
//! Accepts `c` comment lines, one `p cnf V C` header, and 0-terminated clauses
//! that may span lines. A `%` line ends the clause section (SATLIB style). A
//! final clause missing its terminating 0 is accepted.

use ccs_core::CnfFormula;
use thiserror::Error;

pub use ccs_core::cnf::cnf_to_circuit;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("header declares {declared} clauses but {found} were read")]
    HeaderMismatch { declared: usize, found: usize },
    #[error("line {line}: literal {literal} is out of range for {num_vars} variables")]
    LiteralOutOfRange { line: usize, literal: i64, num_vars: usize },
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let syntax = |line: usize, message: &str| DimacsError::Syntax { line, message: message.to_string() };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(syntax(line, "duplicate header"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| syntax(line, "expected `p cnf <vars> <clauses>`"))?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(syntax(line, "clause before `p cnf` header"));
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| syntax(line, &format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() > num_vars as u64 {
                return Err(DimacsError::LiteralOutOfRange { line, literal: lit, num_vars });
            } else {
                current.push(lit as i32);
            }
        }
    }

    let (num_vars, declared) = header.ok_or_else(|| syntax(text.lines().count().max(1), "missing `p cnf` header"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(DimacsError::HeaderMismatch { declared, found: clauses.len() });
    }
    Ok(CnfFormula::new(num_vars, clauses).expect("literals checked against the header"))
}

pub fn emit_dimacs(f: &CnfFormula) -> String {
    f.to_dimacs(&[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multiline_clauses_and_comments() {
        let f = parse_dimacs("c hello\np cnf 3 2\n1 -2\n 3 0 -1\n0\n%\n0\n").unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), [vec![1, -2, 3], vec![-1]]);
    }

    #[test]
    fn empty_clause_is_kept() {
        let f = parse_dimacs("p cnf 1 2\n1 0\n0\n").unwrap();
        assert_eq!(f.clauses(), [vec![1], vec![]]);
    }

    #[test]
    fn unterminated_last_clause() {
        let f = parse_dimacs("p cnf 2 1\n1 2").unwrap();
        assert_eq!(f.clauses(), [vec![1, 2]]);
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 3 0\n"),
            Err(DimacsError::LiteralOutOfRange { line: 2, literal: 3, num_vars: 2 })
        );
        assert_eq!(parse_dimacs("p cnf 2 2\n1 0\n"), Err(DimacsError::HeaderMismatch { declared: 2, found: 1 }));
        assert!(matches!(parse_dimacs("1 0\n"), Err(DimacsError::Syntax { line: 1, .. })));
        assert!(matches!(parse_dimacs("p cnf x 1\n"), Err(DimacsError::Syntax { line: 1, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 a 0\n"), Err(DimacsError::Syntax { line: 2, .. })));
        assert!(matches!(parse_dimacs("c only\n"), Err(DimacsError::Syntax { .. })));
    }

    #[test]
    fn round_trip() {
        let f = CnfFormula::new(4, vec![vec![1, -4], vec![], vec![2, 3, -1]]).unwrap();
        assert_eq!(parse_dimacs(&emit_dimacs(&f)).unwrap(), f);
    }
}
