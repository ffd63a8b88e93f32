//! DIMACS CNF reading and writing.

use crate::solver::Lit;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("missing `p cnf <vars> <clauses>` header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimacs {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

/// Parse DIMACS CNF text. Comment (`c`) lines may appear anywhere; literals
/// may be split across lines; each clause must be 0-terminated. A literal
/// beyond the declared variable count is an error; a clause-count mismatch
/// with the header is tolerated (common in the wild).
pub fn parse(text: &str) -> Result<Dimacs, DimacsError> {
    let mut num_vars: Option<usize> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if num_vars.is_some() {
                return Err(DimacsError::Malformed {
                    line: lineno,
                    message: "duplicate header".into(),
                });
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let (vars, _n_clauses) = match fields.as_slice() {
                ["cnf", v, c] => (
                    v.parse::<usize>().map_err(|_| bad_header(lineno))?,
                    c.parse::<usize>().map_err(|_| bad_header(lineno))?,
                ),
                _ => return Err(bad_header(lineno)),
            };
            num_vars = Some(vars);
            continue;
        }
        let vars = num_vars.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let value: i64 = tok.parse().map_err(|_| DimacsError::Malformed {
                line: lineno,
                message: format!("bad literal `{tok}`"),
            })?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if value.unsigned_abs() as usize > vars {
                    return Err(DimacsError::Malformed {
                        line: lineno,
                        message: format!("literal {value} exceeds {vars} declared variables"),
                    });
                }
                current.push(Lit::from_dimacs(value));
            }
        }
    }

    let num_vars = num_vars.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Malformed {
            line: last_line,
            message: "last clause is not 0-terminated".into(),
        });
    }
    Ok(Dimacs { num_vars, clauses })
}

/// Render CNF back to DIMACS text, one clause per line.
pub fn write(num_vars: usize, clauses: &[Vec<Lit>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("p cnf {} {}\n", num_vars, clauses.len()));
    for c in clauses {
        for l in c {
            out.push_str(&format!("{} ", l.to_dimacs()));
        }
        out.push_str("0\n");
    }
    out
}

fn bad_header(line: usize) -> DimacsError {
    DimacsError::Malformed {
        line,
        message: "header must be `p cnf <vars> <clauses>`".into(),
    }
}
