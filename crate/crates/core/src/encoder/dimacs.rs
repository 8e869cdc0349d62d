//! DIMACS CNF writer and reader. The writer output is deterministic:
//! `p cnf V C`, one clause per line, literals space-separated and
//! 0-terminated.

use std::io::{self, Write};

use thiserror::Error;

use super::Cnf;

/// Writes `c` in DIMACS CNF format.
pub fn emit_dimacs<W: Write>(c: &Cnf, sink: &mut W) -> io::Result<()> {
    writeln!(sink, "p cnf {} {}", c.num_vars, c.clauses.len())?;
    for clause in &c.clauses {
        for lit in clause {
            write!(sink, "{lit} ")?;
        }
        writeln!(sink, "0")?;
    }
    Ok(())
}

/// Convenience wrapper producing a `String`.
pub fn dimacs_string(c: &Cnf) -> String {
    let mut buf = Vec::new();
    emit_dimacs(c, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("dimacs output is ascii")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("missing 'p cnf' header")]
    MissingHeader,
    #[error("literal {0} exceeds the declared variable count")]
    LiteralOutOfRange(i32),
}

/// Parses DIMACS CNF text. Comment lines and arbitrary whitespace are
/// accepted; clauses may span lines.
pub fn parse_dimacs(input: &str) -> Result<Cnf, DimacsError> {
    let mut num_vars: Option<usize> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();

    for (lineno, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let mut parts = line.split_whitespace();
            let (_, fmt) = (parts.next(), parts.next());
            if fmt != Some("cnf") {
                return Err(DimacsError::Malformed(
                    lineno + 1,
                    "expected 'p cnf'".to_string(),
                ));
            }
            let vars = parts
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| {
                    DimacsError::Malformed(lineno + 1, "bad variable count".to_string())
                })?;
            // the clause count is advisory; we trust the clause list
            num_vars = Some(vars);
            continue;
        }
        let declared =
            num_vars.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| {
                DimacsError::Malformed(lineno + 1, format!("bad literal '{tok}'"))
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > declared {
                    return Err(DimacsError::LiteralOutOfRange(lit));
                }
                current.push(lit);
            }
        }
    }
    let num_vars = num_vars.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        clauses.push(current);
    }
    Ok(Cnf { num_vars, clauses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_output_format() {
        let cnf = Cnf {
            num_vars: 2,
            clauses: vec![vec![1, -2], vec![2]],
        };
        assert_eq!(dimacs_string(&cnf), "p cnf 2 2\n1 -2 0\n2 0\n");
    }

    #[test]
    fn empty_cnf() {
        let cnf = Cnf::new();
        assert_eq!(dimacs_string(&cnf), "p cnf 0 0\n");
    }

    #[test]
    fn round_trip() {
        let cnf = Cnf {
            num_vars: 4,
            clauses: vec![vec![1, -2], vec![3, 4, -1], vec![], vec![-4]],
        };
        let parsed = parse_dimacs(&dimacs_string(&cnf)).unwrap();
        assert_eq!(parsed, cnf);
    }

    #[test]
    fn accepts_comments_and_multiline_clauses() {
        let parsed = parse_dimacs("c header\np cnf 3 2\n1 2\n3 0\nc mid\n-1 -3 0\n").unwrap();
        assert_eq!(parsed.clauses, vec![vec![1, 2, 3], vec![-1, -3]]);
    }

    #[test]
    fn rejects_out_of_range_literals() {
        assert_eq!(
            parse_dimacs("p cnf 1 1\n2 0\n"),
            Err(DimacsError::LiteralOutOfRange(2))
        );
    }
}
