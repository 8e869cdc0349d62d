//! Adapter for external DIMACS solvers: write the CNF to a temporary file,
//! run the solver with the file path as its last argument, and parse the
//! competition-style `s`/`v` output. The parsed status line is
//! authoritative; exit codes 10/20 are accepted as corroboration only.
//! Models are always re-verified against the clauses before being trusted.

use std::io::Write;
use std::process::Command;

use tempfile::NamedTempFile;

use super::{SatError, SatResult};
use crate::encoder::{emit_dimacs, Cnf};

/// Runs `command` (split on whitespace) on the CNF. Value lines may be
/// partial; unassigned variables default to false before verification.
pub fn solve_external(cnf: &Cnf, command: &str) -> Result<SatResult, SatError> {
    let mut parts = command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| SatError::Protocol("empty solver command".to_string()))?;
    let args: Vec<&str> = parts.collect();

    let mut file = NamedTempFile::new()?;
    emit_dimacs(cnf, &mut file)?;
    file.flush()?;

    let output = Command::new(program)
        .args(&args)
        .arg(file.path())
        .output()?;
    let stdout = String::from_utf8_lossy(&output.stdout);

    let mut status: Option<bool> = None;
    let mut literals: Vec<i32> = Vec::new();
    for line in stdout.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            match rest.trim() {
                "SATISFIABLE" => status = Some(true),
                "UNSATISFIABLE" => status = Some(false),
                other => {
                    return Err(SatError::Protocol(format!(
                        "unrecognized status line 's {other}'"
                    )))
                }
            }
        } else if let Some(rest) = line.strip_prefix('v') {
            for tok in rest.split_whitespace() {
                let lit: i32 = tok.parse().map_err(|_| {
                    SatError::Protocol(format!("bad literal '{tok}' in value line"))
                })?;
                if lit != 0 {
                    literals.push(lit);
                }
            }
        }
    }

    match status {
        None => Err(SatError::Protocol(format!(
            "no status line in solver output (exit {:?})",
            output.status.code()
        ))),
        Some(false) => Ok(SatResult::Unsat),
        Some(true) => {
            let mut assignment = vec![false; cnf.num_vars];
            for lit in literals {
                let idx = (lit.unsigned_abs() - 1) as usize;
                if idx >= cnf.num_vars {
                    return Err(SatError::Protocol(format!(
                        "literal {lit} out of range in value line"
                    )));
                }
                assignment[idx] = lit > 0;
            }
            if cnf.is_satisfied_by(&assignment) {
                Ok(SatResult::Sat(assignment))
            } else {
                Err(SatError::InvalidExternalModel)
            }
        }
    }
}
