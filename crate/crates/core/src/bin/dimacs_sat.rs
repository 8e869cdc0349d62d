//! Minimal DIMACS CNF solver front-end over the embedded CDCL engine.
//! Prints competition-style `s`/`v` lines and exits 10 (sat), 20 (unsat),
//! or 1 (error).

use std::process::ExitCode;

use qfp_core::encoder::parse_dimacs;
use qfp_core::sat::{solve, SatResult};

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: dimacs-sat <file.cnf>");
        return ExitCode::from(1);
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {path}: {err}");
            return ExitCode::from(1);
        }
    };
    let cnf = match parse_dimacs(&text) {
        Ok(cnf) => cnf,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    };
    match solve(&cnf) {
        Ok(SatResult::Sat(assignment)) => {
            println!("s SATISFIABLE");
            let mut line = String::from("v");
            for (i, &value) in assignment.iter().enumerate() {
                let lit = if value { i as i64 + 1 } else { -(i as i64 + 1) };
                line.push_str(&format!(" {lit}"));
                if line.len() > 72 {
                    println!("{line}");
                    line = String::from("v");
                }
            }
            line.push_str(" 0");
            println!("{line}");
            ExitCode::from(10)
        }
        Ok(SatResult::Unsat) => {
            println!("s UNSATISFIABLE");
            ExitCode::from(20)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
