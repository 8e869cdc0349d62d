//! Helpers shared by the integration test suites: a bit-parallel
//! truth-table oracle for CNFs, a random 3-CNF sampler, and a rejection
//! sampler that keeps oracle search spaces within budget.

// each test binary uses its own subset of these helpers
#![allow(dead_code)]

use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qfp_core::encoder::Cnf;
use qfp_core::formula::{normalize, to_nnf, Formula, SymbolTable};
use qfp_core::gen::{random_surface_formula, SampleProfile};
use qfp_core::oracle::SearchSpace;
use qfp_core::pipeline::{analyze_formula, OptPreset};

/// Truth-table satisfiability for up to 26 variables, evaluating 64
/// assignments per word.
pub fn truth_table_sat(cnf: &Cnf) -> bool {
    truth_table_entails(cnf, None)
}

/// With `extra_forbidden = Some(clause)`, decides whether some model of
/// `cnf` violates `clause` (i.e. `cnf ∧ ¬clause` satisfiable).
pub fn truth_table_entails(cnf: &Cnf, extra_forbidden: Option<&[i32]>) -> bool {
    let n = cnf.num_vars;
    assert!(n <= 26, "truth table limited to 26 variables");
    let low = n.min(6);
    let patterns: Vec<u64> = (0..low)
        .map(|v| {
            let mut mask = 0u64;
            for i in 0..64u64 {
                if (i >> v) & 1 == 1 {
                    mask |= 1 << i;
                }
            }
            mask
        })
        .collect();

    let blocks = 1u64 << (n - low);
    for block in 0..blocks {
        let lit_mask = |lit: i32| -> u64 {
            let var = (lit.unsigned_abs() - 1) as usize;
            let positive = if var < low {
                patterns[var]
            } else if (block >> (var - low)) & 1 == 1 {
                u64::MAX
            } else {
                0
            };
            if lit > 0 {
                positive
            } else {
                !positive
            }
        };
        let mut ok = u64::MAX;
        for clause in &cnf.clauses {
            let mut clause_mask = 0u64;
            for &lit in clause {
                clause_mask |= lit_mask(lit);
            }
            ok &= clause_mask;
            if ok == 0 {
                break;
            }
        }
        if let Some(clause) = extra_forbidden {
            for &lit in clause {
                ok &= !lit_mask(lit);
                if ok == 0 {
                    break;
                }
            }
        }
        // for n < 6 the word repeats the 2^n valid assignments, so any set
        // bit still witnesses a real model
        if ok != 0 {
            return true;
        }
    }
    false
}

/// Random 3-CNF with the requested clause count.
pub fn random_cnf(rng: &mut ChaCha8Rng, num_vars: usize, num_clauses: usize) -> Cnf {
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let mut vars: Vec<usize> = (0..num_vars).collect();
        for i in 0..3.min(num_vars) {
            let j = rng.gen_range(i..num_vars);
            vars.swap(i, j);
        }
        let clause: Vec<i32> = vars
            .iter()
            .take(3.min(num_vars))
            .map(|&v| {
                let lit = (v + 1) as i32;
                if rng.gen_bool(0.5) {
                    lit
                } else {
                    -lit
                }
            })
            .collect();
        clauses.push(clause);
    }
    Cnf { num_vars, clauses }
}

/// Samples a surface instance whose oracle search space, enlarged by
/// `scale`, stays within `budget` configurations.
pub fn sample_checkable(
    rng: &mut ChaCha8Rng,
    profile: &SampleProfile,
    scale: u32,
    budget: u64,
) -> (Formula, SymbolTable, SearchSpace) {
    loop {
        let (f, symbols) = random_surface_formula(rng, profile);
        let nnf = to_nnf(&normalize(&f).unwrap());
        let analysis = analyze_formula(&nnf, OptPreset::Base, false);
        let space = analysis.search_space();
        if space.scaled(scale).config_count() <= BigUint::from(budget) {
            return (f, symbols, space);
        }
    }
}
