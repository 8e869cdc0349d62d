//! Shared fixtures for the criterion benchmarks.

use num_bigint::BigInt;

use qfp_core::analysis::ClassParameters;
use qfp_core::formula::{parse, Script};
use qfp_core::gen::{generate, GenParams};

/// The recorded benchmark-profile parameter rows used by the
/// bound-computation benchmark.
pub fn profile_rows() -> Vec<(ClassParameters, qfp_core::analysis::ClassKind)> {
    let rows: [(usize, usize, usize, usize, i64, i64, bool); 13] = [
        (28, 263, 5, 4, 4, 21, false),
        (28, 263, 5, 4, 4, 30, false),
        (28, 263, 5, 4, 4, 40, false),
        (38, 383, 5, 4, 4, 31, false),
        (38, 383, 5, 4, 4, 40, false),
        (49, 323, 5, 4, 4, 21, false),
        (49, 323, 5, 4, 4, 30, false),
        (49, 323, 5, 4, 4, 40, false),
        (69, 473, 5, 4, 4, 31, false),
        (69, 473, 5, 4, 4, 40, false),
        (54, 67, 7, 3, 1, 0, false),
        (201, 2669, 19, 6, 1, 15, false),
        (255, 6087, 0, 2, 1, 2560, true),
    ];
    rows.iter()
        .map(|&(n, m, k, w, a, b, diff)| {
            let params = ClassParameters {
                n,
                m,
                k,
                k_uncapped: k,
                w,
                a_max: BigInt::from(a),
                b_max: BigInt::from(b),
                s: (n + 1).min(m),
                row_max_coeffs: vec![BigInt::from(a); k],
                row_widths: vec![w; k],
                constants: vec![BigInt::from(b); m],
                anchored: false,
            };
            let kind = if diff {
                qfp_core::analysis::ClassKind::Difference
            } else {
                qfp_core::analysis::ClassKind::General
            };
            (params, kind)
        })
        .collect()
}

/// A generated sparse mostly-difference instance of the given size.
pub fn generated_script(atoms: usize, vars: usize, seed: u64) -> Script {
    let params = GenParams {
        vars,
        atoms,
        non_diff: 5.min(atoms),
        width: 4.min(vars).max(3),
        max_coeff: 4,
        max_const: 21,
        depth: 3,
    };
    let text = generate(&params, seed).expect("feasible benchmark parameters");
    parse(&text).expect("generated scripts parse")
}
