//! Acceptance suite. Each test implements one acceptance criterion at its
//! stated tolerance and prints one pass line; `cargo test --test acceptance`
//! runs them all.

use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfp_core::analysis::{
    compute_bound, BoundFormula, ClassKind, ClassParameters, OptFlags,
};
use qfp_core::encoder::encode;
use qfp_core::formula::{
    collect_atoms, evaluate, negate_atom, normalize, to_nnf, Formula, Model, VarId,
};
use qfp_core::gen::{
    generate, random_difference_formula, random_equality_formula, random_surface_formula,
    GenParams, SampleProfile,
};
use qfp_core::oracle::brute_force_solve;
use qfp_core::pipeline::{
    analyze_script, solve_formula, OptPreset, SolveConfig, SolveMode, Verdict,
};
use qfp_core::sat::{solve, solve_external, SatResult};

mod common;
use common::{random_cnf, sample_checkable, truth_table_sat};

fn params(
    n: usize,
    m: usize,
    k: usize,
    w: usize,
    a_max: i64,
    b_max: i64,
) -> ClassParameters {
    ClassParameters {
        n,
        m,
        k,
        k_uncapped: k,
        w,
        a_max: BigInt::from(a_max),
        b_max: BigInt::from(b_max),
        s: (n + 1).min(m),
        row_max_coeffs: vec![BigInt::from(a_max); k],
        row_widths: vec![w; k],
        constants: vec![BigInt::from(b_max); m],
        anchored: false,
    }
}

/// Criterion 1: the recorded benchmark-profile parameter rows reproduce
/// their bit widths exactly, in under a millisecond total.
#[test]
fn criterion_1_profile_bit_widths_exact() {
    // (n, m, k, w, a_max, b_max, difference?, expected bits)
    let rows: [(usize, usize, usize, usize, i64, i64, bool, usize); 13] = [
        (28, 263, 5, 4, 4, 21, false, 36),
        (28, 263, 5, 4, 4, 30, false, 36),
        (28, 263, 5, 4, 4, 40, false, 37),
        (38, 383, 5, 4, 4, 31, false, 37),
        (38, 383, 5, 4, 4, 40, false, 37),
        (49, 323, 5, 4, 4, 21, false, 37),
        (49, 323, 5, 4, 4, 30, false, 38),
        (49, 323, 5, 4, 4, 40, false, 38),
        (69, 473, 5, 4, 4, 31, false, 39),
        (69, 473, 5, 4, 4, 40, false, 39),
        (54, 67, 7, 3, 1, 0, false, 24),
        (201, 2669, 19, 6, 1, 15, false, 70),
        (255, 6087, 0, 2, 1, 2560, true, 20),
    ];
    let inputs: Vec<(ClassParameters, ClassKind, usize)> = rows
        .iter()
        .map(|&(n, m, k, w, a, b, diff, bits)| {
            let kind = if diff {
                ClassKind::Difference
            } else {
                ClassKind::General
            };
            (params(n, m, k, w, a, b), kind, bits)
        })
        .collect();

    let start = Instant::now();
    let widths: Vec<usize> = inputs
        .iter()
        .map(|(p, kind, _)| compute_bound(p, *kind, OptFlags::NONE).bit_width)
        .collect();
    let elapsed = start.elapsed();

    for ((_, _, expected), got) in inputs.iter().zip(&widths) {
        assert_eq!(got, expected);
    }
    assert!(
        elapsed.as_micros() < 1000,
        "bound computation took {elapsed:?}, expected < 1 ms"
    );
    println!(
        "[criterion 1] PASS: 13/13 profile widths exact in {:?}",
        elapsed
    );
}

fn criterion_instances(count: usize, seed: u64) -> Vec<(Formula, qfp_core::formula::SymbolTable)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = SampleProfile::default();
    (0..count)
        .map(|_| {
            let (f, symbols, _) = sample_checkable(&mut rng, &profile, 10, 400_000);
            (f, symbols)
        })
        .collect()
}

/// Criterion 2: on 500 seeded random instances the pipeline verdict equals
/// the brute-force verdict over the computed domains and over domains
/// enlarged tenfold, within 60 seconds total.
#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let instances = criterion_instances(500, 0xacc);
    let mut sat_count = 0usize;
    for (i, (f, symbols)) in instances.iter().enumerate() {
        let out = solve_formula(f, symbols, &SolveConfig::default()).unwrap();
        let space = out.analysis.search_space();
        let inside = brute_force_solve(&out.analysis.formula, &space).unwrap();
        let enlarged = brute_force_solve(&out.analysis.formula, &space.scaled(10)).unwrap();
        let pipeline_sat = matches!(out.verdict, Verdict::Sat(_));
        assert_eq!(
            pipeline_sat,
            inside.is_some(),
            "instance {i}: pipeline vs computed-domain oracle"
        );
        assert_eq!(
            pipeline_sat,
            enlarged.is_some(),
            "instance {i}: pipeline vs 10x-domain oracle"
        );
        if pipeline_sat {
            sat_count += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion 2 took {elapsed:?}, expected < 60 s"
    );
    println!(
        "[criterion 2] PASS: 500/500 verdicts agree with the oracle \
         ({sat_count} sat, {} unsat) in {elapsed:?}",
        500 - sat_count
    );
}

/// Criterion 3: every satisfiable answer carries a model that evaluates to
/// true — checked here explicitly over all sat instances of the criterion-2
/// set and enforced by the pipeline everywhere else.
#[test]
fn criterion_3_model_soundness() {
    let instances = criterion_instances(500, 0xacc);
    let mut verified = 0usize;
    for (f, symbols) in &instances {
        if let Verdict::Sat(model) = solve_formula(f, symbols, &SolveConfig::default())
            .unwrap()
            .verdict
        {
            assert!(evaluate(f, &model).unwrap(), "model fails evaluation");
            verified += 1;
        }
    }
    assert!(verified > 0);
    println!("[criterion 3] PASS: {verified} sat models all re-verified by evaluation");
}

/// Criterion 4: verdicts are identical under Base/Coeff/Const/All and
/// All+shift, and per-class widths never grow from Base to All.
#[test]
fn criterion_4_optimization_soundness() {
    let instances = criterion_instances(500, 0xacc);
    let configs: Vec<(&str, SolveConfig)> = vec![
        ("base", SolveConfig::default()),
        (
            "coeff",
            SolveConfig {
                preset: OptPreset::Coeff,
                ..SolveConfig::default()
            },
        ),
        (
            "const",
            SolveConfig {
                preset: OptPreset::Const,
                ..SolveConfig::default()
            },
        ),
        (
            "all",
            SolveConfig {
                preset: OptPreset::All,
                ..SolveConfig::default()
            },
        ),
        (
            "all+shift",
            SolveConfig {
                preset: OptPreset::All,
                shift: true,
                ..SolveConfig::default()
            },
        ),
    ];
    for (i, (f, symbols)) in instances.iter().enumerate() {
        let outcomes: Vec<(&str, bool, Vec<usize>)> = configs
            .iter()
            .map(|(name, config)| {
                let out = solve_formula(f, symbols, config).unwrap();
                (
                    *name,
                    matches!(out.verdict, Verdict::Sat(_)),
                    out.analysis.class_widths(),
                )
            })
            .collect();
        let reference = outcomes[0].1;
        for (name, sat, _) in &outcomes {
            assert_eq!(*sat, reference, "instance {i}: preset {name} changed the verdict");
        }
        let base_widths = &outcomes[0].2;
        let coeff_widths = &outcomes[1].2;
        let const_widths = &outcomes[2].2;
        let all_widths = &outcomes[3].2;
        for (((b, c), k), a) in base_widths
            .iter()
            .zip(coeff_widths)
            .zip(const_widths)
            .zip(all_widths)
        {
            assert!(c <= b && k <= b, "instance {i}: width grew under one flag");
            assert!(a <= c && a <= k, "instance {i}: width grew under both flags");
        }
    }
    println!("[criterion 4] PASS: 500 instances agree across 5 presets; widths non-increasing");
}

/// Criterion 5: specialized bounds on pure difference and pure equality
/// instances match the oracle.
#[test]
fn criterion_5_special_class_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    let mut diff_done = 0usize;
    while diff_done < 200 {
        let (f, symbols) = random_difference_formula(&mut rng, 4, 8, 8, 3);
        let out = solve_formula(&f, &symbols, &SolveConfig::default()).unwrap();
        let space = out.analysis.search_space();
        if space.config_count() > 400_000u64.into() {
            continue;
        }
        for report in &out.analysis.classes {
            assert!(
                matches!(report.class.kind, ClassKind::Equality | ClassKind::Difference),
                "difference sampler produced a {:?} class",
                report.class.kind
            );
            assert!(matches!(
                report.bound.formula_used,
                BoundFormula::DifferenceGraph | BoundFormula::EqualityN
            ));
        }
        let oracle = brute_force_solve(&out.analysis.formula, &space).unwrap();
        assert_eq!(
            matches!(out.verdict, Verdict::Sat(_)),
            oracle.is_some(),
            "difference instance verdict mismatch"
        );
        diff_done += 1;
    }

    for _ in 0..100 {
        let (f, symbols) = random_equality_formula(&mut rng, 4, 6, 3);
        let out = solve_formula(&f, &symbols, &SolveConfig::default()).unwrap();
        for report in &out.analysis.classes {
            assert_eq!(report.class.kind, ClassKind::Equality);
            assert_eq!(report.bound.formula_used, BoundFormula::EqualityN);
            assert_eq!(report.bound.d, BigInt::from(report.params.n));
        }
        let space = out.analysis.search_space();
        let oracle = brute_force_solve(&out.analysis.formula, &space).unwrap();
        assert_eq!(
            matches!(out.verdict, Verdict::Sat(_)),
            oracle.is_some(),
            "equality instance verdict mismatch"
        );
    }
    println!("[criterion 5] PASS: 200 difference + 100 equality instances match the oracle");
}

/// All points of `[-8, 8]^n` for n <= 3.
fn grid(n: usize) -> Vec<Model> {
    let mut points: Vec<Vec<(VarId, BigInt)>> = vec![Vec::new()];
    for v in 0..n {
        let mut next = Vec::new();
        for p in &points {
            for value in -8i64..=8 {
                let mut q = p.clone();
                q.push((VarId(v as u32), BigInt::from(value)));
                next.push(q);
            }
        }
        points = next;
    }
    points.into_iter().map(|p| p.into_iter().collect()).collect()
}

/// Criterion 6: normalize, negate_atom, and to_nnf preserve evaluation on
/// every point of `[-8, 8]^n` for 200 random formulas with n <= 3.
#[test]
fn criterion_6_negation_nnf_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e9);
    let profile = SampleProfile {
        max_vars: 3,
        max_atoms: 5,
        max_coeff: 3,
        max_const: 8,
        max_depth: 3,
        non_diff_prob: 0.35,
        negation_prob: 0.3,
    };
    for round in 0..200 {
        let (surface, symbols) = random_surface_formula(&mut rng, &profile);
        let normalized = normalize(&surface).unwrap();
        let nnf = to_nnf(&normalized);
        let atoms = collect_atoms(&nnf);
        for point in grid(symbols.num_vars()) {
            let reference = evaluate(&surface, &point).unwrap();
            assert_eq!(
                evaluate(&normalized, &point).unwrap(),
                reference,
                "round {round}: normalize"
            );
            assert_eq!(evaluate(&nnf, &point).unwrap(), reference, "round {round}: nnf");
            for atom in &atoms {
                let direct = evaluate(&Formula::Atom(atom.clone()), &point).unwrap();
                let negated =
                    evaluate(&Formula::Atom(negate_atom(atom)), &point).unwrap();
                assert_eq!(direct, !negated, "round {round}: negate_atom");
            }
        }
    }
    println!("[criterion 6] PASS: 200 formulas preserve semantics on every grid point");
}

/// Criterion 7: the embedded CDCL engine agrees with truth-table
/// enumeration on 200 random CNFs and with the external adapter on 100
/// encoder outputs.
#[test]
fn criterion_7_sat_engine_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    for round in 0..200 {
        let num_vars = rng.gen_range(4..=20);
        let cnf = random_cnf(&mut rng, num_vars, num_vars * 4);
        let expected = truth_table_sat(&cnf);
        match solve(&cnf).unwrap() {
            SatResult::Sat(assignment) => {
                assert!(expected, "round {round}");
                assert!(cnf.is_satisfied_by(&assignment));
            }
            SatResult::Unsat => assert!(!expected, "round {round}"),
        }
    }

    let command = env!("CARGO_BIN_EXE_dimacs-sat");
    let profile = SampleProfile::default();
    for round in 0..100 {
        let (f, _, _) = sample_checkable(&mut rng, &profile, 1, 100_000);
        let nnf = to_nnf(&normalize(&f).unwrap());
        let analysis = qfp_core::pipeline::analyze_formula(&nnf, OptPreset::Base, false);
        let (cnf, _) = encode(&analysis.formula, &analysis.domains(), &Default::default()).unwrap();
        let embedded = solve(&cnf).unwrap();
        let external = solve_external(&cnf, command).unwrap();
        match (&embedded, &external) {
            (SatResult::Sat(_), SatResult::Sat(assignment)) => {
                assert!(cnf.is_satisfied_by(assignment), "round {round}");
            }
            (SatResult::Unsat, SatResult::Unsat) => {}
            other => panic!("round {round}: embedded vs external mismatch {other:?}"),
        }
    }
    println!("[criterion 7] PASS: 200 CNFs match truth tables; 100 encoder outputs match externally");
}

/// Criterion 8: with k, w, a_max fixed and m growing 250 -> 1000, the
/// maximum per-class bit width moves by at most 3 bits (it depends on
/// log n and log b_max, not on m).
#[test]
fn criterion_8_scaling_sanity() {
    let family = [(250usize, 32usize), (500, 44), (750, 54), (1000, 64)];
    let mut widths = Vec::new();
    for (m, n) in family {
        let params = GenParams {
            vars: n,
            atoms: m,
            non_diff: 5,
            width: 4,
            max_coeff: 4,
            max_const: 21,
            depth: 3,
        };
        let text = generate(&params, 0x5ca1e).unwrap();
        let script = qfp_core::formula::parse(&text).unwrap();
        let (analysis, _) = analyze_script(&script, OptPreset::Base, false, false).unwrap();
        widths.push(analysis.max_bit_width());
    }
    let min = *widths.iter().min().unwrap();
    let max = *widths.iter().max().unwrap();
    assert!(
        max - min <= 3,
        "widths {widths:?} spread more than 3 bits across the family"
    );
    println!(
        "[criterion 8] PASS: m grows 250 -> 1000, max widths {widths:?} (spread {} bits)",
        max - min
    );
}

/// The width schedule of iterative mode agrees with eager mode (regression
/// companion to criterion 2; both modes share its instance set).
#[test]
fn iterative_mode_matches_eager_on_the_criterion_set() {
    let instances = criterion_instances(120, 0x17e2);
    let iterative = SolveConfig {
        mode: SolveMode::Iterative,
        ..SolveConfig::default()
    };
    for (i, (f, symbols)) in instances.iter().enumerate() {
        let eager = solve_formula(f, symbols, &SolveConfig::default()).unwrap();
        let lazy = solve_formula(f, symbols, &iterative).unwrap();
        assert_eq!(
            matches!(eager.verdict, Verdict::Sat(_)),
            matches!(lazy.verdict, Verdict::Sat(_)),
            "instance {i}"
        );
    }
    println!("[extra] PASS: iterative and eager modes agree on 120 instances");
}

/// Representable ranges always cover the computed bound (encoding
/// completeness precondition), checked across the criterion-2 set.
#[test]
fn encoded_ranges_cover_bounds_on_the_criterion_set() {
    let instances = criterion_instances(100, 0xc0de);
    for (f, symbols) in &instances {
        let out = solve_formula(f, symbols, &SolveConfig::default()).unwrap();
        for report in &out.analysis.classes {
            let domain = qfp_core::encoder::VarDomain {
                kind: report.bound.domain,
                width: report.bound.bit_width,
            };
            assert!(domain.max_magnitude() >= report.bound.d);
        }
    }
    println!("[extra] PASS: representable ranges cover every computed bound");
}
