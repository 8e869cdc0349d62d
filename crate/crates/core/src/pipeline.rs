//! End-to-end orchestration: function elimination, normalization, NNF,
//! shift-of-origin, per-class bound analysis, encoding, SAT solving, and
//! model reconstruction. Every satisfiable answer is re-verified by exact
//! evaluation before it leaves this module.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::analysis::{
    class_parameters, compute_bound, partition_atoms, shift_of_origin, BoundReport,
    ClassParameters, DomainKind, OptFlags, VariableClass,
};
use crate::encoder::{
    decode_model, encode, Cnf, DecodeError, EncodeError, EncodeOptions, VarDomain,
};
use crate::formula::{
    ackermannize, evaluate, normalize, to_nnf, AckermannError, EvalError, Formula, LinearAtom,
    Model, NormalizeError, Script, SymbolTable, VarId,
};
use crate::oracle::SearchSpace;
use crate::sat::{solve_external, solve_with_options, SatError, SatResult, SolverOptions};

/// Bound-optimization presets.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum OptPreset {
    #[default]
    Base,
    Coeff,
    Const,
    All,
}

impl OptPreset {
    pub fn flags(self) -> OptFlags {
        match self {
            OptPreset::Base => OptFlags::NONE,
            OptPreset::Coeff => OptFlags {
                coeff: true,
                const_term: false,
            },
            OptPreset::Const => OptFlags {
                coeff: false,
                const_term: true,
            },
            OptPreset::All => OptFlags::ALL,
        }
    }

    pub fn parse(s: &str) -> Option<OptPreset> {
        match s {
            "base" => Some(OptPreset::Base),
            "coeff" => Some(OptPreset::Coeff),
            "const" => Some(OptPreset::Const),
            "all" => Some(OptPreset::All),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    Embedded { conflict_limit: Option<u64> },
    External(String),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Embedded {
            conflict_limit: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum SolveMode {
    #[default]
    Eager,
    /// Start every class at `min(8, S)` bits and double on unsat up to the
    /// full width; a verified sat at any stage is conclusive, unsat only at
    /// full width.
    Iterative,
}

#[derive(Clone, Debug, Default)]
pub struct SolveConfig {
    pub preset: OptPreset,
    pub shift: bool,
    pub backend: Backend,
    pub mode: SolveMode,
    pub ackermann: bool,
    pub encode: EncodeOptions,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Ackermann(#[from] AckermannError),
    #[error("formula contains uninterpreted functions; enable Ackermann elimination")]
    NeedsAckermann,
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("evaluation failed during model verification: {0}")]
    Eval(#[from] EvalError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// One class with its parameters and bound.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub class: VariableClass,
    pub params: ClassParameters,
    pub bound: BoundReport,
}

/// Analysis of a normalized NNF formula, after the optional shift.
#[derive(Clone, Debug)]
pub struct AnalysisResult {
    /// The formula the encoder sees (bounds rewritten when shifted).
    pub formula: Formula,
    pub atoms: Vec<LinearAtom>,
    pub classes: Vec<ClassReport>,
    /// Offsets applied by the shift (`None` when the shift was disabled).
    pub offsets: Option<BTreeMap<VarId, BigInt>>,
}

impl AnalysisResult {
    /// Full-width encoding domains per variable.
    pub fn domains(&self) -> BTreeMap<VarId, VarDomain> {
        let mut map = BTreeMap::new();
        for report in &self.classes {
            for v in &report.class.vars {
                map.insert(
                    *v,
                    VarDomain {
                        kind: report.bound.domain,
                        width: report.bound.bit_width,
                    },
                );
            }
        }
        map
    }

    /// Oracle search space: `[0, d]` per unsigned class, `[-d, d]` per
    /// signed class.
    pub fn search_space(&self) -> SearchSpace {
        let mut space = SearchSpace::new();
        for report in &self.classes {
            let d = &report.bound.d;
            for v in &report.class.vars {
                match report.bound.domain {
                    DomainKind::Unsigned => space.set(*v, BigInt::zero(), d.clone()),
                    DomainKind::Signed => space.set(*v, -d, d.clone()),
                }
            }
        }
        space
    }

    /// Largest per-class bit width (0 for an empty formula).
    pub fn max_bit_width(&self) -> usize {
        self.classes
            .iter()
            .map(|c| c.bound.bit_width)
            .max()
            .unwrap_or(0)
    }

    /// Per-class widths in class order, for preset comparisons.
    pub fn class_widths(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.bound.bit_width).collect()
    }
}

/// Rewrites atom bounds under `x_j -> x_j - α_j`:
/// `b' = b + Σ_j a_ij · α_j`.
fn apply_offsets(f: &Formula, offsets: &BTreeMap<VarId, BigInt>) -> Formula {
    match f {
        Formula::Const(b) => Formula::Const(*b),
        Formula::Atom(a) => {
            let mut bound = a.bound.clone();
            for (v, c) in &a.coeffs {
                if let Some(alpha) = offsets.get(v) {
                    bound += c * alpha;
                }
            }
            Formula::Atom(LinearAtom {
                coeffs: a.coeffs.clone(),
                bound,
            })
        }
        Formula::Pred(..) => unreachable!("shift runs on normalized formulas"),
        Formula::And(cs) => Formula::And(cs.iter().map(|c| apply_offsets(c, offsets)).collect()),
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| apply_offsets(c, offsets)).collect()),
        Formula::Not(inner) => Formula::Not(Box::new(apply_offsets(inner, offsets))),
    }
}

/// Partitions, extracts parameters, and computes bounds for a normalized
/// NNF formula. With `shift` the per-class shift-of-origin runs first and
/// the returned formula carries the rewritten constants.
pub fn analyze_formula(nnf: &Formula, preset: OptPreset, shift: bool) -> AnalysisResult {
    debug_assert!(nnf.is_nnf());
    let mut formula = nnf.clone();
    let mut atoms = crate::formula::collect_atoms(&formula);
    let mut offsets = None;

    if shift {
        let classes = partition_atoms(&atoms);
        let mut all: BTreeMap<VarId, BigInt> = BTreeMap::new();
        for class in &classes {
            let class_atoms: Vec<LinearAtom> = class
                .atom_indices
                .iter()
                .map(|&i| atoms[i].clone())
                .collect();
            let outcome = shift_of_origin(&class_atoms, &class.vars);
            all.extend(outcome.offsets);
        }
        if all.values().any(|a| !a.is_zero()) {
            formula = apply_offsets(&formula, &all);
            atoms = crate::formula::collect_atoms(&formula);
        }
        offsets = Some(all);
    }

    let flags = preset.flags();
    let classes = partition_atoms(&atoms)
        .into_iter()
        .map(|class| {
            let params = class_parameters(&class, &atoms);
            let bound = compute_bound(&params, class.kind, flags);
            // the encoded range must cover the bound
            debug_assert!(
                VarDomain {
                    kind: bound.domain,
                    width: bound.bit_width
                }
                .max_magnitude()
                    >= bound.d
            );
            ClassReport {
                class,
                params,
                bound,
            }
        })
        .collect();

    AnalysisResult {
        formula,
        atoms,
        classes,
        offsets,
    }
}

/// Ackermannizes (or rejects) function applications, then normalizes. The
/// returned surface formula is the verification target for models.
pub fn prepare(
    f: &Formula,
    symbols: &SymbolTable,
    ackermann: bool,
) -> Result<(Formula, Formula, SymbolTable), SolveError> {
    let mut symbols = symbols.clone();
    let surface = if f.has_applications() {
        if !ackermann {
            return Err(SolveError::NeedsAckermann);
        }
        ackermannize(f, &mut symbols)?
    } else {
        f.clone()
    };
    let nnf = to_nnf(&normalize(&surface)?);
    Ok((surface, nnf, symbols))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Model),
    Unsat,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    pub analysis: AnalysisResult,
    /// Extended symbol table (fresh variables from function elimination).
    pub symbols: SymbolTable,
    /// Number of encode/solve rounds (1 in eager mode).
    pub stages: usize,
    /// CNF size of the last round.
    pub cnf_vars: usize,
    pub cnf_clauses: usize,
}

fn run_backend(cnf: &Cnf, backend: &Backend) -> Result<SatResult, SatError> {
    match backend {
        Backend::Embedded { conflict_limit } => solve_with_options(
            cnf,
            &SolverOptions {
                conflict_limit: *conflict_limit,
            },
        ),
        Backend::External(command) => solve_external(cnf, command),
    }
}

/// Decodes, undoes the shift, fills in variables the encoder never saw,
/// and verifies the model against the surface formula.
fn finish_model(
    assignment: &[bool],
    map: &crate::encoder::VarMap,
    analysis: &AnalysisResult,
    symbols: &SymbolTable,
    surface: &Formula,
) -> Result<Model, SolveError> {
    let decoded = decode_model(assignment, map)?;
    let mut model = Model::new();
    for (v, value) in decoded.iter() {
        let shift = analysis
            .offsets
            .as_ref()
            .and_then(|o| o.get(&v))
            .cloned()
            .unwrap_or_else(BigInt::zero);
        model.set(v, value - shift);
    }
    for v in symbols.var_ids() {
        if model.get(v).is_none() {
            model.set(v, BigInt::zero());
        }
    }
    if !evaluate(surface, &model)? {
        return Err(SolveError::Internal(
            "decoded model fails exact evaluation".to_string(),
        ));
    }
    Ok(model)
}

/// Decides `f` end to end under `config`.
pub fn solve_formula(
    f: &Formula,
    symbols: &SymbolTable,
    config: &SolveConfig,
) -> Result<SolveOutcome, SolveError> {
    let (surface, nnf, symbols) = prepare(f, symbols, config.ackermann)?;
    let analysis = analyze_formula(&nnf, config.preset, config.shift);
    let full = analysis.domains();

    // width schedule: eager solves at full width immediately
    let mut widths: BTreeMap<VarId, usize> = match config.mode {
        SolveMode::Eager => full.iter().map(|(v, d)| (*v, d.width)).collect(),
        SolveMode::Iterative => full.iter().map(|(v, d)| (*v, d.width.min(8))).collect(),
    };

    let mut stages = 0usize;
    loop {
        stages += 1;
        let domains: BTreeMap<VarId, VarDomain> = full
            .iter()
            .map(|(v, d)| {
                (
                    *v,
                    VarDomain {
                        kind: d.kind,
                        width: widths[v],
                    },
                )
            })
            .collect();
        let (cnf, map) = encode(&analysis.formula, &domains, &config.encode)?;
        let result = run_backend(&cnf, &config.backend)?;
        let at_full_width = full.iter().all(|(v, d)| widths[v] == d.width);
        match result {
            SatResult::Sat(assignment) => {
                // sound at any width; verification is still mandatory
                let model = finish_model(&assignment, &map, &analysis, &symbols, &surface)?;
                return Ok(SolveOutcome {
                    verdict: Verdict::Sat(model),
                    analysis,
                    symbols,
                    stages,
                    cnf_vars: cnf.num_vars,
                    cnf_clauses: cnf.clauses.len(),
                });
            }
            SatResult::Unsat if at_full_width => {
                return Ok(SolveOutcome {
                    verdict: Verdict::Unsat,
                    analysis,
                    symbols,
                    stages,
                    cnf_vars: cnf.num_vars,
                    cnf_clauses: cnf.clauses.len(),
                });
            }
            SatResult::Unsat => {
                for (v, d) in &full {
                    let w = widths.get_mut(v).unwrap();
                    *w = (*w * 2).min(d.width);
                }
            }
        }
    }
}

/// Convenience wrapper over a parsed script.
pub fn solve_script(script: &Script, config: &SolveConfig) -> Result<SolveOutcome, SolveError> {
    solve_formula(&script.formula, &script.symbols, config)
}

/// Analysis entry point for reporting (no solving).
pub fn analyze_script(
    script: &Script,
    preset: OptPreset,
    shift: bool,
    ackermann: bool,
) -> Result<(AnalysisResult, SymbolTable), SolveError> {
    let (_, nnf, symbols) = prepare(&script.formula, &script.symbols, ackermann)?;
    Ok((analyze_formula(&nnf, preset, shift), symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn solve_text(text: &str, config: &SolveConfig) -> SolveOutcome {
        let script = parse(text).unwrap();
        solve_script(&script, config).unwrap()
    }

    #[test]
    fn sat_formula_yields_verified_model() {
        let out = solve_text(
            "(declare-fun x () Int)(assert (>= x 3))(check-sat)",
            &SolveConfig::default(),
        );
        let Verdict::Sat(model) = &out.verdict else {
            panic!("expected sat");
        };
        assert!(model.get(VarId(0)).unwrap() >= &BigInt::from(3));
        assert_eq!(out.stages, 1);
    }

    #[test]
    fn contradictory_differences_are_unsat() {
        let out = solve_text(
            "(declare-fun x () Int)(declare-fun y () Int)\
             (assert (>= (- x y) 1))(assert (>= (- y x) 0))",
            &SolveConfig::default(),
        );
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn anchored_negative_solutions_are_found() {
        // satisfiable only at negative values
        let out = solve_text(
            "(declare-fun x () Int)(assert (<= x (- 5)))",
            &SolveConfig::default(),
        );
        let Verdict::Sat(model) = &out.verdict else {
            panic!("expected sat");
        };
        assert!(model.get(VarId(0)).unwrap() <= &BigInt::from(-5));
    }

    #[test]
    fn unused_declared_variables_default_to_zero() {
        let out = solve_text(
            "(declare-fun x () Int)(declare-fun unused () Int)(assert (>= x 0))",
            &SolveConfig::default(),
        );
        let Verdict::Sat(model) = &out.verdict else {
            panic!("expected sat");
        };
        assert_eq!(model.get(VarId(1)).unwrap(), &BigInt::zero());
    }

    #[test]
    fn empty_assertions_are_trivially_sat() {
        let out = solve_text("(set-logic QF_LIA)(check-sat)", &SolveConfig::default());
        assert!(matches!(out.verdict, Verdict::Sat(_)));
        assert_eq!(out.cnf_vars, 0);
    }

    #[test]
    fn functions_require_the_ackermann_flag() {
        let script = parse(
            "(set-logic QF_UFLIA)(declare-fun f (Int) Int)(declare-fun x () Int)\
             (assert (>= (f x) 0))",
        )
        .unwrap();
        let err = solve_script(&script, &SolveConfig::default()).unwrap_err();
        assert!(matches!(err, SolveError::NeedsAckermann));

        let config = SolveConfig {
            ackermann: true,
            ..SolveConfig::default()
        };
        let out = solve_script(&script, &config).unwrap();
        assert!(matches!(out.verdict, Verdict::Sat(_)));
    }

    #[test]
    fn ackermann_congruence_forces_unsat() {
        // x = y but f(x) != f(y)
        let script = parse(
            "(set-logic QF_UFLIA)(declare-fun f (Int) Int)(declare-fun x () Int)\
             (declare-fun y () Int)(assert (= x y))(assert (not (= (f x) (f y))))",
        )
        .unwrap();
        let config = SolveConfig {
            ackermann: true,
            ..SolveConfig::default()
        };
        let out = solve_script(&script, &config).unwrap();
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn iterative_mode_concludes_early_on_small_models() {
        let config = SolveConfig {
            mode: SolveMode::Iterative,
            ..SolveConfig::default()
        };
        // a large-width class with a tiny model
        let out = solve_text(
            "(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)\
             (assert (>= (+ (* 3 x) (* 2 y) z) 7))(check-sat)",
            &config,
        );
        assert!(matches!(out.verdict, Verdict::Sat(_)));
        assert_eq!(out.stages, 1, "8-bit first stage should suffice");
    }

    #[test]
    fn iterative_mode_reaches_full_width_on_unsat() {
        let config = SolveConfig {
            mode: SolveMode::Iterative,
            ..SolveConfig::default()
        };
        let eager = SolveConfig::default();
        let text = "(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)\
             (assert (>= (+ (* 3 x) (* 2 y) z) 7))(assert (< (+ (* 3 x) (* 2 y) z) 7))";
        let a = solve_text(text, &config);
        let b = solve_text(text, &eager);
        assert_eq!(a.verdict, Verdict::Unsat);
        assert_eq!(b.verdict, Verdict::Unsat);
        assert!(a.stages > 1, "must walk the width schedule to full width");
    }

    #[test]
    fn shift_rewrites_constants_but_not_verdicts() {
        let text = "(declare-fun x () Int)(declare-fun y () Int)\
             (assert (>= (- x y) 1000000))(assert (>= y 0))";
        let base = solve_text(text, &SolveConfig::default());
        let shifted = solve_text(
            text,
            &SolveConfig {
                shift: true,
                ..SolveConfig::default()
            },
        );
        assert!(matches!(base.verdict, Verdict::Sat(_)));
        let Verdict::Sat(model) = &shifted.verdict else {
            panic!("expected sat");
        };
        // model maps back to the original coordinates
        assert!(
            model.get(VarId(0)).unwrap() - model.get(VarId(1)).unwrap()
                >= BigInt::from(1_000_000)
        );
        assert!(shifted.analysis.max_bit_width() < base.analysis.max_bit_width());
    }

    #[test]
    fn preset_widths_are_monotone() {
        let script = parse(
            "(declare-fun a () Int)(declare-fun b () Int)(declare-fun c () Int)\
             (assert (>= (+ (* 3 a) (* 2 b) c) 50))(assert (>= (- a b) 7))\
             (assert (>= (+ a (* 2 c)) (- 30)))",
        )
        .unwrap();
        let widths = |preset: OptPreset| {
            let (analysis, _) = analyze_script(&script, preset, false, false).unwrap();
            analysis.class_widths()
        };
        let base = widths(OptPreset::Base);
        let coeff = widths(OptPreset::Coeff);
        let all = widths(OptPreset::All);
        for ((b, c), a) in base.iter().zip(&coeff).zip(&all) {
            assert!(c <= b);
            assert!(a <= c);
        }
    }
}
