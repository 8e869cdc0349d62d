//! Benchmark formula generation. [`generate`] plants exact counts of
//! difference and non-difference atoms under a random and/or skeleton and
//! renders them as an SMT-LIB script (byte-identical for identical seeds).
//! The `random_*` samplers produce small surface formulas for the test
//! suites.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{
    write_script, Formula, LinExpr, LinearAtom, Rel, SymbolTable, TermBase, VarId,
};

#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    /// Number of declared variables.
    pub vars: usize,
    /// Exact number of distinct atoms.
    pub atoms: usize,
    /// Exact number of non-difference atoms among them.
    pub non_diff: usize,
    /// Maximum width of a non-difference atom; the first one is planted at
    /// exactly this width. Requires `3 <= width <= vars` when `non_diff > 0`.
    pub width: usize,
    /// Maximum absolute coefficient in non-difference atoms (`>= 1`).
    pub max_coeff: u64,
    /// Maximum absolute constant term (`>= 0`).
    pub max_const: u64,
    /// Depth of the random and/or skeleton above the atoms.
    pub depth: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
}

fn check(params: &GenParams) -> Result<(), GenError> {
    if params.vars == 0 {
        return Err(GenError::Infeasible("need at least one variable".into()));
    }
    if params.atoms == 0 {
        return Err(GenError::Infeasible("need at least one atom".into()));
    }
    if params.non_diff > params.atoms {
        return Err(GenError::Infeasible(format!(
            "non-difference count {} exceeds atom count {}",
            params.non_diff, params.atoms
        )));
    }
    if params.non_diff > 0 {
        if params.width < 3 {
            return Err(GenError::Infeasible(
                "non-difference atoms need width >= 3".into(),
            ));
        }
        if params.width > params.vars {
            return Err(GenError::Infeasible(format!(
                "width {} exceeds variable count {}",
                params.width, params.vars
            )));
        }
        if params.max_coeff == 0 {
            return Err(GenError::Infeasible("max coefficient must be >= 1".into()));
        }
    }
    Ok(())
}

fn distinct_vars<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<u32> {
    let mut all: Vec<u32> = (0..n as u32).collect();
    // partial_shuffle returns the chosen sample as its first component
    let (chosen, _) = all.partial_shuffle(rng, count);
    let mut vars = chosen.to_vec();
    vars.sort_unstable();
    vars
}

fn signed_unit(rng: &mut ChaCha8Rng) -> i64 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

fn gen_atom(
    rng: &mut ChaCha8Rng,
    params: &GenParams,
    non_diff: bool,
    planted_width: Option<usize>,
) -> LinearAtom {
    let bound =
        BigInt::from(rng.gen_range(-(params.max_const as i64)..=params.max_const as i64));
    if non_diff {
        let width = planted_width.unwrap_or_else(|| rng.gen_range(3..=params.width));
        let vars = distinct_vars(rng, params.vars, width);
        let coeffs = vars
            .into_iter()
            .map(|v| {
                let magnitude = rng.gen_range(1..=params.max_coeff as i64);
                (VarId(v), BigInt::from(magnitude * signed_unit(rng)))
            })
            .collect();
        LinearAtom { coeffs, bound }
    } else if params.vars >= 2 && rng.gen_bool(0.8) {
        // x_i - x_j >= b
        let vars = distinct_vars(rng, params.vars, 2);
        let coeffs = [
            (VarId(vars[0]), BigInt::one()),
            (VarId(vars[1]), -BigInt::one()),
        ]
        .into_iter()
        .collect();
        LinearAtom { coeffs, bound }
    } else {
        // ±x_i >= b
        let v = rng.gen_range(0..params.vars as u32);
        let coeffs = [(VarId(v), BigInt::from(signed_unit(rng)))]
            .into_iter()
            .collect();
        LinearAtom { coeffs, bound }
    }
}

/// Random surface presentation of a stored atom, chosen so the emitted
/// constant stays within `max_const` and normalization reproduces the atom
/// exactly.
fn present(rng: &mut ChaCha8Rng, atom: &LinearAtom, max_const: i64) -> Formula {
    let expr = |negate: bool, constant: BigInt| -> LinExpr {
        LinExpr {
            terms: atom
                .coeffs
                .iter()
                .map(|(v, c)| (TermBase::Var(*v), if negate { -c } else { c.clone() }))
                .collect(),
            constant,
        }
    };
    let b = &atom.bound;
    let cap = BigInt::from(max_const.max(1));
    let mut options: Vec<u8> = vec![0, 1];
    if (b - 1u32).abs() <= cap {
        options.push(2);
    }
    if (-b + 1u32).abs() <= cap {
        options.push(3);
    }
    match options.choose(rng).unwrap() {
        // lhs >= b
        0 => Formula::Pred(Rel::Ge, expr(false, -b)),
        // -lhs <= -b
        1 => Formula::Pred(Rel::Le, expr(true, b.clone())),
        // lhs > b - 1
        2 => Formula::Pred(Rel::Gt, expr(false, -(b - 1u32))),
        // -lhs < -b + 1
        _ => Formula::Pred(Rel::Lt, expr(true, b - 1u32)),
    }
}

fn skeleton(rng: &mut ChaCha8Rng, mut leaves: Vec<Formula>, depth: usize) -> Formula {
    if leaves.len() == 1 {
        return leaves.pop().unwrap();
    }
    if depth == 0 {
        return if rng.gen_bool(0.8) {
            Formula::And(leaves)
        } else {
            Formula::Or(leaves)
        };
    }
    let groups = rng.gen_range(2..=3usize.min(leaves.len()));
    let mut buckets: Vec<Vec<Formula>> = (0..groups).map(|_| Vec::new()).collect();
    for (i, leaf) in leaves.into_iter().enumerate() {
        if i < groups {
            buckets[i].push(leaf); // keeps every bucket nonempty
        } else {
            let b = rng.gen_range(0..groups);
            buckets[b].push(leaf);
        }
    }
    let children: Vec<Formula> = buckets
        .into_iter()
        .map(|b| skeleton(rng, b, depth - 1))
        .collect();
    if rng.gen_bool(0.6) {
        Formula::And(children)
    } else {
        Formula::Or(children)
    }
}

/// Builds the surface formula and symbol table for `params`.
pub fn generate_formula(
    params: &GenParams,
    seed: u64,
) -> Result<(Formula, SymbolTable), GenError> {
    check(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols = SymbolTable::new();
    for i in 1..=params.vars {
        symbols.declare_var(&format!("x{i}"));
    }

    let mut seen: BTreeSet<LinearAtom> = BTreeSet::new();
    let mut atoms: Vec<LinearAtom> = Vec::with_capacity(params.atoms);
    let mut attempts = 0usize;
    let budget = 200 * params.atoms + 1000;
    for idx in 0..params.atoms {
        let non_diff = idx < params.non_diff;
        let planted = if idx == 0 && non_diff {
            Some(params.width)
        } else {
            None
        };
        loop {
            attempts += 1;
            if attempts > budget {
                return Err(GenError::Infeasible(
                    "cannot realize that many distinct atoms; enlarge the \
                     variable count or constant range"
                        .into(),
                ));
            }
            let atom = gen_atom(&mut rng, params, non_diff, planted);
            if seen.insert(atom.clone()) {
                atoms.push(atom);
                break;
            }
        }
    }

    let max_const = params.max_const as i64;
    let mut leaves: Vec<Formula> = atoms
        .iter()
        .map(|a| present(&mut rng, a, max_const))
        .collect();
    leaves.shuffle(&mut rng);
    let formula = skeleton(&mut rng, leaves, params.depth);
    Ok((formula, symbols))
}

/// Renders the generated formula as an SMT-LIB script with a one-line
/// parameter comment. Identical seeds yield byte-identical output.
pub fn generate(params: &GenParams, seed: u64) -> Result<String, GenError> {
    let (formula, symbols) = generate_formula(params, seed)?;
    let header = format!(
        "; generated: vars={} atoms={} non-diff={} width={} max-coeff={} max-const={} depth={} seed={}\n",
        params.vars,
        params.atoms,
        params.non_diff,
        params.width,
        params.max_coeff,
        params.max_const,
        params.depth,
        seed
    );
    Ok(header + &write_script(&formula, &symbols))
}

/// Shape of the random instances used by the differential test suites.
#[derive(Clone, Copy, Debug)]
pub struct SampleProfile {
    pub max_vars: usize,
    pub max_atoms: usize,
    pub max_coeff: i64,
    pub max_const: i64,
    pub max_depth: usize,
    /// Probability that an atom is non-difference.
    pub non_diff_prob: f64,
    /// Probability that a leaf is wrapped in a negation.
    pub negation_prob: f64,
}

impl Default for SampleProfile {
    fn default() -> Self {
        SampleProfile {
            max_vars: 4,
            max_atoms: 8,
            max_coeff: 3,
            max_const: 8,
            max_depth: 3,
            non_diff_prob: 0.25,
            negation_prob: 0.2,
        }
    }
}

fn sample_skeleton<R: Rng>(rng: &mut R, leaves: Vec<Formula>, depth: usize) -> Formula {
    let mut current = leaves;
    let mut level = 0;
    while current.len() > 1 && level < depth.max(1) {
        let mut next = Vec::new();
        let mut group = Vec::new();
        let target = rng.gen_range(2..=3usize);
        for leaf in current {
            group.push(leaf);
            if group.len() == target {
                next.push(if rng.gen_bool(0.6) {
                    Formula::And(std::mem::take(&mut group))
                } else {
                    Formula::Or(std::mem::take(&mut group))
                });
            }
        }
        if !group.is_empty() {
            if group.len() == 1 {
                next.push(group.pop().unwrap());
            } else if rng.gen_bool(0.6) {
                next.push(Formula::And(group));
            } else {
                next.push(Formula::Or(group));
            }
        }
        current = next;
        level += 1;
    }
    if current.len() == 1 {
        current.pop().unwrap()
    } else {
        Formula::And(current)
    }
}

fn rel_for<R: Rng>(rng: &mut R) -> Rel {
    match rng.gen_range(0..6) {
        0 => Rel::Eq,
        1 => Rel::Ne,
        2 => Rel::Lt,
        3 => Rel::Le,
        4 => Rel::Gt,
        _ => Rel::Ge,
    }
}

fn lin<R: Rng>(rng: &mut R, coeffs: &[(u32, i64)], max_const: i64) -> LinExpr {
    LinExpr {
        terms: coeffs
            .iter()
            .map(|&(v, c)| (TermBase::Var(VarId(v)), BigInt::from(c)))
            .collect(),
        constant: BigInt::from(rng.gen_range(-max_const..=max_const)),
    }
}

/// Random surface formula with mixed relations and negations, suitable for
/// oracle-differential testing.
pub fn random_surface_formula<R: Rng>(
    rng: &mut R,
    profile: &SampleProfile,
) -> (Formula, SymbolTable) {
    let n = rng.gen_range(1..=profile.max_vars);
    let mut symbols = SymbolTable::new();
    for i in 1..=n {
        symbols.declare_var(&format!("x{i}"));
    }
    let m = rng.gen_range(1..=profile.max_atoms);
    let mut leaves = Vec::with_capacity(m);
    for _ in 0..m {
        let non_diff = n >= 2 && rng.gen_bool(profile.non_diff_prob);
        let coeffs: Vec<(u32, i64)> = if non_diff {
            let width = rng.gen_range(2..=n.min(4));
            distinct_vars(rng, n, width)
                .into_iter()
                .map(|v| {
                    let mag = rng.gen_range(1..=profile.max_coeff);
                    (v, if rng.gen_bool(0.5) { mag } else { -mag })
                })
                .collect()
        } else if n >= 2 && rng.gen_bool(0.7) {
            let vars = distinct_vars(rng, n, 2);
            vec![(vars[0], 1), (vars[1], -1)]
        } else {
            let v = rng.gen_range(0..n as u32);
            vec![(v, if rng.gen_bool(0.5) { 1 } else { -1 })]
        };
        let mut leaf = Formula::Pred(rel_for(rng), lin(rng, &coeffs, profile.max_const));
        if rng.gen_bool(profile.negation_prob) {
            leaf = Formula::not(leaf);
        }
        leaves.push(leaf);
    }
    let depth = rng.gen_range(0..=profile.max_depth);
    (sample_skeleton(rng, leaves, depth), symbols)
}

/// Random pure difference-logic formula (unit coefficients, one or two
/// variables per atom, negations allowed).
pub fn random_difference_formula<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    max_atoms: usize,
    max_const: i64,
    max_depth: usize,
) -> (Formula, SymbolTable) {
    let profile = SampleProfile {
        max_vars,
        max_atoms,
        max_coeff: 1,
        max_const,
        max_depth,
        non_diff_prob: 0.0,
        negation_prob: 0.25,
    };
    random_surface_formula(rng, &profile)
}

/// Random equality-logic formula: positive boolean combinations of
/// `x_i = x_j`.
pub fn random_equality_formula<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    max_atoms: usize,
    max_depth: usize,
) -> (Formula, SymbolTable) {
    let n = rng.gen_range(2..=max_vars.max(2));
    let mut symbols = SymbolTable::new();
    for i in 1..=n {
        symbols.declare_var(&format!("x{i}"));
    }
    let m = rng.gen_range(1..=max_atoms);
    let mut leaves = Vec::with_capacity(m);
    for _ in 0..m {
        let vars = distinct_vars(rng, n, 2);
        let expr = LinExpr {
            terms: [
                (TermBase::Var(VarId(vars[0])), BigInt::one()),
                (TermBase::Var(VarId(vars[1])), -BigInt::one()),
            ]
            .into_iter()
            .collect(),
            constant: BigInt::zero(),
        };
        leaves.push(Formula::Pred(Rel::Eq, expr));
    }
    let depth = rng.gen_range(0..=max_depth);
    (sample_skeleton(rng, leaves, depth), symbols)
}
