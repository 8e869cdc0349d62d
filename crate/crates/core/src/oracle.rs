//! Brute-force reference semantics: exhaustive enumeration of bounded
//! integer domains with exact evaluation. This is correctness scaffolding
//! for the rest of the crate, not a solver; the configuration count is
//! capped and exceeding the cap is an error, never a silent truncation.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::formula::{Formula, LinearAtom, Model, VarId};

/// Hard cap on the number of configurations the oracle will enumerate.
pub const SPACE_GUARD: u64 = 10_000_000;

/// Per-variable closed intervals `[lo, hi]`.
#[derive(Clone, Debug, Default)]
pub struct SearchSpace {
    pub ranges: BTreeMap<VarId, (BigInt, BigInt)>,
}

impl SearchSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: VarId, lo: BigInt, hi: BigInt) {
        debug_assert!(lo <= hi);
        self.ranges.insert(v, (lo, hi));
    }

    /// Hypercube `[-r, r]` over `vars`.
    pub fn cube(vars: impl IntoIterator<Item = VarId>, radius: u64) -> Self {
        let r = BigInt::from(radius);
        let mut space = SearchSpace::new();
        for v in vars {
            space.set(v, -&r, r.clone());
        }
        space
    }

    /// Same intervals with both endpoints scaled by `factor`.
    pub fn scaled(&self, factor: u32) -> Self {
        let f = BigInt::from(factor);
        SearchSpace {
            ranges: self
                .ranges
                .iter()
                .map(|(v, (lo, hi))| (*v, (lo * &f, hi * &f)))
                .collect(),
        }
    }

    /// Total number of configurations.
    pub fn config_count(&self) -> BigUint {
        let mut total = BigUint::one();
        for (lo, hi) in self.ranges.values() {
            let span = (hi - lo + 1u32)
                .to_biguint()
                .expect("nonempty interval");
            total *= span;
        }
        total
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space has {0} configurations, over the {SPACE_GUARD} guard")]
    SpaceTooLarge(BigUint),
    #[error("variable v{0} has no interval in the search space")]
    UnboundVariable(u32),
    #[error("oracle requires a normalized formula")]
    NotNormalized,
}

/// Formula compiled to atom indices for fast repeated evaluation.
enum Node {
    Const(bool),
    Atom(usize),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Box<Node>),
}

fn compile(f: &Formula, atoms: &mut Vec<LinearAtom>) -> Result<Node, OracleError> {
    Ok(match f {
        Formula::Const(b) => Node::Const(*b),
        Formula::Atom(a) => {
            let idx = match atoms.iter().position(|x| x == a) {
                Some(idx) => idx,
                None => {
                    atoms.push(a.clone());
                    atoms.len() - 1
                }
            };
            Node::Atom(idx)
        }
        Formula::Pred(..) => return Err(OracleError::NotNormalized),
        Formula::And(cs) => Node::And(
            cs.iter()
                .map(|c| compile(c, atoms))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(cs) => Node::Or(
            cs.iter()
                .map(|c| compile(c, atoms))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Not(inner) => Node::Not(Box::new(compile(inner, atoms)?)),
    })
}

fn eval_node(node: &Node, truth: &[bool]) -> bool {
    match node {
        Node::Const(b) => *b,
        Node::Atom(i) => truth[*i],
        Node::And(cs) => cs.iter().all(|c| eval_node(c, truth)),
        Node::Or(cs) => cs.iter().any(|c| eval_node(c, truth)),
        Node::Not(inner) => !eval_node(inner, truth),
    }
}

/// Atom lowered onto the enumeration variable order, in i64 when the whole
/// interval arithmetic provably fits.
struct SmallAtom {
    terms: Vec<(usize, i64)>,
    bound: i64,
}

struct BigAtom {
    terms: Vec<(usize, BigInt)>,
    bound: BigInt,
}

enum Lowered {
    Small(Vec<SmallAtom>),
    Big(Vec<BigAtom>),
}

fn lower_atoms(
    atoms: &[LinearAtom],
    order: &[VarId],
    ranges: &[(BigInt, BigInt)],
) -> Result<Lowered, OracleError> {
    let slot: BTreeMap<VarId, usize> = order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut big = Vec::with_capacity(atoms.len());
    for atom in atoms {
        let mut terms = Vec::with_capacity(atom.coeffs.len());
        for (v, c) in &atom.coeffs {
            let idx = *slot.get(v).ok_or(OracleError::UnboundVariable(v.0))?;
            terms.push((idx, c.clone()));
        }
        big.push(BigAtom {
            terms,
            bound: atom.bound.clone(),
        });
    }

    // i64 fast path when no intermediate sum can overflow
    let limit = BigInt::from(i64::MAX / 4);
    let mut small = Vec::with_capacity(big.len());
    for atom in &big {
        let mut reach = atom.bound.abs();
        for (idx, c) in &atom.terms {
            let (lo, hi) = &ranges[*idx];
            reach += c.abs() * lo.abs().max(hi.abs());
        }
        if reach > limit {
            return Ok(Lowered::Big(big));
        }
        small.push(SmallAtom {
            terms: atom
                .terms
                .iter()
                .map(|(i, c)| (*i, c.to_i64().expect("coefficient within i64")))
                .collect(),
            bound: atom.bound.to_i64().expect("bound within i64"),
        });
    }
    Ok(Lowered::Small(small))
}

fn guard(space: &SearchSpace) -> Result<(), OracleError> {
    let count = space.config_count();
    if count > BigUint::from(SPACE_GUARD) {
        return Err(OracleError::SpaceTooLarge(count));
    }
    Ok(())
}

/// Lexicographically first model of `f` in `space` (variables ascending by
/// id, values ascending), or `None`. `f` must be normalized and its
/// variables covered by the space.
pub fn brute_force_solve(
    f: &Formula,
    space: &SearchSpace,
) -> Result<Option<Model>, OracleError> {
    guard(space)?;
    let mut atoms = Vec::new();
    let skeleton = compile(f, &mut atoms)?;
    for v in f.vars() {
        if !space.ranges.contains_key(&v) {
            return Err(OracleError::UnboundVariable(v.0));
        }
    }

    let order: Vec<VarId> = space.ranges.keys().copied().collect();
    let ranges: Vec<(BigInt, BigInt)> = space.ranges.values().cloned().collect();
    let lowered = lower_atoms(&atoms, &order, &ranges)?;

    match lowered {
        Lowered::Small(atoms_small) => {
            let lo: Vec<i64> = ranges
                .iter()
                .map(|(lo, _)| lo.to_i64().expect("small range"))
                .collect();
            let hi: Vec<i64> = ranges
                .iter()
                .map(|(_, hi)| hi.to_i64().expect("small range"))
                .collect();
            let mut values = lo.clone();
            let mut truth = vec![false; atoms_small.len()];
            loop {
                for (i, atom) in atoms_small.iter().enumerate() {
                    let mut sum = 0i64;
                    for (idx, c) in &atom.terms {
                        sum += c * values[*idx];
                    }
                    truth[i] = sum >= atom.bound;
                }
                if eval_node(&skeleton, &truth) {
                    let model = order
                        .iter()
                        .zip(&values)
                        .map(|(v, x)| (*v, BigInt::from(*x)))
                        .collect();
                    return Ok(Some(model));
                }
                // odometer: last variable fastest, giving lexicographic order
                let mut pos = values.len();
                loop {
                    if pos == 0 {
                        return Ok(None);
                    }
                    pos -= 1;
                    if values[pos] < hi[pos] {
                        values[pos] += 1;
                        break;
                    }
                    values[pos] = lo[pos];
                }
            }
        }
        Lowered::Big(atoms_big) => {
            let mut values: Vec<BigInt> = ranges.iter().map(|(lo, _)| lo.clone()).collect();
            let mut truth = vec![false; atoms_big.len()];
            loop {
                for (i, atom) in atoms_big.iter().enumerate() {
                    let mut sum = BigInt::zero();
                    for (idx, c) in &atom.terms {
                        sum += c * &values[*idx];
                    }
                    truth[i] = sum >= atom.bound;
                }
                if eval_node(&skeleton, &truth) {
                    let model = order.iter().zip(&values).map(|(v, x)| (*v, x.clone())).collect();
                    return Ok(Some(model));
                }
                let mut pos = values.len();
                loop {
                    if pos == 0 {
                        return Ok(None);
                    }
                    pos -= 1;
                    if values[pos] < ranges[pos].1 {
                        values[pos] += 1;
                        break;
                    }
                    values[pos] = ranges[pos].0.clone();
                }
            }
        }
    }
}

/// Smallest radius `r <= max_radius` such that `f` has a model in
/// `[-r, r]^n`, or `None`. The guard is checked at `max_radius`.
pub fn minimal_model_radius(
    f: &Formula,
    max_radius: u64,
) -> Result<Option<u64>, OracleError> {
    let vars = f.vars();
    guard(&SearchSpace::cube(vars.iter().copied(), max_radius))?;
    for r in 0..=max_radius {
        let space = SearchSpace::cube(vars.iter().copied(), r);
        if brute_force_solve(f, &space)?.is_some() {
            return Ok(Some(r));
        }
    }
    Ok(None)
}
