//! Formula representation and the operations that bring a parsed formula
//! into the shape the analysis and encoder stages expect: every relation
//! rewritten to `>=`, negations pushed into atoms, functions eliminated.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

mod ackermann;
mod parser;
mod print;

pub use ackermann::{ackermannize, AckermannError};
pub use parser::{parse, ParseError, Script};
pub use print::write_script;

/// Integer variable identifier, dense within one [`SymbolTable`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

/// Uninterpreted function identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FunId(pub u32);

/// Names for variables and uninterpreted functions.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    vars: Vec<String>,
    var_ids: HashMap<String, VarId>,
    funs: Vec<(String, usize)>,
    fun_ids: HashMap<String, FunId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable; returns `None` if the name is already taken.
    pub fn declare_var(&mut self, name: &str) -> Option<VarId> {
        if self.var_ids.contains_key(name) || self.fun_ids.contains_key(name) {
            return None;
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(name.to_string());
        self.var_ids.insert(name.to_string(), id);
        Some(id)
    }

    /// Declares an uninterpreted function of the given arity (`arity >= 1`).
    pub fn declare_fun(&mut self, name: &str, arity: usize) -> Option<FunId> {
        if self.var_ids.contains_key(name) || self.fun_ids.contains_key(name) {
            return None;
        }
        let id = FunId(self.funs.len() as u32);
        self.funs.push((name.to_string(), arity));
        self.fun_ids.insert(name.to_string(), id);
        Some(id)
    }

    /// Allocates a variable named after `base`, uniquified if necessary.
    pub fn fresh_var(&mut self, base: &str) -> VarId {
        if let Some(id) = self.declare_var(base) {
            return id;
        }
        let mut i = 0usize;
        loop {
            let candidate = format!("{base}!{i}");
            if let Some(id) = self.declare_var(&candidate) {
                return id;
            }
            i += 1;
        }
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_ids.get(name).copied()
    }

    pub fn fun(&self, name: &str) -> Option<FunId> {
        self.fun_ids.get(name).copied()
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.vars[id.0 as usize]
    }

    pub fn fun_name(&self, id: FunId) -> &str {
        &self.funs[id.0 as usize].0
    }

    pub fn fun_arity(&self, id: FunId) -> usize {
        self.funs[id.0 as usize].1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_funs(&self) -> usize {
        self.funs.len()
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len()).map(|i| VarId(i as u32))
    }
}

/// An uninterpreted function application. Arguments are integer terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FunApp {
    pub fun: FunId,
    pub args: Vec<LinExpr>,
}

/// Base of a linear term: a variable or a function application.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TermBase {
    Var(VarId),
    App(FunApp),
}

/// A linear integer expression: sum of `coeff * base` plus a constant.
/// Coefficients are nonzero; like bases are merged.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LinExpr {
    pub terms: BTreeMap<TermBase, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn constant(c: BigInt) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(TermBase::Var(v), BigInt::one());
        LinExpr {
            terms,
            constant: BigInt::zero(),
        }
    }

    pub fn app(app: FunApp) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(TermBase::App(app), BigInt::one());
        LinExpr {
            terms,
            constant: BigInt::zero(),
        }
    }

    pub fn add_term(&mut self, base: TermBase, coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(base.clone()).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&base);
        }
    }

    pub fn add(&mut self, other: &LinExpr) {
        for (base, coeff) in &other.terms {
            self.add_term(base.clone(), coeff);
        }
        self.constant += &other.constant;
    }

    pub fn sub(&mut self, other: &LinExpr) {
        for (base, coeff) in &other.terms {
            self.add_term(base.clone(), &(-coeff));
        }
        self.constant -= &other.constant;
    }

    pub fn negate(&mut self) {
        for coeff in self.terms.values_mut() {
            *coeff = -&*coeff;
        }
        self.constant = -&self.constant;
    }

    pub fn scale(&mut self, factor: &BigInt) {
        if factor.is_zero() {
            self.terms.clear();
            self.constant = BigInt::zero();
            return;
        }
        for coeff in self.terms.values_mut() {
            *coeff *= factor;
        }
        self.constant *= factor;
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_applications(&self) -> bool {
        // nested applications are always rooted at an App base
        self.terms
            .keys()
            .any(|base| matches!(base, TermBase::App(_)))
    }
}

/// Relation of a surface (pre-normalization) atom over `expr ⋈ 0`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// A normalized linear constraint `Σ coeffs[v]·v >= bound` with nonzero
/// integer coefficients and at least one variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearAtom {
    pub coeffs: BTreeMap<VarId, BigInt>,
    pub bound: BigInt,
}

impl LinearAtom {
    /// Number of variables with a nonzero coefficient.
    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{a}*")?;
            }
            write!(f, "x{}", v.0)?;
            first = false;
        }
        write!(f, " >= {}", self.bound)
    }
}

/// Boolean AST over linear constraints. `Pred` nodes belong to the surface
/// layer and disappear after [`normalize`]; `Not` disappears after
/// [`to_nnf`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    Const(bool),
    Atom(LinearAtom),
    Pred(Rel, LinExpr),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    /// Conjunction with eager constant folding.
    pub fn and(children: Vec<Formula>) -> Formula {
        let mut kept = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Formula::Const(true) => {}
                Formula::Const(false) => return Formula::Const(false),
                other => kept.push(other),
            }
        }
        match kept.len() {
            0 => Formula::Const(true),
            1 => kept.pop().unwrap(),
            _ => Formula::And(kept),
        }
    }

    /// Disjunction with eager constant folding.
    pub fn or(children: Vec<Formula>) -> Formula {
        let mut kept = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Formula::Const(false) => {}
                Formula::Const(true) => return Formula::Const(true),
                other => kept.push(other),
            }
        }
        match kept.len() {
            0 => Formula::Const(false),
            1 => kept.pop().unwrap(),
            _ => Formula::Or(kept),
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Const(b) => Formula::Const(!b),
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Variables occurring in atoms or surface predicates (including
    /// variables nested inside function-application arguments).
    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(a) => out.extend(a.coeffs.keys().copied()),
            Formula::Pred(_, e) => collect_expr_vars(e, out),
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.collect_vars(out);
                }
            }
            Formula::Not(inner) => inner.collect_vars(out),
        }
    }

    pub fn has_applications(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Atom(_) => false,
            Formula::Pred(_, e) => e.has_applications(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().any(|c| c.has_applications()),
            Formula::Not(inner) => inner.has_applications(),
        }
    }

    /// True when only `{And, Or, Not, Atom, Const}` nodes appear.
    pub fn is_normalized(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Atom(_) => true,
            Formula::Pred(..) => false,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().all(|c| c.is_normalized()),
            Formula::Not(inner) => inner.is_normalized(),
        }
    }

    /// True when the formula is normalized and free of `Not` nodes.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Atom(_) => true,
            Formula::Pred(..) | Formula::Not(_) => false,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().all(|c| c.is_nnf()),
        }
    }
}

fn collect_expr_vars(e: &LinExpr, out: &mut BTreeSet<VarId>) {
    for base in e.terms.keys() {
        match base {
            TermBase::Var(v) => {
                out.insert(*v);
            }
            TermBase::App(app) => {
                for arg in &app.args {
                    collect_expr_vars(arg, out);
                }
            }
        }
    }
}

/// Distinct normalized atoms in first-occurrence order.
pub fn collect_atoms(f: &Formula) -> Vec<LinearAtom> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    fn walk(f: &Formula, seen: &mut BTreeSet<LinearAtom>, out: &mut Vec<LinearAtom>) {
        match f {
            Formula::Const(_) | Formula::Pred(..) => {}
            Formula::Atom(a) => {
                if seen.insert(a.clone()) {
                    out.push(a.clone());
                }
            }
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    walk(c, seen, out);
                }
            }
            Formula::Not(inner) => walk(inner, seen, out),
        }
    }
    walk(f, &mut seen, &mut out);
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("formula contains uninterpreted function applications; eliminate them first")]
    ApplicationsPresent,
}

/// Builds an atom `lin >= bound`, folding the ground case to a constant.
fn atom_or_const(lin: BTreeMap<VarId, BigInt>, bound: BigInt) -> Formula {
    if lin.is_empty() {
        Formula::Const(BigInt::zero() >= bound)
    } else {
        Formula::Atom(LinearAtom { coeffs: lin, bound })
    }
}

fn split_expr(e: &LinExpr) -> Result<(BTreeMap<VarId, BigInt>, BigInt), NormalizeError> {
    let mut lin = BTreeMap::new();
    for (base, coeff) in &e.terms {
        match base {
            TermBase::Var(v) => {
                lin.insert(*v, coeff.clone());
            }
            TermBase::App(_) => return Err(NormalizeError::ApplicationsPresent),
        }
    }
    Ok((lin, e.constant.clone()))
}

fn negated(lin: &BTreeMap<VarId, BigInt>) -> BTreeMap<VarId, BigInt> {
    lin.iter().map(|(v, c)| (*v, -c)).collect()
}

/// Rewrites every surface relation to `>=` atoms using integer semantics
/// and folds ground atoms to boolean constants. For `expr ⋈ 0` with
/// `expr = lin + c`:
///
/// - `>=` becomes `lin >= -c`, `>` becomes `lin >= -c + 1`,
/// - `<=` becomes `-lin >= c`, `<` becomes `-lin >= c + 1`,
/// - `=` splits into the conjunction of both `>=` directions,
/// - `!=` splits into the disjunction of both strict directions.
pub fn normalize(f: &Formula) -> Result<Formula, NormalizeError> {
    Ok(match f {
        Formula::Const(b) => Formula::Const(*b),
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Pred(rel, e) => {
            let (lin, c) = split_expr(e)?;
            let one = BigInt::one();
            match rel {
                Rel::Ge => atom_or_const(lin, -&c),
                Rel::Gt => atom_or_const(lin, -&c + &one),
                Rel::Le => {
                    let neg = negated(&lin);
                    atom_or_const(neg, c)
                }
                Rel::Lt => {
                    let neg = negated(&lin);
                    atom_or_const(neg, &c + &one)
                }
                Rel::Eq => {
                    let neg = negated(&lin);
                    Formula::and(vec![atom_or_const(lin, -&c), atom_or_const(neg, c)])
                }
                Rel::Ne => {
                    let neg = negated(&lin);
                    Formula::or(vec![
                        atom_or_const(lin, -&c + &one),
                        atom_or_const(neg, &c + &one),
                    ])
                }
            }
        }
        Formula::And(cs) => Formula::and(
            cs.iter()
                .map(normalize)
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Formula::Or(cs) => Formula::or(
            cs.iter()
                .map(normalize)
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Formula::Not(inner) => Formula::not(normalize(inner)?),
    })
}

/// The atom satisfied by exactly the integer points violating `a`:
/// all coefficients negated, bound `-b + 1`.
pub fn negate_atom(a: &LinearAtom) -> LinearAtom {
    LinearAtom {
        coeffs: a.coeffs.iter().map(|(v, c)| (*v, -c)).collect(),
        bound: -&a.bound + BigInt::one(),
    }
}

/// Pushes negations down to atoms by De Morgan's laws and eliminates them
/// with [`negate_atom`]. The input must be normalized.
pub fn to_nnf(f: &Formula) -> Formula {
    fn walk(f: &Formula, positive: bool) -> Formula {
        match f {
            Formula::Const(b) => Formula::Const(*b == positive),
            Formula::Atom(a) => {
                if positive {
                    Formula::Atom(a.clone())
                } else {
                    Formula::Atom(negate_atom(a))
                }
            }
            Formula::Pred(..) => unreachable!("to_nnf requires a normalized formula"),
            Formula::And(cs) => {
                let children = cs.iter().map(|c| walk(c, positive)).collect();
                if positive {
                    Formula::and(children)
                } else {
                    Formula::or(children)
                }
            }
            Formula::Or(cs) => {
                let children = cs.iter().map(|c| walk(c, positive)).collect();
                if positive {
                    Formula::or(children)
                } else {
                    Formula::and(children)
                }
            }
            Formula::Not(inner) => walk(inner, !positive),
        }
    }
    walk(f, true)
}

/// Total integer assignment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    values: BTreeMap<VarId, BigInt>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: VarId, value: BigInt) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: VarId) -> Option<&BigInt> {
        self.values.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &BigInt)> {
        self.values.iter().map(|(v, x)| (*v, x))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(VarId, BigInt)> for Model {
    fn from_iter<T: IntoIterator<Item = (VarId, BigInt)>>(iter: T) -> Self {
        Model {
            values: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable v{0} is not bound by the model")]
    UnboundVariable(u32),
    #[error("cannot evaluate an uninterpreted function application")]
    UninterpretedFunction,
}

fn eval_expr(e: &LinExpr, m: &Model) -> Result<BigInt, EvalError> {
    let mut acc = e.constant.clone();
    for (base, coeff) in &e.terms {
        match base {
            TermBase::Var(v) => {
                let x = m.get(*v).ok_or(EvalError::UnboundVariable(v.0))?;
                acc += coeff * x;
            }
            TermBase::App(_) => return Err(EvalError::UninterpretedFunction),
        }
    }
    Ok(acc)
}

/// Truth value of `f` under `m`, with exact integer arithmetic. Both
/// surface and normalized formulas are supported, as long as no function
/// applications remain.
pub fn evaluate(f: &Formula, m: &Model) -> Result<bool, EvalError> {
    match f {
        Formula::Const(b) => Ok(*b),
        Formula::Atom(a) => {
            let mut acc = BigInt::zero();
            for (v, coeff) in &a.coeffs {
                let x = m.get(*v).ok_or(EvalError::UnboundVariable(v.0))?;
                acc += coeff * x;
            }
            Ok(acc >= a.bound)
        }
        Formula::Pred(rel, e) => {
            let value = eval_expr(e, m)?;
            let zero = BigInt::zero();
            Ok(match rel {
                Rel::Eq => value == zero,
                Rel::Ne => value != zero,
                Rel::Lt => value < zero,
                Rel::Le => value <= zero,
                Rel::Gt => value > zero,
                Rel::Ge => value >= zero,
            })
        }
        Formula::And(cs) => {
            for c in cs {
                if !evaluate(c, m)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(cs) => {
            for c in cs {
                if evaluate(c, m)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Not(inner) => Ok(!evaluate(inner, m)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: u32) -> VarId {
        VarId(i)
    }

    fn atom(coeffs: &[(u32, i64)], bound: i64) -> LinearAtom {
        LinearAtom {
            coeffs: coeffs
                .iter()
                .map(|&(v, c)| (var(v), BigInt::from(c)))
                .collect(),
            bound: BigInt::from(bound),
        }
    }

    fn model(vals: &[(u32, i64)]) -> Model {
        vals.iter()
            .map(|&(v, x)| (var(v), BigInt::from(x)))
            .collect()
    }

    #[test]
    fn normalize_le_flips_signs() {
        // x + y <= 7  ~>  -x - y >= -7
        let mut e = LinExpr::var(var(0));
        e.add(&LinExpr::var(var(1)));
        e.constant = BigInt::from(-7);
        let f = Formula::Pred(Rel::Le, e);
        let n = normalize(&f).unwrap();
        assert_eq!(n, Formula::Atom(atom(&[(0, -1), (1, -1)], -7)));
    }

    #[test]
    fn normalize_eq_splits() {
        // x = 3  ~>  (x >= 3) and (-x >= -3)
        let mut e = LinExpr::var(var(0));
        e.constant = BigInt::from(-3);
        let f = Formula::Pred(Rel::Eq, e);
        let n = normalize(&f).unwrap();
        assert_eq!(
            n,
            Formula::And(vec![
                Formula::Atom(atom(&[(0, 1)], 3)),
                Formula::Atom(atom(&[(0, -1)], -3)),
            ])
        );
    }

    #[test]
    fn normalize_folds_ground_atoms() {
        // 2 >= 5 is just false
        let f = Formula::Pred(Rel::Ge, LinExpr::constant(BigInt::from(-3)));
        assert_eq!(normalize(&f).unwrap(), Formula::Const(false));
    }

    #[test]
    fn negate_atom_examples() {
        // not(x - y >= 5)  ~>  y - x >= -4
        let a = atom(&[(0, 1), (1, -1)], 5);
        assert_eq!(negate_atom(&a), atom(&[(0, -1), (1, 1)], -4));
        // involution
        assert_eq!(negate_atom(&negate_atom(&a)), a);
        // not(3x + 2y >= 0)  ~>  -3x - 2y >= 1
        let b = atom(&[(0, 3), (1, 2)], 0);
        assert_eq!(negate_atom(&b), atom(&[(0, -3), (1, -2)], 1));
    }

    #[test]
    fn nnf_de_morgan() {
        // not(x >= 1 or y >= 1)  ~>  (-x >= 0) and (-y >= 0)
        let f = Formula::not(Formula::Or(vec![
            Formula::Atom(atom(&[(0, 1)], 1)),
            Formula::Atom(atom(&[(1, 1)], 1)),
        ]));
        let n = to_nnf(&f);
        assert_eq!(
            n,
            Formula::And(vec![
                Formula::Atom(atom(&[(0, -1)], 0)),
                Formula::Atom(atom(&[(1, -1)], 0)),
            ])
        );
        assert!(n.is_nnf());
    }

    #[test]
    fn nnf_identity_on_nnf_input() {
        let f = Formula::And(vec![
            Formula::Atom(atom(&[(0, 1)], 0)),
            Formula::Or(vec![
                Formula::Atom(atom(&[(1, 1)], 2)),
                Formula::Atom(atom(&[(0, -1)], -4)),
            ]),
        ]);
        assert_eq!(to_nnf(&f), f);
    }

    #[test]
    fn evaluate_atoms_and_constants() {
        let a = Formula::Atom(atom(&[(0, 1), (1, -1)], 5));
        assert!(evaluate(&a, &model(&[(0, 7), (1, 2)])).unwrap());
        assert!(!evaluate(&a, &model(&[(0, 7), (1, 3)])).unwrap());
        let f = Formula::And(vec![Formula::Const(true), Formula::Atom(atom(&[(0, 1)], 0))]);
        assert!(evaluate(&f, &model(&[(0, 0)])).unwrap());
        assert_eq!(
            evaluate(&a, &model(&[(0, 7)])),
            Err(EvalError::UnboundVariable(1))
        );
    }

    #[test]
    fn smart_constructors_fold() {
        assert_eq!(
            Formula::and(vec![Formula::Const(true), Formula::Const(true)]),
            Formula::Const(true)
        );
        assert_eq!(
            Formula::and(vec![Formula::Const(false), Formula::Atom(atom(&[(0, 1)], 0))]),
            Formula::Const(false)
        );
        assert_eq!(
            Formula::or(vec![Formula::Const(false)]),
            Formula::Const(false)
        );
        assert_eq!(Formula::not(Formula::Const(true)), Formula::Const(false));
    }
}
