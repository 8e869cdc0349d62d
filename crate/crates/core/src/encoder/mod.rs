//! Translation of a normalized NNF formula into CNF. Every integer
//! variable becomes a two's-complement bit-vector of its class width
//! (unsigned domains are zero-extended instead of carrying a sign bit),
//! each atom `Σ a_j·x_j >= b` is evaluated at an intermediate width where
//! no overflow is possible, and the boolean skeleton is Tseitin-encoded
//! with structural hashing of identical gates.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::analysis::DomainKind;
use crate::formula::{Formula, LinearAtom, Model, VarId};

mod dimacs;

pub use dimacs::{dimacs_string, emit_dimacs, parse_dimacs, DimacsError};

/// Clause set in DIMACS conventions: positive/negative nonzero literals,
/// variables numbered from 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_var(&mut self) -> i32 {
        self.num_vars += 1;
        self.num_vars as i32
    }

    pub fn add_clause(&mut self, clause: Vec<i32>) {
        debug_assert!(clause
            .iter()
            .all(|&l| l != 0 && l.unsigned_abs() as usize <= self.num_vars));
        self.clauses.push(clause);
    }

    /// True when `assignment` (indexed by variable - 1) satisfies every clause.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let idx = (lit.unsigned_abs() - 1) as usize;
                assignment
                    .get(idx)
                    .map(|&v| if lit > 0 { v } else { !v })
                    .unwrap_or(false)
            })
        })
    }
}

/// Domain assigned to one integer variable before encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarDomain {
    pub kind: DomainKind,
    pub width: usize,
}

impl VarDomain {
    /// Largest absolute value representable in this domain.
    pub fn max_magnitude(&self) -> BigInt {
        match self.kind {
            DomainKind::Unsigned => (BigInt::one() << self.width) - 1,
            DomainKind::Signed => BigInt::one() << (self.width - 1),
        }
    }
}

/// Bit-vector allocated for one integer variable, LSB first.
#[derive(Clone, Debug)]
pub struct VarBits {
    pub kind: DomainKind,
    pub bits: Vec<i32>,
}

/// Mapping from integer variables to boolean variables.
#[derive(Clone, Debug, Default)]
pub struct VarMap {
    pub vars: BTreeMap<VarId, VarBits>,
    pub num_bool_vars: usize,
}

impl VarMap {
    pub fn total_bits(&self) -> usize {
        self.vars.values().map(|v| v.bits.len()).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EncodeOptions {
    /// Share structurally identical gates. Disabling this only grows the
    /// CNF; satisfiability is unchanged.
    pub structural_hashing: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            structural_hashing: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("variable v{0} has no domain from the bound analysis")]
    MissingDomain(u32),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("assignment is missing boolean variable {0}")]
    MissingAssignment(i32),
}

/// A bit: constant or a (possibly negated) CNF literal.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Bit {
    Const(bool),
    Lit(i32),
}

impl Bit {
    const FALSE: Bit = Bit::Const(false);

    fn flip(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Lit(l) => Bit::Lit(-l),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum GateKey {
    And(i32, i32),
    Xor(i32, i32),
}

struct Enc {
    cnf: Cnf,
    cache: HashMap<GateKey, i32>,
    hashing: bool,
}

impl Enc {
    fn gate(&mut self, key: GateKey) -> Option<i32> {
        if self.hashing {
            self.cache.get(&key).copied()
        } else {
            None
        }
    }

    fn remember(&mut self, key: GateKey, lit: i32) {
        if self.hashing {
            self.cache.insert(key, lit);
        }
    }

    fn and2(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(true), x) | (x, Bit::Const(true)) => x,
            (Bit::Const(false), _) | (_, Bit::Const(false)) => Bit::FALSE,
            (Bit::Lit(p), Bit::Lit(q)) => {
                if p == q {
                    return Bit::Lit(p);
                }
                if p == -q {
                    return Bit::FALSE;
                }
                let key = GateKey::And(p.min(q), p.max(q));
                if let Some(g) = self.gate(key) {
                    return Bit::Lit(g);
                }
                let g = self.cnf.fresh_var();
                self.cnf.add_clause(vec![-g, p]);
                self.cnf.add_clause(vec![-g, q]);
                self.cnf.add_clause(vec![g, -p, -q]);
                self.remember(key, g);
                Bit::Lit(g)
            }
        }
    }

    fn or2(&mut self, a: Bit, b: Bit) -> Bit {
        self.and2(a.flip(), b.flip()).flip()
    }

    fn xor2(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(false), x) | (x, Bit::Const(false)) => x,
            (Bit::Const(true), x) | (x, Bit::Const(true)) => x.flip(),
            (Bit::Lit(p), Bit::Lit(q)) => {
                if p == q {
                    return Bit::FALSE;
                }
                if p == -q {
                    return Bit::Const(true);
                }
                // xor is symmetric under joint negation; hash on variables
                let negated = (p < 0) ^ (q < 0);
                let (u, v) = (p.abs().min(q.abs()), p.abs().max(q.abs()));
                let key = GateKey::Xor(u, v);
                let g = if let Some(g) = self.gate(key) {
                    g
                } else {
                    let g = self.cnf.fresh_var();
                    self.cnf.add_clause(vec![-g, u, v]);
                    self.cnf.add_clause(vec![-g, -u, -v]);
                    self.cnf.add_clause(vec![g, -u, v]);
                    self.cnf.add_clause(vec![g, u, -v]);
                    self.remember(key, g);
                    g
                };
                Bit::Lit(if negated { -g } else { g })
            }
        }
    }

    fn full_adder(&mut self, a: Bit, b: Bit, cin: Bit) -> (Bit, Bit) {
        let ab = self.xor2(a, b);
        let sum = self.xor2(ab, cin);
        let c1 = self.and2(a, b);
        let c2 = self.and2(ab, cin);
        let cout = self.or2(c1, c2);
        (sum, cout)
    }

    /// Ripple-carry addition truncated to the common width.
    fn add_vec(&mut self, xs: &[Bit], ys: &[Bit]) -> Vec<Bit> {
        debug_assert_eq!(xs.len(), ys.len());
        let mut out = Vec::with_capacity(xs.len());
        let mut carry = Bit::FALSE;
        for (&a, &b) in xs.iter().zip(ys) {
            let (sum, cout) = self.full_adder(a, b, carry);
            out.push(sum);
            carry = cout;
        }
        out
    }

    /// Two's-complement negation: invert and add one.
    fn neg_vec(&mut self, xs: &[Bit]) -> Vec<Bit> {
        let inverted: Vec<Bit> = xs.iter().map(|b| b.flip()).collect();
        let one = const_vec(&BigInt::one(), xs.len());
        self.add_vec(&inverted, &one)
    }

    /// `x · a` by shift-and-add over the binary digits of `|a|`,
    /// negated afterwards for negative `a`. `xs` is already at width `w`.
    fn mul_const(&mut self, xs: &[Bit], a: &BigInt, w: usize) -> Vec<Bit> {
        if a.is_zero() {
            return vec![Bit::FALSE; w];
        }
        let magnitude: BigUint = a.magnitude().clone();
        let mut acc: Option<Vec<Bit>> = None;
        for i in 0..magnitude.bits() {
            if magnitude.bit(i) {
                let shifted = shl(xs, i as usize, w);
                acc = Some(match acc {
                    None => shifted,
                    Some(prev) => self.add_vec(&prev, &shifted),
                });
            }
        }
        let product = acc.expect("nonzero multiplier");
        if a.is_negative() {
            self.neg_vec(&product)
        } else {
            product
        }
    }
}

/// Sign- or zero-extension to width `w`.
fn extend(bits: &[Bit], kind: DomainKind, w: usize) -> Vec<Bit> {
    debug_assert!(bits.len() <= w);
    let mut out = bits.to_vec();
    let pad = match kind {
        DomainKind::Unsigned => Bit::FALSE,
        DomainKind::Signed => *bits.last().expect("nonempty vector"),
    };
    out.resize(w, pad);
    out
}

/// Left shift by `k`, truncated to width `w` (safe: the caller sizes `w`
/// so that the shifted value cannot overflow).
fn shl(bits: &[Bit], k: usize, w: usize) -> Vec<Bit> {
    let mut out = vec![Bit::FALSE; w];
    for (i, &b) in bits.iter().enumerate() {
        if i + k < w {
            out[i + k] = b;
        }
    }
    out
}

/// Two's-complement constant at width `w`.
fn const_vec(c: &BigInt, w: usize) -> Vec<Bit> {
    let modulus = BigInt::one() << w;
    let mut reduced = c % &modulus;
    if reduced.is_negative() {
        reduced += &modulus;
    }
    let mag = reduced.magnitude();
    (0..w).map(|i| Bit::Const(mag.bit(i as u64))).collect()
}

/// Intermediate width at which `Σ a_j·x_j - b` cannot overflow:
/// `ceil(log2(1 + Σ |a_j|·d_j + |b|)) + 1` where `d_j` is the largest
/// magnitude representable by `x_j`.
fn atom_width(atom: &LinearAtom, domains: &BTreeMap<VarId, VarDomain>) -> usize {
    let mut sum = atom.bound.abs();
    for (v, a) in &atom.coeffs {
        sum += a.abs() * domains[v].max_magnitude();
    }
    sum.bits() as usize + 1
}

fn encode_atom(
    enc: &mut Enc,
    atom: &LinearAtom,
    map: &VarMap,
    domains: &BTreeMap<VarId, VarDomain>,
) -> Bit {
    let w = atom_width(atom, domains);
    let mut acc = const_vec(&-&atom.bound, w);
    for (v, a) in &atom.coeffs {
        let var_bits = &map.vars[v];
        let bits: Vec<Bit> = var_bits.bits.iter().map(|&l| Bit::Lit(l)).collect();
        let extended = extend(&bits, var_bits.kind, w);
        let term = enc.mul_const(&extended, a, w);
        acc = enc.add_vec(&acc, &term);
    }
    // atom holds iff the signed sum is non-negative
    acc[w - 1].flip()
}

fn encode_formula(
    enc: &mut Enc,
    f: &Formula,
    map: &VarMap,
    domains: &BTreeMap<VarId, VarDomain>,
    atom_cache: &mut HashMap<LinearAtom, Bit>,
) -> Bit {
    match f {
        Formula::Const(b) => Bit::Const(*b),
        Formula::Atom(a) => {
            if let Some(bit) = atom_cache.get(a) {
                return *bit;
            }
            let bit = encode_atom(enc, a, map, domains);
            atom_cache.insert(a.clone(), bit);
            bit
        }
        Formula::Pred(..) => unreachable!("encode requires a normalized formula"),
        Formula::And(cs) => {
            let bits: Vec<Bit> = cs
                .iter()
                .map(|c| encode_formula(enc, c, map, domains, atom_cache))
                .collect();
            bits.into_iter()
                .fold(Bit::Const(true), |acc, b| enc.and2(acc, b))
        }
        Formula::Or(cs) => {
            let bits: Vec<Bit> = cs
                .iter()
                .map(|c| encode_formula(enc, c, map, domains, atom_cache))
                .collect();
            bits.into_iter()
                .fold(Bit::Const(false), |acc, b| enc.or2(acc, b))
        }
        Formula::Not(inner) => encode_formula(enc, inner, map, domains, atom_cache).flip(),
    }
}

/// Encodes a normalized NNF formula. The CNF is satisfiable iff the formula
/// has a model with every variable inside its domain; no domain-restriction
/// clauses are emitted, so any satisfying assignment decodes to a genuine
/// model.
pub fn encode(
    f: &Formula,
    domains: &BTreeMap<VarId, VarDomain>,
    opts: &EncodeOptions,
) -> Result<(Cnf, VarMap), EncodeError> {
    let mut enc = Enc {
        cnf: Cnf::new(),
        cache: HashMap::new(),
        hashing: opts.structural_hashing,
    };
    let mut map = VarMap::default();
    for v in f.vars() {
        let domain = domains.get(&v).ok_or(EncodeError::MissingDomain(v.0))?;
        debug_assert!(domain.width >= 1);
        let bits: Vec<i32> = (0..domain.width).map(|_| enc.cnf.fresh_var()).collect();
        map.vars.insert(
            v,
            VarBits {
                kind: domain.kind,
                bits,
            },
        );
    }

    let mut atom_cache = HashMap::new();
    let root = encode_formula(&mut enc, f, &map, domains, &mut atom_cache);
    match root {
        Bit::Const(true) => {}
        Bit::Const(false) => enc.cnf.add_clause(vec![]),
        Bit::Lit(l) => enc.cnf.add_clause(vec![l]),
    }
    map.num_bool_vars = enc.cnf.num_vars;
    Ok((enc.cnf, map))
}

/// Reconstructs integer values from a boolean assignment (indexed by
/// variable - 1): unsigned vectors read as plain binary, signed vectors in
/// two's complement.
pub fn decode_model(assignment: &[bool], map: &VarMap) -> Result<Model, DecodeError> {
    let mut model = Model::new();
    for (v, var_bits) in &map.vars {
        let mut value = BigInt::zero();
        let width = var_bits.bits.len();
        for (i, &lit) in var_bits.bits.iter().enumerate() {
            let idx = (lit - 1) as usize;
            let bit = *assignment
                .get(idx)
                .ok_or(DecodeError::MissingAssignment(lit))?;
            if !bit {
                continue;
            }
            let weight = BigInt::one() << i;
            let negative = matches!(var_bits.kind, DomainKind::Signed) && i == width - 1;
            if negative {
                value -= weight;
            } else {
                value += weight;
            }
        }
        model.set(*v, value);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::evaluate;
    use crate::sat;

    fn atom(coeffs: &[(u32, i64)], bound: i64) -> LinearAtom {
        LinearAtom {
            coeffs: coeffs
                .iter()
                .map(|&(v, c)| (VarId(v), BigInt::from(c)))
                .collect(),
            bound: BigInt::from(bound),
        }
    }

    fn domains(spec: &[(u32, DomainKind, usize)]) -> BTreeMap<VarId, VarDomain> {
        spec.iter()
            .map(|&(v, kind, width)| (VarId(v), VarDomain { kind, width }))
            .collect()
    }

    #[test]
    fn trivial_atom_is_satisfiable() {
        let f = Formula::Atom(atom(&[(0, 1)], 0));
        let doms = domains(&[(0, DomainKind::Unsigned, 2)]);
        let (cnf, map) = encode(&f, &doms, &EncodeOptions::default()).unwrap();
        let result = sat::solve(&cnf).unwrap();
        let sat::SatResult::Sat(assignment) = result else {
            panic!("expected sat");
        };
        let model = decode_model(&assignment, &map).unwrap();
        assert!(evaluate(&f, &model).unwrap());
    }

    #[test]
    fn contradiction_is_unsatisfiable() {
        // x >= 1 and -x >= 0
        let f = Formula::And(vec![
            Formula::Atom(atom(&[(0, 1)], 1)),
            Formula::Atom(atom(&[(0, -1)], 0)),
        ]);
        let doms = domains(&[(0, DomainKind::Signed, 4)]);
        let (cnf, _) = encode(&f, &doms, &EncodeOptions::default()).unwrap();
        assert!(matches!(sat::solve(&cnf).unwrap(), sat::SatResult::Unsat));
    }

    #[test]
    fn empty_formula_is_a_trivial_cnf() {
        let (cnf, map) = encode(
            &Formula::Const(true),
            &BTreeMap::new(),
            &EncodeOptions::default(),
        )
        .unwrap();
        assert_eq!(cnf.num_vars, 0);
        assert!(cnf.clauses.is_empty());
        assert_eq!(map.total_bits(), 0);
    }

    #[test]
    fn false_formula_gets_the_empty_clause() {
        let (cnf, _) = encode(
            &Formula::Const(false),
            &BTreeMap::new(),
            &EncodeOptions::default(),
        )
        .unwrap();
        assert_eq!(cnf.clauses, vec![Vec::<i32>::new()]);
    }

    #[test]
    fn decode_two_complement_examples() {
        let mut map = VarMap::default();
        map.vars.insert(
            VarId(0),
            VarBits {
                kind: DomainKind::Signed,
                bits: vec![1, 2, 3],
            },
        );
        let m = decode_model(&[true, false, false], &map).unwrap();
        assert_eq!(m.get(VarId(0)).unwrap(), &BigInt::from(1));
        let m = decode_model(&[true, true, true], &map).unwrap();
        assert_eq!(m.get(VarId(0)).unwrap(), &BigInt::from(-1));

        map.vars.get_mut(&VarId(0)).unwrap().kind = DomainKind::Unsigned;
        let m = decode_model(&[true, true, true], &map).unwrap();
        assert_eq!(m.get(VarId(0)).unwrap(), &BigInt::from(7));

        assert_eq!(
            decode_model(&[true], &map),
            Err(DecodeError::MissingAssignment(2))
        );
    }

    #[test]
    fn fixed_points_round_trip_through_unit_clauses() {
        // pin x = -3, y = 5 by unit clauses over their bit vectors
        let f = Formula::And(vec![
            Formula::Atom(atom(&[(0, 1), (1, 1)], -100)),
            Formula::Atom(atom(&[(0, -1), (1, 2)], -100)),
        ]);
        let doms = domains(&[(0, DomainKind::Signed, 5), (1, DomainKind::Unsigned, 4)]);
        let (mut cnf, map) = encode(&f, &doms, &EncodeOptions::default()).unwrap();

        let pin = |cnf: &mut Cnf, bits: &[i32], value: i64, signed: bool| {
            let width = bits.len();
            let mut v = value;
            if signed && v < 0 {
                v += 1 << width;
            }
            for (i, &lit) in bits.iter().enumerate() {
                if (v >> i) & 1 == 1 {
                    cnf.add_clause(vec![lit]);
                } else {
                    cnf.add_clause(vec![-lit]);
                }
            }
        };
        pin(&mut cnf, &map.vars[&VarId(0)].bits, -3, true);
        pin(&mut cnf, &map.vars[&VarId(1)].bits, 5, false);

        let sat::SatResult::Sat(assignment) = sat::solve(&cnf).unwrap() else {
            panic!("expected sat");
        };
        let model = decode_model(&assignment, &map).unwrap();
        assert_eq!(model.get(VarId(0)).unwrap(), &BigInt::from(-3));
        assert_eq!(model.get(VarId(1)).unwrap(), &BigInt::from(5));
    }
}
