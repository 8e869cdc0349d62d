//! Structural analysis: classify constraints, partition variables into
//! independent classes, extract per-class parameters, and compute the
//! solution/enumeration bound that sizes each class's bit-vectors.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::formula::{collect_atoms, Formula, LinearAtom, VarId};

mod shift;

pub use shift::{shift_of_origin, ShiftOutcome};

/// Classification of a single normalized atom, most specific first.
///
/// - `EqualityAtom`: `x - y >= 0`, one half of an equality `x = y`.
/// - `Difference`: `x - y >= b` or `±x >= b` with unit coefficients.
/// - `Utvpi`: two variables, both coefficients in `{-1, +1}`, same sign.
/// - `General`: everything else; carries the row width (variables with a
///   nonzero coefficient) and the row's largest absolute coefficient.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ConstraintKind {
    EqualityAtom,
    Difference,
    Utvpi,
    General { width: usize, row_max_coeff: BigInt },
}

/// Weakest class covering a set of atoms, ordered
/// `Equality < Difference < Utvpi < General`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum ClassKind {
    Equality,
    Difference,
    Utvpi,
    General,
}

impl ConstraintKind {
    pub fn class_kind(&self) -> ClassKind {
        match self {
            ConstraintKind::EqualityAtom => ClassKind::Equality,
            ConstraintKind::Difference => ClassKind::Difference,
            ConstraintKind::Utvpi => ClassKind::Utvpi,
            ConstraintKind::General { .. } => ClassKind::General,
        }
    }

    /// Difference constraints do not count toward `k`.
    pub fn is_difference(&self) -> bool {
        matches!(
            self,
            ConstraintKind::EqualityAtom | ConstraintKind::Difference
        )
    }
}

/// Most specific kind for one atom.
pub fn classify_constraint(a: &LinearAtom) -> ConstraintKind {
    let width = a.width();
    let all_unit = a.coeffs.values().all(|c| c.abs().is_one());
    if all_unit && width == 1 {
        return ConstraintKind::Difference;
    }
    if all_unit && width == 2 {
        let mut values = a.coeffs.values();
        let first = values.next().unwrap();
        let second = values.next().unwrap();
        if first.sign() != second.sign() {
            return if a.bound.is_zero() {
                ConstraintKind::EqualityAtom
            } else {
                ConstraintKind::Difference
            };
        }
        return ConstraintKind::Utvpi;
    }
    ConstraintKind::General {
        width,
        row_max_coeff: a.max_abs_coeff(),
    }
}

/// A connected component of the variable–atom incidence graph.
#[derive(Clone, Debug)]
pub struct VariableClass {
    pub vars: BTreeSet<VarId>,
    /// Indices into the formula's distinct-atom list.
    pub atom_indices: Vec<usize>,
    pub kind: ClassKind,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, x: usize, y: usize) {
        let (mut a, mut b) = (self.find(x), self.find(y));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Connected components over the distinct atoms of a normalized NNF
/// formula, ordered by smallest member variable.
pub fn partition_classes(f: &Formula) -> Vec<VariableClass> {
    let atoms = collect_atoms(f);
    partition_atoms(&atoms)
}

/// Partition for an explicit atom list (indices refer into `atoms`).
pub fn partition_atoms(atoms: &[LinearAtom]) -> Vec<VariableClass> {
    let mut var_list: Vec<VarId> = Vec::new();
    let mut var_slot: BTreeMap<VarId, usize> = BTreeMap::new();
    for atom in atoms {
        for v in atom.coeffs.keys() {
            var_slot.entry(*v).or_insert_with(|| {
                var_list.push(*v);
                var_list.len() - 1
            });
        }
    }

    let mut uf = UnionFind::new(var_list.len());
    for atom in atoms {
        let mut keys = atom.coeffs.keys();
        if let Some(first) = keys.next() {
            let first_slot = var_slot[first];
            for v in keys {
                uf.union(first_slot, var_slot[v]);
            }
        }
    }

    let mut by_root: BTreeMap<usize, VariableClass> = BTreeMap::new();
    for (slot, v) in var_list.iter().enumerate() {
        let root = uf.find(slot);
        by_root
            .entry(root)
            .or_insert_with(|| VariableClass {
                vars: BTreeSet::new(),
                atom_indices: Vec::new(),
                kind: ClassKind::Equality,
            })
            .vars
            .insert(*v);
    }
    for (idx, atom) in atoms.iter().enumerate() {
        let first = atom.coeffs.keys().next().expect("atoms have variables");
        let root = uf.find(var_slot[first]);
        let class = by_root.get_mut(&root).unwrap();
        class.atom_indices.push(idx);
        let kind = classify_constraint(atom).class_kind();
        if kind > class.kind {
            class.kind = kind;
        }
    }

    let mut classes: Vec<VariableClass> = by_root.into_values().collect();
    classes.sort_by_key(|c| *c.vars.iter().next().unwrap());
    classes
}

/// Per-class parameters read off the atoms as written in the original
/// (normalized) formula. `k` is capped at `n + 1`; the uncapped count and
/// the per-row data survive for the coefficient optimization.
#[derive(Clone, Debug)]
pub struct ClassParameters {
    pub n: usize,
    pub m: usize,
    /// Capped non-difference atom count, `min(k_uncapped, n + 1)`.
    pub k: usize,
    pub k_uncapped: usize,
    /// Maximum width over all atoms of the class (0 when the class is empty).
    pub w: usize,
    pub a_max: BigInt,
    pub b_max: BigInt,
    /// `min(n + 1, m)`.
    pub s: usize,
    /// One entry per non-difference atom: its largest absolute coefficient.
    pub row_max_coeffs: Vec<BigInt>,
    /// One entry per non-difference atom: its width.
    pub row_widths: Vec<usize>,
    /// `|b|` for every atom of the class.
    pub constants: Vec<BigInt>,
    /// True when some atom constrains a single variable. Such a class is
    /// pinned to the origin instead of being translation invariant, so the
    /// specialized difference bound must use a signed domain.
    pub anchored: bool,
}

impl ClassParameters {
    pub fn empty() -> Self {
        ClassParameters {
            n: 0,
            m: 0,
            k: 0,
            k_uncapped: 0,
            w: 0,
            a_max: BigInt::zero(),
            b_max: BigInt::zero(),
            s: 0,
            row_max_coeffs: Vec::new(),
            row_widths: Vec::new(),
            constants: Vec::new(),
            anchored: false,
        }
    }
}

/// Extracts [`ClassParameters`] for one class of `atoms`.
pub fn class_parameters(class: &VariableClass, atoms: &[LinearAtom]) -> ClassParameters {
    let n = class.vars.len();
    let m = class.atom_indices.len();
    let mut p = ClassParameters {
        n,
        m,
        s: (n + 1).min(m),
        ..ClassParameters::empty()
    };
    for &idx in &class.atom_indices {
        let atom = &atoms[idx];
        let kind = classify_constraint(atom);
        let width = atom.width();
        let row_max = atom.max_abs_coeff();
        if width == 1 {
            p.anchored = true;
        }
        p.w = p.w.max(width);
        if row_max > p.a_max {
            p.a_max = row_max.clone();
        }
        let abs_bound = atom.bound.abs();
        if abs_bound > p.b_max {
            p.b_max = abs_bound.clone();
        }
        p.constants.push(abs_bound);
        if !kind.is_difference() {
            p.k_uncapped += 1;
            p.row_max_coeffs.push(row_max);
            p.row_widths.push(width);
        }
    }
    p.k = p.k_uncapped.min(n + 1);
    p
}

/// Domain shape of an encoded variable.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DomainKind {
    /// Values in `[0, d]`; encoded as `bits(d)` value bits, zero-extended.
    Unsigned,
    /// Values in `[-d, d]`; encoded in two's complement with a sign bit.
    Signed,
}

/// Which bound formula produced a report.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundFormula {
    EqualityN,
    DifferenceGraph,
    UtvpiDouble,
    GeneralTheorem,
}

/// Optimizations that tighten the general bound.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct OptFlags {
    /// Replace `(a_max · w)^k` by the product of per-row `max-coeff · width`
    /// over the non-difference rows (the `n + 1` largest when `k` is capped).
    pub coeff: bool,
    /// Replace `s · (b_max + 1)` by the sum of the `s` largest `|b_i| + 1`.
    pub const_term: bool,
}

impl OptFlags {
    pub const NONE: OptFlags = OptFlags {
        coeff: false,
        const_term: false,
    };
    pub const ALL: OptFlags = OptFlags {
        coeff: true,
        const_term: true,
    };
}

/// Per-class solution bound and the bit width it implies.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub domain: DomainKind,
    pub d: BigInt,
    pub bit_width: usize,
    pub formula_used: BoundFormula,
    pub optimizations: OptFlags,
}

/// `ceil(log2(d + 1))` for `d >= 0`, i.e. the bit length of `d`.
fn bits_of(d: &BigInt) -> usize {
    debug_assert!(!d.is_negative());
    d.bits() as usize
}

fn width_for(d: &BigInt, domain: DomainKind) -> usize {
    match domain {
        DomainKind::Unsigned => bits_of(d).max(1),
        DomainKind::Signed => bits_of(d) + 1,
    }
}

/// Computes the class bound:
///
/// - equality class: `d = n`, unsigned;
/// - difference class: `d = min(n, m) · (b_max + 1)`, unsigned, or signed
///   when the class is anchored by a single-variable constraint;
/// - UTVPI class: `d = 2 · min(n, m) · (b_max + 1)`, signed;
/// - general class: `d = (n + 2) · Δ` with
///   `Δ = s · (b_max + 1) · (a_max · w)^k`, signed, with the coefficient and
///   constant-term refinements applied when enabled.
pub fn compute_bound(p: &ClassParameters, kind: ClassKind, opts: OptFlags) -> BoundReport {
    if p.m == 0 {
        return BoundReport {
            domain: DomainKind::Unsigned,
            d: BigInt::zero(),
            bit_width: 1,
            formula_used: BoundFormula::EqualityN,
            optimizations: opts,
        };
    }
    let min_nm = BigInt::from(p.n.min(p.m));
    let b_plus_1 = &p.b_max + 1;
    let (domain, d, formula_used) = match kind {
        ClassKind::Equality => (
            DomainKind::Unsigned,
            BigInt::from(p.n),
            BoundFormula::EqualityN,
        ),
        ClassKind::Difference => {
            let domain = if p.anchored {
                DomainKind::Signed
            } else {
                DomainKind::Unsigned
            };
            (domain, min_nm * &b_plus_1, BoundFormula::DifferenceGraph)
        }
        ClassKind::Utvpi => (
            DomainKind::Signed,
            BigInt::from(2) * min_nm * &b_plus_1,
            BoundFormula::UtvpiDouble,
        ),
        ClassKind::General => {
            let coeff_factor = if opts.coeff {
                let mut products: Vec<BigInt> = p
                    .row_max_coeffs
                    .iter()
                    .zip(&p.row_widths)
                    .map(|(a, w)| a * BigInt::from(*w))
                    .collect();
                // when k is capped, keep the n + 1 largest row products
                products.sort();
                products.iter().rev().take(p.k).product()
            } else {
                (&p.a_max * BigInt::from(p.w)).pow(p.k as u32)
            };
            let const_factor = if opts.const_term {
                let mut abs_consts = p.constants.clone();
                abs_consts.sort();
                abs_consts
                    .iter()
                    .rev()
                    .take(p.s)
                    .map(|c| c + 1)
                    .sum::<BigInt>()
            } else {
                BigInt::from(p.s) * &b_plus_1
            };
            let delta = const_factor * coeff_factor;
            (
                DomainKind::Signed,
                BigInt::from(p.n + 2) * delta,
                BoundFormula::GeneralTheorem,
            )
        }
    };
    let bit_width = width_for(&d, domain);
    BoundReport {
        domain,
        d,
        bit_width,
        formula_used,
        optimizations: opts,
    }
}
