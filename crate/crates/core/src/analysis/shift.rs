//! Shift-of-origin: replace `x_j` by `x_j - α_j` to shrink the largest
//! constant term. Any integer offsets are sound (the substitution is a
//! bijection on solutions), so instead of solving the exact minimization
//! problem we run coordinate descent, each 1-D subproblem solved exactly
//! over its piecewise-linear breakpoints.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::formula::{LinearAtom, VarId};

/// Result of the shift: per-variable offsets and the constants the atoms
/// take after substitution, aligned with the input atom slice
/// (`b'_i = b_i + Σ_j a_ij · α_j`).
#[derive(Clone, Debug)]
pub struct ShiftOutcome {
    pub offsets: BTreeMap<VarId, BigInt>,
    pub new_bounds: Vec<BigInt>,
}

fn objective(bounds: &[BigInt]) -> BigInt {
    bounds
        .iter()
        .map(|b| b.abs())
        .max()
        .unwrap_or_else(BigInt::zero)
}

fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -div_floor(&-a, b)
}

/// Exact minimum over integer δ of `max_i |c_i + a_i·δ|` for the rows
/// touching one variable. The objective is convex piecewise linear, so the
/// integer minimizer sits at the floor or ceiling of a breakpoint: either a
/// root `-c_i / a_i` or an intersection of two lines.
fn best_delta(rows: &[(BigInt, BigInt)], rest_max: &BigInt, current: &BigInt) -> Option<(BigInt, BigInt)> {
    let mut candidates: BTreeSet<BigInt> = BTreeSet::new();
    candidates.insert(BigInt::zero());
    for (a, c) in rows {
        let root = -c;
        candidates.insert(div_floor(&root, a));
        candidates.insert(div_ceil(&root, a));
    }
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a1, c1) = &rows[i];
            let (a2, c2) = &rows[j];
            let denom_same = a1 - a2;
            if !denom_same.is_zero() {
                let num = c2 - c1;
                candidates.insert(div_floor(&num, &denom_same));
                candidates.insert(div_ceil(&num, &denom_same));
            }
            let denom_opp = a1 + a2;
            if !denom_opp.is_zero() {
                let num = -(c1 + c2);
                candidates.insert(div_floor(&num, &denom_opp));
                candidates.insert(div_ceil(&num, &denom_opp));
            }
        }
    }

    let mut best: Option<(BigInt, BigInt)> = None;
    for delta in candidates {
        let mut local = rest_max.clone();
        for (a, c) in rows {
            let moved = (c + a * &delta).abs();
            if moved > local {
                local = moved;
            }
        }
        match &best {
            Some((_, best_val)) if *best_val <= local => {}
            _ => best = Some((delta, local)),
        }
    }
    match best {
        Some((delta, val)) if val < *current && !delta.is_zero() => Some((delta, val)),
        _ => None,
    }
}

/// Coordinate descent over the class variables until a full pass yields no
/// improvement. Returns identity offsets when nothing improves.
pub fn shift_of_origin(atoms: &[LinearAtom], vars: &BTreeSet<VarId>) -> ShiftOutcome {
    let mut offsets: BTreeMap<VarId, BigInt> =
        vars.iter().map(|v| (*v, BigInt::zero())).collect();
    let mut bounds: Vec<BigInt> = atoms.iter().map(|a| a.bound.clone()).collect();

    let mut improved = true;
    while improved {
        improved = false;
        for v in vars {
            let rows: Vec<(usize, BigInt)> = atoms
                .iter()
                .enumerate()
                .filter_map(|(i, a)| a.coeffs.get(v).map(|c| (i, c.clone())))
                .collect();
            if rows.is_empty() {
                continue;
            }
            let touched: BTreeSet<usize> = rows.iter().map(|(i, _)| *i).collect();
            let rest_max = bounds
                .iter()
                .enumerate()
                .filter(|(i, _)| !touched.contains(i))
                .map(|(_, b)| b.abs())
                .max()
                .unwrap_or_else(BigInt::zero);
            let lines: Vec<(BigInt, BigInt)> = rows
                .iter()
                .map(|(i, a)| (a.clone(), bounds[*i].clone()))
                .collect();
            let current = objective(&bounds);
            if let Some((delta, _)) = best_delta(&lines, &rest_max, &current) {
                for (i, a) in &rows {
                    bounds[*i] += a * &delta;
                }
                *offsets.get_mut(v).unwrap() += &delta;
                improved = true;
            }
        }
    }

    ShiftOutcome {
        offsets,
        new_bounds: bounds,
    }
}
