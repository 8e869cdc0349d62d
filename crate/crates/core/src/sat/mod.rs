//! CNF satisfiability. The embedded engine is CDCL with two-watched-literal
//! propagation, first-UIP clause learning, activity-based branching with
//! decay 0.95, Luby restarts (base 64 conflicts), and phase saving. Every
//! `Sat` answer is verified against the clause set before it is returned.

use std::collections::BinaryHeap;

use thiserror::Error;

use crate::encoder::Cnf;

mod external;

pub use external::solve_external;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// Assignment indexed by variable - 1, total over all variables.
    Sat(Vec<bool>),
    Unsat,
}

#[derive(Debug, Error)]
pub enum SatError {
    #[error("conflict budget exhausted after {0} conflicts")]
    ConflictLimit(u64),
    #[error("solver produced an assignment that violates a clause")]
    SelfCheckFailed,
    #[error("external solver i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver protocol error: {0}")]
    Protocol(String),
    #[error("external solver model fails local clause verification")]
    InvalidExternalModel,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverOptions {
    /// Abort with [`SatError::ConflictLimit`] after this many conflicts.
    pub conflict_limit: Option<u64>,
}

/// Convenience entry point with default options.
pub fn solve(cnf: &Cnf) -> Result<SatResult, SatError> {
    solve_with_options(cnf, &SolverOptions::default())
}

pub fn solve_with_options(cnf: &Cnf, opts: &SolverOptions) -> Result<SatResult, SatError> {
    let mut solver = Solver::new(cnf, *opts);
    let result = solver.solve()?;
    if let SatResult::Sat(assignment) = &result {
        if !cnf.is_satisfied_by(assignment) {
            return Err(SatError::SelfCheckFailed);
        }
    }
    Ok(result)
}

const VAR_DECAY: f64 = 0.95;
const LUBY_BASE: u64 = 64;
const RESCALE_LIMIT: f64 = 1e100;

/// Literal encoded as `var * 2 + negated`, variables 0-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, negated: bool) -> Lit {
        Lit((var as u32) << 1 | negated as u32)
    }

    fn from_dimacs(l: i32) -> Lit {
        Lit::new((l.unsigned_abs() - 1) as usize, l < 0)
    }

    fn to_dimacs(self) -> i32 {
        let v = (self.var() + 1) as i32;
        if self.negated() {
            -v
        } else {
            v
        }
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn negated(self) -> bool {
        self.0 & 1 == 1
    }

    fn flip(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
}

#[derive(Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

struct HeapEntry {
    activity: f64,
    var: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.activity == other.activity && self.var == other.var
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // activities are never NaN; break ties toward the smaller index
        self.activity
            .partial_cmp(&other.activity)
            .unwrap()
            .then(other.var.cmp(&self.var))
    }
}

pub struct Solver {
    clauses: Vec<Clause>,
    first_learnt: usize,
    watches: Vec<Vec<Watch>>,
    assign: Vec<Value>,
    phase: Vec<bool>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: BinaryHeap<HeapEntry>,
    seen: Vec<bool>,
    conflicts: u64,
    options: SolverOptions,
    ok: bool,
}

impl Solver {
    pub fn new(cnf: &Cnf, options: SolverOptions) -> Self {
        let n = cnf.num_vars;
        let mut solver = Solver {
            clauses: Vec::with_capacity(cnf.clauses.len()),
            first_learnt: 0,
            watches: vec![Vec::new(); 2 * n],
            assign: vec![Value::Unassigned; n],
            phase: vec![false; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            heap: BinaryHeap::new(),
            seen: vec![false; n],
            conflicts: 0,
            options,
            ok: true,
        };
        for clause in &cnf.clauses {
            solver.add_input_clause(clause);
        }
        solver.first_learnt = solver.clauses.len();
        for v in 0..n {
            solver.heap.push(HeapEntry {
                activity: 0.0,
                var: v,
            });
        }
        solver
    }

    fn add_input_clause(&mut self, clause: &[i32]) {
        if !self.ok {
            return;
        }
        let mut lits: Vec<Lit> = clause.iter().map(|&l| Lit::from_dimacs(l)).collect();
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return; // tautology: p and not p
        }
        match lits.len() {
            0 => self.ok = false,
            1 => {
                match self.value(lits[0]) {
                    Value::True => {}
                    Value::False => self.ok = false,
                    Value::Unassigned => {
                        self.enqueue(lits[0], None);
                        if self.propagate().is_some() {
                            self.ok = false;
                        }
                    }
                }
            }
            _ => {
                let idx = self.clauses.len() as u32;
                self.watch(lits[0], idx, lits[1]);
                self.watch(lits[1], idx, lits[0]);
                self.clauses.push(Clause {
                    lits,
                    learnt: false,
                });
            }
        }
    }

    fn watch(&mut self, lit: Lit, clause: u32, blocker: Lit) {
        self.watches[lit.code()].push(Watch { clause, blocker });
    }

    fn value(&self, lit: Lit) -> Value {
        match self.assign[lit.var()] {
            Value::Unassigned => Value::Unassigned,
            Value::True => {
                if lit.negated() {
                    Value::False
                } else {
                    Value::True
                }
            }
            Value::False => {
                if lit.negated() {
                    Value::True
                } else {
                    Value::False
                }
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<u32>) {
        debug_assert!(matches!(self.value(lit), Value::Unassigned));
        let var = lit.var();
        self.assign[var] = if lit.negated() {
            Value::False
        } else {
            Value::True
        };
        self.level[var] = self.decision_level();
        self.reason[var] = reason;
        self.trail.push(lit);
    }

    /// Propagates until fixpoint; returns the conflicting clause if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p.flip();
            let mut watch_list = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut kept = 0;
            let mut conflict = None;
            let mut i = 0;
            while i < watch_list.len() {
                let watch = watch_list[i];
                i += 1;
                if matches!(self.value(watch.blocker), Value::True) {
                    watch_list[kept] = watch;
                    kept += 1;
                    continue;
                }
                let cref = watch.clause as usize;
                // ensure the false literal sits at position 1
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != watch.blocker && matches!(self.value(first), Value::True) {
                    watch_list[kept] = Watch {
                        clause: watch.clause,
                        blocker: first,
                    };
                    kept += 1;
                    continue;
                }
                // look for a replacement watch
                let replacement = {
                    let lits = &self.clauses[cref].lits;
                    (2..lits.len()).find(|&k| !matches!(self.value(lits[k]), Value::False))
                };
                if let Some(k) = replacement {
                    let lits = &mut self.clauses[cref].lits;
                    lits.swap(1, k);
                    let new_watch = lits[1];
                    self.watches[new_watch.code()].push(Watch {
                        clause: watch.clause,
                        blocker: first,
                    });
                    continue; // this watch moves away from false_lit
                }
                // clause is unit or conflicting
                watch_list[kept] = watch;
                kept += 1;
                if matches!(self.value(first), Value::False) {
                    // conflict: keep remaining watches and stop
                    while i < watch_list.len() {
                        watch_list[kept] = watch_list[i];
                        kept += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                    conflict = Some(watch.clause);
                } else {
                    self.enqueue(first, Some(watch.clause));
                }
            }
            watch_list.truncate(kept);
            self.watches[false_lit.code()] = watch_list;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, var: usize) {
        self.activity[var] += self.var_inc;
        if self.activity[var] > RESCALE_LIMIT {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.push(HeapEntry {
            activity: self.activity[var],
            var,
        });
    }

    fn decay_activities(&mut self) {
        self.var_inc /= VAR_DECAY;
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backtrack level. Relies on the invariant that
    /// a reason clause keeps its asserted literal at position 0.
    fn analyze(&mut self, conflict: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = Vec::new();
        let mut counter = 0usize;
        let mut cref = conflict as usize;
        let mut trail_idx = self.trail.len();
        let current_level = self.decision_level();
        let mut first_pass = true;

        loop {
            // on later passes position 0 is the literal we resolved on
            let start = usize::from(!first_pass);
            first_pass = false;
            for idx in start..self.clauses[cref].lits.len() {
                let lit = self.clauses[cref].lits[idx];
                let var = lit.var();
                if self.seen[var] || self.level[var] == 0 {
                    continue;
                }
                self.seen[var] = true;
                self.bump_var(var);
                if self.level[var] == current_level {
                    counter += 1;
                } else {
                    learnt.push(lit);
                }
            }

            // next seen literal on the trail
            loop {
                trail_idx -= 1;
                if self.seen[self.trail[trail_idx].var()] {
                    break;
                }
            }
            let lit = self.trail[trail_idx];
            let var = lit.var();
            self.seen[var] = false;
            counter -= 1;
            if counter == 0 {
                learnt.insert(0, lit.flip());
                break;
            }
            cref = self.reason[var].expect("non-decision literal has a reason") as usize;
            debug_assert_eq!(self.clauses[cref].lits[0], lit);
        }

        for lit in &learnt {
            self.seen[lit.var()] = false;
        }

        let backtrack = if learnt.len() == 1 {
            0
        } else {
            // second-highest decision level in the clause
            let mut max_idx = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_idx].var()] {
                    max_idx = i;
                }
            }
            learnt.swap(1, max_idx);
            self.level[learnt[1].var()]
        };
        (learnt, backtrack)
    }

    fn backtrack(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let keep = self.trail_lim[target as usize];
        for i in (keep..self.trail.len()).rev() {
            let lit = self.trail[i];
            let var = lit.var();
            self.phase[var] = !lit.negated();
            self.assign[var] = Value::Unassigned;
            self.reason[var] = None;
            self.heap.push(HeapEntry {
                activity: self.activity[var],
                var,
            });
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(target as usize);
        self.qhead = self.trail.len();
    }

    fn learn(&mut self, lits: Vec<Lit>) {
        debug_assert!(!lits.is_empty());
        if lits.len() == 1 {
            self.enqueue(lits[0], None);
            return;
        }
        let idx = self.clauses.len() as u32;
        self.watch(lits[0], idx, lits[1]);
        self.watch(lits[1], idx, lits[0]);
        let asserting = lits[0];
        self.clauses.push(Clause { lits, learnt: true });
        self.enqueue(asserting, Some(idx));
    }

    fn pick_branch_var(&mut self) -> Option<usize> {
        while let Some(entry) = self.heap.pop() {
            if matches!(self.assign[entry.var], Value::Unassigned) {
                return Some(entry.var);
            }
        }
        None
    }

    /// Learnt clauses in DIMACS literal form (tests check they are implied
    /// by the input).
    pub fn learned_clauses(&self) -> Vec<Vec<i32>> {
        self.clauses[self.first_learnt..]
            .iter()
            .filter(|c| c.learnt)
            .map(|c| c.lits.iter().map(|l| l.to_dimacs()).collect())
            .collect()
    }

    pub fn solve(&mut self) -> Result<SatResult, SatError> {
        if !self.ok {
            return Ok(SatResult::Unsat);
        }
        if self.propagate().is_some() {
            return Ok(SatResult::Unsat);
        }

        let mut restart_idx = 1u64;
        let mut conflicts_until_restart = LUBY_BASE * luby(restart_idx);

        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                if let Some(limit) = self.options.conflict_limit {
                    if self.conflicts > limit {
                        return Err(SatError::ConflictLimit(self.conflicts));
                    }
                }
                if self.decision_level() == 0 {
                    return Ok(SatResult::Unsat);
                }
                let (learnt, backtrack_level) = self.analyze(conflict);
                self.backtrack(backtrack_level);
                self.learn(learnt);
                self.decay_activities();
                if conflicts_until_restart > 0 {
                    conflicts_until_restart -= 1;
                }
            } else if conflicts_until_restart == 0 {
                restart_idx += 1;
                conflicts_until_restart = LUBY_BASE * luby(restart_idx);
                self.backtrack(0);
            } else {
                match self.pick_branch_var() {
                    None => {
                        let assignment: Vec<bool> = self
                            .assign
                            .iter()
                            .map(|v| matches!(v, Value::True))
                            .collect();
                        return Ok(SatResult::Sat(assignment));
                    }
                    Some(var) => {
                        self.trail_lim.push(self.trail.len());
                        let lit = Lit::new(var, !self.phase[var]);
                        self.enqueue(lit, None);
                    }
                }
            }
        }
    }
}

/// Luby restart sequence (1-indexed): 1, 1, 2, 1, 1, 2, 4, ...
fn luby(i: u64) -> u64 {
    let mut x = i - 1;
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}
