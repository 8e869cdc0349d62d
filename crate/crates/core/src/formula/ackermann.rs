//! Elimination of uninterpreted function applications: each syntactically
//! distinct application becomes a fresh integer variable, and for every
//! pair of applications of the same symbol a congruence instance
//! `(args equal) => (results equal)` is conjoined. The result is
//! function-free and equisatisfiable.

use std::collections::HashMap;

use thiserror::Error;

use super::{Formula, FunApp, LinExpr, Rel, SymbolTable, TermBase, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AckermannError {
    #[error("function '{fun}' applied with {got} argument(s), expected {expected}")]
    ArityMismatch {
        fun: String,
        expected: usize,
        got: usize,
    },
}

struct State<'a> {
    symbols: &'a mut SymbolTable,
    // application (with arguments already rewritten) -> replacement variable
    replacements: HashMap<FunApp, VarId>,
    // per function, applications in discovery order
    by_fun: Vec<Vec<(Vec<LinExpr>, VarId)>>,
}

impl<'a> State<'a> {
    fn rewrite_expr(&mut self, e: &LinExpr) -> Result<LinExpr, AckermannError> {
        let mut out = LinExpr::constant(e.constant.clone());
        for (base, coeff) in &e.terms {
            match base {
                TermBase::Var(v) => out.add_term(TermBase::Var(*v), coeff),
                TermBase::App(app) => {
                    let v = self.replace_app(app)?;
                    out.add_term(TermBase::Var(v), coeff);
                }
            }
        }
        Ok(out)
    }

    fn replace_app(&mut self, app: &FunApp) -> Result<VarId, AckermannError> {
        let expected = self.symbols.fun_arity(app.fun);
        if app.args.len() != expected {
            return Err(AckermannError::ArityMismatch {
                fun: self.symbols.fun_name(app.fun).to_string(),
                expected,
                got: app.args.len(),
            });
        }
        // innermost applications first, so the key is function-free
        let args: Vec<LinExpr> = app
            .args
            .iter()
            .map(|a| self.rewrite_expr(a))
            .collect::<Result<_, _>>()?;
        let key = FunApp {
            fun: app.fun,
            args: args.clone(),
        };
        if let Some(v) = self.replacements.get(&key) {
            return Ok(*v);
        }
        let name = format!(
            "{}!{}",
            self.symbols.fun_name(app.fun),
            self.by_fun[app.fun.0 as usize].len()
        );
        let v = self.symbols.fresh_var(&name);
        self.replacements.insert(key, v);
        self.by_fun[app.fun.0 as usize].push((args, v));
        Ok(v)
    }

    fn rewrite(&mut self, f: &Formula) -> Result<Formula, AckermannError> {
        Ok(match f {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Atom(a) => Formula::Atom(a.clone()),
            Formula::Pred(rel, e) => Formula::Pred(*rel, self.rewrite_expr(e)?),
            Formula::And(cs) => Formula::And(
                cs.iter()
                    .map(|c| self.rewrite(c))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Or(cs) => Formula::Or(
                cs.iter()
                    .map(|c| self.rewrite(c))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Not(inner) => Formula::Not(Box::new(self.rewrite(inner)?)),
        })
    }
}

fn diff(a: &LinExpr, b: &LinExpr) -> LinExpr {
    let mut d = a.clone();
    d.sub(b);
    d
}

fn var_eq(a: VarId, b: VarId) -> Formula {
    Formula::Pred(Rel::Eq, diff(&LinExpr::var(a), &LinExpr::var(b)))
}

/// Replaces every function application by a fresh variable and conjoins the
/// pairwise congruence instances. Fresh variables are added to `symbols`.
pub fn ackermannize(
    f: &Formula,
    symbols: &mut SymbolTable,
) -> Result<Formula, AckermannError> {
    let num_funs = symbols.num_funs();
    let mut state = State {
        symbols,
        replacements: HashMap::new(),
        by_fun: vec![Vec::new(); num_funs],
    };
    let rewritten = state.rewrite(f)?;

    let mut parts = vec![rewritten];
    for fun_idx in 0..num_funs {
        let apps = &state.by_fun[fun_idx];
        for i in 0..apps.len() {
            for j in i + 1..apps.len() {
                let (args_i, v_i) = &apps[i];
                let (args_j, v_j) = &apps[j];
                let premises: Vec<Formula> = args_i
                    .iter()
                    .zip(args_j)
                    .map(|(a, b)| Formula::Pred(Rel::Eq, diff(a, b)))
                    .collect();
                parts.push(Formula::or(vec![
                    Formula::not(Formula::and(premises)),
                    var_eq(*v_i, *v_j),
                ]));
            }
        }
    }
    Ok(Formula::and(parts))
}
