//! Renders formulas back to the SMT-LIB subset accepted by the parser.
//! Used by the benchmark generator; output is deterministic.

use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Formula, LinExpr, LinearAtom, Rel, SymbolTable, TermBase};

fn write_int(out: &mut String, n: &BigInt) {
    if n.is_negative() {
        let _ = write!(out, "(- {})", n.magnitude());
    } else {
        let _ = write!(out, "{n}");
    }
}

fn write_scaled(out: &mut String, coeff: &BigInt, base: &str) {
    if coeff.is_one() {
        out.push_str(base);
    } else if (-coeff).is_one() {
        let _ = write!(out, "(- {base})");
    } else {
        out.push_str("(* ");
        write_int(out, coeff);
        let _ = write!(out, " {base})");
    }
}

fn write_expr(out: &mut String, e: &LinExpr, symbols: &SymbolTable) {
    let mut parts: Vec<String> = Vec::new();
    for (base, coeff) in &e.terms {
        let mut rendered = String::new();
        match base {
            TermBase::Var(v) => {
                write_scaled(&mut rendered, coeff, symbols.var_name(*v));
            }
            TermBase::App(app) => {
                let mut call = String::new();
                let _ = write!(call, "({}", symbols.fun_name(app.fun));
                for arg in &app.args {
                    call.push(' ');
                    write_expr(&mut call, arg, symbols);
                }
                call.push(')');
                write_scaled(&mut rendered, coeff, &call);
            }
        }
        parts.push(rendered);
    }
    if !e.constant.is_zero() || parts.is_empty() {
        let mut c = String::new();
        write_int(&mut c, &e.constant);
        parts.push(c);
    }
    if parts.len() == 1 {
        out.push_str(&parts[0]);
    } else {
        out.push_str("(+ ");
        out.push_str(&parts.join(" "));
        out.push(')');
    }
}

fn write_atom(out: &mut String, a: &LinearAtom, symbols: &SymbolTable) {
    out.push_str("(>= ");
    let expr = LinExpr {
        terms: a
            .coeffs
            .iter()
            .map(|(v, c)| (TermBase::Var(*v), c.clone()))
            .collect(),
        constant: BigInt::from(0),
    };
    write_expr(out, &expr, symbols);
    out.push(' ');
    write_int(out, &a.bound);
    out.push(')');
}

fn write_formula(out: &mut String, f: &Formula, symbols: &SymbolTable) {
    match f {
        Formula::Const(b) => out.push_str(if *b { "true" } else { "false" }),
        Formula::Atom(a) => write_atom(out, a, symbols),
        Formula::Pred(Rel::Ne, e) => {
            // no direct operator; render as a negated equality
            out.push_str("(not (= ");
            write_expr(out, e, symbols);
            out.push_str(" 0))");
        }
        Formula::Pred(rel, e) => {
            let op = match rel {
                Rel::Eq => "=",
                Rel::Lt => "<",
                Rel::Le => "<=",
                Rel::Gt => ">",
                Rel::Ge => ">=",
                Rel::Ne => unreachable!(),
            };
            let _ = write!(out, "({op} ");
            write_expr(out, e, symbols);
            out.push_str(" 0)");
        }
        Formula::And(cs) | Formula::Or(cs) => {
            out.push_str(if matches!(f, Formula::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for c in cs {
                out.push(' ');
                write_formula(out, c, symbols);
            }
            out.push(')');
        }
        Formula::Not(inner) => {
            out.push_str("(not ");
            write_formula(out, inner, symbols);
            out.push(')');
        }
    }
}

/// Full script: logic, declarations, one assertion, `(check-sat)`.
pub fn write_script(f: &Formula, symbols: &SymbolTable) -> String {
    let mut out = String::new();
    let logic = if symbols.num_funs() > 0 {
        "QF_UFLIA"
    } else {
        "QF_LIA"
    };
    let _ = writeln!(out, "(set-logic {logic})");
    for v in symbols.var_ids() {
        let _ = writeln!(out, "(declare-fun {} () Int)", symbols.var_name(v));
    }
    for i in 0..symbols.num_funs() {
        let id = super::FunId(i as u32);
        let sorts = vec!["Int"; symbols.fun_arity(id)].join(" ");
        let _ = writeln!(out, "(declare-fun {} ({sorts}) Int)", symbols.fun_name(id));
    }
    out.push_str("(assert ");
    write_formula(&mut out, f, symbols);
    out.push_str(")\n(check-sat)\n");
    out
}
