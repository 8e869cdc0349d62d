//! Parser for the SMT-LIB 2 subset accepted as input: `set-logic QF_LIA` or
//! `QF_UFLIA`, `declare-fun` with sort `Int`, `assert` over
//! `and/or/not/=/distinct/</<=/>/>=/+/-/*`, and `check-sat`. Multiplication
//! requires at least all-but-one factors to be literal integers.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use super::{Formula, FunApp, LinExpr, Rel, SymbolTable};

/// Result of parsing one input file.
#[derive(Clone, Debug)]
pub struct Script {
    /// Conjunction of all assertions (true when there are none).
    pub formula: Formula,
    pub symbols: SymbolTable,
    /// Whether a `(check-sat)` command was present.
    pub check_sat: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: sort error: {msg}")]
    Sort { pos: Pos, msg: String },
    #[error("{pos}: nonlinear term: {msg}")]
    Nonlinear { pos: Pos, msg: String },
}

impl ParseError {
    fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    fn sort(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Sort {
            pos,
            msg: msg.into(),
        }
    }
}

enum SExpr {
    Sym(String, Pos),
    Num(BigInt, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    fn pos(&self) -> Pos {
        match self {
            SExpr::Sym(_, p) | SExpr::Num(_, p) | SExpr::List(_, p) => *p,
        }
    }
}

struct Lexer<'a> {
    input: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer {
            input: input.as_bytes(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.at += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == b';' {
                while let Some(c) = self.bump() {
                    if c == b'\n' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn is_symbol_byte(c: u8) -> bool {
        c.is_ascii_alphanumeric() || b"~!@$%^&*_-+=<>.?/".contains(&c)
    }

    /// Next s-expression, or `None` at end of input.
    fn sexpr(&mut self) -> Result<Option<SExpr>, ParseError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        match c {
            b'(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        Some(b')') => {
                            self.bump();
                            return Ok(Some(SExpr::List(items, pos)));
                        }
                        Some(_) => match self.sexpr()? {
                            Some(item) => items.push(item),
                            None => {
                                return Err(ParseError::syntax(pos, "unclosed parenthesis"))
                            }
                        },
                        None => return Err(ParseError::syntax(pos, "unclosed parenthesis")),
                    }
                }
            }
            b')' => Err(ParseError::syntax(pos, "unexpected ')'")),
            b'|' => {
                // quoted symbol
                self.bump();
                let mut name = String::new();
                loop {
                    match self.bump() {
                        Some(b'|') => break,
                        Some(c) => name.push(c as char),
                        None => return Err(ParseError::syntax(pos, "unclosed quoted symbol")),
                    }
                }
                Ok(Some(SExpr::Sym(name, pos)))
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if let Some(c) = self.peek() {
                    if Self::is_symbol_byte(c) {
                        return Err(ParseError::syntax(pos, "malformed numeral"));
                    }
                }
                let value: BigInt = digits.parse().expect("digits parse as integer");
                Ok(Some(SExpr::Num(value, pos)))
            }
            c if Self::is_symbol_byte(c) || c == b':' => {
                let mut name = String::new();
                if c == b':' {
                    name.push(':');
                    self.bump();
                }
                while let Some(c) = self.peek() {
                    if Self::is_symbol_byte(c) {
                        name.push(c as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(Some(SExpr::Sym(name, pos)))
            }
            b'"' => {
                // string literal, only appears in set-info attributes
                self.bump();
                let mut s = String::from("\"");
                loop {
                    match self.bump() {
                        Some(b'"') => {
                            if self.peek() == Some(b'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c as char),
                        None => return Err(ParseError::syntax(pos, "unclosed string literal")),
                    }
                }
                Ok(Some(SExpr::Sym(s, pos)))
            }
            other => Err(ParseError::syntax(
                pos,
                format!("unexpected character '{}'", other as char),
            )),
        }
    }
}

/// A term is either integer-sorted or a formula.
enum Val {
    Int(LinExpr),
    Bool(Formula),
}

struct Builder {
    symbols: SymbolTable,
}

impl Builder {
    fn int(&self, v: Val, pos: Pos) -> Result<LinExpr, ParseError> {
        match v {
            Val::Int(e) => Ok(e),
            Val::Bool(_) => Err(ParseError::sort(pos, "expected an integer term")),
        }
    }

    fn boolean(&self, v: Val, pos: Pos) -> Result<Formula, ParseError> {
        match v {
            Val::Bool(f) => Ok(f),
            Val::Int(_) => Err(ParseError::sort(pos, "expected a formula")),
        }
    }

    fn term(&self, e: &SExpr) -> Result<Val, ParseError> {
        match e {
            SExpr::Num(n, _) => Ok(Val::Int(LinExpr::constant(n.clone()))),
            SExpr::Sym(name, pos) => match name.as_str() {
                "true" => Ok(Val::Bool(Formula::Const(true))),
                "false" => Ok(Val::Bool(Formula::Const(false))),
                _ => {
                    if let Some(v) = self.symbols.var(name) {
                        Ok(Val::Int(LinExpr::var(v)))
                    } else if self.symbols.fun(name).is_some() {
                        Err(ParseError::sort(
                            *pos,
                            format!("function '{name}' used without arguments"),
                        ))
                    } else {
                        Err(ParseError::syntax(*pos, format!("unknown symbol '{name}'")))
                    }
                }
            },
            SExpr::List(items, pos) => {
                let Some(SExpr::Sym(head, head_pos)) = items.first() else {
                    return Err(ParseError::syntax(*pos, "expected an operator"));
                };
                let args = &items[1..];
                match head.as_str() {
                    "+" => {
                        let mut acc = LinExpr::default();
                        for a in args {
                            acc.add(&self.int(self.term(a)?, a.pos())?);
                        }
                        Ok(Val::Int(acc))
                    }
                    "-" => {
                        if args.is_empty() {
                            return Err(ParseError::syntax(*head_pos, "'-' needs arguments"));
                        }
                        let mut acc = self.int(self.term(&args[0])?, args[0].pos())?;
                        if args.len() == 1 {
                            acc.negate();
                        } else {
                            for a in &args[1..] {
                                acc.sub(&self.int(self.term(a)?, a.pos())?);
                            }
                        }
                        Ok(Val::Int(acc))
                    }
                    "*" => {
                        let mut constant_product = BigInt::from(1);
                        let mut non_const: Option<LinExpr> = None;
                        for a in args {
                            let e = self.int(self.term(a)?, a.pos())?;
                            if e.is_constant() {
                                constant_product *= &e.constant;
                            } else if non_const.is_some() {
                                return Err(ParseError::Nonlinear {
                                    pos: *pos,
                                    msg: "product of two non-constant terms".to_string(),
                                });
                            } else {
                                non_const = Some(e);
                            }
                        }
                        Ok(Val::Int(match non_const {
                            Some(mut e) => {
                                e.scale(&constant_product);
                                e
                            }
                            None => LinExpr::constant(constant_product),
                        }))
                    }
                    "and" | "or" => {
                        let mut fs = Vec::with_capacity(args.len());
                        for a in args {
                            fs.push(self.boolean(self.term(a)?, a.pos())?);
                        }
                        Ok(Val::Bool(if head == "and" {
                            Formula::and(fs)
                        } else {
                            Formula::or(fs)
                        }))
                    }
                    "not" => {
                        if args.len() != 1 {
                            return Err(ParseError::syntax(*head_pos, "'not' takes one argument"));
                        }
                        let f = self.boolean(self.term(&args[0])?, args[0].pos())?;
                        Ok(Val::Bool(Formula::not(f)))
                    }
                    "=" | "<" | "<=" | ">" | ">=" => {
                        if args.len() < 2 {
                            return Err(ParseError::syntax(
                                *head_pos,
                                format!("'{head}' needs at least two arguments"),
                            ));
                        }
                        let rel = match head.as_str() {
                            "=" => Rel::Eq,
                            "<" => Rel::Lt,
                            "<=" => Rel::Le,
                            ">" => Rel::Gt,
                            _ => Rel::Ge,
                        };
                        let mut exprs = Vec::with_capacity(args.len());
                        for a in args {
                            exprs.push(self.int(self.term(a)?, a.pos())?);
                        }
                        // chained relation: (op a b c) = (op a b) and (op b c)
                        let mut parts = Vec::with_capacity(exprs.len() - 1);
                        for pair in exprs.windows(2) {
                            let mut diff = pair[0].clone();
                            diff.sub(&pair[1]);
                            parts.push(Formula::Pred(rel, diff));
                        }
                        Ok(Val::Bool(Formula::and(parts)))
                    }
                    "distinct" => {
                        if args.len() < 2 {
                            return Err(ParseError::syntax(
                                *head_pos,
                                "'distinct' needs at least two arguments",
                            ));
                        }
                        let mut exprs = Vec::with_capacity(args.len());
                        for a in args {
                            exprs.push(self.int(self.term(a)?, a.pos())?);
                        }
                        let mut parts = Vec::new();
                        for i in 0..exprs.len() {
                            for j in i + 1..exprs.len() {
                                let mut diff = exprs[i].clone();
                                diff.sub(&exprs[j]);
                                parts.push(Formula::Pred(Rel::Ne, diff));
                            }
                        }
                        Ok(Val::Bool(Formula::and(parts)))
                    }
                    _ => {
                        if let Some(fun) = self.symbols.fun(head) {
                            let arity = self.symbols.fun_arity(fun);
                            if args.len() != arity {
                                return Err(ParseError::sort(
                                    *pos,
                                    format!(
                                        "function '{head}' expects {arity} argument(s), got {}",
                                        args.len()
                                    ),
                                ));
                            }
                            let mut app_args = Vec::with_capacity(args.len());
                            for a in args {
                                app_args.push(self.int(self.term(a)?, a.pos())?);
                            }
                            Ok(Val::Int(LinExpr::app(FunApp {
                                fun,
                                args: app_args,
                            })))
                        } else if self.symbols.var(head).is_some() {
                            Err(ParseError::sort(
                                *pos,
                                format!("variable '{head}' applied to arguments"),
                            ))
                        } else {
                            Err(ParseError::syntax(
                                *head_pos,
                                format!("unknown operator '{head}'"),
                            ))
                        }
                    }
                }
            }
        }
    }
}

fn expect_sym<'e>(e: &'e SExpr, what: &str) -> Result<(&'e str, Pos), ParseError> {
    match e {
        SExpr::Sym(s, pos) => Ok((s, *pos)),
        other => Err(ParseError::syntax(other.pos(), format!("expected {what}"))),
    }
}

/// Parses a script in the supported SMT-LIB 2 subset.
pub fn parse(input: &str) -> Result<Script, ParseError> {
    let mut lexer = Lexer::new(input);
    let mut builder = Builder {
        symbols: SymbolTable::new(),
    };
    let mut assertions = Vec::new();
    let mut check_sat = false;

    while let Some(top) = lexer.sexpr()? {
        let SExpr::List(items, pos) = &top else {
            return Err(ParseError::syntax(top.pos(), "expected a command"));
        };
        let Some(SExpr::Sym(cmd, _)) = items.first() else {
            return Err(ParseError::syntax(*pos, "expected a command name"));
        };
        let args = &items[1..];
        match cmd.as_str() {
            "set-logic" => {
                if args.len() != 1 {
                    return Err(ParseError::syntax(*pos, "set-logic takes one argument"));
                }
                let (logic, lpos) = expect_sym(&args[0], "a logic name")?;
                if logic != "QF_LIA" && logic != "QF_UFLIA" {
                    return Err(ParseError::sort(
                        lpos,
                        format!("unsupported logic '{logic}' (expected QF_LIA or QF_UFLIA)"),
                    ));
                }
            }
            "set-info" | "set-option" => {}
            "declare-fun" => {
                if args.len() != 3 {
                    return Err(ParseError::syntax(
                        *pos,
                        "declare-fun takes a name, argument sorts, and a result sort",
                    ));
                }
                let (name, npos) = expect_sym(&args[0], "a symbol")?;
                let SExpr::List(arg_sorts, _) = &args[1] else {
                    return Err(ParseError::syntax(args[1].pos(), "expected a sort list"));
                };
                for s in arg_sorts {
                    let (sort, spos) = expect_sym(s, "a sort")?;
                    if sort != "Int" {
                        return Err(ParseError::sort(spos, format!("unsupported sort '{sort}'")));
                    }
                }
                let (ret, rpos) = expect_sym(&args[2], "a sort")?;
                if ret != "Int" {
                    return Err(ParseError::sort(rpos, format!("unsupported sort '{ret}'")));
                }
                let fresh = if arg_sorts.is_empty() {
                    builder.symbols.declare_var(name).is_some()
                } else {
                    builder.symbols.declare_fun(name, arg_sorts.len()).is_some()
                };
                if !fresh {
                    return Err(ParseError::sort(npos, format!("'{name}' redeclared")));
                }
            }
            "declare-const" => {
                if args.len() != 2 {
                    return Err(ParseError::syntax(
                        *pos,
                        "declare-const takes a name and a sort",
                    ));
                }
                let (name, npos) = expect_sym(&args[0], "a symbol")?;
                let (sort, spos) = expect_sym(&args[1], "a sort")?;
                if sort != "Int" {
                    return Err(ParseError::sort(spos, format!("unsupported sort '{sort}'")));
                }
                if builder.symbols.declare_var(name).is_none() {
                    return Err(ParseError::sort(npos, format!("'{name}' redeclared")));
                }
            }
            "assert" => {
                if args.len() != 1 {
                    return Err(ParseError::syntax(*pos, "assert takes one argument"));
                }
                let v = builder.term(&args[0])?;
                assertions.push(builder.boolean(v, args[0].pos())?);
            }
            "check-sat" => check_sat = true,
            "exit" => break,
            "get-model" | "get-value" => {}
            other => {
                return Err(ParseError::syntax(
                    *pos,
                    format!("unsupported command '{other}'"),
                ));
            }
        }
    }

    Ok(Script {
        formula: Formula::and(assertions),
        symbols: builder.symbols,
        check_sat,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{collect_atoms, normalize};
    use super::*;

    #[test]
    fn parses_difference_atom() {
        let script = parse(
            "(set-logic QF_LIA)\n(declare-fun x () Int)\n(declare-fun y () Int)\n\
             (assert (>= (- x y) 5))\n(check-sat)\n",
        )
        .unwrap();
        assert!(script.check_sat);
        let n = normalize(&script.formula).unwrap();
        let atoms = collect_atoms(&n);
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].bound, BigInt::from(5));
        assert_eq!(atoms[0].width(), 2);
    }

    #[test]
    fn rejects_nonlinear_product() {
        let err = parse(
            "(declare-fun x () Int)(declare-fun y () Int)(assert (>= (* x y) 0))",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Nonlinear { .. }));
    }

    #[test]
    fn keeps_function_applications_on_the_surface() {
        let script = parse(
            "(set-logic QF_UFLIA)(declare-fun f (Int) Int)(declare-fun x () Int)\
             (declare-fun y () Int)(assert (= (f x) (f y)))",
        )
        .unwrap();
        assert!(script.formula.has_applications());
    }

    #[test]
    fn scales_products_with_literal_factor() {
        let script = parse(
            "(declare-fun x () Int)(assert (>= (+ (* 2 x) (* x 3)) 10))",
        )
        .unwrap();
        let n = normalize(&script.formula).unwrap();
        let atoms = collect_atoms(&n);
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].coeffs.values().next().unwrap(), &BigInt::from(5));
    }

    #[test]
    fn reports_position_of_syntax_errors() {
        let err = parse("(declare-fun x () Int)\n(assert (>= x unknown))").unwrap_err();
        match err {
            ParseError::Syntax { pos, .. } => {
                assert_eq!(pos.line, 2);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_integer_sorts() {
        let err = parse("(declare-fun p () Bool)").unwrap_err();
        assert!(matches!(err, ParseError::Sort { .. }));
    }

    #[test]
    fn chained_relations_expand() {
        let script = parse(
            "(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)\
             (assert (< x y z))",
        )
        .unwrap();
        let n = normalize(&script.formula).unwrap();
        assert_eq!(collect_atoms(&n).len(), 2);
    }

    #[test]
    fn distinct_expands_pairwise() {
        let script = parse(
            "(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)\
             (assert (distinct x y z))",
        )
        .unwrap();
        let n = normalize(&script.formula).unwrap();
        // three pairs, each a disjunction of two strict atoms
        assert_eq!(collect_atoms(&n).len(), 6);
    }

    #[test]
    fn empty_assertion_set_is_true() {
        let script = parse("(set-logic QF_LIA)(check-sat)").unwrap();
        assert_eq!(script.formula, Formula::Const(true));
    }
}
