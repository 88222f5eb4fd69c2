//! Ground SMT-LIB2 terms, declarations and scripts.

use std::collections::BTreeSet;
use std::fmt;

use super::EncodeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::Real => write!(f, "Real"),
        }
    }
}

/// Quantifier-free terms over uninterpreted functions and linear
/// integer/real arithmetic. Everything the encoding emits is ground, which
/// keeps the scripts decidable and lets the model validator re-evaluate
/// every assertion by direct lookup.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Bool(bool),
    Int(i64),
    /// Integral real constant, printed as `n.0`.
    Real(i64),
    App(String, Vec<Term>),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Eq(Box<Term>, Box<Term>),
    Ge(Box<Term>, Box<Term>),
    Gt(Box<Term>, Box<Term>),
    Lt(Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
}

impl Term {
    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn not(t: Term) -> Term {
        match t {
            Term::Bool(b) => Term::Bool(!b),
            Term::Not(inner) => *inner,
            other => Term::Not(Box::new(other)),
        }
    }

    /// Conjunction with constant folding; empty is `true`.
    pub fn and(parts: Vec<Term>) -> Term {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Term::Bool(true) => {}
                Term::Bool(false) => return Term::Bool(false),
                Term::And(xs) => out.extend(xs),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Term::Bool(true),
            1 => out.pop().unwrap(),
            _ => Term::And(out),
        }
    }

    pub fn or(parts: Vec<Term>) -> Term {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Term::Bool(false) => {}
                Term::Bool(true) => return Term::Bool(true),
                Term::Or(xs) => out.extend(xs),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Term::Bool(false),
            1 => out.pop().unwrap(),
            _ => Term::Or(out),
        }
    }

    /// Implication simplified on constant sides.
    pub fn implies(hyp: Term, concl: Term) -> Term {
        match (hyp, concl) {
            (Term::Bool(true), c) => c,
            (Term::Bool(false), _) => Term::Bool(true),
            (_, Term::Bool(true)) => Term::Bool(true),
            (h, Term::Bool(false)) => Term::not(h),
            (h, c) => Term::Implies(Box::new(h), Box::new(c)),
        }
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::Eq(Box::new(a), Box::new(b))
    }

    /// Boolean equivalence as equality; folds constants.
    pub fn iff(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Bool(true), x) | (x, Term::Bool(true)) => x,
            (Term::Bool(false), x) | (x, Term::Bool(false)) => Term::not(x),
            (x, y) => Term::Eq(Box::new(x), Box::new(y)),
        }
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::Ge(Box::new(a), Box::new(b))
    }

    pub fn gt(a: Term, b: Term) -> Term {
        Term::Gt(Box::new(a), Box::new(b))
    }

    pub fn lt(a: Term, b: Term) -> Term {
        Term::Lt(Box::new(a), Box::new(b))
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        match c {
            Term::Bool(true) => t,
            Term::Bool(false) => e,
            c => Term::Ite(Box::new(c), Box::new(t), Box::new(e)),
        }
    }

    pub fn is_trivially_true(&self) -> bool {
        matches!(self, Term::Bool(true))
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::App(name, args) => {
                out.insert(name.clone());
                for a in args {
                    a.collect_symbols(out);
                }
            }
            Term::Bool(_) | Term::Int(_) | Term::Real(_) => {}
            Term::Not(a) => a.collect_symbols(out),
            Term::And(xs) | Term::Or(xs) => {
                for x in xs {
                    x.collect_symbols(out);
                }
            }
            Term::Implies(a, b) | Term::Eq(a, b) | Term::Ge(a, b) | Term::Gt(a, b)
            | Term::Lt(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Term::Ite(c, t, e) => {
                c.collect_symbols(out);
                t.collect_symbols(out);
                e.collect_symbols(out);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Bool(b) => write!(f, "{b}"),
            Term::Int(i) => {
                if *i < 0 {
                    write!(f, "(- {})", -i)
                } else {
                    write!(f, "{i}")
                }
            }
            Term::Real(r) => {
                if *r < 0 {
                    write!(f, "(- {}.0)", -r)
                } else {
                    write!(f, "{r}.0")
                }
            }
            Term::App(name, args) => {
                if args.is_empty() {
                    write!(f, "{name}")
                } else {
                    write!(f, "({name}")?;
                    for a in args {
                        write!(f, " {a}")?;
                    }
                    write!(f, ")")
                }
            }
            Term::Not(a) => write!(f, "(not {a})"),
            Term::And(xs) => {
                write!(f, "(and")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Term::Or(xs) => {
                write!(f, "(or")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Term::Implies(a, b) => write!(f, "(=> {a} {b})"),
            Term::Eq(a, b) => write!(f, "(= {a} {b})"),
            Term::Ge(a, b) => write!(f, "(>= {a} {b})"),
            Term::Gt(a, b) => write!(f, "(> {a} {b})"),
            Term::Lt(a, b) => write!(f, "(< {a} {b})"),
            Term::Ite(c, t, e) => write!(f, "(ite {c} {t} {e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<Sort>,
    pub ret: Sort,
}

/// A complete solver script: declarations, assertions, the satisfiability
/// check and the model queries used to rebuild the implementation.
#[derive(Debug, Clone)]
pub struct SmtScript {
    pub logic: String,
    pub decls: Vec<FunDecl>,
    pub asserts: Vec<Term>,
    /// Terms queried with `get-value` after a `sat` answer, in order.
    pub queries: Vec<Term>,
    /// Non-fatal conditions noticed during encoding.
    pub warnings: Vec<String>,
}

impl SmtScript {
    pub fn new(logic: &str) -> Self {
        SmtScript {
            logic: logic.to_string(),
            decls: Vec::new(),
            asserts: Vec::new(),
            queries: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn declare(&mut self, name: impl Into<String>, args: Vec<Sort>, ret: Sort) {
        self.decls.push(FunDecl { name: name.into(), args, ret });
    }

    pub fn assert(&mut self, t: Term) {
        if !t.is_trivially_true() {
            self.asserts.push(t);
        }
    }

    pub fn assert_all(&mut self, ts: Vec<Term>) {
        for t in ts {
            self.assert(t);
        }
    }

    /// Folds runs of consecutive implications with the same hypothesis
    /// into one; purely a size optimization on the rendered script.
    pub fn fold_shared_hypotheses(&mut self) {
        let asserts = std::mem::take(&mut self.asserts);
        let mut out: Vec<Term> = Vec::with_capacity(asserts.len());
        let mut pending: Option<(Term, Vec<Term>)> = None;
        for t in asserts {
            match t {
                Term::Implies(h, c) => match &mut pending {
                    Some((ph, cs)) if *ph == *h => cs.push(*c),
                    _ => {
                        if let Some((ph, cs)) = pending.take() {
                            out.push(Term::implies(ph, Term::and(cs)));
                        }
                        pending = Some((*h, vec![*c]));
                    }
                },
                other => {
                    if let Some((ph, cs)) = pending.take() {
                        out.push(Term::implies(ph, Term::and(cs)));
                    }
                    out.push(other);
                }
            }
        }
        if let Some((ph, cs)) = pending.take() {
            out.push(Term::implies(ph, Term::and(cs)));
        }
        self.asserts = out;
    }

    /// Every used symbol declared, every declared symbol used (in an
    /// assertion or a model query).
    pub fn lint(&self) -> Result<(), EncodeError> {
        let declared: BTreeSet<String> = self.decls.iter().map(|d| d.name.clone()).collect();
        if declared.len() != self.decls.len() {
            return Err(EncodeError::Lint("duplicate declaration".into()));
        }
        let mut used = BTreeSet::new();
        for t in self.asserts.iter().chain(self.queries.iter()) {
            t.collect_symbols(&mut used);
        }
        if let Some(missing) = used.difference(&declared).next() {
            return Err(EncodeError::Lint(format!("`{missing}` used but not declared")));
        }
        if let Some(dead) = declared.difference(&used).next() {
            return Err(EncodeError::Lint(format!("`{dead}` declared but never used")));
        }
        Ok(())
    }

    /// Renders the SMT-LIB2 text. `get-value` queries are batched; they
    /// are only meaningful after `sat`, and the response parser skips the
    /// error echoes a solver prints for them after `unsat`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            out.push_str(&format!("; warning: {w}\n"));
        }
        out.push_str(&format!("(set-logic {})\n", self.logic));
        for d in &self.decls {
            out.push_str(&format!("(declare-fun {} (", d.name));
            for (i, a) in d.args.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&a.to_string());
            }
            out.push_str(&format!(") {})\n", d.ret));
        }
        for a in &self.asserts {
            out.push_str(&format!("(assert {a})\n"));
        }
        out.push_str("(check-sat)\n");
        for chunk in self.queries.chunks(256) {
            out.push_str("(get-value (");
            for (i, q) in chunk.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&q.to_string());
            }
            out.push_str("))\n");
        }
        out
    }
}
