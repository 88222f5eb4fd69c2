//! Formula and specification syntax trees.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Base of an index term: a quantified variable or a concrete process id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexBase {
    Var(String),
    Const(u32),
}

/// An index term `base + offset`, evaluated modulo the instance size with
/// 1-based process ids (the successor of process `n` is `1`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTerm {
    pub base: IndexBase,
    pub offset: i64,
}

impl IndexTerm {
    pub fn var(name: impl Into<String>) -> Self {
        IndexTerm { base: IndexBase::Var(name.into()), offset: 0 }
    }

    pub fn var_offset(name: impl Into<String>, offset: i64) -> Self {
        IndexTerm { base: IndexBase::Var(name.into()), offset }
    }

    pub fn constant(id: u32) -> Self {
        IndexTerm { base: IndexBase::Const(id), offset: 0 }
    }

    /// Evaluates the term under an assignment of variables to 1-based ids,
    /// wrapping modulo `n`.
    pub fn eval(&self, assign: &dyn Fn(&str) -> Option<u32>, n: u32) -> Option<u32> {
        let base = match &self.base {
            IndexBase::Var(v) => assign(v)?,
            IndexBase::Const(c) => *c,
        };
        Some(wrap_index(base as i64 + self.offset, n))
    }
}

/// Wraps a 1-based index into `1..=n`.
pub(crate) fn wrap_index(value: i64, n: u32) -> u32 {
    ((value - 1).rem_euclid(n as i64)) as u32 + 1
}

impl fmt::Display for IndexTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.base, self.offset) {
            (IndexBase::Var(v), 0) => write!(f, "{v}"),
            (IndexBase::Var(v), o) if o > 0 => write!(f, "{{{v}+{o}}}"),
            (IndexBase::Var(v), o) => write!(f, "{{{v}-{}}}", -o),
            (IndexBase::Const(c), 0) => write!(f, "{c}"),
            (IndexBase::Const(c), o) if o > 0 => write!(f, "{{{c}+{o}}}"),
            (IndexBase::Const(c), o) => write!(f, "{{{c}-{}}}", -o),
        }
    }
}

/// An indexed atomic proposition such as `r_i`, `g_{i+1}` or `tok_1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub signal: String,
    pub index: IndexTerm,
}

impl Atom {
    pub fn new(signal: impl Into<String>, index: IndexTerm) -> Self {
        Atom { signal: signal.into(), index }
    }

    pub fn ground(signal: impl Into<String>, id: u32) -> Self {
        Atom { signal: signal.into(), index: IndexTerm::constant(id) }
    }

    /// Returns `(signal, id)` if the index is a constant with no offset.
    pub fn as_ground(&self) -> Option<GroundAtom> {
        match (&self.index.base, self.index.offset) {
            (IndexBase::Const(c), 0) => Some(GroundAtom { signal: self.signal.clone(), index: *c }),
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.signal, self.index)
    }
}

/// A fully instantiated atomic proposition over a concrete process id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub signal: String,
    pub index: u32,
}

impl GroundAtom {
    pub fn new(signal: impl Into<String>, index: u32) -> Self {
        GroundAtom { signal: signal.into(), index }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.signal, self.index)
    }
}

/// LTL\X formulas over indexed atoms. `X` is excluded by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    False,
    Atom(Atom),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Iff(Box<Ltl>, Box<Ltl>),
    Globally(Box<Ltl>),
    Eventually(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    WeakUntil(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn atom(signal: impl Into<String>, index: IndexTerm) -> Self {
        Ltl::Atom(Atom::new(signal, index))
    }

    pub fn ground_atom(signal: impl Into<String>, id: u32) -> Self {
        Ltl::Atom(Atom::ground(signal, id))
    }

    pub fn not(a: Ltl) -> Self {
        Ltl::Not(Box::new(a))
    }

    pub fn and(a: Ltl, b: Ltl) -> Self {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Self {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Self {
        Ltl::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Ltl, b: Ltl) -> Self {
        Ltl::Iff(Box::new(a), Box::new(b))
    }

    pub fn globally(a: Ltl) -> Self {
        Ltl::Globally(Box::new(a))
    }

    pub fn eventually(a: Ltl) -> Self {
        Ltl::Eventually(Box::new(a))
    }

    pub fn until(a: Ltl, b: Ltl) -> Self {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    pub fn weak_until(a: Ltl, b: Ltl) -> Self {
        Ltl::WeakUntil(Box::new(a), Box::new(b))
    }

    /// Left-fold conjunction of `parts`; the empty conjunction is `true`.
    pub fn conjoin(parts: impl IntoIterator<Item = Ltl>) -> Ltl {
        let mut it = parts.into_iter();
        match it.next() {
            None => Ltl::True,
            Some(first) => it.fold(first, Ltl::and),
        }
    }

    /// Flattens nested top-level conjunctions.
    pub fn conjuncts(&self) -> Vec<&Ltl> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Ltl, out: &mut Vec<&'a Ltl>) {
            match f {
                Ltl::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// All atoms, in syntactic order, with repetitions.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Ltl::Atom(a) = f {
                out.push(a);
            }
        });
        out
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Ltl)) {
        f(self);
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => {}
            Ltl::Not(a) | Ltl::Globally(a) | Ltl::Eventually(a) => a.visit(f),
            Ltl::And(a, b)
            | Ltl::Or(a, b)
            | Ltl::Implies(a, b)
            | Ltl::Iff(a, b)
            | Ltl::Until(a, b)
            | Ltl::WeakUntil(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Rewrites every atom through `f`.
    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Atom) -> Ltl {
        match self {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::False,
            Ltl::Atom(a) => Ltl::Atom(f(a)),
            Ltl::Not(a) => Ltl::not(a.map_atoms(f)),
            Ltl::And(a, b) => Ltl::and(a.map_atoms(f), b.map_atoms(f)),
            Ltl::Or(a, b) => Ltl::or(a.map_atoms(f), b.map_atoms(f)),
            Ltl::Implies(a, b) => Ltl::implies(a.map_atoms(f), b.map_atoms(f)),
            Ltl::Iff(a, b) => Ltl::iff(a.map_atoms(f), b.map_atoms(f)),
            Ltl::Globally(a) => Ltl::globally(a.map_atoms(f)),
            Ltl::Eventually(a) => Ltl::eventually(a.map_atoms(f)),
            Ltl::Until(a, b) => Ltl::until(a.map_atoms(f), b.map_atoms(f)),
            Ltl::WeakUntil(a, b) => Ltl::weak_until(a.map_atoms(f), b.map_atoms(f)),
        }
    }

    /// True if the formula contains an eventuality obligation (`F` or `U`).
    /// `W` and `G` alone are safety shapes.
    pub fn contains_liveness(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Ltl::Eventually(_) | Ltl::Until(_, _)) {
                found = true;
            }
        });
        found
    }

    /// True if every atom has a constant index.
    pub fn is_ground(&self) -> bool {
        self.atoms().iter().all(|a| a.as_ground().is_some())
    }

    /// Collects the distinct ground atoms of a ground formula, sorted.
    pub fn ground_atoms(&self) -> Result<Vec<GroundAtom>, super::SpecError> {
        let mut out = Vec::new();
        for a in self.atoms() {
            match a.as_ground() {
                Some(g) => out.push(g),
                None => return Err(super::SpecError::NotGround(a.to_string())),
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Structural normal form used for syntactic symmetry checks: flattens
    /// and sorts the operands of `&` and `|`.
    pub fn canonical(&self) -> Ltl {
        fn flatten_assoc<'a>(f: &'a Ltl, is_and: bool, out: &mut Vec<&'a Ltl>) {
            match (f, is_and) {
                (Ltl::And(a, b), true) | (Ltl::Or(a, b), false) => {
                    flatten_assoc(a, is_and, out);
                    flatten_assoc(b, is_and, out);
                }
                _ => out.push(f),
            }
        }
        match self {
            Ltl::And(_, _) | Ltl::Or(_, _) => {
                let is_and = matches!(self, Ltl::And(_, _));
                let mut parts = Vec::new();
                flatten_assoc(self, is_and, &mut parts);
                let mut canon: Vec<Ltl> = parts.iter().map(|p| p.canonical()).collect();
                canon.sort_by_key(|c| c.to_string());
                canon.dedup();
                let mut it = canon.into_iter();
                let first = it.next().expect("conjunction has at least one operand");
                it.fold(first, |acc, x| if is_and { Ltl::and(acc, x) } else { Ltl::or(acc, x) })
            }
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::False,
            Ltl::Atom(a) => Ltl::Atom(a.clone()),
            Ltl::Not(a) => Ltl::not(a.canonical()),
            Ltl::Implies(a, b) => Ltl::implies(a.canonical(), b.canonical()),
            Ltl::Iff(a, b) => Ltl::iff(a.canonical(), b.canonical()),
            Ltl::Globally(a) => Ltl::globally(a.canonical()),
            Ltl::Eventually(a) => Ltl::eventually(a.canonical()),
            Ltl::Until(a, b) => Ltl::until(a.canonical(), b.canonical()),
            Ltl::WeakUntil(a, b) => Ltl::weak_until(a.canonical(), b.canonical()),
        }
    }
}

// Binding strength, loosest to tightest: <-> -> | & U/W unary.
fn precedence(f: &Ltl) -> u8 {
    match f {
        Ltl::Iff(_, _) => 1,
        Ltl::Implies(_, _) => 2,
        Ltl::Or(_, _) => 3,
        Ltl::And(_, _) => 4,
        Ltl::Until(_, _) | Ltl::WeakUntil(_, _) => 5,
        Ltl::Not(_) | Ltl::Globally(_) | Ltl::Eventually(_) => 6,
        Ltl::True | Ltl::False | Ltl::Atom(_) => 7,
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `&`/`|` print as left-associative chains, `U`/`W`/`->`/`<->` as
        // right-associative ones; the parser follows the same conventions so
        // print-then-parse is the identity.
        fn paren(f: &mut fmt::Formatter<'_>, inner: &Ltl, min: u8) -> fmt::Result {
            if precedence(inner) < min {
                write!(f, "(")?;
                write!(f, "{inner}")?;
                write!(f, ")")
            } else {
                write!(f, "{inner}")
            }
        }
        let p = precedence(self);
        match self {
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Atom(a) => write!(f, "{a}"),
            Ltl::Not(a) => {
                write!(f, "!")?;
                paren(f, a, p)
            }
            Ltl::Globally(a) => {
                write!(f, "G ")?;
                paren(f, a, p)
            }
            Ltl::Eventually(a) => {
                write!(f, "F ")?;
                paren(f, a, p)
            }
            Ltl::And(a, b) => {
                paren(f, a, p)?;
                write!(f, " & ")?;
                paren(f, b, p + 1)
            }
            Ltl::Or(a, b) => {
                paren(f, a, p)?;
                write!(f, " | ")?;
                paren(f, b, p + 1)
            }
            Ltl::Implies(a, b) => {
                paren(f, a, p + 1)?;
                write!(f, " -> ")?;
                paren(f, b, p)
            }
            Ltl::Iff(a, b) => {
                paren(f, a, p + 1)?;
                write!(f, " <-> ")?;
                paren(f, b, p)
            }
            Ltl::Until(a, b) => {
                paren(f, a, p + 1)?;
                write!(f, " U ")?;
                paren(f, b, p)
            }
            Ltl::WeakUntil(a, b) => {
                paren(f, a, p + 1)?;
                write!(f, " W ")?;
                paren(f, b, p)
            }
        }
    }
}

/// One quantifier of a prenex prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    pub exists: bool,
    pub var: String,
    /// Variables this one must differ from (e.g. `j` in `forall i != j`).
    pub distinct_from: Vec<String>,
}

impl Quantifier {
    pub fn forall(var: impl Into<String>) -> Self {
        Quantifier { exists: false, var: var.into(), distinct_from: Vec::new() }
    }

    pub fn forall_distinct(var: impl Into<String>, from: impl Into<String>) -> Self {
        Quantifier { exists: false, var: var.into(), distinct_from: vec![from.into()] }
    }

    pub fn exists(var: impl Into<String>) -> Self {
        Quantifier { exists: true, var: var.into(), distinct_from: Vec::new() }
    }
}

/// A prenex-form sentence of indexed LTL\X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedSpec {
    pub prefix: Vec<Quantifier>,
    pub body: Ltl,
}

impl IndexedSpec {
    pub fn new(prefix: Vec<Quantifier>, body: Ltl) -> Self {
        IndexedSpec { prefix, body }
    }

    /// Index variables of the prefix, in order.
    pub fn vars(&self) -> Vec<&str> {
        self.prefix.iter().map(|q| q.var.as_str()).collect()
    }

    pub fn is_universal(&self) -> bool {
        self.prefix.iter().all(|q| !q.exists)
    }

    /// Checks that every body variable is bound exactly once in the prefix.
    pub fn validate(&self) -> Result<(), super::SpecError> {
        let mut seen = Vec::new();
        for q in &self.prefix {
            if seen.contains(&q.var.as_str()) {
                return Err(super::SpecError::Invalid(format!(
                    "index variable `{}` bound twice",
                    q.var
                )));
            }
            seen.push(&q.var);
        }
        for a in self.body.atoms() {
            if let IndexBase::Var(v) = &a.index.base {
                if !seen.contains(&v.as_str()) {
                    return Err(super::SpecError::UnboundIndex {
                        line: 0,
                        col: 0,
                        name: v.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for IndexedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // The file grammar has one `forall` clause per guarantee, so a
        // distinct pair prints as `forall i != j`.
        match &self.prefix[..] {
            [a, b]
                if !a.exists
                    && !b.exists
                    && a.distinct_from.is_empty()
                    && b.distinct_from == [a.var.clone()] =>
            {
                write!(f, "forall {} != {} . ", a.var, b.var)?;
            }
            prefix => {
                for q in prefix {
                    write!(f, "{} {}", if q.exists { "exists" } else { "forall" }, q.var)?;
                    for d in &q.distinct_from {
                        write!(f, " != {d}")?;
                    }
                    write!(f, " . ")?;
                }
            }
        }
        write!(f, "{}", self.body)
    }
}

/// Per-process signal interface declared by a specification file. The
/// outputs `tok` and `send` are implicit and present for every process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessInterface {
    /// Environment inputs of process `i`, indexed with `i` (e.g. `r`).
    pub env_inputs: Vec<String>,
    /// Declared outputs of process `i`, excluding the implicit `tok`/`send`.
    pub outputs: Vec<String>,
}

pub const TOKEN_SIGNAL: &str = "tok";
pub const SEND_SIGNAL: &str = "send";
pub const SCHED_SIGNAL: &str = "sched";

impl ProcessInterface {
    pub fn new(env_inputs: Vec<String>, outputs: Vec<String>) -> Self {
        ProcessInterface { env_inputs, outputs }
    }

    /// All per-process outputs including the implicit token signals.
    pub fn all_outputs(&self) -> Vec<String> {
        let mut out = self.outputs.clone();
        out.push(TOKEN_SIGNAL.to_string());
        out.push(SEND_SIGNAL.to_string());
        out
    }

    pub fn is_output(&self, signal: &str) -> bool {
        signal == TOKEN_SIGNAL || signal == SEND_SIGNAL || self.outputs.iter().any(|o| o == signal)
    }

    pub fn is_env_input(&self, signal: &str) -> bool {
        self.env_inputs.iter().any(|o| o == signal)
    }
}

/// A parsed specification file: the signal interface plus one quantified
/// guarantee per `guarantee` line. The overall specification is their
/// conjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecFile {
    pub interface: ProcessInterface,
    pub guarantees: Vec<IndexedSpec>,
}

/// Cutoff classes of universal prefix shapes, with the ring sizes that are
/// sufficient for each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ShapeClass {
    A,
    B,
    C,
    D,
}

/// A shape class together with its cutoff. The pairing is fixed:
/// A ⇒ 2, B ⇒ 3, C ⇒ 4, D ⇒ 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffClass {
    pub class: ShapeClass,
    pub cutoff: u32,
}

impl CutoffClass {
    pub fn new(class: ShapeClass) -> Self {
        let cutoff = match class {
            ShapeClass::A => 2,
            ShapeClass::B => 3,
            ShapeClass::C => 4,
            ShapeClass::D => 5,
        };
        CutoffClass { class, cutoff }
    }
}

impl fmt::Display for CutoffClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class {:?}, cutoff {}", self.class, self.cutoff)
    }
}
