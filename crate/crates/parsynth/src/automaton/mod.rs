//! Automata over valuations of ground atomic propositions: nondeterministic
//! Büchi automata, their universal co-Büchi duals, and word-level oracles
//! for ultimately periodic words.

mod build;
pub(crate) mod graph;
mod label;
mod lasso;

pub use build::{ltl_to_nba, nba_for_negation, nba_to_ucw, ucw_for_formula};
pub use label::{Alphabet, Label, Letter};
pub use lasso::{eval_ltl_on_lasso, nba_accepts_lasso, ucw_accepts_lasso};

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error("formula is not ground: {0}")]
    NotGround(String),
    #[error("alphabet limited to 64 atoms, formula needs {0}")]
    AlphabetTooLarge(usize),
    #[error("too many temporal obligations ({0}, limit 128)")]
    TooManyObligations(usize),
    #[error("atom `{0}` is not in the automaton alphabet")]
    UnknownAtom(String),
}

/// Nondeterministic Büchi automaton with edge labels given as conjunctions
/// of literals; unmentioned atoms are unconstrained.
#[derive(Debug, Clone)]
pub struct Nba {
    pub alphabet: Alphabet,
    pub initial: Vec<usize>,
    /// `edges[q]` lists `(label, target)` pairs.
    pub edges: Vec<Vec<(Label, usize)>>,
    pub accepting: Vec<bool>,
}

impl Nba {
    pub fn n_states(&self) -> usize {
        self.edges.len()
    }

    /// Language union: runs may start in either component.
    pub fn union(parts: Vec<Nba>) -> Nba {
        assert!(!parts.is_empty());
        let alphabet = parts[0].alphabet.clone();
        let mut initial = Vec::new();
        let mut edges = Vec::new();
        let mut accepting = Vec::new();
        for p in parts {
            assert_eq!(p.alphabet, alphabet, "union requires a shared alphabet");
            let base = edges.len();
            initial.extend(p.initial.iter().map(|q| q + base));
            for row in p.edges {
                edges.push(row.into_iter().map(|(l, q)| (l, q + base)).collect());
            }
            accepting.extend(p.accepting);
        }
        Nba { alphabet, initial, edges, accepting }
    }

    /// Dot export for debugging; accepting states are double circles.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name} {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  init [shape=point];");
        for q in 0..self.n_states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  q{q} [shape={shape} label=\"{q}\"];");
        }
        for &q in &self.initial {
            let _ = writeln!(out, "  init -> q{q};");
        }
        for (q, row) in self.edges.iter().enumerate() {
            for (label, t) in row {
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"{}\"];", label.display(&self.alphabet));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Universal co-Büchi automaton: a word is accepted iff no run visits
/// rejecting states infinitely often. The optional `bottom` state is
/// universally rejecting: absorbing, with a `true` self-loop.
#[derive(Debug, Clone)]
pub struct Ucw {
    pub alphabet: Alphabet,
    pub initial: usize,
    pub edges: Vec<Vec<(Label, usize)>>,
    pub rejecting: Vec<bool>,
    pub bottom: Option<usize>,
}

impl Ucw {
    pub fn n_states(&self) -> usize {
        self.edges.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.iter().map(|r| r.len()).sum()
    }

    /// Dot export; rejecting states are double circles, the universally
    /// rejecting sink prints as ⊥.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name} {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  init [shape=point];");
        for q in 0..self.n_states() {
            let shape = if self.rejecting[q] { "doublecircle" } else { "circle" };
            let text = if self.bottom == Some(q) { "⊥".to_string() } else { q.to_string() };
            let _ = writeln!(out, "  q{q} [shape={shape} label=\"{text}\"];");
        }
        let _ = writeln!(out, "  init -> q{};", self.initial);
        for (q, row) in self.edges.iter().enumerate() {
            for (label, t) in row {
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"{}\"];", label.display(&self.alphabet));
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests;
