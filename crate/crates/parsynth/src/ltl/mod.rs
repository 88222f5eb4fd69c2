//! Indexed LTL\X specifications: parsing, classification, instantiation,
//! and fairness augmentation.

mod ast;
mod indexed;
mod parse;

pub use ast::{
    Atom, CutoffClass, GroundAtom, IndexBase, IndexTerm, IndexedSpec, Ltl, ProcessInterface,
    Quantifier, ShapeClass, SpecFile, SCHED_SIGNAL, SEND_SIGNAL, TOKEN_SIGNAL,
};
pub use indexed::{
    augment_fairness, build_token_assumption, classify, classify_conjunction, instantiate,
    instantiate_at, instantiate_conjunction, is_transposition_symmetric, merge_k_indexed,
    upgrade_single_obligation, FairnessMode,
};
pub use parse::parse_spec;

use thiserror::Error;

/// Errors raised while parsing or manipulating specifications.
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("LTL\\X violation at {line}:{col}: the next-step operator X is not supported")]
    NextOperator { line: usize, col: usize },
    #[error("unbound index variable `{name}` at {line}:{col}")]
    UnboundIndex { line: usize, col: usize, name: String },
    #[error("duplicate signal declaration `{0}`")]
    DuplicateSignal(String),
    #[error("unknown signal `{name}` at {line}:{col}")]
    UnknownSignal { line: usize, col: usize, name: String },
    #[error("no known cutoff for this specification shape: {0}")]
    NoKnownCutoff(String),
    #[error("operation requires a class-A specification, got class {0:?}")]
    NotClassA(ShapeClass),
    #[error("specification is not ground: atom `{0}` has a variable index")]
    NotGround(String),
    #[error("{0}")]
    Invalid(String),
}
