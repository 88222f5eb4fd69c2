//! Composition of isomorphic processes in rings and token-passing
//! networks, and explicit-state model checking of ground LTL\X properties
//! over the composition. This is the independent oracle that validates
//! every synthesis result.

mod compose;
mod check;
mod process;

pub use check::{
    check_one_token, check_unscheduled_invariance, counterexample_word, model_check,
    model_check_with_cap, CounterexampleDisplay, LassoCounterexample, Verdict,
};
pub use compose::{compose_network, compose_ring, compose_single, EnvChoice, GlobalLts};
pub use process::{behaviorally_equivalent, hub_process, ProcessLts, StateLabel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("atom `{0}` is not a signal of the composed system")]
    UndeclaredAtom(String),
    #[error("state cap exceeded ({0} states); raise the limit for larger instances")]
    StateCapExceeded(usize),
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("composition requires at least {0} processes")]
    TooFewProcesses(usize),
    #[error(transparent)]
    Automaton(#[from] crate::automaton::AutomatonError),
}

/// Default bound on explored product states.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

#[cfg(test)]
mod tests;
