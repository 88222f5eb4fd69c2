//! Synthesis of replicable process implementations for token rings and
//! token-passing networks from indexed temporal specifications.
//!
//! The pipeline: parse an indexed LTL\X specification, determine the ring
//! cutoff from its syntactic shape, instantiate it for the cutoff-sized
//! instance, translate it into a universal co-Büchi automaton, encode the
//! bounded search for a single process implementation as SMT constraints,
//! solve with an external SMT-LIB2 solver, extract the process from the
//! model, and verify it independently by explicit-state model checking of
//! the composed system.

pub mod automaton;
pub mod encoder;
pub mod ltl;
pub mod par;
pub mod pipeline;
pub mod solver;
pub mod topology;
pub mod verify;

pub use ltl::{CutoffClass, IndexedSpec, Ltl, ProcessInterface, SpecFile};
pub use verify::{GlobalLts, ProcessLts};
