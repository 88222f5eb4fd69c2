//! Bounded-synthesis constraint generation: universal co-Büchi annotation
//! constraints plus the token-ring and token-passing-network features,
//! emitted as self-contained SMT-LIB2 scripts over uninterpreted functions
//! and linear integer/real arithmetic.

mod network;
mod ring;
mod single;
mod term;

pub use network::{encode_network, NetworkEncoding, STEP_PASS, STEP_SCHED};
pub use ring::encode_ring;
pub use single::encode_single_process;
pub use term::{FunDecl, SmtScript, Sort, Term};

use thiserror::Error;

use crate::automaton::Ucw;
use crate::ltl::{GroundAtom, ProcessInterface, SCHED_SIGNAL, SEND_SIGNAL, TOKEN_SIGNAL};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("label mentions undeclared atom `{0}`")]
    UndeclaredAtom(String),
    #[error("ring encoding needs at least 2 processes, got {0}")]
    TooFewProcesses(usize),
    #[error("state bounds must be at least 1")]
    ZeroBound,
    #[error("connection topology has no sites")]
    NoSites,
    #[error("Boolean reduction function mentions obligation {var} but only {m} topologies exist")]
    ArityMismatch { var: usize, m: usize },
    #[error("script lint: {0}")]
    Lint(String),
}

/// One bit of the enumerated environment valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvBit {
    /// A request input of one process, e.g. `r_3`.
    Input { proc: usize, signal: String },
    /// One bit of the binary scheduling index.
    Sched { bit: usize },
    /// Single-process mode: the emulated neighbour's send output.
    Recv,
}

/// Binary encoding of "which process is scheduled".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulingEncoding {
    pub bits: usize,
    pub n_procs: usize,
}

impl SchedulingEncoding {
    pub fn new(n_procs: usize) -> Self {
        let mut bits = 0;
        while (1usize << bits) < n_procs {
            bits += 1;
        }
        SchedulingEncoding { bits, n_procs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ring,
    Single,
    NetworkBlock,
}

/// Names and layout shared between the encoder, the model extractor and
/// the post-solve validator: the global transition symbol, per-process
/// projections, output label symbols, and one annotation pair per
/// automaton state.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    pub mode: Mode,
    /// Processes of this block, including hubs; ids are 1-based.
    pub n_procs: usize,
    /// How many of them are synthesized sites (the rest are hubs).
    pub n_sites: usize,
    pub bound_global: usize,
    pub bound_local: usize,
    /// Per-process environment input signals (hubs have none).
    pub env_signals: Vec<String>,
    /// Declared outputs plus the implicit `tok`/`send`.
    pub output_signals: Vec<String>,
    pub env_bits: Vec<EnvBit>,
    pub sched: Option<SchedulingEncoding>,
    /// Admissible environment valuations, ascending.
    pub valuations: Vec<u64>,
    pub delta: String,
    /// Projection symbol per process; `None` projects identically
    /// (single-process mode).
    pub proj: Vec<Option<String>>,
    pub is_hub: Vec<bool>,
    /// Token wiring between 1-based process ids.
    pub edges: Vec<(usize, usize)>,
    pub lambda_b: Vec<String>,
    pub lambda_n: Vec<String>,
}

impl SymbolTable {
    pub(crate) fn label_fn(signal: &str) -> String {
        format!("o_{signal}")
    }

    /// Which process a valuation schedules (0-based), if scheduling bits
    /// exist.
    pub fn scheduled(&self, mask: u64) -> Option<usize> {
        self.sched.as_ref()?;
        let mut value = 0usize;
        for (i, bit) in self.env_bits.iter().enumerate() {
            if let EnvBit::Sched { bit: b } = bit {
                if mask & (1u64 << i) != 0 {
                    value |= 1 << b;
                }
            }
        }
        Some(value)
    }

    /// All admissible valuation masks for the given bit layout: scheduling
    /// values pointing at nonexistent processes are excluded, which makes
    /// "exactly one process is scheduled" hold by construction.
    pub(crate) fn admissible_valuations(
        env_bits: &[EnvBit],
        sched: Option<&SchedulingEncoding>,
    ) -> Vec<u64> {
        let n_bits = env_bits.len();
        let mut out = Vec::new();
        'outer: for mask in 0..(1u64 << n_bits) {
            if let Some(enc) = sched {
                let mut value = 0usize;
                for (i, bit) in env_bits.iter().enumerate() {
                    if let EnvBit::Sched { bit: b } = bit {
                        if mask & (1u64 << i) != 0 {
                            value |= 1 << b;
                        }
                    }
                }
                if value >= enc.n_procs {
                    continue 'outer;
                }
            }
            out.push(mask);
        }
        out
    }

    /// The local request valuation of one process under a mask, packed in
    /// `env_signals` order.
    pub fn input_mask_of(&self, proc: usize, mask: u64) -> usize {
        let mut out = 0usize;
        for (i, bit) in self.env_bits.iter().enumerate() {
            if let EnvBit::Input { proc: p, signal } = bit {
                if *p == proc && mask & (1u64 << i) != 0 {
                    let k = self
                        .env_signals
                        .iter()
                        .position(|s| s == signal)
                        .expect("input bits use declared signals");
                    out |= 1 << k;
                }
            }
        }
        out
    }

    /// Single-process mode: value of the emulated send input.
    pub fn recv_bit_of(&self, mask: u64) -> bool {
        self.env_bits
            .iter()
            .enumerate()
            .any(|(i, b)| matches!(b, EnvBit::Recv) && mask & (1u64 << i) != 0)
    }

    /// The successor of `t` under a valuation. The transition function is
    /// emitted as its point table — one integer constant per
    /// `(state, valuation)` pair — which is interchangeable with a free
    /// function over the enumerated finite domain and keeps scripts small.
    pub fn delta_term(&self, t: i64, mask: u64) -> Term {
        let idx = self
            .valuations
            .binary_search(&mask)
            .expect("valuation admissible");
        Term::constant(format!("{}_{t}v{idx}", self.delta))
    }

    pub(crate) fn delta_points(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in 0..self.bound_global as i64 {
            for idx in 0..self.valuations.len() {
                out.push(format!("{}_{t}v{idx}", self.delta));
            }
        }
        out
    }

    pub fn proj_term(&self, proc: usize, state: Term) -> Term {
        match &self.proj[proc - 1] {
            Some(name) => Term::app(name.clone(), vec![state]),
            None => state,
        }
    }

    /// `tok` of a process read off a global state term.
    pub fn tok_term(&self, proc: usize, state: Term) -> Term {
        if self.is_hub[proc - 1] {
            Term::ge(self.proj_term(proc, state), Term::Int(1))
        } else {
            Term::app(Self::label_fn(TOKEN_SIGNAL), vec![self.proj_term(proc, state)])
        }
    }

    pub fn send_term(&self, proc: usize, state: Term) -> Term {
        if self.is_hub[proc - 1] {
            Term::eq(self.proj_term(proc, state), Term::Int(2))
        } else {
            Term::app(Self::label_fn(SEND_SIGNAL), vec![self.proj_term(proc, state)])
        }
    }

    /// Some predecessor is offering the token to `proc` in `state`.
    pub fn recv_term(&self, proc: usize, state: Term) -> Term {
        let parts: Vec<Term> = self
            .edges
            .iter()
            .filter(|&&(_, b)| b == proc)
            .map(|&(a, _)| self.send_term(a, state.clone()))
            .collect();
        Term::or(parts)
    }

    pub fn lambda_b_term(&self, q: usize, state: Term) -> Term {
        Term::app(self.lambda_b[q].clone(), vec![state])
    }

    pub fn lambda_n_term(&self, q: usize, state: Term) -> Term {
        Term::app(self.lambda_n[q].clone(), vec![state])
    }

    /// Value of an environment-controlled atom under a valuation, or
    /// `None` when the atom reads process outputs.
    pub fn env_atom_value(&self, atom: &GroundAtom, mask: u64) -> Option<bool> {
        let proc = atom.index as usize;
        if atom.signal == SCHED_SIGNAL {
            return Some(self.scheduled(mask).map(|s| s + 1 == proc).unwrap_or(false));
        }
        if self.mode == Mode::Single && atom.signal == SEND_SIGNAL && proc == 2 {
            return Some(self.recv_bit_of(mask));
        }
        if self.env_signals.iter().any(|s| s == &atom.signal) {
            for (i, bit) in self.env_bits.iter().enumerate() {
                if let EnvBit::Input { proc: p, signal } = bit {
                    if *p == proc && signal == &atom.signal {
                        return Some(mask & (1u64 << i) != 0);
                    }
                }
            }
            return Some(false);
        }
        None
    }

    /// An output atom as a term over the global source state `t`.
    pub fn out_atom_term(&self, atom: &GroundAtom, t: i64) -> Result<Term, EncodeError> {
        let proc = atom.index as usize;
        if proc == 0 || proc > self.n_procs {
            return Err(EncodeError::UndeclaredAtom(atom.to_string()));
        }
        if atom.signal == TOKEN_SIGNAL {
            return Ok(self.tok_term(proc, Term::Int(t)));
        }
        if atom.signal == SEND_SIGNAL {
            return Ok(self.send_term(proc, Term::Int(t)));
        }
        if self.output_signals.iter().any(|s| s == &atom.signal) {
            if self.is_hub[proc - 1] {
                return Err(EncodeError::UndeclaredAtom(atom.to_string()));
            }
            return Ok(Term::app(
                Self::label_fn(&atom.signal),
                vec![self.proj_term(proc, Term::Int(t))],
            ));
        }
        Err(EncodeError::UndeclaredAtom(atom.to_string()))
    }
}

/// The annotation constraints of the bounded-synthesis reduction: the
/// initial automaton/system pair is marked reachable with rank zero, and
/// every automaton transition propagates reachability with non-decreasing
/// ranks, strictly increasing into rejecting states.
pub fn encode_annotations(ucw: &Ucw, st: &SymbolTable) -> Result<Vec<Term>, EncodeError> {
    let mut out = Vec::new();
    out.push(Term::and(vec![
        st.lambda_b_term(ucw.initial, Term::Int(0)),
        Term::eq(st.lambda_n_term(ucw.initial, Term::Int(0)), Term::Real(0)),
    ]));

    let atoms = ucw.alphabet.atoms();
    for (q, row) in ucw.edges.iter().enumerate() {
        for (label, q2) in row {
            // Split the label into environment literals (evaluated per
            // valuation) and output literals (terms over the source state).
            let mut env_lits: Vec<(usize, bool)> = Vec::new();
            let mut out_lits: Vec<(GroundAtom, bool)> = Vec::new();
            for (i, atom) in atoms.iter().enumerate() {
                let positive = label.pos & (1 << i) != 0;
                let negative = label.neg & (1 << i) != 0;
                if !positive && !negative {
                    continue;
                }
                if st.env_atom_value(atom, 0).is_some() {
                    env_lits.push((i, positive));
                } else {
                    out_lits.push(((*atom).clone(), positive));
                }
            }
            let compatible: Vec<u64> = st
                .valuations
                .iter()
                .copied()
                .filter(|&mask| {
                    env_lits.iter().all(|&(i, positive)| {
                        st.env_atom_value(&atoms[i], mask).expect("classified as env") == positive
                    })
                })
                .collect();
            if compatible.is_empty() {
                continue;
            }
            for t in 0..st.bound_global as i64 {
                let mut hyp_base = vec![st.lambda_b_term(q, Term::Int(t))];
                for (atom, positive) in &out_lits {
                    let term = st.out_atom_term(atom, t)?;
                    hyp_base.push(if *positive { term } else { Term::not(term) });
                }
                for &mask in &compatible {
                    let succ = st.delta_term(t, mask);
                    let rank = if ucw.rejecting[*q2] {
                        Term::gt(
                            st.lambda_n_term(*q2, succ.clone()),
                            st.lambda_n_term(q, Term::Int(t)),
                        )
                    } else {
                        Term::ge(
                            st.lambda_n_term(*q2, succ.clone()),
                            st.lambda_n_term(q, Term::Int(t)),
                        )
                    };
                    let concl = Term::and(vec![st.lambda_b_term(*q2, succ), rank]);
                    out.push(Term::implies(Term::and(hyp_base.clone()), concl));
                }
            }
        }
    }
    Ok(out)
}

/// The synchronous input-dependence constraint: states with equal
/// projections and environment valuations agreeing on the visible bits
/// step to equal projections. In ring and network modes this is subsumed
/// by the scheduling-aware isomorphism families; it is emitted standalone
/// in single-process mode, where it degenerates to nothing when every bit
/// is visible.
pub fn encode_input_dependence(st: &SymbolTable, visible: &[bool]) -> Vec<Term> {
    assert_eq!(visible.len(), st.env_bits.len());
    let mut out = Vec::new();
    let bg = st.bound_global as i64;
    for proc in 1..=st.n_sites {
        for t in 0..bg {
            for t2 in 0..bg {
                for &m in &st.valuations {
                    for &m2 in &st.valuations {
                        if (t, m) == (t2, m2) {
                            continue;
                        }
                        // With an identity projection, distinct states can
                        // never have equal projections.
                        if t != t2 && st.proj[proc - 1].is_none() {
                            continue;
                        }
                        let agree = (0..st.env_bits.len()).all(|i| {
                            !visible[i] || (m & (1 << i) != 0) == (m2 & (1 << i) != 0)
                        });
                        if !agree {
                            continue;
                        }
                        let mut hyp = Vec::new();
                        if t != t2 {
                            hyp.push(Term::eq(
                                st.proj_term(proc, Term::Int(t)),
                                st.proj_term(proc, Term::Int(t2)),
                            ));
                        }
                        let concl = Term::eq(
                            st.proj_term(proc, st.delta_term(t, m)),
                            st.proj_term(proc, st.delta_term(t2, m2)),
                        );
                        out.push(Term::implies(Term::and(hyp), concl));
                    }
                }
            }
        }
    }
    out
}

/// Shared declaration block: output labels over local states.
pub(crate) fn declare_labels(script: &mut SmtScript, interface: &ProcessInterface) {
    for signal in interface.all_outputs() {
        script.declare(SymbolTable::label_fn(&signal), vec![Sort::Int], Sort::Bool);
    }
}

#[cfg(test)]
mod tests;
