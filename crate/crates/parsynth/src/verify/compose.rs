//! Scheduled composition of processes over token-passing wirings.
//!
//! The scheduler is part of the environment: every environment choice
//! selects exactly one process plus a valuation of all request inputs. The
//! scheduled process steps; a process offering the token to the scheduled
//! process steps as well (token handoff moves both ends); everyone else
//! keeps its state.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automaton::{Alphabet, Letter};
use crate::ltl::{GroundAtom, SCHED_SIGNAL, SEND_SIGNAL, TOKEN_SIGNAL};
use crate::topology::NetworkGraph;

use super::{hub_process, ProcessLts, VerifyError, DEFAULT_STATE_CAP};

/// One environment move: which process is scheduled and the letter bits of
/// all environment inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvChoice {
    /// Scheduled process, 0-based.
    pub sched: usize,
    /// Per-process env input masks, packed; see `GlobalLts::env_offsets`.
    pub env_bits: u64,
    /// Alphabet mask of the environment part of the letter.
    pub letter: Letter,
}

/// Reachable composition of process implementations.
pub struct GlobalLts {
    pub atoms: Alphabet,
    pub n_procs: usize,
    /// Local-state tuples, interned; index 0 is the initial state.
    pub states: Vec<Vec<usize>>,
    pub initial: usize,
    /// All admissible environment choices, in deterministic order.
    pub choices: Vec<EnvChoice>,
    /// `transitions[state][choice] -> state`.
    pub transitions: Vec<Vec<usize>>,
    /// Output part of the letter emitted in each state.
    pub output_letter: Vec<Letter>,
    /// Per process, per local state: (tok, send).
    pub tok_send: Vec<Vec<(bool, bool)>>,
    /// Wiring: `edges[i]` lists successors of process i (0-based).
    pub succ: Vec<Vec<usize>>,
    /// Bit offset of each process's env inputs inside `EnvChoice::env_bits`.
    pub env_offsets: Vec<usize>,
    pub env_widths: Vec<usize>,
}

impl GlobalLts {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Full letter (outputs plus environment) for a state under a choice.
    pub fn letter(&self, state: usize, choice: &EnvChoice) -> Letter {
        self.output_letter[state] | choice.letter
    }

    pub fn tok_of(&self, state: usize, proc: usize) -> bool {
        self.tok_send[proc][self.states[state][proc]].0
    }

    pub fn send_of(&self, state: usize, proc: usize) -> bool {
        self.tok_send[proc][self.states[state][proc]].1
    }

    /// Dot export of the reachable composition, states labeled with the
    /// outputs that are high.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name} {{");
        let _ = writeln!(out, "  node [shape=box, style=rounded];");
        for s in 0..self.n_states() {
            let mut high = Vec::new();
            for (i, a) in self.atoms.atoms().iter().enumerate() {
                if self.output_letter[s] & (1 << i) != 0 {
                    high.push(a.to_string());
                }
            }
            let _ = writeln!(out, "  s{s} [label=\"{}\"];", high.join(" "));
        }
        for s in 0..self.n_states() {
            let mut seen = std::collections::BTreeSet::new();
            for c in 0..self.choices.len() {
                let t = self.transitions[s][c];
                if t != s {
                    seen.insert(t);
                }
            }
            for t in seen {
                let _ = writeln!(out, "  s{s} -> s{t};");
            }
        }
        out.push_str("}\n");
        out
    }
}

struct Wiring<'a> {
    procs: Vec<&'a ProcessLts>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    token_at: usize,
}

fn compose(w: &Wiring<'_>, cap: usize) -> Result<GlobalLts, VerifyError> {
    let n = w.procs.len();
    if n == 0 {
        return Err(VerifyError::EmptyGraph);
    }

    // Ground atom universe: per-process outputs (declared + tok/send),
    // env inputs, and scheduling atoms.
    let mut atom_list: Vec<GroundAtom> = Vec::new();
    for (i, p) in w.procs.iter().enumerate() {
        let id = (i + 1) as u32;
        for o in &p.outputs {
            atom_list.push(GroundAtom::new(o.clone(), id));
        }
        atom_list.push(GroundAtom::new(TOKEN_SIGNAL, id));
        atom_list.push(GroundAtom::new(SEND_SIGNAL, id));
        for r in &p.env_inputs {
            atom_list.push(GroundAtom::new(r.clone(), id));
        }
        atom_list.push(GroundAtom::new(SCHED_SIGNAL, id));
    }
    let atoms = Alphabet::new(atom_list)?;

    // Env input packing.
    let mut env_offsets = vec![0usize; n];
    let mut env_widths = vec![0usize; n];
    let mut total_bits = 0usize;
    for i in 0..n {
        env_offsets[i] = total_bits;
        env_widths[i] = w.procs[i].env_inputs.len();
        total_bits += env_widths[i];
    }

    // All environment choices: scheduled process × request valuations.
    let mut choices = Vec::new();
    for sched in 0..n {
        for bits in 0..(1u64 << total_bits) {
            let mut letter: Letter = 0;
            for (i, p) in w.procs.iter().enumerate() {
                let id = (i + 1) as u32;
                for (k, r) in p.env_inputs.iter().enumerate() {
                    if bits & (1 << (env_offsets[i] + k)) != 0 {
                        let pos = atoms
                            .position(&GroundAtom::new(r.clone(), id))
                            .expect("input atom present");
                        letter |= 1 << pos;
                    }
                }
            }
            let pos = atoms
                .position(&GroundAtom::new(SCHED_SIGNAL, (sched + 1) as u32))
                .expect("sched atom present");
            letter |= 1 << pos;
            choices.push(EnvChoice { sched, env_bits: bits, letter });
        }
    }

    let tok_send: Vec<Vec<(bool, bool)>> = w
        .procs
        .iter()
        .map(|p| p.labels.iter().map(|l| (l.tok, l.send)).collect())
        .collect();

    let output_letter_of = |tuple: &[usize]| -> Letter {
        let mut letter: Letter = 0;
        for (i, p) in w.procs.iter().enumerate() {
            let id = (i + 1) as u32;
            let l = &p.labels[tuple[i]];
            for (k, o) in p.outputs.iter().enumerate() {
                if l.out & (1 << k) != 0 {
                    let pos = atoms.position(&GroundAtom::new(o.clone(), id)).unwrap();
                    letter |= 1 << pos;
                }
            }
            if l.tok {
                let pos = atoms.position(&GroundAtom::new(TOKEN_SIGNAL, id)).unwrap();
                letter |= 1 << pos;
            }
            if l.send {
                let pos = atoms.position(&GroundAtom::new(SEND_SIGNAL, id)).unwrap();
                letter |= 1 << pos;
            }
        }
        letter
    };

    let initial_tuple: Vec<usize> = (0..n)
        .map(|i| if i == w.token_at { w.procs[i].init_token } else { w.procs[i].init_idle })
        .collect();

    let mut states: Vec<Vec<usize>> = vec![initial_tuple.clone()];
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
    ids.insert(initial_tuple, 0);
    let mut transitions: Vec<Vec<usize>> = Vec::new();
    let mut frontier = 0usize;
    while frontier < states.len() {
        let tuple = states[frontier].clone();
        let mut row = Vec::with_capacity(choices.len());
        for choice in &choices {
            let mut next = tuple.clone();
            for i in 0..n {
                let p = w.procs[i];
                let local = tuple[i];
                let env_mask =
                    ((choice.env_bits >> env_offsets[i]) & ((1 << env_widths[i]) - 1)) as usize;
                if choice.sched == i {
                    let recv = w.pred[i]
                        .iter()
                        .any(|&q| tok_send[q][tuple[q]].1);
                    next[i] = p.step_sched[local][env_mask][recv as usize];
                } else if tok_send[i][local].1 && w.succ[i].contains(&choice.sched) {
                    next[i] = p.step_pass[local][env_mask];
                }
            }
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    if id >= cap {
                        return Err(VerifyError::StateCapExceeded(cap));
                    }
                    ids.insert(next.clone(), id);
                    states.push(next);
                    id
                }
            };
            row.push(id);
        }
        transitions.push(row);
        frontier += 1;
    }

    let output_letter: Vec<Letter> = states.iter().map(|t| output_letter_of(t)).collect();
    Ok(GlobalLts {
        atoms,
        n_procs: n,
        states,
        initial: 0,
        choices,
        transitions,
        output_letter,
        tok_send,
        succ: w.succ.clone(),
        env_offsets,
        env_widths,
    })
}

/// Composes `n` copies of a process in a unidirectional ring; process 1
/// holds the token initially.
pub fn compose_ring(p: &ProcessLts, n: usize, cap: usize) -> Result<GlobalLts, VerifyError> {
    if n == 0 {
        return Err(VerifyError::TooFewProcesses(1));
    }
    p.assert_consistent();
    let procs: Vec<&ProcessLts> = (0..n).map(|_| p).collect();
    let succ: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
    let pred: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + n - 1) % n]).collect();
    compose(&Wiring { procs, succ, pred, token_at: 0 }, cap)
}

/// Composes the process over a network graph, with the fixed hub
/// implementation at every node listed in `hubs`. Process ids follow the
/// sorted node order of the graph; the token starts at `token_at` (default:
/// the first non-hub node).
pub fn compose_network(
    p: &ProcessLts,
    g: &NetworkGraph,
    hubs: &[u32],
    token_at: Option<u32>,
    cap: usize,
) -> Result<GlobalLts, VerifyError> {
    let nodes = g.nodes();
    if nodes.is_empty() {
        return Err(VerifyError::EmptyGraph);
    }
    p.assert_consistent();
    let hub = hub_process();
    let index_of = |id: u32| -> usize {
        nodes.binary_search(&id).expect("node id present in graph")
    };
    let procs: Vec<&ProcessLts> = nodes
        .iter()
        .map(|id| if hubs.contains(id) { &hub } else { p })
        .collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for &(a, b) in g.edges() {
        let (ia, ib) = (index_of(a), index_of(b));
        succ[ia].push(ib);
        pred[ib].push(ia);
    }
    let token_at = match token_at {
        Some(id) => index_of(id),
        None => nodes
            .iter()
            .position(|id| !hubs.contains(id))
            .ok_or(VerifyError::TooFewProcesses(1))?,
    };
    compose(&Wiring { procs, succ, pred, token_at }, cap)
}

/// Composition of a single always-scheduled process with its token input
/// driven by the environment, used to cross-check single-process synthesis
/// results at the word level.
pub fn compose_single(p: &ProcessLts, cap: usize) -> Result<GlobalLts, VerifyError> {
    p.assert_consistent();
    // A 1-ring where the process receives its own send output.
    compose_ring(p, 1, cap)
}

/// Re-export used by checks that need the default cap.
pub(crate) fn default_cap() -> usize {
    DEFAULT_STATE_CAP
}
