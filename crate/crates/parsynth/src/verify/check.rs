//! Model checking of ground LTL\X properties over a composition, and the
//! structural invariant checks run on every synthesized process.

use std::collections::HashMap;
use std::fmt;

use crate::automaton::{nba_for_negation, Letter, Nba};
use crate::ltl::Ltl;

use super::{GlobalLts, VerifyError};

/// A violating run: a finite stem into a repeating loop. Each step records
/// the composition state and the full letter emitted while taking it.
#[derive(Debug, Clone)]
pub struct LassoCounterexample {
    pub stem: Vec<(usize, Letter)>,
    pub cycle: Vec<(usize, Letter)>,
}

#[derive(Debug)]
pub enum Verdict {
    Holds,
    Violated(LassoCounterexample),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

pub struct CounterexampleDisplay<'a> {
    pub cex: &'a LassoCounterexample,
    pub lts: &'a GlobalLts,
}

impl fmt::Display for CounterexampleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stem:")?;
        for (s, letter) in &self.cex.stem {
            writeln!(f, "  state {s}: {}", self.lts.atoms.display_letter(*letter))?;
        }
        writeln!(f, "loop:")?;
        for (s, letter) in &self.cex.cycle {
            writeln!(f, "  state {s}: {}", self.lts.atoms.display_letter(*letter))?;
        }
        Ok(())
    }
}

/// Explicit-state check of a ground formula over the composition: builds
/// the Büchi automaton of the negation and searches the product for a
/// reachable accepting cycle by nested depth-first search. Fairness
/// premises are part of the formula itself.
pub fn model_check(lts: &GlobalLts, f: &Ltl) -> Result<Verdict, VerifyError> {
    model_check_with_cap(lts, f, super::compose::default_cap())
}

pub fn model_check_with_cap(
    lts: &GlobalLts,
    f: &Ltl,
    cap: usize,
) -> Result<Verdict, VerifyError> {
    let ground_atoms = f
        .ground_atoms()
        .map_err(|e| VerifyError::UndeclaredAtom(e.to_string()))?;
    for ground in ground_atoms {
        if lts.atoms.position(&ground).is_none() {
            return Err(VerifyError::UndeclaredAtom(ground.to_string()));
        }
    }
    let nba = nba_for_negation(f, &lts.atoms)?;
    let search = ProductSearch { lts, nba: &nba, cap };
    search.run()
}

/// Product node: composition state × automaton state.
type Node = (usize, usize);

struct ProductSearch<'a> {
    lts: &'a GlobalLts,
    nba: &'a Nba,
    cap: usize,
}

impl ProductSearch<'_> {
    fn successors(&self, node: Node) -> Vec<(Node, Letter)> {
        let (s, q) = node;
        let mut out = Vec::new();
        for (c, choice) in self.lts.choices.iter().enumerate() {
            let letter = self.lts.letter(s, choice);
            let s2 = self.lts.transitions[s][c];
            for (label, q2) in &self.nba.edges[q] {
                if label.satisfied_by(letter) {
                    out.push(((s2, *q2), letter));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn run(&self) -> Result<Verdict, VerifyError> {
        // Nested DFS: the outer (blue) search explores the product in
        // post-order; when an accepting node is retired, the inner (red)
        // search looks for a cycle back to it. The red visited set is
        // shared across all inner searches.
        let mut blue: HashMap<Node, bool> = HashMap::new(); // false = on stack
        let mut red: HashMap<Node, ()> = HashMap::new();

        for &q0 in &self.nba.initial {
            let root: Node = (self.lts.initial, q0);
            if blue.contains_key(&root) {
                continue;
            }
            // Frame: node, successor list, cursor, letter that entered it.
            let mut stack: Vec<(Node, Vec<(Node, Letter)>, usize, Letter)> = Vec::new();
            blue.insert(root, false);
            stack.push((root, self.successors(root), 0, 0));
            while let Some(frame) = stack.last_mut() {
                let (node, succs, cursor) = (frame.0, &frame.1, frame.2);
                if blue.len() + red.len() > self.cap {
                    return Err(VerifyError::StateCapExceeded(self.cap));
                }
                if cursor < succs.len() {
                    let (next, letter) = succs[cursor];
                    frame.2 += 1;
                    if !blue.contains_key(&next) {
                        blue.insert(next, false);
                        let succs = self.successors(next);
                        stack.push((next, succs, 0, letter));
                    }
                    continue;
                }
                // Post-order: red search from accepting nodes.
                if self.nba.accepting[node.1] {
                    if let Some(cycle) = self.red_search(node, &mut red) {
                        let mut stem: Vec<(usize, Letter)> = Vec::new();
                        for i in 0..stack.len() - 1 {
                            let entry_letter = stack[i + 1].3;
                            stem.push((stack[i].0 .0, entry_letter));
                        }
                        return Ok(Verdict::Violated(LassoCounterexample {
                            stem,
                            cycle,
                        }));
                    }
                }
                blue.insert(node, true);
                stack.pop();
            }
        }
        Ok(Verdict::Holds)
    }

    /// Searches for a path from `seed` back to `seed`; returns the cycle
    /// steps `(state, letter)` when found.
    fn red_search(&self, seed: Node, red: &mut HashMap<Node, ()>) -> Option<Vec<(usize, Letter)>> {
        let mut stack: Vec<(Node, Vec<(Node, Letter)>, usize, Letter)> = Vec::new();
        red.insert(seed, ());
        stack.push((seed, self.successors(seed), 0, 0));
        while let Some(frame) = stack.last_mut() {
            let (node, succs, cursor) = (frame.0, &frame.1, frame.2);
            if cursor < succs.len() {
                let (next, letter) = succs[cursor];
                frame.2 += 1;
                if next == seed {
                    // Cycle closed: collect letters along the stack.
                    let mut cycle = Vec::new();
                    for i in 0..stack.len() {
                        let exit_letter =
                            if i + 1 < stack.len() { stack[i + 1].3 } else { letter };
                        cycle.push((stack[i].0 .0, exit_letter));
                    }
                    let _ = node;
                    return Some(cycle);
                }
                if !red.contains_key(&next) {
                    red.insert(next, ());
                    let succs = self.successors(next);
                    stack.push((next, succs, 0, letter));
                }
                continue;
            }
            stack.pop();
        }
        None
    }
}

/// Exactly one process holds the token in every reachable state.
pub fn check_one_token(lts: &GlobalLts) -> Result<(), String> {
    for s in 0..lts.n_states() {
        let holders: Vec<usize> =
            (0..lts.n_procs).filter(|&i| lts.tok_of(s, i)).map(|i| i + 1).collect();
        if holders.len() != 1 {
            return Err(format!(
                "state {s} has {} token holders: {holders:?}",
                holders.len()
            ));
        }
    }
    Ok(())
}

/// Processes that are neither scheduled nor involved in a token handoff
/// keep their local state (and hence their outputs) in every transition.
pub fn check_unscheduled_invariance(lts: &GlobalLts) -> Result<(), String> {
    for s in 0..lts.n_states() {
        for (c, choice) in lts.choices.iter().enumerate() {
            let t = lts.transitions[s][c];
            for i in 0..lts.n_procs {
                if i == choice.sched {
                    continue;
                }
                let handing_off = lts.send_of(s, i) && lts.succ[i].contains(&choice.sched);
                if handing_off {
                    continue;
                }
                if lts.states[s][i] != lts.states[t][i] {
                    return Err(format!(
                        "process {} moved from {} to {} in state {s} without being \
                         scheduled or passing the token",
                        i + 1,
                        lts.states[s][i],
                        lts.states[t][i]
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Validates that a counterexample really violates the formula, by feeding
/// its word to the brute-force lasso oracle.
pub fn counterexample_word(
    cex: &LassoCounterexample,
) -> (Vec<Letter>, Vec<Letter>) {
    let stem = cex.stem.iter().map(|&(_, l)| l).collect();
    let cycle = cex.cycle.iter().map(|&(_, l)| l).collect();
    (stem, cycle)
}
