//! Acceptance oracles for ultimately periodic words `stem·loop^ω`.

use crate::ltl::Ltl;

use super::{graph, Alphabet, AutomatonError, Label, Letter, Nba, Ucw};

/// Positions of the lasso: `0..stem.len()` then the loop, with the last
/// loop position wrapping back to `stem.len()`.
struct Positions {
    stem: usize,
    total: usize,
}

impl Positions {
    fn new(stem: usize, loop_len: usize) -> Self {
        assert!(loop_len > 0, "lasso loop must be nonempty");
        Positions { stem, total: stem + loop_len }
    }

    fn next(&self, p: usize) -> usize {
        if p + 1 < self.total {
            p + 1
        } else {
            self.stem
        }
    }
}

fn letter_at(stem: &[Letter], loop_: &[Letter], p: usize) -> Letter {
    if p < stem.len() {
        stem[p]
    } else {
        loop_[p - stem.len()]
    }
}

/// True iff the product of the automaton with the lasso has a reachable
/// cycle through a marked state.
fn product_has_marked_cycle(
    edges: &[Vec<(Label, usize)>],
    initial: &[usize],
    marked: &[bool],
    stem: &[Letter],
    loop_: &[Letter],
) -> bool {
    let pos = Positions::new(stem.len(), loop_.len());
    let n_states = edges.len();
    let node = |p: usize, q: usize| p * n_states + q;
    let n_nodes = pos.total * n_states;

    // Adjacency of the reachable product, computed once.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    let mut reach = vec![false; n_nodes];
    let mut stack: Vec<usize> = Vec::new();
    for &q in initial {
        let v = node(0, q);
        if !reach[v] {
            reach[v] = true;
            stack.push(v);
        }
    }
    while let Some(v) = stack.pop() {
        let (p, q) = (v / n_states, v % n_states);
        let letter = letter_at(stem, loop_, p);
        let p2 = pos.next(p);
        for (l, q2) in &edges[q] {
            if !l.satisfied_by(letter) {
                continue;
            }
            let w = node(p2, *q2);
            adj[v].push(w);
            if !reach[w] {
                reach[w] = true;
                stack.push(w);
            }
        }
    }

    // Everything in `adj` is reachable from an initial node, so a marked
    // state inside any cycle settles acceptance.
    let (comp, n_comps) = graph::tarjan_scc(n_nodes, |v| adj[v].clone());
    let mut comp_size = vec![0usize; n_comps];
    for v in 0..n_nodes {
        if reach[v] {
            comp_size[comp[v]] += 1;
        }
    }
    (0..n_nodes).any(|v| {
        reach[v]
            && marked[v % n_states]
            && (comp_size[comp[v]] > 1 || adj[v].contains(&v))
    })
}

/// Büchi acceptance of `stem·loop^ω`: some run visits accepting states
/// infinitely often.
pub fn nba_accepts_lasso(nba: &Nba, stem: &[Letter], loop_: &[Letter]) -> bool {
    product_has_marked_cycle(&nba.edges, &nba.initial, &nba.accepting, stem, loop_)
}

/// Universal co-Büchi acceptance of `stem·loop^ω`: every run visits
/// rejecting states only finitely often.
pub fn ucw_accepts_lasso(ucw: &Ucw, stem: &[Letter], loop_: &[Letter]) -> bool {
    !product_has_marked_cycle(&ucw.edges, &[ucw.initial], &ucw.rejecting, stem, loop_)
}

/// Brute-force semantics of a ground formula on `stem·loop^ω`, by fixpoint
/// iteration of truth vectors over the lasso positions. Entirely
/// independent of the automaton construction.
pub fn eval_ltl_on_lasso(
    f: &Ltl,
    alphabet: &Alphabet,
    stem: &[Letter],
    loop_: &[Letter],
) -> Result<bool, AutomatonError> {
    assert!(!loop_.is_empty(), "lasso loop must be nonempty");
    let pos = Positions::new(stem.len(), loop_.len());

    fn fixpoint(
        n: usize,
        start: bool,
        step: impl Fn(usize, &Vec<bool>) -> bool,
    ) -> Vec<bool> {
        let mut v = vec![start; n];
        loop {
            let mut changed = false;
            // Backwards sweep converges quickly on forward-looking operators.
            for p in (0..n).rev() {
                let nv = step(p, &v);
                if nv != v[p] {
                    v[p] = nv;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    fn eval(
        f: &Ltl,
        alphabet: &Alphabet,
        stem: &[Letter],
        loop_: &[Letter],
        pos: &Positions,
    ) -> Result<Vec<bool>, AutomatonError> {
        let n = pos.total;
        let v = match f {
            Ltl::True => vec![true; n],
            Ltl::False => vec![false; n],
            Ltl::Atom(a) => {
                let ground = a
                    .as_ground()
                    .ok_or_else(|| AutomatonError::NotGround(a.to_string()))?;
                let bit = alphabet
                    .position(&ground)
                    .ok_or_else(|| AutomatonError::UnknownAtom(ground.to_string()))?;
                (0..n)
                    .map(|p| letter_at(stem, loop_, p) & (1 << bit) != 0)
                    .collect()
            }
            Ltl::Not(a) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                va.into_iter().map(|b| !b).collect()
            }
            Ltl::And(a, b) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                let vb = eval(b, alphabet, stem, loop_, pos)?;
                va.into_iter().zip(vb).map(|(x, y)| x && y).collect()
            }
            Ltl::Or(a, b) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                let vb = eval(b, alphabet, stem, loop_, pos)?;
                va.into_iter().zip(vb).map(|(x, y)| x || y).collect()
            }
            Ltl::Implies(a, b) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                let vb = eval(b, alphabet, stem, loop_, pos)?;
                va.into_iter().zip(vb).map(|(x, y)| !x || y).collect()
            }
            Ltl::Iff(a, b) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                let vb = eval(b, alphabet, stem, loop_, pos)?;
                va.into_iter().zip(vb).map(|(x, y)| x == y).collect()
            }
            // Greatest fixpoint: v(p) = a(p) && v(next p).
            Ltl::Globally(a) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                fixpoint(n, true, |p, v| va[p] && v[pos.next(p)])
            }
            // Least fixpoint: v(p) = a(p) || v(next p).
            Ltl::Eventually(a) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                fixpoint(n, false, |p, v| va[p] || v[pos.next(p)])
            }
            // Least fixpoint: v(p) = b(p) || (a(p) && v(next p)).
            Ltl::Until(a, b) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                let vb = eval(b, alphabet, stem, loop_, pos)?;
                fixpoint(n, false, |p, v| vb[p] || (va[p] && v[pos.next(p)]))
            }
            // Greatest fixpoint of the same functional.
            Ltl::WeakUntil(a, b) => {
                let va = eval(a, alphabet, stem, loop_, pos)?;
                let vb = eval(b, alphabet, stem, loop_, pos)?;
                fixpoint(n, true, |p, v| vb[p] || (va[p] && v[pos.next(p)]))
            }
        };
        Ok(v)
    }

    Ok(eval(f, alphabet, stem, loop_, &pos)?[0])
}
