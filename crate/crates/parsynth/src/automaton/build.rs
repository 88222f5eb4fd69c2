//! LTL\X to Büchi translation.
//!
//! The pipeline is a tableau over temporal obligations: formulas go to
//! negation normal form, each `U`/`R` subformula becomes an obligation slot,
//! states of the intermediate generalized automaton are obligation sets
//! (states with identical obligations merge), acceptance is tracked on
//! edges per until-slot, and a fixed-order counter turns the generalized
//! automaton into a Büchi automaton. Small automata matter here: the SMT
//! constraint count downstream is linear in states × transitions × inputs.

use std::collections::HashMap;

use crate::ltl::Ltl;

use super::{graph, Alphabet, AutomatonError, Label, Nba, Ucw};

type Slots = u128;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Nnf {
    True,
    False,
    Lit { atom: usize, positive: bool },
    And(usize, usize),
    Or(usize, usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    ids: HashMap<Nnf, usize>,
}

impl Arena {
    fn intern(&mut self, n: Nnf) -> usize {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(n.clone());
        self.ids.insert(n, id);
        id
    }
}

fn to_nnf(
    f: &Ltl,
    positive: bool,
    alphabet: &Alphabet,
    arena: &mut Arena,
) -> Result<usize, AutomatonError> {
    let id = match (f, positive) {
        (Ltl::True, true) | (Ltl::False, false) => arena.intern(Nnf::True),
        (Ltl::True, false) | (Ltl::False, true) => arena.intern(Nnf::False),
        (Ltl::Atom(a), pol) => {
            let ground = a
                .as_ground()
                .ok_or_else(|| AutomatonError::NotGround(a.to_string()))?;
            let atom = alphabet
                .position(&ground)
                .ok_or_else(|| AutomatonError::UnknownAtom(ground.to_string()))?;
            arena.intern(Nnf::Lit { atom, positive: pol })
        }
        (Ltl::Not(a), pol) => to_nnf(a, !pol, alphabet, arena)?,
        (Ltl::And(a, b), true) | (Ltl::Or(a, b), false) => {
            let x = to_nnf(a, positive, alphabet, arena)?;
            let y = to_nnf(b, positive, alphabet, arena)?;
            arena.intern(Nnf::And(x, y))
        }
        (Ltl::And(a, b), false) | (Ltl::Or(a, b), true) => {
            let x = to_nnf(a, positive, alphabet, arena)?;
            let y = to_nnf(b, positive, alphabet, arena)?;
            arena.intern(Nnf::Or(x, y))
        }
        (Ltl::Implies(a, b), true) => {
            let x = to_nnf(a, false, alphabet, arena)?;
            let y = to_nnf(b, true, alphabet, arena)?;
            arena.intern(Nnf::Or(x, y))
        }
        (Ltl::Implies(a, b), false) => {
            let x = to_nnf(a, true, alphabet, arena)?;
            let y = to_nnf(b, false, alphabet, arena)?;
            arena.intern(Nnf::And(x, y))
        }
        (Ltl::Iff(a, b), pol) => {
            let pp = {
                let x = to_nnf(a, true, alphabet, arena)?;
                let y = to_nnf(b, pol, alphabet, arena)?;
                arena.intern(Nnf::And(x, y))
            };
            let nn = {
                let x = to_nnf(a, false, alphabet, arena)?;
                let y = to_nnf(b, !pol, alphabet, arena)?;
                arena.intern(Nnf::And(x, y))
            };
            arena.intern(Nnf::Or(pp, nn))
        }
        (Ltl::Globally(a), true) | (Ltl::Eventually(a), false) => {
            let x = to_nnf(a, positive, alphabet, arena)?;
            let ff = arena.intern(Nnf::False);
            arena.intern(Nnf::Release(ff, x))
        }
        (Ltl::Globally(a), false) | (Ltl::Eventually(a), true) => {
            let x = to_nnf(a, positive, alphabet, arena)?;
            let tt = arena.intern(Nnf::True);
            arena.intern(Nnf::Until(tt, x))
        }
        (Ltl::Until(a, b), true) => {
            let x = to_nnf(a, true, alphabet, arena)?;
            let y = to_nnf(b, true, alphabet, arena)?;
            arena.intern(Nnf::Until(x, y))
        }
        (Ltl::Until(a, b), false) => {
            let x = to_nnf(a, false, alphabet, arena)?;
            let y = to_nnf(b, false, alphabet, arena)?;
            arena.intern(Nnf::Release(x, y))
        }
        // a W b = b R (a | b)
        (Ltl::WeakUntil(a, b), true) => {
            let x = to_nnf(a, true, alphabet, arena)?;
            let y = to_nnf(b, true, alphabet, arena)?;
            let xy = arena.intern(Nnf::Or(x, y));
            arena.intern(Nnf::Release(y, xy))
        }
        // !(a W b) = !b U (!a & !b)
        (Ltl::WeakUntil(a, b), false) => {
            let x = to_nnf(a, false, alphabet, arena)?;
            let y = to_nnf(b, false, alphabet, arena)?;
            let xy = arena.intern(Nnf::And(x, y));
            arena.intern(Nnf::Until(y, xy))
        }
    };
    Ok(id)
}

/// One disjunct of a transition function value: a letter constraint plus the
/// obligations that move to the next position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Move {
    label: Label,
    dst: Slots,
}

struct Tableau {
    arena: Arena,
    /// Obligation slots, in arena id order: slot -> arena node id.
    slots: Vec<usize>,
    slot_of: HashMap<usize, usize>,
    until_mask: Slots,
    delta_memo: HashMap<usize, Vec<Move>>,
}

impl Tableau {
    fn new(arena: Arena) -> Result<Self, AutomatonError> {
        let mut slots = Vec::new();
        let mut slot_of = HashMap::new();
        let mut until_mask: Slots = 0;
        for (id, node) in arena.nodes.iter().enumerate() {
            if matches!(node, Nnf::Until(_, _) | Nnf::Release(_, _)) {
                let slot = slots.len();
                slots.push(id);
                slot_of.insert(id, slot);
                if matches!(node, Nnf::Until(_, _)) {
                    until_mask |= 1 << slot;
                }
            }
        }
        if slots.len() > 128 {
            return Err(AutomatonError::TooManyObligations(slots.len()));
        }
        Ok(Tableau { arena, slots, slot_of, until_mask, delta_memo: HashMap::new() })
    }

    fn product(xs: &[Move], ys: &[Move]) -> Vec<Move> {
        let mut out = Vec::new();
        for x in xs {
            for y in ys {
                if let Some(label) = x.label.conj(&y.label) {
                    out.push(Move { label, dst: x.dst | y.dst });
                }
            }
        }
        out.dedup();
        out
    }

    fn delta(&mut self, id: usize) -> Vec<Move> {
        if let Some(m) = self.delta_memo.get(&id) {
            return m.clone();
        }
        let moves = match self.arena.nodes[id].clone() {
            Nnf::True => vec![Move { label: Label::top(), dst: 0 }],
            Nnf::False => vec![],
            Nnf::Lit { atom, positive } => {
                vec![Move { label: Label::literal(atom, positive), dst: 0 }]
            }
            Nnf::And(a, b) => {
                let da = self.delta(a);
                let db = self.delta(b);
                Self::product(&da, &db)
            }
            Nnf::Or(a, b) => {
                let mut da = self.delta(a);
                da.extend(self.delta(b));
                da.dedup();
                da
            }
            Nnf::Until(a, b) => {
                let slot = self.slot_of[&id];
                let defer = vec![Move { label: Label::top(), dst: 1 << slot }];
                let da = self.delta(a);
                let mut out = self.delta(b);
                out.extend(Self::product(&da, &defer));
                out.dedup();
                out
            }
            Nnf::Release(a, b) => {
                let slot = self.slot_of[&id];
                let mut hold = self.delta(a);
                hold.push(Move { label: Label::top(), dst: 1 << slot });
                let db = self.delta(b);
                Self::product(&db, &hold)
            }
        };
        self.delta_memo.insert(id, moves.clone());
        moves
    }

    fn is_until_slot(&self, slot: usize) -> bool {
        self.until_mask & (1 << slot) != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct GEdge {
    label: Label,
    dst: usize,
    /// Until slots this edge counts as progress for.
    acc: Slots,
}

struct Gba {
    /// Obligation set per state.
    states: Vec<Slots>,
    init_edges: Vec<GEdge>,
    edges: Vec<Vec<GEdge>>,
    until_mask: Slots,
}

/// Expands one obligation set into edges: the product of the member
/// transition functions, with per-until progress recorded on each edge.
fn expand(
    tableau: &mut Tableau,
    members: Slots,
    intern: &mut dyn FnMut(Slots) -> usize,
) -> Vec<(Label, usize, Slots)> {
    // (label, dst, fulfilled-by-choice)
    let mut combos: Vec<(Label, Slots, Slots)> = vec![(Label::top(), 0, 0)];
    for slot in 0..tableau.slots.len() {
        if members & (1 << slot) == 0 {
            continue;
        }
        let options = tableau.delta(tableau.slots[slot]);
        let mut next = Vec::new();
        for (label, dst, ful) in &combos {
            for opt in &options {
                let Some(label2) = label.conj(&opt.label) else { continue };
                let discharged =
                    tableau.is_until_slot(slot) && opt.dst & (1 << slot) == 0;
                let mut ful2 = *ful;
                if discharged {
                    ful2 |= 1 << slot;
                }
                next.push((label2, dst | opt.dst, ful2));
            }
        }
        combos = next;
    }
    // An edge makes progress for an until slot if the slot is absent from
    // the target or some derivation dischargeed it.
    let mut merged: Vec<(Label, Slots, Slots)> = Vec::new();
    for (label, dst, ful) in combos {
        let acc = (ful | (!dst & tableau.until_mask)) & tableau.until_mask;
        if let Some(e) = merged.iter_mut().find(|e| e.0 == label && e.1 == dst) {
            e.2 |= acc;
        } else {
            merged.push((label, dst, acc));
        }
    }
    // Domination pruning: drop an edge when another one has a weaker label,
    // fewer obligations and at least the same progress.
    let mut keep = vec![true; merged.len()];
    for i in 0..merged.len() {
        if !keep[i] {
            continue;
        }
        for j in 0..merged.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (li, di, ai) = merged[i];
            let (lj, dj, aj) = merged[j];
            let dominates = li.subsumes(&lj)
                && (di & dj) == di
                && (ai & aj) == aj
                && (li, di, ai) != (lj, dj, aj);
            if dominates {
                keep[j] = false;
            }
        }
    }
    merged
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .map(|(label, dst, acc)| (label, intern(dst), acc))
        .collect()
}

fn build_gba(root: usize, mut tableau: Tableau) -> Gba {
    let mut states: Vec<Slots> = Vec::new();
    let mut ids: HashMap<Slots, usize> = HashMap::new();
    let mut worklist: Vec<usize> = Vec::new();

    // Interning closure shared by all expansions.
    fn intern_state(
        set: Slots,
        states: &mut Vec<Slots>,
        ids: &mut HashMap<Slots, usize>,
        worklist: &mut Vec<usize>,
    ) -> usize {
        if let Some(&id) = ids.get(&set) {
            return id;
        }
        let id = states.len();
        states.push(set);
        ids.insert(set, id);
        worklist.push(id);
        id
    }

    let init_moves = tableau.delta(root);
    let mut init_edges = Vec::new();
    {
        let mut merged: Vec<(Label, Slots, Slots)> = Vec::new();
        for m in init_moves {
            let acc = (!m.dst & tableau.until_mask) & tableau.until_mask;
            if let Some(e) = merged.iter_mut().find(|e| e.0 == m.label && e.1 == m.dst) {
                e.2 |= acc;
            } else {
                merged.push((m.label, m.dst, acc));
            }
        }
        for (label, dst, acc) in merged {
            let id = intern_state(dst, &mut states, &mut ids, &mut worklist);
            init_edges.push(GEdge { label, dst: id, acc });
        }
    }

    let mut edges: Vec<Vec<GEdge>> = Vec::new();
    let mut done = 0usize;
    while done < worklist.len() {
        let state = worklist[done];
        done += 1;
        let members = states[state];
        let expanded = expand(&mut tableau, members, &mut |set| {
            intern_state(set, &mut states, &mut ids, &mut worklist)
        });
        while edges.len() < states.len() {
            edges.push(Vec::new());
        }
        edges[state] = expanded
            .into_iter()
            .map(|(label, dst, acc)| GEdge { label, dst, acc })
            .collect();
    }
    while edges.len() < states.len() {
        edges.push(Vec::new());
    }
    Gba { states, init_edges, edges, until_mask: tableau.until_mask }
}

/// Merges states with identical outgoing behaviour (coarsest partition
/// stable under edge signatures).
fn minimize_gba(gba: &mut Gba) {
    let n = gba.states.len();
    if n == 0 {
        return;
    }
    let mut class = vec![0usize; n];
    loop {
        let mut sig_ids: HashMap<Vec<(Label, usize, Slots)>, usize> = HashMap::new();
        let mut next_class = vec![0usize; n];
        let mut count = 0usize;
        for v in 0..n {
            let mut sig: Vec<(Label, usize, Slots)> = gba.edges[v]
                .iter()
                .map(|e| (e.label, class[e.dst], e.acc))
                .collect();
            sig.sort();
            sig.dedup();
            let id = *sig_ids.entry(sig).or_insert_with(|| {
                count += 1;
                count - 1
            });
            next_class[v] = id;
        }
        let stable = next_class == class;
        class = next_class;
        if stable {
            break;
        }
    }
    // Rebuild on class representatives.
    let n_classes = class.iter().copied().max().unwrap_or(0) + 1;
    let mut rep = vec![usize::MAX; n_classes];
    for v in 0..n {
        if rep[class[v]] == usize::MAX {
            rep[class[v]] = v;
        }
    }
    let mut new_states = Vec::with_capacity(n_classes);
    let mut new_edges = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let v = rep[c];
        new_states.push(gba.states[v]);
        let mut row: Vec<GEdge> = gba.edges[v]
            .iter()
            .map(|e| GEdge { label: e.label, dst: class[e.dst], acc: e.acc })
            .collect();
        row.sort_by_key(|e| (e.label, e.dst, e.acc));
        row.dedup();
        new_edges.push(row);
    }
    let mut init: Vec<GEdge> = gba
        .init_edges
        .iter()
        .map(|e| GEdge { label: e.label, dst: class[e.dst], acc: e.acc })
        .collect();
    init.sort_by_key(|e| (e.label, e.dst, e.acc));
    init.dedup();
    gba.states = new_states;
    gba.edges = new_edges;
    gba.init_edges = init;
}

/// Counter degeneralization with a fixed slot order over the active
/// acceptance sets; the result is deterministic for reproducible output.
fn degeneralize(gba: &Gba, alphabet: &Alphabet) -> Nba {
    // An acceptance set needs a counter phase only if some edge misses it;
    // sets carried by every edge are trivially satisfied.
    let mut active: Slots = 0;
    for e in gba.init_edges.iter().chain(gba.edges.iter().flatten()) {
        active |= !e.acc & gba.until_mask;
    }
    let order: Vec<usize> = (0..128).filter(|b| active & (1 << b) != 0).collect();
    let r = order.len();

    // Node 0 is the dedicated initial state; others are (gba state, phase).
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    let mut edges: Vec<Vec<(Label, usize)>> = vec![Vec::new()];
    let mut accepting = vec![r == 0];

    let advance = |phase: usize, acc: Slots| -> usize {
        let mut k = if phase == r { 0 } else { phase };
        while k < r && acc & (1 << order[k]) != 0 {
            k += 1;
        }
        k
    };

    let mut worklist: Vec<usize> = Vec::new();
    {
        // Borrowed by value to keep the closure simple.
        let mut intern = |key: (usize, usize),
                          nodes: &mut Vec<(usize, usize)>,
                          edges: &mut Vec<Vec<(Label, usize)>>,
                          accepting: &mut Vec<bool>,
                          worklist: &mut Vec<usize>|
         -> usize {
            if let Some(&id) = ids.get(&key) {
                return id;
            }
            let id = nodes.len() + 1;
            ids.insert(key, id);
            nodes.push(key);
            edges.push(Vec::new());
            accepting.push(key.1 == r);
            worklist.push(id);
            id
        };

        for e in &gba.init_edges {
            let phase = advance(0, e.acc);
            let id = intern((e.dst, phase), &mut nodes, &mut edges, &mut accepting, &mut worklist);
            edges[0].push((e.label, id));
        }
        let mut done = 0;
        while done < worklist.len() {
            let node = worklist[done];
            done += 1;
            let (q, phase) = nodes[node - 1];
            let mut row = Vec::new();
            for e in &gba.edges[q] {
                let p2 = advance(phase, e.acc);
                let id =
                    intern((e.dst, p2), &mut nodes, &mut edges, &mut accepting, &mut worklist);
                row.push((e.label, id));
            }
            row.sort_by_key(|(l, d)| (*l, *d));
            row.dedup();
            edges[node] = row;
        }
    }

    Nba { alphabet: alphabet.clone(), initial: vec![0], edges, accepting }
}

/// Removes states that cannot contribute accepting runs and merges
/// behaviourally identical states.
fn simplify_nba(nba: &Nba) -> Nba {
    let n = nba.n_states();
    let succ = |v: usize| -> Vec<usize> { nba.edges[v].iter().map(|&(_, d)| d).collect() };
    let useful = graph::can_reach_marked_cycle(n, &succ, |v| nba.accepting[v]);

    let mut map = vec![usize::MAX; n];
    let mut kept = Vec::new();
    for v in 0..n {
        if useful[v] || nba.initial.contains(&v) {
            map[v] = kept.len();
            kept.push(v);
        }
    }
    let mut edges: Vec<Vec<(Label, usize)>> = Vec::with_capacity(kept.len());
    for &v in &kept {
        let mut row: Vec<(Label, usize)> = nba.edges[v]
            .iter()
            .filter(|(_, d)| map[*d] != usize::MAX && useful[*d])
            .map(|&(l, d)| (l, map[d]))
            .collect();
        row.sort_by_key(|(l, d)| (*l, *d));
        row.dedup();
        edges.push(row);
    }
    let accepting: Vec<bool> = kept.iter().map(|&v| nba.accepting[v]).collect();
    let initial: Vec<usize> =
        nba.initial.iter().filter(|&&v| map[v] != usize::MAX).map(|&v| map[v]).collect();
    let out = Nba { alphabet: nba.alphabet.clone(), initial, edges, accepting };

    // Behavioural merge.
    let n = out.n_states();
    if n == 0 {
        return out;
    }
    let mut class: Vec<usize> = out.accepting.iter().map(|&a| a as usize).collect();
    loop {
        let mut sig_ids: HashMap<(bool, Vec<(Label, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        let mut count = 0usize;
        for v in 0..n {
            let mut sig: Vec<(Label, usize)> =
                out.edges[v].iter().map(|&(l, d)| (l, class[d])).collect();
            sig.sort();
            sig.dedup();
            let id = *sig_ids.entry((out.accepting[v], sig)).or_insert_with(|| {
                count += 1;
                count - 1
            });
            next[v] = id;
        }
        let stable = next == class;
        class = next;
        if stable {
            break;
        }
    }
    let n_classes = class.iter().copied().max().unwrap_or(0) + 1;
    let mut rep = vec![usize::MAX; n_classes];
    for v in 0..n {
        if rep[class[v]] == usize::MAX {
            rep[class[v]] = v;
        }
    }
    let mut edges = Vec::with_capacity(n_classes);
    let mut accepting = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let v = rep[c];
        let mut row: Vec<(Label, usize)> =
            out.edges[v].iter().map(|&(l, d)| (l, class[d])).collect();
        row.sort_by_key(|(l, d)| (*l, *d));
        row.dedup();
        edges.push(row);
        accepting.push(out.accepting[v]);
    }
    let mut initial: Vec<usize> = out.initial.iter().map(|&v| class[v]).collect();
    initial.sort_unstable();
    initial.dedup();
    Nba { alphabet: out.alphabet.clone(), initial, edges, accepting }
}

/// Translates a ground LTL\X formula into a Büchi automaton accepting
/// exactly the infinite words that satisfy it.
pub fn ltl_to_nba(f: &Ltl, alphabet: &Alphabet) -> Result<Nba, AutomatonError> {
    let mut arena = Arena::default();
    let root = to_nnf(f, true, alphabet, &mut arena)?;
    let tableau = Tableau::new(arena)?;
    let mut gba = build_gba(root, tableau);
    minimize_gba(&mut gba);
    let nba = degeneralize(&gba, alphabet);
    Ok(simplify_nba(&nba))
}

/// Automaton for the negation of `f`, built per top-level conjunct: the
/// negation of a conjunction is the union of the negated conjuncts, which
/// keeps the automata small for long conjunctions.
pub fn nba_for_negation(f: &Ltl, alphabet: &Alphabet) -> Result<Nba, AutomatonError> {
    let conjuncts = f.conjuncts();
    let mut parts = Vec::with_capacity(conjuncts.len());
    for c in conjuncts {
        parts.push(ltl_to_nba(&Ltl::not((*c).clone()), alphabet)?);
    }
    Ok(simplify_nba(&Nba::union(parts)))
}

/// Dualizes the Büchi automaton of a negated property into the universal
/// co-Büchi automaton of the property: same structure, accepting states
/// become rejecting, a word satisfies the property iff no run visits
/// rejecting states infinitely often.
pub fn nba_to_ucw(nba: &Nba) -> Ucw {
    let mut edges = nba.edges.clone();
    let mut rejecting = nba.accepting.clone();
    let initial = if nba.initial.len() == 1 {
        nba.initial[0]
    } else {
        // Fresh initial state whose moves are the union of the old ones.
        let mut row: Vec<(Label, usize)> = Vec::new();
        for &q in &nba.initial {
            row.extend(edges[q].iter().copied());
        }
        row.sort_by_key(|(l, d)| (*l, *d));
        row.dedup();
        edges.push(row);
        rejecting.push(false);
        edges.len() - 1
    };
    let bottom = find_bottom(&edges, &rejecting);
    Ucw { alphabet: nba.alphabet.clone(), initial, edges, rejecting, bottom }
}

fn find_bottom(edges: &[Vec<(Label, usize)>], rejecting: &[bool]) -> Option<usize> {
    (0..edges.len()).find(|&q| {
        rejecting[q] && edges[q].len() == 1 && edges[q][0].0.is_top() && edges[q][0].1 == q
    })
}

/// Universal co-Büchi automaton for a ground formula, simplified: states
/// from which no rejecting cycle is reachable impose no constraints and are
/// dropped, and behaviourally identical states merge.
pub fn ucw_for_formula(f: &Ltl, alphabet: &Alphabet) -> Result<Ucw, AutomatonError> {
    let nba = nba_for_negation(f, alphabet)?;
    Ok(simplify_ucw(&nba_to_ucw(&nba)))
}

fn simplify_ucw(ucw: &Ucw) -> Ucw {
    let n = ucw.n_states();
    let succ = |v: usize| -> Vec<usize> { ucw.edges[v].iter().map(|&(_, d)| d).collect() };
    let useful = graph::can_reach_marked_cycle(n, &succ, |v| ucw.rejecting[v]);

    let mut map = vec![usize::MAX; n];
    let mut kept = Vec::new();
    for v in 0..n {
        if useful[v] || v == ucw.initial {
            map[v] = kept.len();
            kept.push(v);
        }
    }
    let mut edges: Vec<Vec<(Label, usize)>> = Vec::with_capacity(kept.len());
    for &v in &kept {
        let mut row: Vec<(Label, usize)> = ucw.edges[v]
            .iter()
            .filter(|(_, d)| useful[*d])
            .map(|&(l, d)| (l, map[d]))
            .collect();
        row.sort_by_key(|(l, d)| (*l, *d));
        row.dedup();
        edges.push(row);
    }
    let mut rejecting: Vec<bool> = kept.iter().map(|&v| ucw.rejecting[v]).collect();
    let initial = map[ucw.initial];

    // A rejecting state that lies on no cycle is never visited infinitely
    // often; clearing its flag keeps the language and tightens the
    // automaton.
    {
        let n = edges.len();
        let (comp, n_comps) =
            graph::tarjan_scc(n, |v| edges[v].iter().map(|&(_, d)| d).collect());
        let mut size = vec![0usize; n_comps];
        for v in 0..n {
            size[comp[v]] += 1;
        }
        for v in 0..n {
            let self_loop = edges[v].iter().any(|&(_, d)| d == v);
            if size[comp[v]] == 1 && !self_loop {
                rejecting[v] = false;
            }
        }
    }

    // Behavioural merge with the rejecting bit in the initial partition.
    let n = edges.len();
    let mut class: Vec<usize> = rejecting.iter().map(|&r| r as usize).collect();
    loop {
        let mut sig_ids: HashMap<(bool, Vec<(Label, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        let mut count = 0usize;
        for v in 0..n {
            let mut sig: Vec<(Label, usize)> = edges[v].iter().map(|&(l, d)| (l, class[d])).collect();
            sig.sort();
            sig.dedup();
            let id = *sig_ids.entry((rejecting[v], sig)).or_insert_with(|| {
                count += 1;
                count - 1
            });
            next[v] = id;
        }
        let stable = next == class;
        class = next;
        if stable {
            break;
        }
    }
    let n_classes = class.iter().copied().max().unwrap_or(0) + 1;
    let mut rep = vec![usize::MAX; n_classes];
    for v in 0..n {
        if rep[class[v]] == usize::MAX {
            rep[class[v]] = v;
        }
    }
    let mut new_edges = Vec::with_capacity(n_classes);
    let mut new_rejecting = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let v = rep[c];
        let mut row: Vec<(Label, usize)> = edges[v].iter().map(|&(l, d)| (l, class[d])).collect();
        row.sort_by_key(|(l, d)| (*l, *d));
        row.dedup();
        new_edges.push(row);
        new_rejecting.push(rejecting[v]);
    }
    let initial = class[initial];
    let bottom = find_bottom(&new_edges, &new_rejecting);
    Ucw {
        alphabet: ucw.alphabet.clone(),
        initial,
        edges: new_edges,
        rejecting: new_rejecting,
        bottom,
    }
}
