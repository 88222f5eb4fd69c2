use super::*;
use crate::ltl::{
    augment_fairness, instantiate_conjunction, parse_spec, FairnessMode, GroundAtom, Ltl,
};

fn ga(signal: &str, i: u32) -> Ltl {
    Ltl::ground_atom(signal, i)
}

/// Every lasso with the given stem/loop lengths over the full letter space.
fn all_lassos(alphabet: &Alphabet, max_stem: usize, max_loop: usize) -> Vec<(Vec<Letter>, Vec<Letter>)> {
    let letters: Vec<Letter> = alphabet.all_letters().collect();
    let mut words: Vec<Vec<Letter>> = vec![vec![]];
    let mut by_len: Vec<Vec<Vec<Letter>>> = vec![vec![vec![]]];
    for len in 1..=max_stem.max(max_loop) {
        let mut next = Vec::new();
        for w in &by_len[len - 1] {
            for &l in &letters {
                let mut w2 = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        by_len.push(next);
    }
    let stems: Vec<Vec<Letter>> =
        words.iter().filter(|w| w.len() <= max_stem).cloned().collect();
    let loops: Vec<Vec<Letter>> =
        words.iter().filter(|w| !w.is_empty() && w.len() <= max_loop).cloned().collect();
    let mut out = Vec::new();
    for s in &stems {
        for l in &loops {
            out.push((s.clone(), l.clone()));
        }
    }
    out
}

/// Checks full agreement between the automaton path and the brute-force
/// semantics on every lasso within the given bounds.
fn assert_oracle_agreement(f: &Ltl, max_stem: usize, max_loop: usize) {
    let alphabet = Alphabet::of_formula(f).unwrap();
    let nba = ltl_to_nba(f, &alphabet).unwrap();
    let neg_nba = nba_for_negation(f, &alphabet).unwrap();
    let ucw = ucw_for_formula(f, &alphabet).unwrap();
    for (stem, loop_) in all_lassos(&alphabet, max_stem, max_loop) {
        let expected = eval_ltl_on_lasso(f, &alphabet, &stem, &loop_).unwrap();
        assert_eq!(
            nba_accepts_lasso(&nba, &stem, &loop_),
            expected,
            "NBA disagrees on {f} with stem {stem:?} loop {loop_:?}"
        );
        assert_eq!(
            ucw_accepts_lasso(&ucw, &stem, &loop_),
            expected,
            "UCW disagrees on {f} with stem {stem:?} loop {loop_:?}"
        );
        // Dualization involution: the negation automaton accepts exactly
        // the lassos the universal automaton rejects.
        assert_eq!(
            nba_accepts_lasso(&neg_nba, &stem, &loop_),
            !ucw_accepts_lasso(&ucw, &stem, &loop_),
            "dualization broken on {f} with stem {stem:?} loop {loop_:?}"
        );
    }
}

#[test]
fn eval_oracle_basics() {
    let rq = Ltl::globally(Ltl::implies(ga("r", 1), Ltl::eventually(ga("g", 1))));
    let alphabet = Alphabet::of_formula(&rq).unwrap();
    let r = alphabet.letter(&[GroundAtom::new("r", 1)]).unwrap();
    let rg = alphabet
        .letter(&[GroundAtom::new("r", 1), GroundAtom::new("g", 1)])
        .unwrap();
    let g = alphabet.letter(&[GroundAtom::new("g", 1)]).unwrap();
    let quiet = alphabet.letter(&[]).unwrap();

    // A request never granted violates the guarantee.
    assert!(!eval_ltl_on_lasso(&rq, &alphabet, &[], &[r]).unwrap());
    assert!(eval_ltl_on_lasso(&rq, &alphabet, &[], &[rg]).unwrap());

    let fg = Ltl::eventually(ga("g", 1));
    assert!(eval_ltl_on_lasso(&fg, &alphabet, &[quiet, quiet], &[g]).unwrap());
    assert!(!eval_ltl_on_lasso(&fg, &alphabet, &[quiet, quiet], &[quiet]).unwrap());

    let ru = Ltl::until(ga("r", 1), ga("g", 1));
    assert!(!eval_ltl_on_lasso(&ru, &alphabet, &[], &[r]).unwrap());
    assert!(eval_ltl_on_lasso(&ru, &alphabet, &[r, r], &[g]).unwrap());
}

#[test]
fn request_response_ucw_matches_reference_language() {
    // UCW for G(r -> F g): loops in a non-rejecting state, a pending
    // request moves to a rejecting wait state that persists while !g.
    let f = Ltl::globally(Ltl::implies(ga("r", 1), Ltl::eventually(ga("g", 1))));
    let alphabet = Alphabet::of_formula(&f).unwrap();
    let ucw = ucw_for_formula(&f, &alphabet).unwrap();
    assert!(ucw.rejecting.iter().any(|&r| r), "needs a rejecting wait state");
    assert!(ucw.n_states() <= 3, "expected a compact automaton, got {}", ucw.n_states());

    let r = alphabet.letter(&[GroundAtom::new("r", 1)]).unwrap();
    let rg = alphabet
        .letter(&[GroundAtom::new("r", 1), GroundAtom::new("g", 1)])
        .unwrap();
    assert!(!ucw_accepts_lasso(&ucw, &[], &[r]));
    assert!(ucw_accepts_lasso(&ucw, &[], &[rg]));
    assert_oracle_agreement(&f, 3, 3);
}

#[test]
fn constant_automata() {
    let alphabet = Alphabet::new(vec![GroundAtom::new("r", 1)]).unwrap();
    let empty = ltl_to_nba(&Ltl::False, &alphabet).unwrap();
    let full = ltl_to_nba(&Ltl::True, &alphabet).unwrap();
    let top_ucw = ucw_for_formula(&Ltl::True, &alphabet).unwrap();
    assert_eq!(top_ucw.n_states(), 1);
    assert!(!top_ucw.rejecting[0]);
    for letter in alphabet.all_letters() {
        assert!(!nba_accepts_lasso(&empty, &[], &[letter]));
        assert!(nba_accepts_lasso(&full, &[], &[letter]));
        assert!(ucw_accepts_lasso(&top_ucw, &[], &[letter]));
    }
}

#[test]
fn two_process_arbiter_ucw_has_bottom_sink() {
    let file = parse_spec(
        "input r;\noutput g;\n\
         guarantee forall i != j . G !(g_i & g_j);\n\
         guarantee forall i . G (r_i -> F g_i);\n",
    )
    .unwrap();
    let ground = instantiate_conjunction(&file.guarantees, 2).unwrap();
    let augmented = augment_fairness(&ground, FairnessMode::Ring, 2);
    let alphabet = Alphabet::of_formula(&augmented).unwrap();
    let ucw = ucw_for_formula(&augmented, &alphabet).unwrap();
    let bottom = ucw.bottom.expect("mutual exclusion yields a universally rejecting sink");
    assert!(ucw.rejecting[bottom]);

    // Bottom absorption: any lasso whose stem grants both processes at once
    // is rejected, whatever follows.
    let both = alphabet
        .letter(&[GroundAtom::new("g", 1), GroundAtom::new("g", 2)])
        .unwrap();
    let quiet = alphabet.letter(&[]).unwrap();
    let fair_loop: Vec<Letter> = vec![
        alphabet
            .letter(&[GroundAtom::new("sched", 1), GroundAtom::new("tok", 1), GroundAtom::new("send", 1)])
            .unwrap(),
        alphabet
            .letter(&[GroundAtom::new("sched", 2), GroundAtom::new("tok", 2), GroundAtom::new("send", 2)])
            .unwrap(),
    ];
    assert!(!ucw_accepts_lasso(&ucw, &[both], &fair_loop));
    assert!(!ucw_accepts_lasso(&ucw, &[quiet, both, quiet], &fair_loop));
}

#[test]
fn oracle_agreement_on_fixed_corpus() {
    let a = || ga("a", 1);
    let b = || ga("b", 1);
    let corpus: Vec<Ltl> = vec![
        a(),
        Ltl::not(a()),
        Ltl::and(a(), b()),
        Ltl::or(a(), Ltl::not(b())),
        Ltl::implies(a(), b()),
        Ltl::iff(a(), b()),
        Ltl::globally(a()),
        Ltl::eventually(a()),
        Ltl::until(a(), b()),
        Ltl::weak_until(a(), b()),
        Ltl::weak_until(a(), Ltl::False),
        Ltl::globally(Ltl::eventually(a())),
        Ltl::eventually(Ltl::globally(a())),
        Ltl::globally(Ltl::implies(a(), Ltl::eventually(b()))),
        Ltl::and(Ltl::globally(Ltl::eventually(a())), Ltl::globally(Ltl::eventually(b()))),
        Ltl::implies(Ltl::globally(Ltl::eventually(a())), Ltl::globally(Ltl::eventually(b()))),
        Ltl::until(a(), Ltl::until(b(), a())),
        Ltl::weak_until(Ltl::not(a()), b()),
        Ltl::globally(Ltl::weak_until(a(), b())),
        Ltl::eventually(Ltl::and(a(), Ltl::globally(Ltl::not(b())))),
        Ltl::not(Ltl::until(a(), b())),
        Ltl::not(Ltl::globally(Ltl::eventually(a()))),
        Ltl::iff(Ltl::eventually(a()), Ltl::eventually(b())),
        Ltl::or(Ltl::globally(a()), Ltl::globally(b())),
        Ltl::until(Ltl::or(a(), b()), Ltl::and(a(), b())),
    ];
    for f in &corpus {
        assert_oracle_agreement(f, 2, 2);
    }
}

#[test]
fn dot_export_marks_rejecting_states() {
    let f = Ltl::globally(Ltl::implies(ga("r", 1), Ltl::eventually(ga("g", 1))));
    let alphabet = Alphabet::of_formula(&f).unwrap();
    let ucw = ucw_for_formula(&f, &alphabet).unwrap();
    let dot = ucw.to_dot("u");
    assert!(dot.contains("doublecircle"));
    assert!(dot.contains("digraph u {"));
    let nba = ltl_to_nba(&f, &alphabet).unwrap();
    assert!(nba.to_dot("n").contains("init ->"));
}
