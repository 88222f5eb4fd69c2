use super::*;
use crate::automaton::eval_ltl_on_lasso;
use crate::ltl::{
    augment_fairness, instantiate_conjunction, parse_spec, FairnessMode, Ltl,
};
use crate::topology::{reconstructed_prio_ring, NetworkGraph};

const CAP: usize = 100_000;

/// The minimal token-ring arbiter: grant and offer the token while holding
/// it, pick it up when the predecessor offers.
pub(crate) fn grant_on_token() -> ProcessLts {
    ProcessLts {
        env_inputs: vec!["r".into()],
        outputs: vec!["g".into()],
        labels: vec![
            StateLabel { out: 0, tok: false, send: false },
            StateLabel { out: 1, tok: true, send: true },
        ],
        init_token: 1,
        init_idle: 0,
        // Scheduled: pick up the token iff offered; keep holding otherwise.
        step_sched: vec![vec![[0, 1], [0, 1]], vec![[1, 1], [1, 1]]],
        // Handoff: drop back to idle.
        step_pass: vec![vec![0, 0], vec![0, 0]],
    }
}

fn one_state(g: bool, tok: bool, send: bool) -> ProcessLts {
    ProcessLts {
        env_inputs: vec!["r".into()],
        outputs: vec!["g".into()],
        labels: vec![StateLabel { out: g as u32, tok, send }],
        init_token: 0,
        init_idle: 0,
        step_sched: vec![vec![[0, 0], [0, 0]]],
        step_pass: vec![vec![0, 0]],
    }
}

fn arbiter_spec(n: u32) -> Ltl {
    let file = parse_spec(
        "input r;\noutput g;\n\
         guarantee forall i != j . G !(g_i & g_j);\n\
         guarantee forall i . G (r_i -> F g_i);\n",
    )
    .unwrap();
    let ground = instantiate_conjunction(&file.guarantees, n).unwrap();
    augment_fairness(&ground, FairnessMode::Ring, n)
}

#[test]
fn ring_of_four_has_four_reachable_states() {
    let p = grant_on_token();
    let lts = compose_ring(&p, 4, CAP).unwrap();
    assert_eq!(lts.n_states(), 4);
    // The token cycles through all four processes.
    for s in 0..4 {
        let holders: Vec<usize> = (0..4).filter(|&i| lts.tok_of(s, i)).collect();
        assert_eq!(holders.len(), 1);
    }
}

#[test]
fn trivial_and_small_rings() {
    let idle = one_state(false, false, false);
    let lts = compose_ring(&idle, 2, CAP).unwrap();
    assert_eq!(lts.n_states(), 1);

    let p = grant_on_token();
    let lts = compose_ring(&p, 2, CAP).unwrap();
    assert_eq!(lts.n_states(), 2);
}

#[test]
fn ring_of_four_satisfies_augmented_arbiter_spec() {
    let p = grant_on_token();
    let lts = compose_ring(&p, 4, CAP).unwrap();
    let spec = arbiter_spec(4);
    let verdict = model_check(&lts, &spec).unwrap();
    assert!(verdict.holds(), "expected the composition to satisfy the specification");
}

#[test]
fn always_grant_violates_mutual_exclusion() {
    let p = one_state(true, true, false);
    let lts = compose_ring(&p, 2, CAP).unwrap();
    let safety = Ltl::globally(Ltl::not(Ltl::and(
        Ltl::ground_atom("g", 1),
        Ltl::ground_atom("g", 2),
    )));
    match model_check(&lts, &safety).unwrap() {
        Verdict::Violated(cex) => {
            // The counterexample word must violate the formula per the
            // independent lasso oracle.
            let (stem, cycle) = counterexample_word(&cex);
            assert!(!eval_ltl_on_lasso(&safety, &lts.atoms, &stem, &cycle).unwrap());
            // And every letter of the loop grants both.
            let g1 = lts.atoms.position(&crate::ltl::GroundAtom::new("g", 1)).unwrap();
            let g2 = lts.atoms.position(&crate::ltl::GroundAtom::new("g", 2)).unwrap();
            for &(_, letter) in &cex.cycle {
                assert!(letter & (1 << g1) != 0 && letter & (1 << g2) != 0);
            }
            let text = format!("{}", CounterexampleDisplay { cex: &cex, lts: &lts });
            assert!(text.contains("loop:"));
        }
        Verdict::Holds => panic!("mutual exclusion cannot hold when everyone grants"),
    }
}

#[test]
fn any_system_satisfies_true() {
    let p = one_state(false, false, false);
    let lts = compose_ring(&p, 2, CAP).unwrap();
    assert!(model_check(&lts, &Ltl::True).unwrap().holds());
}

#[test]
fn undeclared_atom_is_reported() {
    let p = grant_on_token();
    let lts = compose_ring(&p, 2, CAP).unwrap();
    let f = Ltl::globally(Ltl::ground_atom("q", 1));
    assert!(matches!(model_check(&lts, &f), Err(VerifyError::UndeclaredAtom(_))));
}

#[test]
fn one_token_invariant() {
    let p = grant_on_token();
    for n in 2..=6 {
        let lts = compose_ring(&p, n, CAP).unwrap();
        check_one_token(&lts).unwrap();
        check_unscheduled_invariance(&lts).unwrap();
    }
    // A token hog on every node trips the invariant.
    let hog = one_state(true, true, false);
    let lts = compose_ring(&hog, 2, CAP).unwrap();
    assert!(check_one_token(&lts).is_err());
}

#[test]
fn network_composition_keeps_one_token() {
    let p = grant_on_token();
    let g = reconstructed_prio_ring();
    let lts = compose_network(&p, &g, &[], None, CAP).unwrap();
    check_one_token(&lts).unwrap();
    check_unscheduled_invariance(&lts).unwrap();
    // Every node eventually holds the token somewhere in the state space.
    for i in 0..8 {
        assert!(
            (0..lts.n_states()).any(|s| lts.tok_of(s, i)),
            "node {} never holds the token",
            i + 1
        );
    }
}

#[test]
fn site_and_hub_alternate_token() {
    let p = grant_on_token();
    let g = NetworkGraph::new(vec![1, 2], [(1, 2), (2, 1)]).unwrap();
    let lts = compose_network(&p, &g, &[2], None, CAP).unwrap();
    check_one_token(&lts).unwrap();
    // Both the site and the hub hold the token in some reachable state.
    assert!((0..lts.n_states()).any(|s| lts.tok_of(s, 0)));
    assert!((0..lts.n_states()).any(|s| lts.tok_of(s, 1)));
}

#[test]
fn state_cap_is_enforced() {
    let p = grant_on_token();
    assert!(matches!(
        compose_ring(&p, 6, 3),
        Err(VerifyError::StateCapExceeded(3))
    ));
}

#[test]
fn equivalence_up_to_relabeling() {
    let a = grant_on_token();
    // Same machine with the two states swapped.
    let b = ProcessLts {
        env_inputs: vec!["r".into()],
        outputs: vec!["g".into()],
        labels: vec![
            StateLabel { out: 1, tok: true, send: true },
            StateLabel { out: 0, tok: false, send: false },
        ],
        init_token: 0,
        init_idle: 1,
        step_sched: vec![vec![[0, 0], [0, 0]], vec![[1, 0], [1, 0]]],
        step_pass: vec![vec![1, 1], vec![1, 1]],
    };
    assert!(behaviorally_equivalent(&a, &b));
    // A machine that never grants is different.
    let c = one_state(false, false, false);
    assert!(!behaviorally_equivalent(&a, &c));
}

#[test]
fn model_check_agrees_with_lasso_enumeration() {
    // Single-process systems: compare the checker against brute-force
    // enumeration of scheduler words on small formulas.
    let machines = vec![grant_on_token(), one_state(true, true, true), one_state(false, false, false)];
    let g1 = || Ltl::ground_atom("g", 1);
    let r1 = || Ltl::ground_atom("r", 1);
    let formulas = vec![
        Ltl::globally(Ltl::implies(r1(), Ltl::eventually(g1()))),
        Ltl::eventually(g1()),
        Ltl::globally(Ltl::not(g1())),
        Ltl::until(Ltl::not(g1()), g1()),
        Ltl::globally(Ltl::eventually(Ltl::ground_atom("tok", 1))),
    ];
    for p in &machines {
        let lts = compose_single(p, CAP).unwrap();
        for f in &formulas {
            let verdict = model_check(&lts, f).unwrap();
            match verdict {
                Verdict::Violated(cex) => {
                    let (stem, cycle) = counterexample_word(&cex);
                    assert!(
                        !eval_ltl_on_lasso(f, &lts.atoms, &stem, &cycle).unwrap(),
                        "counterexample does not violate {f}"
                    );
                }
                Verdict::Holds => {
                    // All short scheduler lassos must satisfy the formula.
                    let n_choices = lts.choices.len();
                    let mut seqs: Vec<Vec<usize>> = vec![vec![]];
                    for _ in 0..2 {
                        let mut next = Vec::new();
                        for s in &seqs {
                            for c in 0..n_choices {
                                let mut s2 = s.clone();
                                s2.push(c);
                                next.push(s2);
                            }
                        }
                        seqs.extend(next.clone());
                    }
                    for stem_choices in seqs.iter().filter(|s| s.len() <= 1) {
                        for loop_choices in seqs.iter().filter(|s| !s.is_empty() && s.len() <= 2) {
                            // Drive the composition along the choices.
                            let mut state = lts.initial;
                            let mut stem = Vec::new();
                            for &c in stem_choices {
                                stem.push(lts.letter(state, &lts.choices[c]));
                                state = lts.transitions[state][c];
                            }
                            // The loop must return to its entry state to be
                            // a run of the system; drive it around twice to
                            // detect mismatch.
                            let entry = state;
                            let mut cycle = Vec::new();
                            let mut s = state;
                            for &c in loop_choices {
                                cycle.push(lts.letter(s, &lts.choices[c]));
                                s = lts.transitions[s][c];
                            }
                            if s != entry {
                                continue;
                            }
                            assert!(
                                eval_ltl_on_lasso(f, &lts.atoms, &stem, &cycle).unwrap(),
                                "holding formula {f} fails on an actual run"
                            );
                        }
                    }
                }
            }
        }
    }
}
