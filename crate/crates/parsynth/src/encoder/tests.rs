use super::*;
use crate::automaton::{ucw_for_formula, Alphabet};
use crate::ltl::{
    build_token_assumption, parse_spec,upgrade_single_obligation, Ltl, ProcessInterface,
};

fn rg_interface() -> ProcessInterface {
    ProcessInterface::new(vec!["r".into()], vec!["g".into()])
}

fn request_response_ucw() -> crate::automaton::Ucw {
    // G(r_1 -> F g_1) for one process, with `send_2` emulated.
    let f = Ltl::globally(Ltl::implies(
        Ltl::ground_atom("r", 1),
        Ltl::eventually(Ltl::ground_atom("g", 1)),
    ));
    let alphabet = Alphabet::new(vec![
        crate::ltl::GroundAtom::new("r", 1),
        crate::ltl::GroundAtom::new("g", 1),
        crate::ltl::GroundAtom::new("tok", 1),
        crate::ltl::GroundAtom::new("send", 1),
        crate::ltl::GroundAtom::new("send", 2),
    ])
    .unwrap();
    ucw_for_formula(&f, &alphabet).unwrap()
}

#[test]
fn single_process_annotation_families() {
    // The request/response automaton yields the expected constraint
    // families: reachable+rank for the initial pair, self-loop
    // propagation, the pending-request edge with a strict rank increase,
    // and the wait-state self-loop.
    let ucw = request_response_ucw();
    assert_eq!(ucw.n_states(), 2);
    let (script, st) = encode_single_process(&ucw, 2, &rg_interface()).unwrap();
    script.lint().unwrap();

    let annotations = encode_annotations(&ucw, &st).unwrap();
    // Independent count: one initial assertion plus, for each automaton
    // edge, one per (state, compatible valuation) pair. Valuations: r and
    // the emulated send input (2 bits, 4 masks); the r-literal halves the
    // request edge's compatible set.
    let mut expected = 1usize;
    let atoms = ucw.alphabet.atoms();
    for (_q, row) in ucw.edges.iter().enumerate() {
        for (label, _) in row {
            let compatible = st
                .valuations
                .iter()
                .filter(|&&m| {
                    (0..atoms.len()).all(|i| {
                        let pos = label.pos & (1 << i) != 0;
                        let neg = label.neg & (1 << i) != 0;
                        if !pos && !neg {
                            return true;
                        }
                        match st.env_atom_value(&atoms[i], m) {
                            Some(v) => v == pos,
                            None => true,
                        }
                    })
                })
                .count();
            expected += 2 * compatible; // |T| = 2
        }
    }
    assert_eq!(annotations.len(), expected);

    // A strict rank comparison appears exactly on edges into the
    // rejecting state.
    let text = script.render();
    assert!(text.contains("(> (ln"));
    assert!(text.contains("(>= (ln"));
    assert!(text.contains("(set-logic QF_UFLIRA)"));
}

#[test]
fn input_dependence_standalone_counts() {
    let ucw = request_response_ucw();
    let (_, st) = encode_single_process(&ucw, 2, &rg_interface()).unwrap();
    // Full visibility: nothing to say.
    assert!(encode_input_dependence(&st, &vec![true; st.env_bits.len()]).is_empty());
    // Hide the emulated send input: valuations agreeing on r alone must
    // step identically. Independent count: per state, ordered pairs of
    // distinct valuations agreeing on the visible bit.
    let mut visible = vec![true; st.env_bits.len()];
    let recv_bit = st
        .env_bits
        .iter()
        .position(|b| matches!(b, EnvBit::Recv))
        .unwrap();
    visible[recv_bit] = false;
    let cs = encode_input_dependence(&st, &visible);
    let mut expected = 0usize;
    for &m in &st.valuations {
        for &m2 in &st.valuations {
            if m != m2 && (m & !(1 << recv_bit)) == (m2 & !(1 << recv_bit)) {
                expected += 1;
            }
        }
    }
    assert_eq!(cs.len(), expected * st.bound_global);
}

#[test]
fn identical_valuation_pair_is_vacuous() {
    let ucw = request_response_ucw();
    let (_, st) = encode_single_process(&ucw, 2, &rg_interface()).unwrap();
    let cs = encode_input_dependence(&st, &vec![true; st.env_bits.len()]);
    assert!(cs.is_empty());
}

#[test]
fn ring_script_is_deterministic_and_lints() {
    let file = parse_spec(
        "input r;\noutput g;\nguarantee forall i != j . G !(g_i & g_j);\n",
    )
    .unwrap();
    let ground = crate::ltl::instantiate_conjunction(&file.guarantees, 2).unwrap();
    let aug = crate::ltl::augment_fairness(&ground, crate::ltl::FairnessMode::Ring, 2);
    let alphabet = crate::automaton::Alphabet::of_formula(&aug).unwrap();
    let ucw = ucw_for_formula(&aug, &alphabet).unwrap();
    let (s1, _) = encode_ring(&ucw, 2, 2, 2, &file.interface).unwrap();
    let (s2, _) = encode_ring(&ucw, 2, 2, 2, &file.interface).unwrap();
    assert_eq!(s1.render(), s2.render(), "identical inputs must give identical scripts");
    s1.lint().unwrap();
    assert!(s1.render().contains("(check-sat)"));
    assert!(s1.render().contains("(get-value"));
}

#[test]
fn ring_encode_rejects_bad_arguments() {
    let ucw = request_response_ucw();
    let iface = rg_interface();
    assert!(matches!(
        encode_ring(&ucw, 1, 2, 2, &iface),
        Err(EncodeError::TooFewProcesses(1))
    ));
    assert!(matches!(encode_ring(&ucw, 2, 0, 2, &iface), Err(EncodeError::ZeroBound)));
    assert!(matches!(
        encode_single_process(&ucw, 0, &iface),
        Err(EncodeError::ZeroBound)
    ));
    let (script, _) = encode_ring(&ucw, 2, 2, 4, &iface).unwrap();
    assert!(
        script.warnings.iter().any(|w| w.contains("exceeds")),
        "local bound above the global bound warns about unreachable configurations"
    );
}

#[test]
fn undeclared_label_atom_is_an_error() {
    // An automaton over an atom the interface does not declare.
    let f = Ltl::globally(Ltl::ground_atom("q", 1));
    let alphabet = Alphabet::of_formula(&f).unwrap();
    let ucw = ucw_for_formula(&f, &alphabet).unwrap();
    assert!(matches!(
        encode_ring(&ucw, 2, 2, 2, &rg_interface()),
        Err(EncodeError::UndeclaredAtom(_))
    ));
}

#[test]
fn lint_catches_unused_and_undeclared() {
    let mut script = SmtScript::new("QF_UF");
    script.declare("f", vec![Sort::Int], Sort::Int);
    script.assert(Term::eq(Term::app("f", vec![Term::Int(0)]), Term::Int(1)));
    script.lint().unwrap();
    script.assert(Term::app("ghost", vec![]));
    assert!(matches!(script.lint(), Err(EncodeError::Lint(_))));

    let mut dead = SmtScript::new("QF_UF");
    dead.declare("f", vec![Sort::Int], Sort::Int);
    dead.declare("unused", vec![], Sort::Bool);
    dead.assert(Term::eq(Term::app("f", vec![Term::Int(0)]), Term::Int(1)));
    assert!(matches!(dead.lint(), Err(EncodeError::Lint(_))));
}

#[test]
fn network_encoding_shares_step_symbols_and_lints() {
    let file = parse_spec(
        "input r;\noutput g;\n\
         guarantee forall i != j . G !(g_i & g_j);\n\
         guarantee forall i . G (r_i -> F g_i);\n",
    )
    .unwrap();
    let merged = crate::ltl::merge_k_indexed(&file.guarantees).unwrap();
    let ground = crate::ltl::instantiate_at(&merged, &[1, 2], 2).unwrap();
    let aug = crate::ltl::augment_fairness(&ground, crate::ltl::FairnessMode::Network, 2);
    let alphabet = crate::automaton::Alphabet::of_formula(&aug).unwrap();
    let ucw = ucw_for_formula(&aug, &alphabet).unwrap();

    let g = crate::topology::ring_graph(4).unwrap();
    let cts = crate::topology::k_topology(&g, 2).unwrap();
    let enc = encode_network(&ucw, &cts, 2, &file.interface, None).unwrap();
    enc.script.lint().unwrap();
    assert!(enc.conjunctive);
    assert_eq!(enc.blocks.len(), 3);
    let text = enc.script.render();
    // One shared step/pass/label family, one delta per block.
    assert_eq!(text.matches("(declare-fun step ").count(), 1);
    assert_eq!(text.matches("(declare-fun pass ").count(), 1);
    for b in 0..3 {
        assert!(text.contains(&format!("(declare-fun delta_b{b}_0v0 ")));
    }

    // Determinism across invocations.
    let enc2 = encode_network(&ucw, &cts, 2, &file.interface, None).unwrap();
    assert_eq!(text, enc2.script.render());

    // Arity mismatch in a user-supplied combination function.
    let bad = crate::topology::BoolExpr::Var(7);
    assert!(matches!(
        encode_network(&ucw, &cts, 2, &file.interface, Some(&bad)),
        Err(EncodeError::ArityMismatch { var: 7, m: 3 })
    ));
    // Topology with zero sites is rejected at the type level by
    // construction; the encoder still guards it.
    assert!(matches!(
        encode_network(&ucw, &[], 0, &file.interface, None),
        Err(EncodeError::ZeroBound)
    ));
}

#[test]
fn token_assumption_script_encodes() {
    let file = parse_spec("input r;\noutput g;\nguarantee forall i . G (r_i -> F g_i);\n")
        .unwrap();
    let obligation = build_token_assumption(&file.guarantees[0]).unwrap();
    let full = upgrade_single_obligation(&obligation);
    let alphabet = crate::automaton::Alphabet::of_formula(&full).unwrap();
    let ucw = ucw_for_formula(&full, &alphabet).unwrap();
    let (script, _) = encode_single_process(&ucw, 2, &file.interface).unwrap();
    script.lint().unwrap();
}
