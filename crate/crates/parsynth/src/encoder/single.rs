//! Single-process synthesis with the neighbour's token behaviour emulated
//! by the environment: the process is always scheduled, `send_2` is an
//! input, and a synchronous token discipline replaces the ring families.

use crate::automaton::Ucw;
use crate::ltl::ProcessInterface;

use super::ring::{declare_and_range, label_queries, standard_queries};
use super::term::{SmtScript, Term};
use super::{
    declare_labels, encode_annotations, encode_input_dependence, EncodeError, EnvBit, Mode,
    SymbolTable,
};

fn single_symbols(bound_local: usize, interface: &ProcessInterface) -> SymbolTable {
    let mut env_bits = Vec::new();
    for signal in &interface.env_inputs {
        env_bits.push(EnvBit::Input { proc: 1, signal: signal.clone() });
    }
    env_bits.push(EnvBit::Recv);
    let valuations = SymbolTable::admissible_valuations(&env_bits, None);
    SymbolTable {
        mode: Mode::Single,
        n_procs: 1,
        n_sites: 1,
        bound_global: bound_local,
        bound_local,
        env_signals: interface.env_inputs.clone(),
        output_signals: interface.all_outputs(),
        env_bits,
        sched: None,
        valuations,
        delta: "delta".into(),
        proj: vec![None],
        is_hub: vec![false],
        edges: Vec::new(),
        lambda_b: Vec::new(),
        lambda_n: Vec::new(),
    }
}

/// Synchronous token discipline: the process gains the token exactly when
/// the environment offers it, keeps it while not sending, and loses it by
/// sending (the emulated neighbour always accepts).
fn token_discipline(st: &SymbolTable, out: &mut Vec<Term>) {
    let b = st.bound_global as i64;
    for t in 0..b {
        out.push(Term::implies(
            Term::not(st.tok_term(1, Term::Int(t))),
            Term::not(st.send_term(1, Term::Int(t))),
        ));
        for &mask in &st.valuations {
            let tok_now = st.tok_term(1, Term::Int(t));
            let send_now = st.send_term(1, Term::Int(t));
            let tok_next = st.tok_term(1, st.delta_term(t, mask));
            if st.recv_bit_of(mask) {
                out.push(Term::implies(
                    Term::not(tok_now.clone()),
                    tok_next.clone(),
                ));
            } else {
                out.push(Term::implies(
                    Term::not(tok_now.clone()),
                    Term::not(tok_next.clone()),
                ));
            }
            out.push(Term::implies(
                Term::and(vec![tok_now.clone(), Term::not(send_now.clone())]),
                tok_next.clone(),
            ));
            out.push(Term::implies(
                Term::and(vec![tok_now, send_now]),
                Term::not(tok_next),
            ));
        }
    }
    // The process starts without the token; the emulated neighbour holds it.
    out.push(Term::not(st.tok_term(1, Term::Int(0))));
}

/// Emits the bounded-synthesis script for one process under environment
/// assumptions: annotation and input-dependence constraints only, plus the
/// synchronous token discipline.
pub fn encode_single_process(
    ucw: &Ucw,
    bound_local: usize,
    interface: &ProcessInterface,
) -> Result<(SmtScript, SymbolTable), EncodeError> {
    if bound_local == 0 {
        return Err(EncodeError::ZeroBound);
    }
    let mut st = single_symbols(bound_local, interface);
    for q in 0..ucw.n_states() {
        st.lambda_b.push(format!("lb{q}"));
        st.lambda_n.push(format!("ln{q}"));
    }

    let mut script = SmtScript::new("QF_UFLIRA");
    declare_labels(&mut script, interface);
    declare_and_range(&mut script, &st, ucw);

    for a in encode_annotations(ucw, &st)? {
        script.assert(a);
    }
    // Every environment bit is visible to the single process, so this
    // family is vacuous here; it is emitted for interfaces with hidden
    // bits.
    let visible = vec![true; st.env_bits.len()];
    for a in encode_input_dependence(&st, &visible) {
        script.assert(a);
    }
    let mut families = Vec::new();
    token_discipline(&st, &mut families);
    for a in families {
        script.assert(a);
    }

    script.fold_shared_hypotheses();
    standard_queries(&mut script, &st, ucw);
    label_queries(&mut script, &st);
    Ok((script, st))
}
