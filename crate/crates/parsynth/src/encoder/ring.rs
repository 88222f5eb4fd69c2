//! The token-ring encoding: annotations, token discipline, asynchrony and
//! isomorphism constraints over one global transition function.

use crate::automaton::Ucw;
use crate::ltl::ProcessInterface;

use super::term::{SmtScript, Sort, Term};
use super::{
    declare_labels, encode_annotations, EncodeError, EnvBit, Mode, SchedulingEncoding,
    SymbolTable,
};

fn ring_symbols(
    n: usize,
    bound_global: usize,
    bound_local: usize,
    interface: &ProcessInterface,
) -> SymbolTable {
    let mut env_bits = Vec::new();
    for proc in 1..=n {
        for signal in &interface.env_inputs {
            env_bits.push(EnvBit::Input { proc, signal: signal.clone() });
        }
    }
    let sched = SchedulingEncoding::new(n);
    for bit in 0..sched.bits {
        env_bits.push(EnvBit::Sched { bit });
    }
    let valuations = SymbolTable::admissible_valuations(&env_bits, Some(&sched));
    SymbolTable {
        mode: Mode::Ring,
        n_procs: n,
        n_sites: n,
        bound_global,
        bound_local,
        env_signals: interface.env_inputs.clone(),
        output_signals: interface.all_outputs(),
        env_bits,
        sched: Some(sched),
        valuations,
        delta: "delta".into(),
        proj: (1..=n).map(|i| Some(format!("d{i}"))).collect(),
        is_hub: vec![false; n],
        edges: (1..=n).map(|i| (i, i % n + 1)).collect(),
        lambda_b: Vec::new(),
        lambda_n: Vec::new(),
    }
}

fn succ_of(i: usize, n: usize) -> usize {
    i % n + 1
}

fn pred_of(i: usize, n: usize) -> usize {
    (i + n - 2) % n + 1
}

/// The five token-ring constraint families: only the holder sends; a
/// scheduled successor takes the token from a sender; the token persists
/// unless passed; tokenlessness persists unless the token is received.
pub(crate) fn token_constraints(st: &SymbolTable, out: &mut Vec<Term>) {
    let bg = st.bound_global as i64;
    for i in 1..=st.n_procs {
        for t in 0..bg {
            out.push(Term::implies(
                Term::not(st.tok_term(i, Term::Int(t))),
                Term::not(st.send_term(i, Term::Int(t))),
            ));
        }
    }
    for i in 1..=st.n_procs {
        let succ: Vec<usize> =
            st.edges.iter().filter(|&&(a, _)| a == i).map(|&(_, b)| b).collect();
        for t in 0..bg {
            for &mask in &st.valuations {
                let scheduled = st.scheduled(mask).map(|s| s + 1).unwrap_or(0);
                let handoff = succ.contains(&scheduled);
                let tok_now = st.tok_term(i, Term::Int(t));
                let tok_next = st.tok_term(i, st.delta_term(t, mask));
                if handoff {
                    // Sender loses the token to the scheduled successor.
                    out.push(Term::implies(
                        st.send_term(i, Term::Int(t)),
                        Term::not(tok_next.clone()),
                    ));
                    // Token persists unless actually sent.
                    out.push(Term::implies(
                        tok_now.clone(),
                        Term::or(vec![st.send_term(i, Term::Int(t)), tok_next.clone()]),
                    ));
                } else {
                    out.push(Term::implies(tok_now.clone(), tok_next.clone()));
                }
                // Receiving side.
                if scheduled == i {
                    let offered = st.recv_term(i, Term::Int(t));
                    out.push(Term::implies(offered.clone(), tok_next.clone()));
                    out.push(Term::implies(
                        Term::and(vec![Term::not(tok_now), Term::not(offered)]),
                        Term::not(tok_next),
                    ));
                } else {
                    out.push(Term::implies(Term::not(tok_now), Term::not(tok_next)));
                }
            }
        }
    }
}

/// Initial token at process 1 and nowhere else.
pub(crate) fn initial_token(st: &SymbolTable, out: &mut Vec<Term>) {
    out.push(st.tok_term(1, Term::Int(0)));
    for i in 2..=st.n_procs {
        out.push(Term::not(st.tok_term(i, Term::Int(0))));
    }
}

/// Unscheduled processes keep their local state, except a sender whose
/// successor is scheduled (the handoff moves both ends).
pub(crate) fn asynchrony(st: &SymbolTable, out: &mut Vec<Term>) {
    let bg = st.bound_global as i64;
    for i in 1..=st.n_procs {
        let succ: Vec<usize> =
            st.edges.iter().filter(|&&(a, _)| a == i).map(|&(_, b)| b).collect();
        for t in 0..bg {
            for &mask in &st.valuations {
                let scheduled = st.scheduled(mask).map(|s| s + 1).unwrap_or(0);
                if scheduled == i {
                    continue;
                }
                let unchanged = Term::eq(
                    st.proj_term(i, st.delta_term(t, mask)),
                    st.proj_term(i, Term::Int(t)),
                );
                if succ.contains(&scheduled) {
                    out.push(Term::implies(
                        Term::not(st.send_term(i, Term::Int(t))),
                        unchanged,
                    ));
                } else {
                    out.push(unchanged);
                }
            }
        }
    }
}

/// Isomorphism families tying every process's transitions to process 1's
/// under equal local states and corresponding effective inputs. The
/// self-instances (i = 1) are the input-dependence constraints that make
/// the extracted transition table well defined.
fn isomorphism(st: &SymbolTable, out: &mut Vec<Term>) {
    let n = st.n_procs;
    let bg = st.bound_global as i64;
    let sched_of = |mask: u64| st.scheduled(mask).map(|s| s + 1).unwrap_or(0);
    let recv_input = |proc: usize, t: i64| st.send_term(pred_of(proc, n), Term::Int(t));

    // Family (a): scheduled steps.
    for i in 1..=n {
        for &m1 in st.valuations.iter().filter(|&&m| sched_of(m) == 1) {
            for &m2 in st.valuations.iter().filter(|&&m| sched_of(m) == i) {
                if st.input_mask_of(1, m1) != st.input_mask_of(i, m2) {
                    continue;
                }
                for t in 0..bg {
                    for t2 in 0..bg {
                        if i == 1 && t == t2 && m1 == m2 {
                            continue;
                        }
                        let mut hyp = Vec::new();
                        if !(i == 1 && t == t2) {
                            hyp.push(Term::eq(
                                st.proj_term(1, Term::Int(t)),
                                st.proj_term(i, Term::Int(t2)),
                            ));
                            hyp.push(Term::iff(recv_input(1, t), recv_input(i, t2)));
                        }
                        out.push(Term::implies(
                            Term::and(hyp),
                            Term::eq(
                                st.proj_term(1, st.delta_term(t, m1)),
                                st.proj_term(i, st.delta_term(t2, m2)),
                            ),
                        ));
                    }
                }
            }
        }
    }

    // Family (b): token handoff steps, where the sender moves without
    // being scheduled.
    for i in 1..=n {
        for &m1 in st.valuations.iter().filter(|&&m| sched_of(m) == succ_of(1, n)) {
            for &m2 in st.valuations.iter().filter(|&&m| sched_of(m) == succ_of(i, n)) {
                if st.input_mask_of(1, m1) != st.input_mask_of(i, m2) {
                    continue;
                }
                for t in 0..bg {
                    for t2 in 0..bg {
                        if i == 1 && t == t2 && m1 == m2 {
                            continue;
                        }
                        let mut hyp = vec![
                            st.send_term(1, Term::Int(t)),
                            st.send_term(i, Term::Int(t2)),
                        ];
                        if !(i == 1 && t == t2) {
                            hyp.push(Term::eq(
                                st.proj_term(1, Term::Int(t)),
                                st.proj_term(i, Term::Int(t2)),
                            ));
                            hyp.push(Term::iff(recv_input(1, t), recv_input(i, t2)));
                        }
                        out.push(Term::implies(
                            Term::and(hyp),
                            Term::eq(
                                st.proj_term(1, st.delta_term(t, m1)),
                                st.proj_term(i, st.delta_term(t2, m2)),
                            ),
                        ));
                    }
                }
            }
        }
    }
}

pub(crate) fn declare_and_range(
    script: &mut SmtScript,
    st: &SymbolTable,
    ucw: &Ucw,
) {
    for point in st.delta_points() {
        script.declare(point, vec![], Sort::Int);
    }
    for p in &st.proj {
        if let Some(name) = p {
            script.declare(name.clone(), vec![Sort::Int], Sort::Int);
        }
    }
    for q in 0..ucw.n_states() {
        script.declare(st.lambda_b[q].clone(), vec![Sort::Int], Sort::Bool);
        script.declare(st.lambda_n[q].clone(), vec![Sort::Int], Sort::Real);
    }

    let bg = st.bound_global as i64;
    for t in 0..bg {
        for &mask in &st.valuations {
            let d = st.delta_term(t, mask);
            script.assert(Term::and(vec![
                Term::ge(d.clone(), Term::Int(0)),
                Term::lt(d, Term::Int(bg)),
            ]));
        }
    }
    for (idx, p) in st.proj.iter().enumerate() {
        if p.is_some() {
            let ceiling =
                if st.is_hub[idx] { 3 } else { st.bound_local as i64 };
            for t in 0..bg {
                let d = st.proj_term(idx + 1, Term::Int(t));
                script.assert(Term::and(vec![
                    Term::ge(d.clone(), Term::Int(0)),
                    Term::lt(d, Term::Int(ceiling)),
                ]));
            }
        }
    }
}

pub(crate) fn standard_queries(script: &mut SmtScript, st: &SymbolTable, ucw: &Ucw) {
    let bg = st.bound_global as i64;
    for t in 0..bg {
        for &mask in &st.valuations {
            script.queries.push(st.delta_term(t, mask));
        }
    }
    for (idx, p) in st.proj.iter().enumerate() {
        if p.is_some() {
            for t in 0..bg {
                script.queries.push(st.proj_term(idx + 1, Term::Int(t)));
            }
        }
    }
    for q in 0..ucw.n_states() {
        for t in 0..bg {
            script.queries.push(st.lambda_b_term(q, Term::Int(t)));
            script.queries.push(st.lambda_n_term(q, Term::Int(t)));
        }
    }
}

pub(crate) fn label_queries(script: &mut SmtScript, st: &SymbolTable) {
    for signal in &st.output_signals {
        for s in 0..st.bound_local as i64 {
            script
                .queries
                .push(Term::app(SymbolTable::label_fn(signal), vec![Term::Int(s)]));
        }
    }
}

/// Emits the complete bounded-synthesis script for an isomorphic token
/// ring of `n` processes.
pub fn encode_ring(
    ucw: &Ucw,
    n: usize,
    bound_global: usize,
    bound_local: usize,
    interface: &ProcessInterface,
) -> Result<(SmtScript, SymbolTable), EncodeError> {
    if n < 2 {
        return Err(EncodeError::TooFewProcesses(n));
    }
    if bound_global == 0 || bound_local == 0 {
        return Err(EncodeError::ZeroBound);
    }
    let mut st = ring_symbols(n, bound_global, bound_local, interface);
    for q in 0..ucw.n_states() {
        st.lambda_b.push(format!("lb{q}"));
        st.lambda_n.push(format!("ln{q}"));
    }

    let mut script = SmtScript::new("QF_UFLIRA");
    if bound_local > bound_global {
        script.warnings.push(format!(
            "local bound {bound_local} exceeds global bound {bound_global}; \
             some local states are unreachable"
        ));
    }
    declare_labels(&mut script, interface);
    declare_and_range(&mut script, &st, ucw);

    for a in encode_annotations(ucw, &st)? {
        script.assert(a);
    }
    let mut families = Vec::new();
    token_constraints(&st, &mut families);
    initial_token(&st, &mut families);
    asynchrony(&st, &mut families);
    isomorphism(&st, &mut families);
    for a in families {
        script.assert(a);
    }

    script.fold_shared_hypotheses();
    standard_queries(&mut script, &st, ucw);
    label_queries(&mut script, &st);
    Ok((script, st))
}
