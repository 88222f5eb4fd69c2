//! The network encoding: one constraint block per connection topology,
//! all blocks sharing the synthesized process's output labels and local
//! step functions, with hubs fixed to the three-state forwarder.

use crate::automaton::Ucw;
use crate::ltl::ProcessInterface;
use crate::par;
use crate::topology::{BoolExpr, ConnectionTopology};

use super::ring::{asynchrony, initial_token, token_constraints};
use super::term::{SmtScript, Sort, Term};
use super::{
    declare_labels, encode_annotations, EncodeError, EnvBit, Mode, SchedulingEncoding,
    SymbolTable,
};

/// Shared local step symbols of the synthesized process.
pub const STEP_SCHED: &str = "step";
pub const STEP_PASS: &str = "pass";

/// The script plus the per-topology symbol tables (one block each).
pub struct NetworkEncoding {
    pub script: SmtScript,
    pub blocks: Vec<SymbolTable>,
    /// Whether the blocks are combined by plain conjunction.
    pub conjunctive: bool,
}

fn block_symbols(
    ct: &ConnectionTopology,
    index: usize,
    bound_local: usize,
    interface: &ProcessInterface,
) -> SymbolTable {
    let k = ct.k();
    let h = ct.hubs.len();
    let n_procs = k + h;
    let bound_global = bound_local.pow(k as u32) * 3usize.pow(h as u32);
    let mut env_bits = Vec::new();
    for proc in 1..=k {
        for signal in &interface.env_inputs {
            env_bits.push(EnvBit::Input { proc, signal: signal.clone() });
        }
    }
    let sched = SchedulingEncoding::new(n_procs);
    for bit in 0..sched.bits {
        env_bits.push(EnvBit::Sched { bit });
    }
    let valuations = SymbolTable::admissible_valuations(&env_bits, Some(&sched));
    let suffix = format!("_b{index}");
    let edges: Vec<(usize, usize)> = ct
        .representative
        .edges()
        .iter()
        .map(|&(a, b)| (a as usize, b as usize))
        .collect();
    SymbolTable {
        mode: Mode::NetworkBlock,
        n_procs,
        n_sites: k,
        bound_global,
        bound_local,
        env_signals: interface.env_inputs.clone(),
        output_signals: interface.all_outputs(),
        env_bits,
        sched: Some(sched),
        valuations,
        delta: format!("delta{suffix}"),
        proj: (1..=n_procs)
            .map(|i| {
                if i <= k {
                    Some(format!("d{i}{suffix}"))
                } else {
                    Some(format!("dh{i}{suffix}"))
                }
            })
            .collect(),
        is_hub: (1..=n_procs).map(|i| i > k).collect(),
        edges,
        lambda_b: Vec::new(),
        lambda_n: Vec::new(),
    }
}

fn step_args(st: &SymbolTable, proc: usize, t: i64, mask: u64) -> Vec<Term> {
    let mut args = vec![st.proj_term(proc, Term::Int(t))];
    let local = st.input_mask_of(proc, mask);
    for k in 0..st.env_signals.len() {
        args.push(Term::Bool(local & (1 << k) != 0));
    }
    args
}

/// Ties each site's projection to the shared step functions: this is what
/// makes the same process satisfy every block.
fn shared_step_glue(st: &SymbolTable, out: &mut Vec<Term>) {
    let bg = st.bound_global as i64;
    for i in 1..=st.n_sites {
        let succ: Vec<usize> =
            st.edges.iter().filter(|&&(a, _)| a == i).map(|&(_, b)| b).collect();
        for t in 0..bg {
            for &mask in &st.valuations {
                let scheduled = st.scheduled(mask).map(|s| s + 1).unwrap_or(0);
                let next = st.proj_term(i, st.delta_term(t, mask));
                if scheduled == i {
                    let mut args = step_args(st, i, t, mask);
                    args.push(st.recv_term(i, Term::Int(t)));
                    out.push(Term::eq(next, Term::app(STEP_SCHED, args)));
                } else if succ.contains(&scheduled) {
                    let args = step_args(st, i, t, mask);
                    out.push(Term::eq(
                        next,
                        Term::ite(
                            st.send_term(i, Term::Int(t)),
                            Term::app(STEP_PASS, args),
                            st.proj_term(i, Term::Int(t)),
                        ),
                    ));
                }
                // Otherwise the asynchrony family already pins the state.
            }
        }
    }
}

/// Hubs follow their fixed three-state machine: 0 waits, 1 holds, 2 sends.
fn hub_dynamics(st: &SymbolTable, out: &mut Vec<Term>) {
    let bg = st.bound_global as i64;
    for i in (st.n_sites + 1)..=st.n_procs {
        let succ: Vec<usize> =
            st.edges.iter().filter(|&&(a, _)| a == i).map(|&(_, b)| b).collect();
        for t in 0..bg {
            for &mask in &st.valuations {
                let scheduled = st.scheduled(mask).map(|s| s + 1).unwrap_or(0);
                let now = st.proj_term(i, Term::Int(t));
                let next = st.proj_term(i, st.delta_term(t, mask));
                let rule = if scheduled == i {
                    Term::ite(
                        Term::eq(now.clone(), Term::Int(0)),
                        Term::ite(st.recv_term(i, Term::Int(t)), Term::Int(1), Term::Int(0)),
                        Term::Int(2),
                    )
                } else if succ.contains(&scheduled) {
                    Term::ite(Term::eq(now.clone(), Term::Int(2)), Term::Int(0), now.clone())
                } else {
                    now.clone()
                };
                out.push(Term::eq(next, rule));
            }
        }
        // Hubs start waiting.
        out.push(Term::eq(st.proj_term(i, Term::Int(0)), Term::Int(0)));
    }
}

/// Edge-indexed isomorphism families for the sites of one block, tying
/// every site to site 1 (self-instances included, as in the ring case).
fn isomorphism(st: &SymbolTable, out: &mut Vec<Term>) {
    let bg = st.bound_global as i64;
    let sched_of = |mask: u64| st.scheduled(mask).map(|s| s + 1).unwrap_or(0);

    // Family (a): scheduled steps.
    for i in 1..=st.n_sites {
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
                            hyp.push(Term::iff(
                                st.recv_term(1, Term::Int(t)),
                                st.recv_term(i, Term::Int(t2)),
                            ));
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

    // Family (b): handoff steps, over pairs of outgoing connections of
    // site 1 and site i.
    let succs = |p: usize| -> Vec<usize> {
        st.edges.iter().filter(|&&(a, _)| a == p).map(|&(_, b)| b).collect()
    };
    for i in 1..=st.n_sites {
        for &l in &succs(1) {
            for &j in &succs(i) {
                for &m1 in st.valuations.iter().filter(|&&m| sched_of(m) == l) {
                    for &m2 in st.valuations.iter().filter(|&&m| sched_of(m) == j) {
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
                                    hyp.push(Term::iff(
                                        st.recv_term(1, Term::Int(t)),
                                        st.recv_term(i, Term::Int(t2)),
                                    ));
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
    }
}

fn declare_block(script: &mut SmtScript, st: &SymbolTable, ucw: &Ucw) {
    for point in st.delta_points() {
        script.declare(point, vec![], Sort::Int);
    }
    for p in st.proj.iter().flatten() {
        script.declare(p.clone(), vec![Sort::Int], Sort::Int);
    }
    for q in 0..ucw.n_states() {
        script.declare(st.lambda_b[q].clone(), vec![Sort::Int], Sort::Bool);
        script.declare(st.lambda_n[q].clone(), vec![Sort::Int], Sort::Real);
    }
}

fn range_constraints(st: &SymbolTable, out: &mut Vec<Term>) {
    let bg = st.bound_global as i64;
    for t in 0..bg {
        for &mask in &st.valuations {
            let d = st.delta_term(t, mask);
            out.push(Term::and(vec![
                Term::ge(d.clone(), Term::Int(0)),
                Term::lt(d, Term::Int(bg)),
            ]));
        }
    }
    for i in 1..=st.n_procs {
        let ceiling = if st.is_hub[i - 1] { 3 } else { st.bound_local as i64 };
        for t in 0..bg {
            let d = st.proj_term(i, Term::Int(t));
            out.push(Term::and(vec![
                Term::ge(d.clone(), Term::Int(0)),
                Term::lt(d, Term::Int(ceiling)),
            ]));
        }
    }
}

fn block_constraints(st: &SymbolTable, ucw: &Ucw) -> Result<Vec<Term>, EncodeError> {
    let mut out = Vec::new();
    range_constraints(st, &mut out);
    out.extend(encode_annotations(ucw, st)?);
    token_constraints(st, &mut out);
    initial_token(st, &mut out);
    asynchrony(st, &mut out);
    isomorphism(st, &mut out);
    shared_step_glue(st, &mut out);
    hub_dynamics(st, &mut out);
    Ok(out)
}

/// Emits the bounded-synthesis script for a set of connection topologies
/// sharing one process implementation. With `boolean_fn = None` the blocks
/// are conjoined; a monotone Boolean function from a quantifier rewriting
/// combines them through per-block guard variables instead.
pub fn encode_network(
    ucw: &Ucw,
    cts: &[ConnectionTopology],
    bound_local: usize,
    interface: &ProcessInterface,
    boolean_fn: Option<&BoolExpr>,
) -> Result<NetworkEncoding, EncodeError> {
    if bound_local == 0 {
        return Err(EncodeError::ZeroBound);
    }
    for ct in cts {
        if ct.k() == 0 {
            return Err(EncodeError::NoSites);
        }
    }
    if let Some(b) = boolean_fn {
        let mut max_var = None;
        fn walk(b: &BoolExpr, max: &mut Option<usize>) {
            match b {
                BoolExpr::Var(i) => *max = Some(max.map_or(*i, |m: usize| m.max(*i))),
                BoolExpr::And(xs) | BoolExpr::Or(xs) => {
                    for x in xs {
                        walk(x, max);
                    }
                }
            }
        }
        walk(b, &mut max_var);
        if let Some(v) = max_var {
            if v >= cts.len() {
                return Err(EncodeError::ArityMismatch { var: v, m: cts.len() });
            }
        }
    }

    let mut blocks: Vec<SymbolTable> = cts
        .iter()
        .enumerate()
        .map(|(j, ct)| block_symbols(ct, j, bound_local, interface))
        .collect();
    for st in &mut blocks {
        for q in 0..ucw.n_states() {
            st.lambda_b.push(format!("lb{q}{}", st.delta.trim_start_matches("delta")));
            st.lambda_n.push(format!("ln{q}{}", st.delta.trim_start_matches("delta")));
        }
    }

    let mut script = SmtScript::new("QF_UFLIRA");
    declare_labels(&mut script, interface);
    // Shared step functions: local state, the process's own inputs, and
    // (for scheduled steps) whether the token is being offered.
    let mut sched_args = vec![Sort::Int];
    sched_args.extend(std::iter::repeat(Sort::Bool).take(interface.env_inputs.len()));
    sched_args.push(Sort::Bool);
    script.declare(STEP_SCHED, sched_args, Sort::Int);
    let mut pass_args = vec![Sort::Int];
    pass_args.extend(std::iter::repeat(Sort::Bool).take(interface.env_inputs.len()));
    script.declare(STEP_PASS, pass_args, Sort::Int);
    // Step functions stay inside the local state space.
    let bl = bound_local as i64;
    for s in 0..bl {
        for mask in 0..(1usize << interface.env_inputs.len()) {
            let mut args = vec![Term::Int(s)];
            for k in 0..interface.env_inputs.len() {
                args.push(Term::Bool(mask & (1 << k) != 0));
            }
            let pass = Term::app(STEP_PASS, args.clone());
            script.assert(Term::and(vec![
                Term::ge(pass.clone(), Term::Int(0)),
                Term::lt(pass, Term::Int(bl)),
            ]));
            for recv in [false, true] {
                let mut args = args.clone();
                args.push(Term::Bool(recv));
                let step = Term::app(STEP_SCHED, args);
                script.assert(Term::and(vec![
                    Term::ge(step.clone(), Term::Int(0)),
                    Term::lt(step, Term::Int(bl)),
                ]));
            }
        }
    }

    for st in &blocks {
        declare_block(&mut script, st, ucw);
    }

    // Per-topology constraint blocks, generated in parallel and
    // concatenated in canonical topology order.
    let block_cs: Vec<Result<Vec<Term>, EncodeError>> =
        par::map_collect(blocks.iter().collect::<Vec<_>>(), |st| block_constraints(st, ucw));

    let conjunctive = match boolean_fn {
        None => true,
        Some(b) => b.is_full_conjunction(cts.len()),
    };
    if conjunctive {
        for cs in block_cs {
            for a in cs? {
                script.assert(a);
            }
        }
    } else {
        // Guard each block by a fresh Boolean and assert the combination;
        // sound for the monotone functions produced by the rewriting.
        for (j, cs) in block_cs.into_iter().enumerate() {
            let guard = format!("blk{j}");
            script.declare(guard.clone(), vec![], Sort::Bool);
            for a in cs? {
                script.assert(Term::implies(Term::constant(guard.clone()), a));
            }
        }
        fn render(b: &BoolExpr) -> Term {
            match b {
                BoolExpr::Var(i) => Term::constant(format!("blk{i}")),
                BoolExpr::And(xs) => Term::and(xs.iter().map(render).collect()),
                BoolExpr::Or(xs) => Term::or(xs.iter().map(render).collect()),
            }
        }
        script.assert(render(boolean_fn.expect("non-conjunctive needs a function")));
    }

    script.fold_shared_hypotheses();
    // Queries: shared symbols first, then per-block tables.
    for s in 0..bl {
        for mask in 0..(1usize << interface.env_inputs.len()) {
            let mut args = vec![Term::Int(s)];
            for k in 0..interface.env_inputs.len() {
                args.push(Term::Bool(mask & (1 << k) != 0));
            }
            for recv in [false, true] {
                let mut a2 = args.clone();
                a2.push(Term::Bool(recv));
                script.queries.push(Term::app(STEP_SCHED, a2));
            }
            script.queries.push(Term::app(STEP_PASS, args));
        }
    }
    for signal in interface.all_outputs() {
        for s in 0..bl {
            script
                .queries
                .push(Term::app(SymbolTable::label_fn(&signal), vec![Term::Int(s)]));
        }
    }
    for st in &blocks {
        let bg = st.bound_global as i64;
        for t in 0..bg {
            for &mask in &st.valuations {
                script.queries.push(st.delta_term(t, mask));
            }
        }
        for i in 1..=st.n_procs {
            for t in 0..bg {
                script.queries.push(st.proj_term(i, Term::Int(t)));
            }
        }
        for q in 0..ucw.n_states() {
            for t in 0..bg {
                script.queries.push(st.lambda_b_term(q, Term::Int(t)));
                script.queries.push(st.lambda_n_term(q, Term::Int(t)));
            }
        }
    }
    Ok(NetworkEncoding { script, blocks, conjunctive })
}
