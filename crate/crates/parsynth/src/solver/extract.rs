//! Rebuilding the process implementation from a model: process 1 is the
//! template, its transitions are induced through the projection symbols,
//! and unconstrained points are completed with self-loops.

use std::collections::HashMap;

use crate::encoder::{Mode, NetworkEncoding, SymbolTable, Term};
use crate::ltl::{ProcessInterface, SEND_SIGNAL, TOKEN_SIGNAL};
use crate::verify::{ProcessLts, StateLabel};

use super::model::SmtModel;
use super::SolverError;

fn label_of(model: &SmtModel, st: &SymbolTable, local: i64) -> Result<StateLabel, SolverError> {
    let read = |signal: &str| -> Result<bool, SolverError> {
        model.bool_term(&Term::app(SymbolTable::label_fn(signal), vec![Term::Int(local)]))
    };
    let mut out = 0u32;
    let declared: Vec<&String> = st
        .output_signals
        .iter()
        .filter(|s| s.as_str() != TOKEN_SIGNAL && s.as_str() != SEND_SIGNAL)
        .collect();
    for (k, signal) in declared.iter().enumerate() {
        if read(signal)? {
            out |= 1 << k;
        }
    }
    Ok(StateLabel { out, tok: read(TOKEN_SIGNAL)?, send: read(SEND_SIGNAL)? })
}

fn labels_of(model: &SmtModel, st: &SymbolTable) -> Result<Vec<StateLabel>, SolverError> {
    (0..st.bound_local as i64).map(|l| label_of(model, st, l)).collect()
}

struct TableBuilder {
    bound_local: usize,
    n_env: usize,
    sched: HashMap<(usize, usize, bool), usize>,
    pass: HashMap<(usize, usize), usize>,
}

impl TableBuilder {
    fn new(bound_local: usize, n_env: usize) -> Self {
        TableBuilder { bound_local, n_env, sched: HashMap::new(), pass: HashMap::new() }
    }

    fn add_sched(
        &mut self,
        local: usize,
        env: usize,
        recv: bool,
        target: usize,
    ) -> Result<(), SolverError> {
        match self.sched.insert((local, env, recv), target) {
            Some(prev) if prev != target => Err(SolverError::Extraction(format!(
                "ambiguous scheduled transition from state {local} (env {env}, recv {recv}): \
                 {prev} vs {target}"
            ))),
            _ => Ok(()),
        }
    }

    fn add_pass(&mut self, local: usize, env: usize, target: usize) -> Result<(), SolverError> {
        match self.pass.insert((local, env), target) {
            Some(prev) if prev != target => Err(SolverError::Extraction(format!(
                "ambiguous handoff transition from state {local} (env {env}): {prev} vs {target}"
            ))),
            _ => Ok(()),
        }
    }

    /// Unconstrained points default to staying put; they are only ever
    /// outside the reachable one-token region, and the model check on the
    /// composed system re-verifies the result anyway.
    fn finish(self) -> (Vec<Vec<[usize; 2]>>, Vec<Vec<usize>>) {
        let n_vals = 1usize << self.n_env;
        let mut sched = vec![vec![[0usize; 2]; n_vals]; self.bound_local];
        let mut pass = vec![vec![0usize; n_vals]; self.bound_local];
        for l in 0..self.bound_local {
            for e in 0..n_vals {
                for (r, slot) in [(false, 0usize), (true, 1)] {
                    sched[l][e][slot] = self.sched.get(&(l, e, r)).copied().unwrap_or(l);
                }
                pass[l][e] = self.pass.get(&(l, e)).copied().unwrap_or(l);
            }
        }
        (sched, pass)
    }
}

fn read_proj(
    model: &SmtModel,
    st: &SymbolTable,
    proc: usize,
    t: i64,
) -> Result<usize, SolverError> {
    let v = model.int_term(&st.proj_term(proc, Term::Int(t)))?;
    Ok(v as usize)
}

/// Extracts the synthesized process from a ring or single-process model.
pub fn extract_process(model: &SmtModel, st: &SymbolTable) -> Result<ProcessLts, SolverError> {
    match st.mode {
        Mode::Ring => extract_ring(model, st),
        Mode::Single => extract_single(model, st),
        Mode::NetworkBlock => Err(SolverError::Extraction(
            "network models are extracted from the full encoding".into(),
        )),
    }
}

fn extract_ring(model: &SmtModel, st: &SymbolTable) -> Result<ProcessLts, SolverError> {
    let n = st.n_procs;
    let labels = labels_of(model, st)?;
    let pred = |i: usize| (i + n - 2) % n + 1;
    let succ = |i: usize| i % n + 1;

    // Initial token distribution must put the token exactly at process 1.
    for i in 1..=n {
        let local = read_proj(model, st, i, 0)?;
        let has = labels
            .get(local)
            .ok_or_else(|| SolverError::Extraction(format!("projection out of range: {local}")))?
            .tok;
        if (i == 1) != has {
            return Err(SolverError::Extraction(format!(
                "initial token distribution is wrong at process {i}"
            )));
        }
    }

    let mut tables = TableBuilder::new(st.bound_local, st.env_signals.len());
    for i in 1..=n {
        for t in 0..st.bound_global as i64 {
            let local = read_proj(model, st, i, t)?;
            let pred_local = read_proj(model, st, pred(i), t)?;
            let offered = labels[pred_local].send;
            for &mask in &st.valuations {
                let scheduled = st.scheduled(mask).map(|s| s + 1).unwrap_or(0);
                let env = st.input_mask_of(i, mask);
                if scheduled == i {
                    let target = model.int_term(&st.proj_term(i, st.delta_term(t, mask)))? as usize;
                    tables.add_sched(local, env, offered, target)?;
                } else if scheduled == succ(i) && labels[local].send && !offered {
                    // Handoff point; skip configurations where the sender is
                    // itself being offered a second token — those are
                    // outside the one-token region the constraints pin down.
                    let target = model.int_term(&st.proj_term(i, st.delta_term(t, mask)))? as usize;
                    tables.add_pass(local, env, target)?;
                }
            }
        }
    }
    let (step_sched, step_pass) = tables.finish();
    let init_token = read_proj(model, st, 1, 0)?;
    let init_idle = read_proj(model, st, 2, 0)?;
    let declared: Vec<String> = st
        .output_signals
        .iter()
        .filter(|s| s.as_str() != TOKEN_SIGNAL && s.as_str() != SEND_SIGNAL)
        .cloned()
        .collect();
    let p = ProcessLts {
        env_inputs: st.env_signals.clone(),
        outputs: declared,
        labels,
        init_token,
        init_idle,
        step_sched,
        step_pass,
    };
    p.assert_consistent();
    Ok(p)
}

fn extract_single(model: &SmtModel, st: &SymbolTable) -> Result<ProcessLts, SolverError> {
    let labels = labels_of(model, st)?;
    if labels[0].tok {
        return Err(SolverError::Extraction(
            "single-process model starts with the token".into(),
        ));
    }
    let n_env = st.env_signals.len();
    let mut tables = TableBuilder::new(st.bound_local, n_env);
    for t in 0..st.bound_global as i64 {
        for &mask in &st.valuations {
            let env = st.input_mask_of(1, mask);
            let recv = st.recv_bit_of(mask);
            let target = model.int_term(&st.delta_term(t, mask))? as usize;
            tables.add_sched(t as usize, env, recv, target)?;
            // The handoff move replays the synchronous step without a new
            // token offer.
            if !recv && labels[t as usize].send {
                tables.add_pass(t as usize, env, target)?;
            }
        }
    }
    let (step_sched, step_pass) = tables.finish();
    // Token instances start in the state reached on the first quiet
    // receipt.
    let init_token = step_sched[0][0][1];
    let declared: Vec<String> = st
        .output_signals
        .iter()
        .filter(|s| s.as_str() != TOKEN_SIGNAL && s.as_str() != SEND_SIGNAL)
        .cloned()
        .collect();
    let p = ProcessLts {
        env_inputs: st.env_signals.clone(),
        outputs: declared,
        labels,
        init_token,
        init_idle: 0,
        step_sched,
        step_pass,
    };
    p.assert_consistent();
    Ok(p)
}

/// Extracts the process from a network model: the shared step functions
/// are the transition table, the first block's projections pick the
/// initial states.
pub fn extract_process_network(
    model: &SmtModel,
    enc: &NetworkEncoding,
    interface: &ProcessInterface,
) -> Result<ProcessLts, SolverError> {
    let st = enc
        .blocks
        .first()
        .ok_or_else(|| SolverError::Extraction("no topology blocks".into()))?;
    let labels = labels_of(model, st)?;
    let bl = st.bound_local;
    let n_env = interface.env_inputs.len();
    let mut step_sched = vec![vec![[0usize; 2]; 1 << n_env]; bl];
    let mut step_pass = vec![vec![0usize; 1 << n_env]; bl];
    for l in 0..bl as i64 {
        for mask in 0..(1usize << n_env) {
            let mut args = vec![Term::Int(l)];
            for k in 0..n_env {
                args.push(Term::Bool(mask & (1 << k) != 0));
            }
            step_pass[l as usize][mask] =
                model.int_term(&Term::app(crate::encoder::STEP_PASS, args.clone()))? as usize;
            for (slot, recv) in [(0usize, false), (1, true)] {
                let mut a2 = args.clone();
                a2.push(Term::Bool(recv));
                step_sched[l as usize][mask][slot] =
                    model.int_term(&Term::app(crate::encoder::STEP_SCHED, a2))? as usize;
            }
        }
    }
    let init_token = read_proj(model, st, 1, 0)?;
    if !labels[init_token].tok {
        return Err(SolverError::Extraction(
            "site 1 does not hold the token initially".into(),
        ));
    }
    let init_idle = if st.n_sites >= 2 {
        read_proj(model, st, 2, 0)?
    } else {
        (0..bl)
            .find(|&l| !labels[l].tok)
            .ok_or_else(|| SolverError::Extraction("no idle state in the model".into()))?
    };
    let declared: Vec<String> = interface.outputs.clone();
    let p = ProcessLts {
        env_inputs: interface.env_inputs.clone(),
        outputs: declared,
        labels,
        init_token,
        init_idle,
        step_sched,
        step_pass,
    };
    p.assert_consistent();
    Ok(p)
}
