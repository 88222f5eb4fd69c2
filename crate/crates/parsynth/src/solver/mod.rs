//! Driving an external SMT-LIB2 solver process, parsing its models,
//! extracting the synthesized process, and the increasing-bounds loop.

mod extract;
mod model;
mod run;
mod validate;

pub use extract::{extract_process, extract_process_network};
pub use model::{Rat, SmtModel, Value};
pub use run::{discover_solver, run_solver, SolverCmd};
pub use validate::validate_model;

use std::path::PathBuf;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::Ucw;
use crate::encoder::{encode_network, encode_ring, encode_single_process, NetworkEncoding};
use crate::ltl::ProcessInterface;
use crate::topology::{BoolExpr, ConnectionTopology};
use crate::verify::ProcessLts;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("failed to start solver `{cmd}`: {source}")]
    Spawn {
        cmd: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed solver output: {0}")]
    Malformed(String),
    #[error("model is incomplete: no value for `{0}`")]
    IncompleteModel(String),
    #[error("extracted model violates script assertion #{index}: {term}")]
    ModelInvalid { index: usize, term: String },
    #[error("extraction failed: {0}")]
    Extraction(String),
    #[error(transparent)]
    Encode(#[from] crate::encoder::EncodeError),
    #[error("empty bound schedule")]
    EmptySchedule,
}

/// Outcome of one solver invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown(String),
}

#[derive(Debug)]
pub struct SolverResult {
    pub status: SolverStatus,
    /// Present exactly when the status is `Sat`.
    pub model: Option<SmtModel>,
    pub wall: Duration,
}

/// Ordered bound pairs `(local, global)` to attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSchedule {
    pub pairs: Vec<(usize, usize)>,
}

impl BoundSchedule {
    /// Diagonal enumeration ordered by global size then local size, with
    /// the global bound capped by both `local * n` and `local ^ n`: larger
    /// global spaces add nothing a ring of `n` copies can reach. Every
    /// useful pair is reached eventually, so the semi-decision loop is
    /// complete in the limit.
    pub fn ring_default(n: usize, max_attempts: usize) -> Self {
        let mut pairs = Vec::new();
        let mut g = 1usize;
        while pairs.len() < max_attempts && g < 64 {
            for l in 1..=g {
                let cap_lin = l.saturating_mul(n);
                let cap_exp = l.saturating_pow(n as u32);
                if g <= cap_lin.min(cap_exp) && pairs.len() < max_attempts {
                    pairs.push((l, g));
                }
            }
            g += 1;
        }
        BoundSchedule { pairs }
    }

    /// Local bounds only (network and single-process synthesis).
    pub fn local_only(max_local: usize) -> Self {
        BoundSchedule { pairs: (1..=max_local).map(|l| (l, l)).collect() }
    }

    /// Parses `l1,g1;l2,g2;...`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut pairs = Vec::new();
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (l, g) = part
                .split_once(',')
                .ok_or_else(|| format!("bad bound pair `{part}`, expected `local,global`"))?;
            let l: usize = l.trim().parse().map_err(|_| format!("bad local bound `{l}`"))?;
            let g: usize = g.trim().parse().map_err(|_| format!("bad global bound `{g}`"))?;
            pairs.push((l, g));
        }
        if pairs.is_empty() {
            return Err("empty bound schedule".into());
        }
        Ok(BoundSchedule { pairs })
    }
}

/// What to synthesize.
pub enum SynthesisMode<'a> {
    /// Isomorphic processes in a ring of `n`.
    Ring { n: usize },
    /// One process under environment assumptions.
    Single,
    /// One process satisfying every connection topology block.
    Network { cts: &'a [ConnectionTopology], boolean_fn: Option<&'a BoolExpr> },
}

#[derive(Debug, Clone, Serialize)]
pub struct AttemptLog {
    pub local: usize,
    pub global: usize,
    pub status: SolverStatus,
    pub wall_ms: u128,
}

#[derive(Debug)]
pub enum SynthesisOutcome {
    Synthesized {
        process: ProcessLts,
        local: usize,
        global: usize,
        attempts: Vec<AttemptLog>,
    },
    /// The schedule was exhausted without a model. This never claims
    /// unrealizability: the procedure is a semi-decision.
    NoneWithinSchedule { attempts: Vec<AttemptLog> },
}

pub struct SynthesisJob<'a> {
    pub ucw: &'a Ucw,
    pub interface: &'a ProcessInterface,
    pub mode: SynthesisMode<'a>,
    pub schedule: BoundSchedule,
    pub solver: SolverCmd,
    pub timeout: Duration,
    /// When set, every attempted script is written here with a
    /// bound-stamped filename.
    pub emit_dir: Option<PathBuf>,
}

/// Iterates the bound schedule: encode, solve, and on the first `sat`
/// extract and re-validate the process. `unknown` results advance the
/// schedule like `unsat`.
pub fn synthesize(job: &SynthesisJob<'_>) -> Result<SynthesisOutcome, SolverError> {
    if job.schedule.pairs.is_empty() {
        return Err(SolverError::EmptySchedule);
    }
    let mut attempts = Vec::new();
    let mut last_local = None;
    for &(local, global) in &job.schedule.pairs {
        // Network and single-process encodings only depend on the local
        // bound; skip duplicate attempts.
        if matches!(job.mode, SynthesisMode::Network { .. } | SynthesisMode::Single)
            && last_local == Some(local)
        {
            continue;
        }
        last_local = Some(local);

        enum Enc {
            Plain(crate::encoder::SmtScript, crate::encoder::SymbolTable),
            Net(NetworkEncoding),
        }
        let enc = match &job.mode {
            SynthesisMode::Ring { n } => {
                let (script, st) = encode_ring(job.ucw, *n, global, local, job.interface)?;
                Enc::Plain(script, st)
            }
            SynthesisMode::Single => {
                let (script, st) = encode_single_process(job.ucw, local, job.interface)?;
                Enc::Plain(script, st)
            }
            SynthesisMode::Network { cts, boolean_fn } => {
                Enc::Net(encode_network(job.ucw, cts, local, job.interface, *boolean_fn)?)
            }
        };
        let (script, tag) = match &enc {
            Enc::Plain(script, _) => (script, format!("l{local}_g{global}")),
            Enc::Net(net) => (&net.script, format!("l{local}")),
        };
        if let Some(dir) = &job.emit_dir {
            std::fs::create_dir_all(dir)?;
            let name = match &job.mode {
                SynthesisMode::Ring { .. } => format!("ring_{tag}.smt2"),
                SynthesisMode::Single => format!("single_{tag}.smt2"),
                SynthesisMode::Network { .. } => format!("network_{tag}.smt2"),
            };
            std::fs::write(dir.join(name), script.render())?;
        }

        let result = run_solver(script, &job.solver, job.timeout)?;
        attempts.push(AttemptLog {
            local,
            global,
            status: result.status.clone(),
            wall_ms: result.wall.as_millis(),
        });
        if result.status != SolverStatus::Sat {
            continue;
        }
        let model = result.model.expect("sat results carry a model");
        // The soundness hook: every assertion of the script must evaluate
        // to true under the parsed model before we trust the extraction.
        validate_model(script, &model)?;
        let process = match &enc {
            Enc::Plain(_, st) => extract_process(&model, st)?,
            Enc::Net(net) => extract_process_network(&model, net, job.interface)?,
        };
        return Ok(SynthesisOutcome::Synthesized { process, local, global, attempts });
    }
    Ok(SynthesisOutcome::NoneWithinSchedule { attempts })
}

#[cfg(test)]
mod tests;
