//! High-level plumbing shared by the command-line driver and the test
//! suites: building the automaton for an instance and verifying a
//! synthesized process across instance sizes.

use crate::automaton::{ucw_for_formula, Alphabet, AutomatonError, Ucw};
use crate::ltl::{
    augment_fairness, instantiate_conjunction, FairnessMode, IndexedSpec, Ltl,
};
use crate::par;
use crate::topology::NetworkGraph;
use crate::verify::{
    check_one_token, check_unscheduled_invariance, compose_network, compose_ring, model_check,
    ProcessLts, Verdict, VerifyError,
};

/// The fairness-augmented ground specification of a ring instance.
pub fn ring_instance_spec(guarantees: &[IndexedSpec], n: u32) -> Result<Ltl, crate::ltl::SpecError> {
    let ground = instantiate_conjunction(guarantees, n)?;
    Ok(augment_fairness(&ground, FairnessMode::Ring, n))
}

/// The fairness-augmented ground specification of a concrete network
/// instance over `n` processes.
pub fn network_instance_spec(
    guarantees: &[IndexedSpec],
    n: u32,
) -> Result<Ltl, crate::ltl::SpecError> {
    let ground = instantiate_conjunction(guarantees, n)?;
    Ok(augment_fairness(&ground, FairnessMode::Network, n))
}

pub fn ucw_of(formula: &Ltl) -> Result<Ucw, AutomatonError> {
    let alphabet = Alphabet::of_formula(formula)?;
    ucw_for_formula(formula, &alphabet)
}

/// Result of checking one instance.
#[derive(Debug)]
pub struct InstanceVerdict {
    pub instance: String,
    pub holds: bool,
    pub one_token: Result<(), String>,
    pub unscheduled: Result<(), String>,
    pub detail: Option<String>,
}

impl InstanceVerdict {
    pub fn ok(&self) -> bool {
        self.holds && self.one_token.is_ok() && self.unscheduled.is_ok()
    }
}

/// Composes the process in rings of the given sizes and checks the
/// augmented specification plus the structural invariants on each;
/// instances are independent and checked in parallel.
pub fn verify_in_rings(
    process: &ProcessLts,
    guarantees: &[IndexedSpec],
    sizes: &[u32],
    cap: usize,
) -> Result<Vec<InstanceVerdict>, VerifyError> {
    let results = par::map_collect(sizes.to_vec(), |n| -> Result<InstanceVerdict, VerifyError> {
        let lts = compose_ring(process, n as usize, cap)?;
        let spec = ring_instance_spec(guarantees, n)
            .map_err(|e| VerifyError::UndeclaredAtom(e.to_string()))?;
        let verdict = model_check(&lts, &spec)?;
        let detail = match &verdict {
            Verdict::Holds => None,
            Verdict::Violated(cex) => Some(format!(
                "{}",
                crate::verify::CounterexampleDisplay { cex, lts: &lts }
            )),
        };
        Ok(InstanceVerdict {
            instance: format!("ring:{n}"),
            holds: verdict.holds(),
            one_token: check_one_token(&lts),
            unscheduled: check_unscheduled_invariance(&lts),
            detail,
        })
    });
    results.into_iter().collect()
}

/// Composes the process over the concrete network graph (every node runs
/// the synthesized process) and checks the network-augmented spec plus the
/// invariants.
pub fn verify_on_network(
    process: &ProcessLts,
    guarantees: &[IndexedSpec],
    graph: &NetworkGraph,
    cap: usize,
) -> Result<InstanceVerdict, VerifyError> {
    let lts = compose_network(process, graph, &[], None, cap)?;
    let n = graph.nodes().len() as u32;
    let spec = network_instance_spec(guarantees, n)
        .map_err(|e| VerifyError::UndeclaredAtom(e.to_string()))?;
    let verdict = model_check(&lts, &spec)?;
    let detail = match &verdict {
        Verdict::Holds => None,
        Verdict::Violated(cex) => Some(format!(
            "{}",
            crate::verify::CounterexampleDisplay { cex, lts: &lts }
        )),
    };
    Ok(InstanceVerdict {
        instance: format!("network:{n}"),
        holds: verdict.holds(),
        one_token: check_one_token(&lts),
        unscheduled: check_unscheduled_invariance(&lts),
        detail,
    })
}
