//! End-to-end synthesis runs against a real SMT solver.

use std::time::Duration;

use parsynth::automaton::{ucw_for_formula, Alphabet};
use parsynth::encoder::encode_ring;
use parsynth::ltl::{
    augment_fairness, classify_conjunction, instantiate_conjunction, parse_spec, FairnessMode,
};
use parsynth::solver::{
    discover_solver, run_solver, synthesize, BoundSchedule, SolverStatus, SynthesisJob,
    SynthesisMode, SynthesisOutcome,
};
use parsynth::verify::{
    check_one_token, check_unscheduled_invariance, compose_ring, model_check,
};

const ARBITER: &str = "input r;\noutput g;\n\
                       guarantee forall i != j . G !(g_i & g_j);\n\
                       guarantee forall i . G (r_i -> F g_i);\n";

fn solver() -> parsynth::solver::SolverCmd {
    discover_solver().expect(
        "no SMT solver found: install z3, set PARSYNTH_SOLVER, or \
         `npm install -g z3-solver` for the bundled tools/z3-wasm.js wrapper",
    )
}

#[test]
fn ring_arbiter_synthesis_and_verification() {
    let file = parse_spec(ARBITER).unwrap();
    let class = classify_conjunction(&file.guarantees).unwrap();
    assert_eq!(class.cutoff, 4);

    let n = class.cutoff;
    let ground = instantiate_conjunction(&file.guarantees, n).unwrap();
    let augmented = augment_fairness(&ground, FairnessMode::Ring, n);
    let alphabet = Alphabet::of_formula(&augmented).unwrap();
    let ucw = ucw_for_formula(&augmented, &alphabet).unwrap();
    println!("ring-4 UCW: {} states, {} edges", ucw.n_states(), ucw.n_edges());

    let job = SynthesisJob {
        ucw: &ucw,
        interface: &file.interface,
        mode: SynthesisMode::Ring { n: n as usize },
        schedule: BoundSchedule::parse("2,4").unwrap(),
        solver: solver(),
        timeout: Duration::from_secs(600),
        emit_dir: None,
    };
    let outcome = synthesize(&job).unwrap();
    let SynthesisOutcome::Synthesized { process, local, global, attempts } = outcome else {
        panic!("expected a model at bounds (2,4)");
    };
    assert_eq!((local, global), (2, 4));
    println!("solved in {} ms", attempts.last().unwrap().wall_ms);
    println!("process:\n{}", process.to_dot("p"));

    // Verify the extracted process across ring sizes.
    for size in 2..=6u32 {
        let lts = compose_ring(&process, size as usize, 1_000_000).unwrap();
        check_one_token(&lts).unwrap();
        check_unscheduled_invariance(&lts).unwrap();
        let ground = instantiate_conjunction(&file.guarantees, size).unwrap();
        let spec = augment_fairness(&ground, FairnessMode::Ring, size);
        assert!(
            model_check(&lts, &spec).unwrap().holds(),
            "synthesized process fails at ring size {size}"
        );
    }
}

#[test]
fn ring_arbiter_unsat_at_local_bound_one() {
    let file = parse_spec(ARBITER).unwrap();
    let ground = instantiate_conjunction(&file.guarantees, 4).unwrap();
    let augmented = augment_fairness(&ground, FairnessMode::Ring, 4);
    let alphabet = Alphabet::of_formula(&augmented).unwrap();
    let ucw = ucw_for_formula(&augmented, &alphabet).unwrap();
    let (script, _) = encode_ring(&ucw, 4, 4, 1, &file.interface).unwrap();
    let result = run_solver(&script, &solver(), Duration::from_secs(600)).unwrap();
    assert_eq!(result.status, SolverStatus::Unsat);
}
