//! Prints automaton sizes for the ring arbiter parts.
use parsynth::automaton::{ucw_for_formula, Alphabet};
use parsynth::ltl::{augment_fairness, instantiate_conjunction, parse_spec, FairnessMode};

fn main() {
    let n: u32 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(4);
    let file = parse_spec(
        "input r;\noutput g;\n\
         guarantee forall i != j . G !(g_i & g_j);\n\
         guarantee forall i . G (r_i -> F g_i);\n",
    )
    .unwrap();
    let ground = instantiate_conjunction(&file.guarantees, n).unwrap();
    let augmented = augment_fairness(&ground, FairnessMode::Ring, n);
    let alphabet = Alphabet::of_formula(&augmented).unwrap();
    for (i, c) in augmented.conjuncts().iter().enumerate() {
        let ucw = ucw_for_formula(c, &alphabet).unwrap();
        eprintln!("conjunct {i}: {} states {} edges   {}", ucw.n_states(), ucw.n_edges(), c);
    }
    let ucw = ucw_for_formula(&augmented, &alphabet).unwrap();
    eprintln!("TOTAL: {} states {} edges", ucw.n_states(), ucw.n_edges());
}
