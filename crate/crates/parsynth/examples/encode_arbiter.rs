//! Emits the ring arbiter script for inspection.
use parsynth::automaton::{ucw_for_formula, Alphabet};
use parsynth::encoder::encode_ring;
use parsynth::ltl::{augment_fairness, instantiate_conjunction, parse_spec, FairnessMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: u32 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(4);
    let bl: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2);
    let bg: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(4);
    let file = parse_spec(
        "input r;\noutput g;\n\
         guarantee forall i != j . G !(g_i & g_j);\n\
         guarantee forall i . G (r_i -> F g_i);\n",
    )
    .unwrap();
    let ground = instantiate_conjunction(&file.guarantees, n).unwrap();
    let augmented = augment_fairness(&ground, FairnessMode::Ring, n);
    let alphabet = Alphabet::of_formula(&augmented).unwrap();
    let ucw = ucw_for_formula(&augmented, &alphabet).unwrap();
    eprintln!("UCW: {} states, {} edges", ucw.n_states(), ucw.n_edges());
    let (script, _) = encode_ring(&ucw, n as usize, bg, bl, &file.interface).unwrap();
    eprintln!("asserts: {}, queries: {}", script.asserts.len(), script.queries.len());
    print!("{}", script.render());
}
