//! Classification, instantiation and fairness augmentation of indexed
//! specifications.

use std::collections::BTreeSet;

use super::ast::*;
use super::SpecError;

/// Classifies one universal prenex sentence by its syntactic shape.
///
/// * `forall i. phi(i)` — class A, cutoff 2
/// * `forall i. phi(i, i+1)` — class B, cutoff 3
/// * `forall i != j. phi(i, j)` — class C, cutoff 4
/// * `forall i != j. phi(i, i+1, j)` — class D, cutoff 5
///
/// Shapes outside these four have no known cutoff and are rejected.
pub fn classify(spec: &IndexedSpec) -> Result<CutoffClass, SpecError> {
    if !spec.is_universal() {
        return Err(SpecError::NoKnownCutoff("existential quantifier in prefix".into()));
    }
    spec.validate()?;

    let mut vars: BTreeSet<&str> = BTreeSet::new();
    let mut plus_one: BTreeSet<&str> = BTreeSet::new();
    for a in spec.body.atoms() {
        match (&a.index.base, a.index.offset) {
            (IndexBase::Const(_), _) => {
                return Err(SpecError::NoKnownCutoff(format!(
                    "constant index in atom `{a}`"
                )));
            }
            (IndexBase::Var(v), 0) => {
                vars.insert(v);
            }
            (IndexBase::Var(v), 1) => {
                vars.insert(v);
                plus_one.insert(v);
            }
            (IndexBase::Var(_), o) => {
                return Err(SpecError::NoKnownCutoff(format!(
                    "offset {o:+} in atom `{a}` (only 0 and +1 are supported)"
                )));
            }
        }
    }

    let class = match vars.len() {
        0 => ShapeClass::A,
        1 => {
            if plus_one.is_empty() {
                ShapeClass::A
            } else {
                ShapeClass::B
            }
        }
        2 => {
            let declared_distinct = spec.prefix.iter().any(|q| {
                q.distinct_from
                    .iter()
                    .any(|d| vars.contains(d.as_str()) && vars.contains(q.var.as_str()))
            });
            if !declared_distinct {
                return Err(SpecError::NoKnownCutoff(
                    "two index variables without a distinctness constraint".into(),
                ));
            }
            match plus_one.len() {
                0 => ShapeClass::C,
                1 => ShapeClass::D,
                _ => {
                    return Err(SpecError::NoKnownCutoff(
                        "successor offsets on both index variables".into(),
                    ));
                }
            }
        }
        n => {
            return Err(SpecError::NoKnownCutoff(format!("{n} index variables (at most 2)")));
        }
    };
    Ok(CutoffClass::new(class))
}

/// Classifies a conjunction of sentences: the maximum class over conjuncts.
pub fn classify_conjunction(specs: &[IndexedSpec]) -> Result<CutoffClass, SpecError> {
    let mut best = ShapeClass::A;
    for s in specs {
        let c = classify(s)?;
        best = best.max(c.class);
    }
    Ok(CutoffClass::new(best))
}

fn assignments(prefix: &[Quantifier], n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    fn recurse(prefix: &[Quantifier], n: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == prefix.len() {
            out.push(current.clone());
            return;
        }
        let q = &prefix[current.len()];
        'candidates: for v in 1..=n {
            for d in &q.distinct_from {
                if let Some(pos) = prefix.iter().position(|p| &p.var == d) {
                    if pos < current.len() && current[pos] == v {
                        continue 'candidates;
                    }
                }
            }
            // Distinctness declared on an earlier variable against this one.
            for (pos, p) in prefix.iter().enumerate() {
                if pos < current.len()
                    && p.distinct_from.iter().any(|d| d == &q.var)
                    && current[pos] == v
                {
                    continue 'candidates;
                }
            }
            current.push(v);
            recurse(prefix, n, current, out);
            current.pop();
        }
    }
    recurse(prefix, n, &mut current, &mut out);
    out
}

/// Instantiates the body at one concrete assignment of the prefix variables
/// (by prefix position), wrapping index arithmetic modulo `n`.
pub fn instantiate_at(spec: &IndexedSpec, assign: &[u32], n: u32) -> Result<Ltl, SpecError> {
    if assign.len() != spec.prefix.len() {
        return Err(SpecError::Invalid(format!(
            "assignment has {} values for {} quantifiers",
            assign.len(),
            spec.prefix.len()
        )));
    }
    let lookup = |name: &str| -> Option<u32> {
        spec.prefix.iter().position(|q| q.var == name).map(|p| assign[p])
    };
    let body = spec.body.map_atoms(&|a| {
        let id = a
            .index
            .eval(&lookup, n)
            .expect("validated spec has no unbound variables");
        Atom::ground(a.signal.clone(), id)
    });
    Ok(body)
}

/// Instantiates a universal sentence as the conjunction over all admissible
/// assignments into `{1..n}`, in lexicographic assignment order.
pub fn instantiate(spec: &IndexedSpec, n: u32) -> Result<Ltl, SpecError> {
    if n == 0 {
        return Err(SpecError::Invalid("instance size must be at least 1".into()));
    }
    if !spec.is_universal() {
        return Err(SpecError::Invalid(
            "instantiate requires a purely universal prefix".into(),
        ));
    }
    spec.validate()?;
    let mut parts = Vec::new();
    for assign in assignments(&spec.prefix, n) {
        parts.push(instantiate_at(spec, &assign, n)?);
    }
    Ok(Ltl::conjoin(parts))
}

/// Conjunction of the instantiations of several sentences.
pub fn instantiate_conjunction(specs: &[IndexedSpec], n: u32) -> Result<Ltl, SpecError> {
    let mut parts = Vec::new();
    for s in specs {
        parts.push(instantiate(s, n)?);
    }
    Ok(Ltl::conjoin(parts))
}

/// Which fairness premise liveness guarantees receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairnessMode {
    /// Rings: liveness guarantees assume fair scheduling.
    Ring,
    /// Token-passing networks: the scheduler resolves token passing, so
    /// liveness guarantees assume fair token passing instead.
    Network,
}

fn fair_scheduling(n: u32) -> Ltl {
    Ltl::conjoin(
        (1..=n).map(|j| Ltl::globally(Ltl::eventually(Ltl::ground_atom(SCHED_SIGNAL, j)))),
    )
}

fn fair_token(n: u32) -> Ltl {
    Ltl::conjoin(
        (1..=n).map(|i| Ltl::globally(Ltl::eventually(Ltl::ground_atom(TOKEN_SIGNAL, i)))),
    )
}

/// Adds fairness premises to the liveness conjuncts of an instantiated
/// specification and appends the token-release guarantees.
///
/// A top-level conjunct counts as a liveness guarantee iff it contains `F`
/// or `U`; safety conjuncts are left untouched. The added token-release
/// guarantees `G(tok_i -> F send_i)` always carry the fair-scheduling
/// premise, in both modes.
pub fn augment_fairness(ground: &Ltl, mode: FairnessMode, n: u32) -> Ltl {
    let premise = match mode {
        FairnessMode::Ring => fair_scheduling(n),
        FairnessMode::Network => fair_token(n),
    };
    let mut parts: Vec<Ltl> = Vec::new();
    for c in ground.conjuncts() {
        if c.contains_liveness() {
            parts.push(Ltl::implies(premise.clone(), c.clone()));
        } else {
            parts.push(c.clone());
        }
    }
    for i in 1..=n {
        parts.push(Ltl::implies(
            fair_scheduling(n),
            Ltl::globally(Ltl::implies(
                Ltl::ground_atom(TOKEN_SIGNAL, i),
                Ltl::eventually(Ltl::ground_atom(SEND_SIGNAL, i)),
            )),
        ));
    }
    Ltl::conjoin(parts)
}

/// Builds the single-process synthesis obligation for a class-A sentence:
/// the neighbour's token behaviour becomes an environment assumption.
///
/// Returns `A_token -> phi(1)` with
/// `A_token = G(!tok_1 -> F send_2) & G(tok_1 -> !send_2)`.
pub fn build_token_assumption(spec: &IndexedSpec) -> Result<Ltl, SpecError> {
    let class = classify(spec)?;
    if class.class != ShapeClass::A {
        return Err(SpecError::NotClassA(class.class));
    }
    let assign: Vec<u32> = spec.prefix.iter().map(|_| 1).collect();
    let phi1 = instantiate_at(spec, &assign, 2)?;
    let tok1 = Ltl::ground_atom(TOKEN_SIGNAL, 1);
    let send2 = Ltl::ground_atom(SEND_SIGNAL, 2);
    let a_token = Ltl::and(
        Ltl::globally(Ltl::implies(Ltl::not(tok1.clone()), Ltl::eventually(send2.clone()))),
        Ltl::globally(Ltl::implies(tok1, Ltl::not(send2))),
    );
    Ok(Ltl::implies(a_token, phi1))
}

/// Completes a single-process synthesis obligation with the unconditional
/// token-release guarantee `G(tok_1 -> F send_1)`. The cutoff reduction
/// requires implementations that pass the token fairly, and the single
/// process is always scheduled, so the release carries no premise here.
pub fn upgrade_single_obligation(obligation: &Ltl) -> Ltl {
    Ltl::and(
        obligation.clone(),
        Ltl::globally(Ltl::implies(
            Ltl::ground_atom(TOKEN_SIGNAL, 1),
            Ltl::eventually(Ltl::ground_atom(SEND_SIGNAL, 1)),
        )),
    )
}

/// Merges the guarantees of a file into a single k-indexed sentence over a
/// common prefix, for the network-reduction pipeline.
///
/// Guarantees quantifying over fewer variables than the widest one are
/// replicated at every prefix position (a 1-variable guarantee `phi(i)`
/// becomes `phi(i) & phi(j)` under a 2-variable prefix), so the merged body
/// covers every site of a connection topology.
pub fn merge_k_indexed(specs: &[IndexedSpec]) -> Result<IndexedSpec, SpecError> {
    if specs.is_empty() {
        return Ok(IndexedSpec::new(vec![Quantifier::forall("i")], Ltl::True));
    }
    for s in specs {
        if !s.is_universal() {
            return Err(SpecError::Invalid(
                "network reduction requires universal guarantees".into(),
            ));
        }
        s.validate()?;
    }
    let widest = specs
        .iter()
        .max_by_key(|s| s.prefix.len())
        .expect("nonempty");
    let k = widest.prefix.len();
    let canonical: Vec<String> = widest.prefix.iter().map(|q| q.var.clone()).collect();

    let mut parts = Vec::new();
    for s in specs {
        let kg = s.prefix.len();
        if kg == k {
            // Positional rename onto the canonical variables.
            let names: Vec<String> = s.prefix.iter().map(|q| q.var.clone()).collect();
            parts.push(s.body.map_atoms(&|a| {
                let mut a = a.clone();
                if let IndexBase::Var(v) = &a.index.base {
                    if let Some(pos) = names.iter().position(|n| n == v) {
                        a.index.base = IndexBase::Var(canonical[pos].clone());
                    }
                }
                a
            }));
        } else if kg == 1 {
            let name = s.prefix[0].var.clone();
            for target in &canonical {
                parts.push(s.body.map_atoms(&|a| {
                    let mut a = a.clone();
                    if a.index.base == IndexBase::Var(name.clone()) {
                        a.index.base = IndexBase::Var(target.clone());
                    }
                    a
                }));
            }
        } else {
            return Err(SpecError::Invalid(format!(
                "cannot merge a {kg}-variable guarantee under a {k}-variable prefix"
            )));
        }
    }
    Ok(IndexedSpec::new(widest.prefix.clone(), Ltl::conjoin(parts)))
}

/// Syntactic check that the body is invariant under transposing any two
/// prefix variables, modulo commutativity of `&` and `|`.
pub fn is_transposition_symmetric(spec: &IndexedSpec) -> bool {
    let vars: Vec<&String> = spec.prefix.iter().map(|q| &q.var).collect();
    let reference = spec.body.canonical();
    for x in 0..vars.len() {
        for y in x + 1..vars.len() {
            let swapped = spec.body.map_atoms(&|a| {
                let mut a = a.clone();
                if let IndexBase::Var(v) = &a.index.base {
                    if v == vars[x] {
                        a.index.base = IndexBase::Var(vars[y].clone());
                    } else if v == vars[y] {
                        a.index.base = IndexBase::Var(vars[x].clone());
                    }
                }
                a
            });
            if swapped.canonical() != reference {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_spec;

    fn spec_of(line: &str) -> IndexedSpec {
        let file = format!("input r;\noutput g;\n{line}\n");
        parse_spec(&file).unwrap().guarantees.pop().unwrap()
    }

    fn arbiter() -> Vec<IndexedSpec> {
        let file = "input r;\noutput g;\n\
                    guarantee forall i != j . G !(g_i & g_j);\n\
                    guarantee forall i . G (r_i -> F g_i);\n";
        parse_spec(file).unwrap().guarantees
    }

    #[test]
    fn classify_request_response_is_class_a() {
        let c = classify(&spec_of("guarantee forall i . G (r_i -> F g_i);")).unwrap();
        assert_eq!(c.class, ShapeClass::A);
        assert_eq!(c.cutoff, 2);
    }

    #[test]
    fn classify_mutual_exclusion_is_class_c() {
        let c = classify(&spec_of("guarantee forall i != j . G !(g_i & g_j);")).unwrap();
        assert_eq!(c.class, ShapeClass::C);
        assert_eq!(c.cutoff, 4);
    }

    #[test]
    fn classify_conjunction_takes_maximum() {
        let c = classify_conjunction(&arbiter()).unwrap();
        assert_eq!(c.class, ShapeClass::C);
        assert_eq!(c.cutoff, 4);
    }

    /// Shape table: 20 syntactic variants against their expected class.
    #[test]
    fn classify_shape_table() {
        use ShapeClass::*;
        let good: Vec<(&str, ShapeClass, u32)> = vec![
            ("guarantee forall i . G (r_i -> F g_i);", A, 2),
            ("guarantee forall i . true;", A, 2),
            ("guarantee forall i . false;", A, 2),
            ("guarantee forall i . G g_i;", A, 2),
            ("guarantee forall i . r_i U g_i;", A, 2),
            ("guarantee forall i . g_i W r_i;", A, 2),
            ("guarantee forall i . G (tok_i -> F send_i);", A, 2),
            ("guarantee forall i . G (g_i -> g_{i+1});", B, 3),
            ("guarantee forall i . G !(g_i & g_{i+1});", B, 3),
            ("guarantee forall i . F g_{i+1};", B, 3),
            ("guarantee forall i . g_{i+1} U g_i;", B, 3),
            ("guarantee forall i != j . G !(g_i & g_j);", C, 4),
            ("guarantee forall i != j . F (g_i & g_j);", C, 4),
            ("guarantee forall i != j . G (r_i -> !g_j);", C, 4),
            ("guarantee forall i != j . G ((g_i & g_{i+1}) -> !g_j);", D, 5),
            ("guarantee forall i != j . G (g_{i+1} -> !g_j);", D, 5),
        ];
        for (line, class, cutoff) in good {
            let c = classify(&spec_of(line)).unwrap_or_else(|e| panic!("{line}: {e}"));
            assert_eq!(c.class, class, "{line}");
            assert_eq!(c.cutoff, cutoff, "{line}");
        }
        let rejected = vec![
            // Offsets beyond +1 have no known cutoff.
            "guarantee forall i . G g_{i+2};",
            "guarantee forall i . G g_{i-1};",
            // Successor offsets on both variables.
            "guarantee forall i != j . G (g_{i+1} -> g_{j+1});",
            // Constant indices.
            "guarantee forall i . G (g_1 -> g_i);",
        ];
        for line in rejected {
            assert!(
                matches!(classify(&spec_of(line)), Err(SpecError::NoKnownCutoff(_))),
                "{line} should have no known cutoff"
            );
        }
        // Existential prefix, built programmatically (the file grammar has
        // no `exists`).
        let ex = IndexedSpec::new(
            vec![Quantifier::exists("i")],
            Ltl::globally(Ltl::atom("g", IndexTerm::var("i"))),
        );
        assert!(matches!(classify(&ex), Err(SpecError::NoKnownCutoff(_))));
        // Two variables without a distinctness constraint.
        let nodist = IndexedSpec::new(
            vec![Quantifier::forall("i"), Quantifier::forall("j")],
            Ltl::and(
                Ltl::atom("g", IndexTerm::var("i")),
                Ltl::atom("g", IndexTerm::var("j")),
            ),
        );
        assert!(matches!(classify(&nodist), Err(SpecError::NoKnownCutoff(_))));
        // Three variables.
        let three = IndexedSpec::new(
            vec![
                Quantifier::forall("i"),
                Quantifier::forall_distinct("j", "i"),
                Quantifier::forall_distinct("k", "i"),
            ],
            Ltl::conjoin(vec![
                Ltl::atom("g", IndexTerm::var("i")),
                Ltl::atom("g", IndexTerm::var("j")),
                Ltl::atom("g", IndexTerm::var("k")),
            ]),
        );
        assert!(matches!(classify(&three), Err(SpecError::NoKnownCutoff(_))));
    }

    #[test]
    fn instantiate_pairs_for_two_processes() {
        let spec = spec_of("guarantee forall i != j . G !(g_i & g_j);");
        let ground = instantiate(&spec, 2).unwrap();
        let expect = Ltl::and(
            Ltl::globally(Ltl::not(Ltl::and(
                Ltl::ground_atom("g", 1),
                Ltl::ground_atom("g", 2),
            ))),
            Ltl::globally(Ltl::not(Ltl::and(
                Ltl::ground_atom("g", 2),
                Ltl::ground_atom("g", 1),
            ))),
        );
        assert_eq!(ground, expect);
    }

    #[test]
    fn instantiate_wraps_successor() {
        let spec = spec_of("guarantee forall i . G (g_i -> g_{i+1});");
        let ground = instantiate(&spec, 3).unwrap();
        let part = |i: u32, j: u32| {
            Ltl::globally(Ltl::implies(Ltl::ground_atom("g", i), Ltl::ground_atom("g", j)))
        };
        assert_eq!(ground, Ltl::conjoin(vec![part(1, 2), part(2, 3), part(3, 1)]));
    }

    #[test]
    fn instantiate_counts_all_ordered_pairs() {
        // Expected conjunct count derived by independently enumerating the
        // admissible assignments.
        let spec = spec_of("guarantee forall i != j . G !(g_i & g_j);");
        for n in 2..=6u32 {
            let mut expected = 0usize;
            for i in 1..=n {
                for j in 1..=n {
                    if i != j {
                        expected += 1;
                    }
                }
            }
            let ground = instantiate(&spec, n).unwrap();
            assert_eq!(ground.conjuncts().len(), expected, "n={n}");
        }
        // Class A/B sentences have exactly n conjuncts.
        let a = spec_of("guarantee forall i . G (r_i -> F g_i);");
        for n in 1..=6u32 {
            assert_eq!(instantiate(&a, n).unwrap().conjuncts().len(), n as usize);
        }
    }

    #[test]
    fn augment_adds_premise_to_liveness_only() {
        let live = Ltl::globally(Ltl::implies(
            Ltl::ground_atom("r", 1),
            Ltl::eventually(Ltl::ground_atom("g", 1)),
        ));
        let safe = Ltl::globally(Ltl::not(Ltl::and(
            Ltl::ground_atom("g", 1),
            Ltl::ground_atom("g", 2),
        )));
        let ground = Ltl::and(safe.clone(), live.clone());
        let out = augment_fairness(&ground, FairnessMode::Ring, 2);
        let cs = out.conjuncts().into_iter().cloned().collect::<Vec<_>>();
        // safety conjunct unchanged, liveness got the premise, and two
        // token-release guarantees were appended
        assert_eq!(cs.len(), 4);
        assert_eq!(cs[0], safe);
        match &cs[1] {
            Ltl::Implies(premise, body) => {
                assert_eq!(body.as_ref(), &live);
                let premise_atoms = premise.ground_atoms().unwrap();
                assert!(premise_atoms.iter().all(|a| a.signal == SCHED_SIGNAL));
                assert_eq!(premise_atoms.len(), 2);
            }
            other => panic!("liveness conjunct should get a premise: {other}"),
        }
        for c in &cs[2..] {
            let s = c.to_string();
            assert!(s.contains("tok_") && s.contains("send_"), "{s}");
        }
    }

    #[test]
    fn augment_network_mode_uses_token_premise() {
        let live = Ltl::globally(Ltl::implies(
            Ltl::ground_atom("r", 1),
            Ltl::eventually(Ltl::ground_atom("g", 1)),
        ));
        let out = augment_fairness(&live, FairnessMode::Network, 2);
        let cs = out.conjuncts().into_iter().cloned().collect::<Vec<_>>();
        match &cs[0] {
            Ltl::Implies(premise, _) => {
                let premise_atoms = premise.ground_atoms().unwrap();
                assert!(premise_atoms.iter().all(|a| a.signal == TOKEN_SIGNAL));
            }
            other => panic!("expected premise: {other}"),
        }
        // Token release keeps the fair-scheduling premise in network mode.
        match &cs[1] {
            Ltl::Implies(premise, _) => {
                let premise_atoms = premise.ground_atoms().unwrap();
                assert!(premise_atoms.iter().all(|a| a.signal == SCHED_SIGNAL));
            }
            other => panic!("expected premise: {other}"),
        }
    }

    #[test]
    fn token_assumption_for_class_a() {
        let spec = spec_of("guarantee forall i . G (r_i -> F g_i);");
        let f = build_token_assumption(&spec).unwrap();
        let s = f.to_string();
        assert!(s.contains("tok_1"));
        assert!(s.contains("send_2"));
        assert!(s.contains("r_1"));
        let trivial = spec_of("guarantee forall i . true;");
        let f = build_token_assumption(&trivial).unwrap();
        assert!(matches!(f, Ltl::Implies(_, body) if *body == Ltl::True));
    }

    #[test]
    fn token_assumption_rejects_class_c() {
        let spec = spec_of("guarantee forall i != j . G !(g_i & g_j);");
        assert!(matches!(build_token_assumption(&spec), Err(SpecError::NotClassA(_))));
    }

    #[test]
    fn merged_arbiter_is_transposition_symmetric() {
        let merged = merge_k_indexed(&arbiter()).unwrap();
        assert_eq!(merged.prefix.len(), 2);
        assert!(is_transposition_symmetric(&merged));
        // An asymmetric body is detected.
        let asym = spec_of("guarantee forall i != j . G (r_i -> !g_j);");
        assert!(!is_transposition_symmetric(&asym));
    }
}
