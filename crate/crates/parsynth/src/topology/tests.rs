use super::*;
use crate::ltl::{Ltl, Quantifier};

/// Independent flags oracle: enumerates simple paths instead of doing
/// reachability restricted to the outside.
fn brute_force_flags(g: &NetworkGraph, sites: &[u32]) -> ConnectivityFlags {
    let k = sites.len();
    let site_set: std::collections::BTreeSet<u32> = sites.iter().copied().collect();
    let mut flags = ConnectivityFlags {
        k,
        direct: vec![false; k * k],
        via_outside: vec![false; k * k],
        self_free: vec![false; k],
    };
    // All simple paths from start whose interior avoids the sites.
    fn search(
        g: &NetworkGraph,
        sites: &std::collections::BTreeSet<u32>,
        path: &mut Vec<u32>,
        target: u32,
        hit: &mut bool,
    ) {
        let last = *path.last().unwrap();
        for next in g.successors(last) {
            if next == target && path.len() >= 2 {
                *hit = true;
                continue;
            }
            if sites.contains(&next) || path.contains(&next) {
                continue;
            }
            path.push(next);
            search(g, sites, path, target, hit);
            path.pop();
        }
    }
    for (x, &sx) in sites.iter().enumerate() {
        for (y, &sy) in sites.iter().enumerate() {
            flags.direct[x * k + y] = g.has_edge(sx, sy);
            let mut hit = false;
            let mut path = vec![sx];
            search(g, &site_set, &mut path, sy, &mut hit);
            if x == y {
                flags.self_free[x] = hit;
            } else {
                flags.via_outside[x * k + y] = hit;
            }
        }
    }
    flags
}

#[test]
fn ring_graph_shape() {
    let g = ring_graph(4).unwrap();
    assert_eq!(g.nodes(), &[1, 2, 3, 4]);
    assert_eq!(g.edges().len(), 4);
    assert!(g.has_edge(4, 1));
    assert!(ring_graph(1).is_err());
    let g2 = ring_graph(2).unwrap();
    let edges: Vec<(u32, u32)> = g2.edges().iter().copied().collect();
    assert_eq!(edges, vec![(1, 2), (2, 1)]);
}

#[test]
fn graph_validation() {
    assert!(NetworkGraph::new(vec![], []).is_err());
    assert!(NetworkGraph::new(vec![1], [(1, 1)]).is_err());
    // Two disjoint rings: not strongly connected.
    assert!(NetworkGraph::new(
        vec![1, 2, 3, 4],
        [(1, 2), (2, 1), (3, 4), (4, 3)]
    )
    .is_err());
}

#[test]
fn parse_graph_roundtrip() {
    let g = reconstructed_prio_ring();
    let parsed = parse_graph_file(&g.to_string()).unwrap();
    assert_eq!(parsed, g);
    assert!(parse_graph_file("node 1\nfrob 2\n").is_err());
    let b = builtin_graph("ring:5").unwrap().unwrap();
    assert_eq!(b, ring_graph(5).unwrap());
    let p = builtin_graph("prio-ring:8:5:1").unwrap().unwrap();
    assert_eq!(p, reconstructed_prio_ring());
    assert!(builtin_graph("arbiter.graph").is_none());
}

#[test]
fn opposite_sites_on_ring_of_four() {
    let g = ring_graph(4).unwrap();
    let ct = connection_topology(&g, &[1, 3]).unwrap();
    assert_eq!(ct.flags, brute_force_flags(&g, &[1, 3]));
    assert!(ct.flags.via_outside(0, 1));
    assert!(ct.flags.via_outside(1, 0));
    assert!(!ct.flags.direct(0, 1));
    assert!(!ct.flags.direct(1, 0));
    assert!(!ct.flags.self_free(0));
    assert!(!ct.flags.self_free(1));
    // Representative: site-hub-site-hub cycle.
    assert_eq!(ct.hubs.len(), 2);
    assert_eq!(ct.representative.nodes().len(), 4);
    assert!(ct.realizes_flags());
}

#[test]
fn adjacent_sites_on_ring_of_four() {
    let g = ring_graph(4).unwrap();
    let ct = connection_topology(&g, &[1, 2]).unwrap();
    assert_eq!(ct.flags, brute_force_flags(&g, &[1, 2]));
    assert!(ct.flags.direct(0, 1));
    assert!(!ct.flags.direct(1, 0));
    // The way back from 2 to 1 runs through 3 and 4.
    assert!(ct.flags.via_outside(1, 0));
    assert!(!ct.flags.via_outside(0, 1));
    assert!(ct.realizes_flags());
    assert_eq!(ct.hubs.len(), 1);
}

#[test]
fn prio_ring_flags_match_brute_force_everywhere() {
    let g = reconstructed_prio_ring();
    for a in g.nodes() {
        for b in g.nodes() {
            if a == b {
                continue;
            }
            let ct = connection_topology(&g, &[*a, *b]).unwrap();
            assert_eq!(ct.flags, brute_force_flags(&g, &[*a, *b]), "sites ({a},{b})");
            assert!(ct.realizes_flags(), "sites ({a},{b})");
            assert!(ct.representative.nodes().len() <= 4);
        }
    }
}

#[test]
fn prio_ring_topology_for_sites_one_and_four() {
    // Two sites of the prioritized ring with outside paths both ways and
    // no free round trips: a two-hub shape.
    let g = reconstructed_prio_ring();
    let ct = connection_topology(&g, &[1, 4]).unwrap();
    assert!(ct.flags.via_outside(0, 1));
    assert!(ct.flags.via_outside(1, 0));
    assert!(!ct.flags.direct(0, 1));
    assert!(!ct.flags.direct(1, 0));
    assert!(!ct.flags.self_free(0));
    assert!(!ct.flags.self_free(1));
}

#[test]
fn ring_two_topologies_match_hand_derived_classes() {
    // For every ring size: forward-adjacent, backward-adjacent, and
    // mutually distant pairs; nothing else.
    for n in 4..=8u32 {
        let g = ring_graph(n).unwrap();
        let cts = k_topology(&g, 2).unwrap();
        assert_eq!(cts.len(), 3, "ring of {n}");
        let fwd = connection_topology(&g, &[1, 2]).unwrap();
        let bwd = connection_topology(&g, &[2, 1]).unwrap();
        let far = connection_topology(&g, &[1, 3]).unwrap();
        for expected in [&fwd, &bwd, &far] {
            assert!(
                cts.iter().any(|ct| *ct == *expected),
                "ring of {n} misses a class"
            );
        }
    }
}

#[test]
fn singleton_topology_of_ring() {
    let g = ring_graph(4).unwrap();
    let cts = k_topology(&g, 1).unwrap();
    assert_eq!(cts.len(), 1);
    assert!(cts[0].flags.self_free(0));
    assert_eq!(cts[0].hubs.len(), 1);
}

#[test]
fn k_topology_bounds_and_idempotent_dedup() {
    let g = reconstructed_prio_ring();
    let cts = k_topology(&g, 2).unwrap();
    let bound = 8 * 7; // C(n,k) * k!
    assert!(cts.len() <= bound);
    let again = dedup_by_flags(cts.clone());
    assert_eq!(again.len(), cts.len());

    // Counts match an independent enumeration of all ordered tuples.
    let mut seen = std::collections::BTreeSet::new();
    for a in g.nodes() {
        for b in g.nodes() {
            if a != b {
                seen.insert(brute_force_flags(&g, &[*a, *b]));
            }
        }
    }
    assert_eq!(cts.len(), seen.len());
}

#[test]
fn symmetry_reduction_and_expansion() {
    let g = ring_graph(6).unwrap();
    let cts = k_topology(&g, 2).unwrap();
    assert_eq!(cts.len(), 3);
    let reduced = symmetry_reduce(&cts, true);
    // Adjacent-forward and adjacent-backward fold into one orbit.
    assert_eq!(reduced.len(), 2);
    let expanded = symmetry_expand(&reduced);
    let original: std::collections::BTreeSet<_> = cts.iter().map(|c| c.flags.clone()).collect();
    let roundtrip: std::collections::BTreeSet<_> =
        expanded.iter().map(|c| c.flags.clone()).collect();
    assert_eq!(original, roundtrip);
    for ct in &expanded {
        assert!(ct.realizes_flags());
    }

    // Non-symmetric specifications keep every variant.
    let same = symmetry_reduce(&cts, false);
    assert_eq!(same.len(), cts.len());
}

#[test]
fn prio_ring_symmetry_reduction_counts() {
    let g = reconstructed_prio_ring();
    let cts = k_topology(&g, 2).unwrap();
    let reduced = symmetry_reduce(&cts, true);
    assert!(reduced.len() < cts.len());

    // Independent count: orbit representatives via the brute-force oracle.
    let mut orbits = std::collections::BTreeSet::new();
    for a in g.nodes() {
        for b in g.nodes() {
            if a != b {
                let f1 = brute_force_flags(&g, &[*a, *b]);
                let f2 = f1.permuted(&[1, 0]);
                orbits.insert(f1.min(f2));
            }
        }
    }
    assert_eq!(reduced.len(), orbits.len());
}

#[test]
fn topology_invariant_under_outside_relabeling() {
    // Swap two nodes outside the site set; flags must not change.
    let g = ring_graph(6).unwrap();
    let swap = |x: u32| -> u32 {
        match x {
            3 => 4,
            4 => 3,
            other => other,
        }
    };
    let relabeled = NetworkGraph::new(
        g.nodes().to_vec(),
        g.edges().iter().map(|&(a, b)| (swap(a), swap(b))),
    )
    .unwrap();
    let a = connection_topology(&g, &[1, 6]).unwrap();
    let b = connection_topology(&relabeled, &[1, 6]).unwrap();
    assert_eq!(a.flags, b.flags);
}

#[test]
fn rewrite_universal_pair_is_conjunction_over_topologies() {
    let g = ring_graph(4).unwrap();
    let spec = IndexedSpec::new(
        vec![Quantifier::forall("i"), Quantifier::forall_distinct("j", "i")],
        Ltl::and(
            Ltl::atom("g", crate::ltl::IndexTerm::var("i")),
            Ltl::atom("g", crate::ltl::IndexTerm::var("j")),
        ),
    );
    let red = rewrite_quantifiers(&spec, &g).unwrap();
    assert_eq!(red.topologies.len(), 3);
    assert!(red.boolean_fn.is_full_conjunction(red.topologies.len()));
}

#[test]
fn rewrite_existential_is_disjunction() {
    let g = ring_graph(4).unwrap();
    let spec = IndexedSpec::new(
        vec![Quantifier::exists("i")],
        Ltl::atom("g", crate::ltl::IndexTerm::var("i")),
    );
    let red = rewrite_quantifiers(&spec, &g).unwrap();
    assert_eq!(red.topologies.len(), 1);
    assert!(matches!(red.boolean_fn, BoolExpr::Var(0)));

    let spec2 = IndexedSpec::new(
        vec![Quantifier::exists("i"), Quantifier::exists("j")],
        Ltl::and(
            Ltl::atom("g", crate::ltl::IndexTerm::var("i")),
            Ltl::atom("g", crate::ltl::IndexTerm::var("j")),
        ),
    );
    let red2 = rewrite_quantifiers(&spec2, &g).unwrap();
    match &red2.boolean_fn {
        BoolExpr::Or(xs) => assert!(!xs.is_empty()),
        BoolExpr::Var(_) => {}
        other => panic!("expected a disjunction, got {other:?}"),
    }
}

#[test]
fn rewrite_alternation_matches_per_instance_evaluation() {
    // forall i exists j: check B against direct evaluation over every
    // verdict assignment, where a tuple's verdict is its topology's.
    let g = ring_graph(4).unwrap();
    let spec = IndexedSpec::new(
        vec![Quantifier::forall("i"), Quantifier::exists("j")],
        Ltl::and(
            Ltl::atom("g", crate::ltl::IndexTerm::var("i")),
            Ltl::atom("g", crate::ltl::IndexTerm::var("j")),
        ),
    );
    let red = rewrite_quantifiers(&spec, &g).unwrap();
    let m = red.topologies.len();
    let var_of = |flags: &ConnectivityFlags| -> usize {
        red.topologies.iter().position(|ct| &ct.flags == flags).unwrap()
    };
    for bits in 0..(1u32 << m) {
        let vals: Vec<bool> = (0..m).map(|i| bits & (1 << i) != 0).collect();
        let direct = g.nodes().iter().all(|&a| {
            g.nodes().iter().any(|&b| {
                if a == b {
                    return false;
                }
                vals[var_of(&brute_force_flags(&g, &[a, b]))]
            })
        });
        assert_eq!(red.boolean_fn.eval(&vals), direct, "assignment {bits:#b}");
    }
}
