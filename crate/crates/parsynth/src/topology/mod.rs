//! Network graphs and their connection topologies: the finite abstraction
//! that reduces quantified properties over a graph to per-topology checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::automaton::graph::tarjan_scc;
use crate::ltl::{IndexedSpec, SpecError};
use crate::par;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid network graph: {0}")]
    InvalidGraph(String),
    #[error("site {0} is not a node of the graph")]
    SiteNotInGraph(u32),
    #[error("site tuple has repeated node {0}")]
    RepeatedSite(u32),
    #[error("requested {k} sites but the graph has {n} nodes")]
    TooManySites { k: usize, n: usize },
    #[error("graph line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// A finite directed graph without self-loops in which the token
/// circulates. Every node must lie on a cycle, which we enforce by
/// requiring strong connectivity of the whole graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    nodes: Vec<u32>,
    edges: BTreeSet<(u32, u32)>,
}

impl NetworkGraph {
    pub fn new(
        mut nodes: Vec<u32>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, TopologyError> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(TopologyError::InvalidGraph("no nodes".into()));
        }
        let edges: BTreeSet<(u32, u32)> = edges.into_iter().collect();
        for &(a, b) in &edges {
            if a == b {
                return Err(TopologyError::InvalidGraph(format!("self-loop on node {a}")));
            }
            if !nodes.contains(&a) || !nodes.contains(&b) {
                return Err(TopologyError::InvalidGraph(format!(
                    "edge ({a},{b}) uses an undeclared node"
                )));
            }
        }
        let g = NetworkGraph { nodes, edges };
        if g.nodes.len() == 1 {
            return Err(TopologyError::InvalidGraph(
                "a single node cannot circulate the token (self-loops are not allowed)".into(),
            ));
        }
        if !g.is_strongly_connected() {
            return Err(TopologyError::InvalidGraph(
                "graph is not strongly connected; the token cannot reach every node".into(),
            ));
        }
        Ok(g)
    }

    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn successors(&self, a: u32) -> impl Iterator<Item = u32> + '_ {
        self.edges.range((a, 0)..=(a, u32::MAX)).map(|&(_, b)| b)
    }

    fn is_strongly_connected(&self) -> bool {
        let index: BTreeMap<u32, usize> =
            self.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let succ = |v: usize| -> Vec<usize> {
            self.successors(self.nodes[v]).map(|b| index[&b]).collect()
        };
        let (_, n_comps) = tarjan_scc(self.nodes.len(), succ);
        n_comps == 1
    }
}

impl fmt::Display for NetworkGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            writeln!(f, "node {n}")?;
        }
        for (a, b) in &self.edges {
            writeln!(f, "edge {a} {b}")?;
        }
        Ok(())
    }
}

/// The unidirectional ring: nodes `1..=n`, edges `i -> i+1` wrapping.
pub fn ring_graph(n: u32) -> Result<NetworkGraph, TopologyError> {
    let nodes: Vec<u32> = (1..=n).collect();
    let edges = (1..=n).map(|i| (i, i % n + 1));
    NetworkGraph::new(nodes, edges)
}

/// A ring of `n` nodes with one extra shortcut edge. With the shortcut
/// from 5 to 1 on an 8-ring this is the prioritized-ring case study graph:
/// the scheduler may route the token past the low-priority side.
pub fn prio_ring(n: u32, from: u32, to: u32) -> Result<NetworkGraph, TopologyError> {
    let nodes: Vec<u32> = (1..=n).collect();
    let mut edges: Vec<(u32, u32)> = (1..=n).map(|i| (i, i % n + 1)).collect();
    edges.push((from, to));
    NetworkGraph::new(nodes, edges)
}

/// The reconstructed prioritized-ring case study: an 8-node ring with a
/// shortcut from node 5 to node 1, leaving 6,7,8 as the low-priority side.
pub fn reconstructed_prio_ring() -> NetworkGraph {
    prio_ring(8, 5, 1).expect("fixed case-study graph is valid")
}

/// Parses `node <id>` / `edge <a> <b>` lines; `#` comments.
pub fn parse_graph_file(text: &str) -> Result<NetworkGraph, TopologyError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        let parse_id = |s: Option<&str>| -> Result<u32, TopologyError> {
            s.and_then(|x| x.parse().ok()).ok_or(TopologyError::Parse {
                line: lineno + 1,
                msg: "expected a numeric node id".into(),
            })
        };
        match head {
            "node" => nodes.push(parse_id(parts.next())?),
            "edge" => {
                let a = parse_id(parts.next())?;
                let b = parse_id(parts.next())?;
                edges.push((a, b));
            }
            other => {
                return Err(TopologyError::Parse {
                    line: lineno + 1,
                    msg: format!("expected `node` or `edge`, got `{other}`"),
                });
            }
        }
    }
    NetworkGraph::new(nodes, edges)
}

/// Resolves the CLI graph argument: `ring:<n>`, `prio-ring:<n>:<from>:<to>`
/// or `None` when the argument is a file path.
pub fn builtin_graph(arg: &str) -> Option<Result<NetworkGraph, TopologyError>> {
    let mk_err = |msg: &str| TopologyError::Parse { line: 0, msg: msg.into() };
    if let Some(rest) = arg.strip_prefix("ring:") {
        return Some(
            rest.parse::<u32>()
                .map_err(|_| mk_err("ring:<n> needs a number"))
                .and_then(ring_graph),
        );
    }
    if let Some(rest) = arg.strip_prefix("prio-ring:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Some(Err(mk_err("prio-ring:<n>:<from>:<to>")));
        }
        let nums: Option<Vec<u32>> = parts.iter().map(|p| p.parse().ok()).collect();
        return Some(match nums {
            Some(v) => prio_ring(v[0], v[1], v[2]),
            None => Err(mk_err("prio-ring:<n>:<from>:<to> needs numbers")),
        });
    }
    None
}

/// Connectivity of an ordered site tuple: direct edges, paths through the
/// outside, and outside round trips. Two connection topologies are equal
/// exactly when these flags are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectivityFlags {
    pub k: usize,
    /// `direct[x*k+y]`: edge from site x to site y.
    pub direct: Vec<bool>,
    /// `via_outside[x*k+y]`: path from site x to site y whose interior is
    /// nonempty and avoids every site.
    pub via_outside: Vec<bool>,
    /// `self_free[x]`: site-free round trip from x back to itself.
    pub self_free: Vec<bool>,
}

impl ConnectivityFlags {
    pub fn direct(&self, x: usize, y: usize) -> bool {
        self.direct[x * self.k + y]
    }

    pub fn via_outside(&self, x: usize, y: usize) -> bool {
        self.via_outside[x * self.k + y]
    }

    pub fn self_free(&self, x: usize) -> bool {
        self.self_free[x]
    }

    /// Flags under a site permutation; `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> ConnectivityFlags {
        let k = self.k;
        let mut out = ConnectivityFlags {
            k,
            direct: vec![false; k * k],
            via_outside: vec![false; k * k],
            self_free: vec![false; k],
        };
        for x in 0..k {
            out.self_free[x] = self.self_free[perm[x]];
            for y in 0..k {
                out.direct[x * k + y] = self.direct(perm[x], perm[y]);
                out.via_outside[x * k + y] = self.via_outside(perm[x], perm[y]);
            }
        }
        out
    }
}

/// A connection topology: the flags of a site tuple plus a minimal
/// representative graph realizing exactly those flags. Sites are nodes
/// `1..=k` of the representative, hubs are the nodes above `k`.
#[derive(Debug, Clone)]
pub struct ConnectionTopology {
    /// The site tuple this topology was derived from, in quantifier order.
    pub sites: Vec<u32>,
    pub flags: ConnectivityFlags,
    pub representative: NetworkGraph,
    /// Hub node ids of the representative.
    pub hubs: Vec<u32>,
}

impl PartialEq for ConnectionTopology {
    fn eq(&self, other: &Self) -> bool {
        self.flags == other.flags
    }
}

impl Eq for ConnectionTopology {}

impl ConnectionTopology {
    pub fn k(&self) -> usize {
        self.flags.k
    }

    /// Site node ids of the representative, in order.
    pub fn site_nodes(&self) -> Vec<u32> {
        (1..=self.k() as u32).collect()
    }

    /// The invariant every representative must satisfy: recomputing the
    /// connectivity flags of the representative over its own sites gives
    /// back the same flags.
    pub fn realizes_flags(&self) -> bool {
        flags_of(&self.representative, &self.site_nodes()) == self.flags
    }
}

fn flags_of(g: &NetworkGraph, sites: &[u32]) -> ConnectivityFlags {
    let k = sites.len();
    let site_set: BTreeSet<u32> = sites.iter().copied().collect();
    let mut flags = ConnectivityFlags {
        k,
        direct: vec![false; k * k],
        via_outside: vec![false; k * k],
        self_free: vec![false; k],
    };
    for (x, &sx) in sites.iter().enumerate() {
        for (y, &sy) in sites.iter().enumerate() {
            flags.direct[x * k + y] = g.has_edge(sx, sy);
        }
        // Nodes outside the site set reachable from sx by site-free paths.
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        let mut stack: Vec<u32> = g
            .successors(sx)
            .filter(|u| !site_set.contains(u))
            .collect();
        for u in &stack {
            seen.insert(*u);
        }
        while let Some(u) = stack.pop() {
            for v in g.successors(u) {
                if !site_set.contains(&v) && seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        for (y, &sy) in sites.iter().enumerate() {
            let hit = seen.iter().any(|&v| g.has_edge(v, sy));
            if x == y {
                flags.self_free[x] = hit;
            } else {
                flags.via_outside[x * k + y] = hit;
            }
        }
    }
    flags
}

/// Builds the minimal representative: one hub per site that has outside
/// paths, merged whenever two hubs serve identical target sets. Sites are
/// renumbered `1..=k`; hubs get ids `k+1..`.
fn build_representative(flags: &ConnectivityFlags) -> (NetworkGraph, Vec<u32>) {
    let k = flags.k;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for x in 0..k {
        for y in 0..k {
            if flags.direct(x, y) {
                edges.push((x as u32 + 1, y as u32 + 1));
            }
        }
    }
    // Hub targets per source site.
    let mut targets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); k];
    for x in 0..k {
        if flags.self_free(x) {
            targets[x].insert(x as u32 + 1);
        }
        for y in 0..k {
            if x != y && flags.via_outside(x, y) {
                targets[x].insert(y as u32 + 1);
            }
        }
    }
    // Merge hubs with identical target sets.
    let mut hub_of: BTreeMap<BTreeSet<u32>, u32> = BTreeMap::new();
    let mut hubs: Vec<u32> = Vec::new();
    let mut next_hub = k as u32 + 1;
    for x in 0..k {
        if targets[x].is_empty() {
            continue;
        }
        let hub = *hub_of.entry(targets[x].clone()).or_insert_with(|| {
            let h = next_hub;
            next_hub += 1;
            hubs.push(h);
            for &y in &targets[x] {
                edges.push((h, y));
            }
            h
        });
        edges.push((x as u32 + 1, hub));
    }
    let n_nodes = k + hubs.len();
    assert!(n_nodes <= 2 * k, "representative exceeded 2k nodes");
    let nodes: Vec<u32> = (1..=n_nodes as u32).collect();
    let graph = NetworkGraph::new(nodes, edges)
        .expect("representative of a valid topology is a valid graph");
    (graph, hubs)
}

/// Computes the connection topology of `g` with respect to an ordered site
/// tuple.
pub fn connection_topology(
    g: &NetworkGraph,
    sites: &[u32],
) -> Result<ConnectionTopology, TopologyError> {
    if sites.is_empty() {
        return Err(TopologyError::TooManySites { k: 0, n: g.nodes().len() });
    }
    let mut seen = BTreeSet::new();
    for &s in sites {
        if !g.nodes().contains(&s) {
            return Err(TopologyError::SiteNotInGraph(s));
        }
        if !seen.insert(s) {
            return Err(TopologyError::RepeatedSite(s));
        }
    }
    let flags = flags_of(g, sites);
    let (representative, hubs) = build_representative(&flags);
    let ct = ConnectionTopology { sites: sites.to_vec(), flags, representative, hubs };
    debug_assert!(ct.realizes_flags(), "representative must realize its flags");
    Ok(ct)
}

fn ordered_tuples(nodes: &[u32], k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(nodes: &[u32], k: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for &n in nodes {
            if !current.contains(&n) {
                current.push(n);
                recurse(nodes, k, current, out);
                current.pop();
            }
        }
    }
    recurse(nodes, k, &mut current, &mut out);
    out
}

/// All connection topologies over `k`-tuples of distinct nodes,
/// deduplicated by flags equality and returned in canonical flag order.
pub fn k_topology(g: &NetworkGraph, k: usize) -> Result<Vec<ConnectionTopology>, TopologyError> {
    if k == 0 || k > g.nodes().len() {
        return Err(TopologyError::TooManySites { k, n: g.nodes().len() });
    }
    let tuples = ordered_tuples(g.nodes(), k);
    let cts: Vec<ConnectionTopology> = par::map_collect(tuples, |tuple| {
        connection_topology(g, &tuple).expect("tuples are valid site sets")
    });
    Ok(dedup_by_flags(cts))
}

fn dedup_by_flags(cts: Vec<ConnectionTopology>) -> Vec<ConnectionTopology> {
    let mut seen: BTreeSet<ConnectivityFlags> = BTreeSet::new();
    let mut out: Vec<ConnectionTopology> = Vec::new();
    for ct in cts {
        if seen.insert(ct.flags.clone()) {
            out.push(ct);
        }
    }
    out.sort_by(|a, b| a.flags.cmp(&b.flags));
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn recurse(k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in 0..k {
            if !current.contains(&i) {
                current.push(i);
                recurse(k, current, out);
                current.pop();
            }
        }
    }
    recurse(k, &mut current, &mut out);
    out
}

/// Keeps one representative per orbit under site permutation. Only valid
/// when the caller certifies the specification is invariant under
/// transposing its index variables; with `symmetric = false` this is the
/// identity.
pub fn symmetry_reduce(
    cts: &[ConnectionTopology],
    symmetric: bool,
) -> Vec<ConnectionTopology> {
    if !symmetric {
        return cts.to_vec();
    }
    let k = match cts.first() {
        Some(ct) => ct.k(),
        None => return Vec::new(),
    };
    let perms = permutations(k);
    let mut kept: Vec<ConnectionTopology> = Vec::new();
    let mut seen_orbits: BTreeSet<ConnectivityFlags> = BTreeSet::new();
    for ct in cts {
        let orbit_min = perms
            .iter()
            .map(|p| ct.flags.permuted(p))
            .min()
            .expect("at least the identity permutation");
        if seen_orbits.insert(orbit_min) {
            kept.push(ct.clone());
        }
    }
    kept.sort_by(|a, b| a.flags.cmp(&b.flags));
    kept
}

/// Inverse of the reduction: all permuted variants of each topology.
pub fn symmetry_expand(cts: &[ConnectionTopology]) -> Vec<ConnectionTopology> {
    let k = match cts.first() {
        Some(ct) => ct.k(),
        None => return Vec::new(),
    };
    let perms = permutations(k);
    let mut out = Vec::new();
    for ct in cts {
        for p in &perms {
            let flags = ct.flags.permuted(p);
            let (representative, hubs) = build_representative(&flags);
            let sites: Vec<u32> = p.iter().map(|&old| ct.sites[old]).collect();
            out.push(ConnectionTopology { sites, flags, representative, hubs });
        }
    }
    dedup_by_flags(out)
}

/// A finite reduction: check the body on each listed topology and combine
/// the per-topology verdicts with the Boolean function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionSpec {
    pub topologies: Vec<ConnectionTopology>,
    pub boolean_fn: BoolExpr,
}

/// Monotone Boolean combinations over per-topology verdict variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoolExpr {
    Var(usize),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    pub fn eval(&self, vals: &[bool]) -> bool {
        match self {
            BoolExpr::Var(i) => vals[*i],
            BoolExpr::And(xs) => xs.iter().all(|x| x.eval(vals)),
            BoolExpr::Or(xs) => xs.iter().any(|x| x.eval(vals)),
        }
    }

    /// Flattens nested operators and deduplicates operands.
    pub fn simplify(self) -> BoolExpr {
        match self {
            BoolExpr::Var(i) => BoolExpr::Var(i),
            BoolExpr::And(xs) => {
                let mut flat = Vec::new();
                for x in xs {
                    match x.simplify() {
                        BoolExpr::And(ys) => flat.extend(ys),
                        other => flat.push(other),
                    }
                }
                flat.sort();
                flat.dedup();
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    BoolExpr::And(flat)
                }
            }
            BoolExpr::Or(xs) => {
                let mut flat = Vec::new();
                for x in xs {
                    match x.simplify() {
                        BoolExpr::Or(ys) => flat.extend(ys),
                        other => flat.push(other),
                    }
                }
                flat.sort();
                flat.dedup();
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    BoolExpr::Or(flat)
                }
            }
        }
    }

    /// True if this is a plain conjunction of every variable `0..m`.
    pub fn is_full_conjunction(&self, m: usize) -> bool {
        match self {
            BoolExpr::And(xs) => {
                let mut vars: Vec<usize> = xs
                    .iter()
                    .filter_map(|x| match x {
                        BoolExpr::Var(i) => Some(*i),
                        _ => None,
                    })
                    .collect();
                vars.sort_unstable();
                vars.dedup();
                xs.len() == vars.len() && vars == (0..m).collect::<Vec<_>>()
            }
            BoolExpr::Var(0) => m == 1,
            _ => false,
        }
    }
}

/// Rewrites a quantified sentence over a concrete graph into a Boolean
/// combination of per-topology obligations: universal quantifiers expand
/// to conjunctions over the remaining nodes, existential ones to
/// disjunctions, and assignments with the same connection topology
/// collapse into one obligation variable.
pub fn rewrite_quantifiers(
    spec: &IndexedSpec,
    g: &NetworkGraph,
) -> Result<ReductionSpec, TopologyError> {
    spec.validate()?;
    let k = spec.prefix.len();
    if k > g.nodes().len() {
        return Err(TopologyError::TooManySites { k, n: g.nodes().len() });
    }
    let mut topologies: Vec<ConnectionTopology> = Vec::new();
    let mut var_of_flags: BTreeMap<ConnectivityFlags, usize> = BTreeMap::new();

    fn recurse(
        spec: &IndexedSpec,
        g: &NetworkGraph,
        tuple: &mut Vec<u32>,
        topologies: &mut Vec<ConnectionTopology>,
        var_of_flags: &mut BTreeMap<ConnectivityFlags, usize>,
    ) -> Result<BoolExpr, TopologyError> {
        if tuple.len() == spec.prefix.len() {
            let ct = connection_topology(g, tuple)?;
            let next = topologies.len();
            let var = *var_of_flags.entry(ct.flags.clone()).or_insert_with(|| {
                topologies.push(ct);
                next
            });
            return Ok(BoolExpr::Var(var));
        }
        let q = &spec.prefix[tuple.len()];
        let mut children = Vec::new();
        for &n in g.nodes() {
            if tuple.contains(&n) {
                continue;
            }
            tuple.push(n);
            children.push(recurse(spec, g, tuple, topologies, var_of_flags)?);
            tuple.pop();
        }
        Ok(if q.exists { BoolExpr::Or(children) } else { BoolExpr::And(children) })
    }

    let mut tuple = Vec::new();
    let expr = recurse(spec, g, &mut tuple, &mut topologies, &mut var_of_flags)?;
    Ok(ReductionSpec { topologies, boolean_fn: expr.simplify() })
}

#[cfg(test)]
mod tests;
