//! Per-process labeled transition systems.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

/// Output valuation of one local state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StateLabel {
    /// Declared outputs, one bit per entry of `ProcessLts::outputs`.
    pub out: u32,
    pub tok: bool,
    pub send: bool,
}

/// A finite process implementation.
///
/// Transitions are total and split by the way a process can move in a
/// token-passing composition: `step_sched` fires when the process is
/// scheduled (with `recv` true iff a connected predecessor is offering the
/// token), `step_pass` fires when the process hands the token to a
/// scheduled successor. In every other situation the local state is
/// unchanged. Instances holding the token initially start in `init_token`,
/// all others in `init_idle`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessLts {
    pub env_inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub labels: Vec<StateLabel>,
    pub init_token: usize,
    pub init_idle: usize,
    /// `step_sched[state][env_mask][recv]`.
    pub step_sched: Vec<Vec<[usize; 2]>>,
    /// `step_pass[state][env_mask]`.
    pub step_pass: Vec<Vec<usize>>,
}

impl ProcessLts {
    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn n_env_vals(&self) -> usize {
        1 << self.env_inputs.len()
    }

    /// Panics on structural defects; transitions must be total.
    pub fn assert_consistent(&self) {
        let n = self.n_states();
        let v = self.n_env_vals();
        assert!(self.init_token < n && self.init_idle < n);
        assert_eq!(self.step_sched.len(), n);
        assert_eq!(self.step_pass.len(), n);
        for s in 0..n {
            assert_eq!(self.step_sched[s].len(), v);
            assert_eq!(self.step_pass[s].len(), v);
            for e in 0..v {
                assert!(self.step_sched[s][e][0] < n && self.step_sched[s][e][1] < n);
                assert!(self.step_pass[s][e] < n);
            }
        }
    }

    /// States reachable from either initial state.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_states()];
        let mut stack = vec![self.init_token, self.init_idle];
        seen[self.init_token] = true;
        seen[self.init_idle] = true;
        while let Some(s) = stack.pop() {
            let push = |t: usize, seen: &mut Vec<bool>, stack: &mut Vec<usize>| {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            };
            for e in 0..self.n_env_vals() {
                push(self.step_sched[s][e][0], &mut seen, &mut stack);
                push(self.step_sched[s][e][1], &mut seen, &mut stack);
                push(self.step_pass[s][e], &mut seen, &mut stack);
            }
        }
        (0..self.n_states()).filter(|&s| seen[s]).collect()
    }

    fn label_text(&self, s: usize) -> String {
        let l = &self.labels[s];
        let mut parts = Vec::new();
        parts.push(if l.tok { "tok".to_string() } else { "!tok".to_string() });
        for (k, name) in self.outputs.iter().enumerate() {
            if l.out & (1 << k) != 0 {
                parts.push(name.clone());
            } else {
                parts.push(format!("!{name}"));
            }
        }
        parts.push(if l.send { "send".to_string() } else { "!send".to_string() });
        parts.join(" ")
    }

    fn env_text(&self, mask: usize) -> String {
        if self.env_inputs.is_empty() {
            return "*".to_string();
        }
        self.env_inputs
            .iter()
            .enumerate()
            .map(|(k, name)| {
                if mask & (1 << k) != 0 {
                    name.clone()
                } else {
                    format!("!{name}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Dot export with states labeled by their output valuation.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name} {{");
        let _ = writeln!(out, "  rankdir=TB;");
        let _ = writeln!(out, "  node [shape=box, style=rounded];");
        for s in 0..self.n_states() {
            let mut marks = String::new();
            if s == self.init_token {
                marks.push_str("\\n(start: token)");
            }
            if s == self.init_idle {
                marks.push_str("\\n(start: idle)");
            }
            let _ = writeln!(out, "  s{s} [label=\"{}{}\"];", self.label_text(s), marks);
        }
        for s in 0..self.n_states() {
            // Group scheduled edges by target to keep the graph readable.
            let mut grouped: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for e in 0..self.n_env_vals() {
                for recv in 0..2 {
                    let t = self.step_sched[s][e][recv];
                    let guard = format!(
                        "{} {}",
                        self.env_text(e),
                        if recv == 1 { "recv" } else { "!recv" }
                    );
                    grouped.entry(t).or_default().push(guard);
                }
            }
            for (t, guards) in grouped {
                let _ = writeln!(out, "  s{s} -> s{t} [label=\"{}\"];", guards.join(" | "));
            }
            if self.labels[s].send {
                let mut grouped: BTreeMap<usize, Vec<String>> = BTreeMap::new();
                for e in 0..self.n_env_vals() {
                    grouped.entry(self.step_pass[s][e]).or_default().push(self.env_text(e));
                }
                for (t, guards) in grouped {
                    let _ = writeln!(
                        out,
                        "  s{s} -> s{t} [style=dashed, label=\"pass: {}\"];",
                        guards.join(" | ")
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// JSON export: states, initial states, labels, and the transition
    /// table keyed by input valuation.
    pub fn to_json(&self) -> serde_json::Value {
        let labels: Vec<serde_json::Value> = (0..self.n_states())
            .map(|s| {
                let l = &self.labels[s];
                let mut outs = serde_json::Map::new();
                for (k, name) in self.outputs.iter().enumerate() {
                    outs.insert(name.clone(), serde_json::json!(l.out & (1 << k) != 0));
                }
                serde_json::json!({
                    "state": s,
                    "tok": l.tok,
                    "send": l.send,
                    "outputs": outs,
                })
            })
            .collect();
        let env = |mask: usize| -> serde_json::Value {
            let mut m = serde_json::Map::new();
            for (k, name) in self.env_inputs.iter().enumerate() {
                m.insert(name.clone(), serde_json::json!(mask & (1 << k) != 0));
            }
            serde_json::Value::Object(m)
        };
        let mut sched = Vec::new();
        let mut pass = Vec::new();
        for s in 0..self.n_states() {
            for e in 0..self.n_env_vals() {
                for recv in 0..2 {
                    sched.push(serde_json::json!({
                        "from": s,
                        "env": env(e),
                        "recv": recv == 1,
                        "to": self.step_sched[s][e][recv],
                    }));
                }
                pass.push(serde_json::json!({
                    "from": s,
                    "env": env(e),
                    "to": self.step_pass[s][e],
                }));
            }
        }
        serde_json::json!({
            "states": self.n_states(),
            "init_token": self.init_token,
            "init_idle": self.init_idle,
            "env_inputs": self.env_inputs,
            "outputs": self.outputs,
            "labels": labels,
            "scheduled_transitions": sched,
            "pass_transitions": pass,
        })
    }
}

/// The fixed three-state hub implementation standing in for contracted
/// nodes of a connection topology: wait for the token, hold it after
/// receiving, raise `send` when scheduled again, and drop back to waiting
/// once a successor takes it.
pub fn hub_process() -> ProcessLts {
    let labels = vec![
        StateLabel { out: 0, tok: false, send: false },
        StateLabel { out: 0, tok: true, send: false },
        StateLabel { out: 0, tok: true, send: true },
    ];
    ProcessLts {
        env_inputs: Vec::new(),
        outputs: Vec::new(),
        labels,
        init_token: 1,
        init_idle: 0,
        step_sched: vec![vec![[0, 1]], vec![[2, 2]], vec![[2, 2]]],
        step_pass: vec![vec![0], vec![1], vec![0]],
    }
}

/// Behavioural equivalence up to state relabeling: the parts reachable in
/// single-token compositions are isomorphic (same labels, matching
/// transitions, bijective state map). Inputs that cannot occur with one
/// token are ignored: a token holder is never offered the token, and
/// handing the token off only happens from a sending state.
pub fn behaviorally_equivalent(a: &ProcessLts, b: &ProcessLts) -> bool {
    if a.env_inputs != b.env_inputs || a.outputs != b.outputs {
        return false;
    }
    let mut map_ab: BTreeMap<usize, usize> = BTreeMap::new();
    let mut map_ba: BTreeMap<usize, usize> = BTreeMap::new();
    let mut stack = Vec::new();
    let push = |x: usize,
                    y: usize,
                    map_ab: &mut BTreeMap<usize, usize>,
                    map_ba: &mut BTreeMap<usize, usize>,
                    stack: &mut Vec<(usize, usize)>|
     -> bool {
        match (map_ab.get(&x), map_ba.get(&y)) {
            (Some(&y2), _) if y2 != y => false,
            (_, Some(&x2)) if x2 != x => false,
            (Some(_), Some(_)) => true,
            _ => {
                map_ab.insert(x, y);
                map_ba.insert(y, x);
                stack.push((x, y));
                true
            }
        }
    };
    if !push(a.init_token, b.init_token, &mut map_ab, &mut map_ba, &mut stack) {
        return false;
    }
    if !push(a.init_idle, b.init_idle, &mut map_ab, &mut map_ba, &mut stack) {
        return false;
    }
    while let Some((x, y)) = stack.pop() {
        if a.labels[x] != b.labels[y] {
            return false;
        }
        let recvs: &[usize] = if a.labels[x].tok { &[0] } else { &[0, 1] };
        for e in 0..a.n_env_vals() {
            for &recv in recvs {
                if !push(
                    a.step_sched[x][e][recv],
                    b.step_sched[y][e][recv],
                    &mut map_ab,
                    &mut map_ba,
                    &mut stack,
                ) {
                    return false;
                }
            }
            if a.labels[x].send
                && !push(a.step_pass[x][e], b.step_pass[y][e], &mut map_ab, &mut map_ba, &mut stack)
            {
                return false;
            }
        }
    }
    true
}
