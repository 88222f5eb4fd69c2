//! Small graph helpers shared by the automaton passes.

/// Iterative Tarjan SCC. Returns components in reverse topological order;
/// `comp[v]` is the component index of `v`.
pub(crate) fn tarjan_scc(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> (Vec<usize>, usize) {
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![UNSET; n];
    let mut next_index = 0usize;
    let mut n_comps = 0usize;

    // Explicit DFS frames: (node, successor list, next successor position).
    let mut frames: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, succ(root), 0));
        while let Some(frame) = frames.last_mut() {
            let (v, succs, pos) = (frame.0, &frame.1, frame.2);
            if pos < succs.len() {
                let w = succs[pos];
                frame.2 += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = n_comps;
                        if w == v {
                            break;
                        }
                    }
                    n_comps += 1;
                }
                let finished = v;
                frames.pop();
                if let Some(parent) = frames.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[finished]);
                }
            }
        }
    }
    (comp, n_comps)
}

/// States lying on or able to reach a cycle that contains a marked state.
pub(crate) fn can_reach_marked_cycle(
    n: usize,
    succ: impl Fn(usize) -> Vec<usize> + Copy,
    marked: impl Fn(usize) -> bool,
) -> Vec<bool> {
    let (comp, n_comps) = tarjan_scc(n, succ);
    // A component carries a marked cycle if it contains a marked state and
    // has an internal edge (multi-state component or a self-loop).
    let mut comp_size = vec![0usize; n_comps];
    for v in 0..n {
        comp_size[comp[v]] += 1;
    }
    let mut carrier = vec![false; n_comps];
    for v in 0..n {
        if !marked(v) {
            continue;
        }
        let c = comp[v];
        if comp_size[c] > 1 || succ(v).contains(&v) {
            carrier[c] = true;
        }
    }
    // Propagate backwards at component granularity: a component qualifies
    // if it is a carrier or any member has a successor in a qualifying
    // component. Tarjan emits components in reverse topological order, so
    // successors always live in components with indices <= the current one;
    // processing components in ascending order sees successors first.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_comps];
    for v in 0..n {
        members[comp[v]].push(v);
    }
    let mut comp_ok = vec![false; n_comps];
    for c in 0..n_comps {
        if carrier[c] {
            comp_ok[c] = true;
            continue;
        }
        'outer: for &v in &members[c] {
            for w in succ(v) {
                if comp[w] != c && comp_ok[comp[w]] {
                    comp_ok[c] = true;
                    break 'outer;
                }
            }
        }
    }
    (0..n).map(|v| comp_ok[comp[v]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_on_two_cycles() {
        // 0 -> 1 -> 2 -> 0, 3 -> 3, 4 -> 3
        let succ = |v: usize| -> Vec<usize> {
            match v {
                0 => vec![1],
                1 => vec![2],
                2 => vec![0],
                3 => vec![3],
                4 => vec![3],
                _ => vec![],
            }
        };
        let (comp, n) = tarjan_scc(5, succ);
        assert_eq!(n, 3);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[3], comp[4]);

        let ok = can_reach_marked_cycle(5, succ, |v| v == 3);
        assert_eq!(ok, vec![false, false, false, true, true]);
        let ok = can_reach_marked_cycle(5, succ, |v| v == 1);
        assert_eq!(ok, vec![true, true, true, false, false]);
    }
}
