//! Büchi emptiness primitives over implicit graphs.

use rustc_hash::FxHashSet;

/// Finite graph with accepting vertices.
pub trait BuchiGraph {
    fn successors(&self, v: usize, out: &mut Vec<usize>);
    fn is_accepting(&self, v: usize) -> bool;
}

/// Nested depth-first search: is an accepting lasso reachable from `start`?
pub fn buchi_nonempty_from<G: BuchiGraph + ?Sized>(g: &G, start: usize) -> bool {
    let mut blue: FxHashSet<usize> = FxHashSet::default();
    let mut red: FxHashSet<usize> = FxHashSet::default();
    let mut on_stack: FxHashSet<usize> = FxHashSet::default();
    // (vertex, successors, next index)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let push = |v: usize, stack: &mut Vec<(usize, Vec<usize>, usize)>| {
        let mut s = Vec::new();
        g.successors(v, &mut s);
        stack.push((v, s, 0));
    };
    blue.insert(start);
    on_stack.insert(start);
    push(start, &mut stack);
    while let Some(top) = stack.last_mut() {
        if top.2 < top.1.len() {
            let w = top.1[top.2];
            top.2 += 1;
            if blue.insert(w) {
                on_stack.insert(w);
                push(w, &mut stack);
            }
            continue;
        }
        let (v, _, _) = stack.pop().unwrap();
        if g.is_accepting(v) && red_search(g, v, &mut red, &on_stack) {
            return true;
        }
        on_stack.remove(&v);
    }
    false
}

fn red_search<G: BuchiGraph + ?Sized>(
    g: &G,
    seed: usize,
    red: &mut FxHashSet<usize>,
    cyan: &FxHashSet<usize>,
) -> bool {
    let mut stack = vec![seed];
    let mut buf = Vec::new();
    while let Some(v) = stack.pop() {
        buf.clear();
        g.successors(v, &mut buf);
        for &w in &buf {
            if w == seed || cyan.contains(&w) {
                return true;
            }
            if red.insert(w) {
                stack.push(w);
            }
        }
    }
    false
}

/// Tarjan's algorithm over vertices `0..n`. Returns the component id of each vertex;
/// components are numbered in reverse topological order (sinks first).
pub fn scc(n: usize, succ: impl Fn(usize, &mut Vec<usize>)) -> Vec<u32> {
    const UNSET: u32 = u32::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![UNSET; n];
    let mut on = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;
    let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        let mut s = Vec::new();
        succ(root, &mut s);
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on[root] = true;
        call.push((root, s, 0));
        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                if index[w] == UNSET {
                    let mut s = Vec::new();
                    succ(w, &mut s);
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on[w] = true;
                    call.push((w, s, 0));
                } else if on[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(parent) = call.last() {
                let p = parent.0;
                low[p] = low[p].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// Vertices from which an accepting cycle is reachable.
pub fn live_vertices(n: usize, succ: impl Fn(usize, &mut Vec<usize>), accepting: impl Fn(usize) -> bool) -> Vec<bool> {
    let comp = scc(n, &succ);
    let ncomp = comp.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for v in 0..n {
        members[comp[v] as usize].push(v);
    }
    let mut live = vec![false; ncomp];
    let mut buf = Vec::new();
    // Sinks first, so successor components are already decided.
    for c in 0..ncomp {
        let mut nontrivial = members[c].len() > 1;
        let mut acc = false;
        let mut l = false;
        for &v in &members[c] {
            acc |= accepting(v);
            buf.clear();
            succ(v, &mut buf);
            for &w in &buf {
                let cw = comp[w] as usize;
                if cw == c {
                    nontrivial = true;
                } else if live[cw] {
                    l = true;
                }
            }
        }
        live[c] = l || (nontrivial && acc);
    }
    (0..n).map(|v| live[comp[v] as usize]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct G {
        adj: Vec<Vec<usize>>,
        acc: Vec<bool>,
    }

    impl BuchiGraph for G {
        fn successors(&self, v: usize, out: &mut Vec<usize>) {
            out.extend(&self.adj[v]);
        }
        fn is_accepting(&self, v: usize) -> bool {
            self.acc[v]
        }
    }

    #[test]
    fn self_loop_accepting() {
        let g = G { adj: vec![vec![0]], acc: vec![true] };
        assert!(buchi_nonempty_from(&g, 0));
    }

    #[test]
    fn accepting_sink() {
        let g = G { adj: vec![vec![1], vec![]], acc: vec![false, true] };
        assert!(!buchi_nonempty_from(&g, 0));
    }

    #[test]
    fn cycle_through_accepting_elsewhere() {
        // 0 -> 1 -> 2 -> 1, 2 accepting; 3 -> 3 non-accepting
        let g = G { adj: vec![vec![1, 3], vec![2], vec![1], vec![3]], acc: vec![false, false, true, false] };
        assert!(buchi_nonempty_from(&g, 0));
        assert!(!buchi_nonempty_from(&g, 3));
        let live = live_vertices(4, |v, o| o.extend(&g.adj[v]), |v| g.acc[v]);
        assert_eq!(live, vec![true, true, true, false]);
    }

    #[test]
    fn nested_dfs_matches_scc_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.gen_range(1..8);
            let adj: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..n).filter(|_| rng.gen_bool(0.25)).collect())
                .collect();
            let acc: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
            let g = G { adj, acc };
            let live = live_vertices(n, |v, o| o.extend(&g.adj[v]), |v| g.acc[v]);
            for v in 0..n {
                assert_eq!(buchi_nonempty_from(&g, v), live[v]);
            }
        }
    }
}
