//! A finite abstraction of syntactic consistency.
//!
//! A node pairs a BSA state with the guard atoms whose value is already fixed for the
//! current cell contents. After a transition, atom `P` is known if `P` with every cell
//! replaced by its update term is itself a guard atom with a known value. A transition
//! whose guard contradicts the knowledge extends every run to one with a syntactic
//! conflict. If no accepting lasso of the node graph exists, every accepting run of the
//! BSA is inconsistent.

use rustc_hash::FxHashMap;

use crate::automata::{Bsa, Cube, TransId};
use crate::bits::Bits;
use crate::ltl::UpdateRhs;
use crate::term::{PredId, TermArena};

const NO_ATOM: u32 = u32::MAX;

pub struct Knowledge {
    /// Per distinct update vector, the atom each guard atom reads from.
    shifts: Vec<Vec<u32>>,
    shift_of: Vec<u32>,
    nodes: Vec<(u32, Cube)>,
    index: FxHashMap<(u32, Cube), u32>,
    live: Vec<bool>,
    pub initial: Vec<u32>,
}

impl Knowledge {
    /// Explores the whole node graph. `None` if it has more than `budget` nodes, or the
    /// automaton is not finitary.
    pub fn build(arena: &TermArena, bsa: &Bsa, budget: usize) -> Option<Knowledge> {
        if !bsa.finitary {
            return None;
        }
        let atom_of: FxHashMap<PredId, u32> = bsa.guards.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect();
        let mut shifts = Vec::new();
        let mut shift_ids: FxHashMap<&[u16], u32> = FxHashMap::default();
        let mut shift_of = Vec::with_capacity(bsa.transitions.len());
        for t in &bsa.transitions {
            let id = *shift_ids.entry(&t.updates[..]).or_insert_with(|| {
                let sub = |c| match bsa.cell_index(c).map(|i| bsa.update_term(t, i)) {
                    Some(UpdateRhs::Term(u)) => u,
                    _ => arena.cell_sym(c),
                };
                let row = bsa
                    .guards
                    .iter()
                    .map(|&p| atom_of.get(&arena.subst_pred(p, &sub)).copied().unwrap_or(NO_ATOM))
                    .collect();
                shifts.push(row);
                shifts.len() as u32 - 1
            });
            shift_of.push(id);
        }
        let mut k = Knowledge {
            shifts,
            shift_of,
            nodes: Vec::new(),
            index: FxHashMap::default(),
            live: Vec::new(),
            initial: Vec::new(),
        };
        let mut init = bsa.initial.clone();
        init.sort_unstable();
        init.dedup();
        for q in init {
            let (id, _) = k.intern(q, Cube::top());
            k.initial.push(id);
        }
        // Breadth-first exploration, recording edges for the SCC pass.
        let mut succ: Vec<Vec<u32>> = Vec::new();
        let mut next = 0usize;
        while next < k.nodes.len() {
            if k.nodes.len() > budget {
                return None;
            }
            let (q, know) = k.nodes[next].clone();
            let mut out = Vec::new();
            for t in bsa.out_range(q) {
                if let Some(c) = k.successor(bsa, &know, t) {
                    let dst = bsa.transitions[t as usize].dst;
                    out.push(k.intern(dst, c).0);
                }
            }
            out.sort_unstable();
            out.dedup();
            succ.push(out);
            next += 1;
        }
        k.live = liveness(&succ, |v| bsa.accepting[k.nodes[v as usize].0 as usize]);
        Some(k)
    }

    fn intern(&mut self, q: u32, c: Cube) -> (u32, bool) {
        if let Some(&id) = self.index.get(&(q, c.clone())) {
            return (id, false);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push((q, c.clone()));
        self.index.insert((q, c), id);
        (id, true)
    }

    fn successor(&self, bsa: &Bsa, know: &Cube, t: TransId) -> Option<Cube> {
        let g = &bsa.transitions[t as usize].guard;
        if !know.compatible(g) {
            return None;
        }
        let mask = know.mask.or(&g.mask);
        let vals = know.vals.or(&g.vals);
        let shift = &self.shifts[self.shift_of[t as usize] as usize];
        let mut out = Cube { mask: Bits::new(), vals: Bits::new() };
        for (i, &j) in shift.iter().enumerate() {
            if j != NO_ATOM && mask.get(j as usize) {
                out.mask.set(i, true);
                out.vals.set(i, vals.get(j as usize));
            }
        }
        Some(out)
    }

    /// The node reached from `node` by transition `t`; `None` on a conflict.
    pub fn step(&self, bsa: &Bsa, node: u32, t: TransId) -> Option<u32> {
        let (_, know) = &self.nodes[node as usize];
        let c = self.successor(bsa, know, t)?;
        let dst = bsa.transitions[t as usize].dst;
        Some(self.index[&(dst, c)])
    }

    /// Whether an accepting lasso starts at `node`.
    pub fn is_live(&self, node: u32) -> bool {
        self.live[node as usize]
    }

    pub fn is_empty(&self) -> bool {
        !self.initial.iter().any(|&n| self.is_live(n))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Nodes from which an accepting cycle is reachable, by Tarjan's algorithm. SCCs
/// complete in reverse topological order, so successors are decided first.
fn liveness(succ: &[Vec<u32>], accepting: impl Fn(u32) -> bool) -> Vec<bool> {
    const UNSEEN: u32 = u32::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut live = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0u32;
    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        let mut frames: Vec<(u32, usize)> = vec![(root, 0)];
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        while let Some(&(v, i)) = frames.last() {
            let vs = v as usize;
            if i < succ[vs].len() {
                frames.last_mut().unwrap().1 += 1;
                let w = succ[vs][i] as usize;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    frames.push((w as u32, 0));
                } else if on_stack[w] {
                    low[vs] = low[vs].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(u, _)) = frames.last() {
                low[u as usize] = low[u as usize].min(low[vs]);
            }
            if low[vs] != index[vs] {
                continue;
            }
            let mut scc = Vec::new();
            loop {
                let w = stack.pop().unwrap();
                on_stack[w as usize] = false;
                scc.push(w);
                if w == v {
                    break;
                }
            }
            let cyclic = scc.len() > 1 || succ[vs].contains(&v);
            let is_live = (cyclic && scc.iter().any(|&w| accepting(w)))
                || scc.iter().any(|&w| succ[w as usize].iter().any(|&x| live[x as usize]));
            if is_live {
                for w in scc {
                    live[w as usize] = true;
                }
            }
        }
    }
    live
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn liveness_basic() {
        // 0 -> 1 -> 2 -> 1, 0 -> 3; accepting: 2.
        let succ = vec![vec![1, 3], vec![2], vec![1], vec![]];
        assert_eq!(liveness(&succ, |v| v == 2), vec![true, true, true, false]);
        // Accepting state without a cycle.
        let succ = vec![vec![1], vec![]];
        assert_eq!(liveness(&succ, |v| v == 1), vec![false, false]);
        // Self-loop.
        let succ = vec![vec![0]];
        assert_eq!(liveness(&succ, |_| true), vec![true]);
    }
}
