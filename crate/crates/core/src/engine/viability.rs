//! Liveness in the exclusion product: can an accepting lasso be reached from
//! (state, residual) without reading an excluded word?

use rustc_hash::FxHashMap;

use super::exclusion::{ExclusionSet, Residuals, DEAD};
use crate::automata::Bsa;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Memo {
    /// Permanent: the exclusion set only grows.
    Dead,
    Live(u32),
}

type Pos = (u32, u32);

#[derive(Default)]
pub struct Viability {
    memo: FxHashMap<Pos, Memo>,
    pub epoch: u32,
    /// Product positions explored since the last epoch change.
    pub work: u64,
    pub total_work: u64,
}

struct Node {
    succ: Vec<Pos>,
    /// Reaches a position already known to be live.
    live_leaf: bool,
    index: u32,
    low: u32,
    on_stack: bool,
    self_loop: bool,
}

impl Viability {
    pub fn positions(&self) -> usize {
        self.memo.len()
    }

    pub fn next_epoch(&mut self) {
        self.epoch += 1;
        self.work = 0;
    }

    fn known(&self, key: Pos) -> Option<bool> {
        match self.memo.get(&key) {
            Some(Memo::Dead) => Some(false),
            Some(Memo::Live(e)) if *e == self.epoch => Some(true),
            _ => None,
        }
    }

    fn open(&self, bsa: &Bsa, x: &ExclusionSet, res: &mut Residuals, key: Pos, index: u32) -> Node {
        let mut succ = Vec::new();
        let mut live_leaf = false;
        let mut self_loop = false;
        for t in bsa.out_range(key.0) {
            let r = res.step(x, bsa, key.1, t);
            if r == DEAD {
                continue;
            }
            let nk = (bsa.transitions[t as usize].dst, r);
            if nk == key {
                self_loop = true;
            }
            match self.known(nk) {
                Some(true) => live_leaf = true,
                Some(false) => {}
                None => succ.push(nk),
            }
        }
        succ.sort_unstable();
        succ.dedup();
        Node { succ, live_leaf, index, low: index, on_stack: true, self_loop }
    }

    /// `None` when more than `budget` positions would be explored; callers treat that as live.
    pub fn is_live(
        &mut self,
        bsa: &Bsa,
        x: &ExclusionSet,
        res: &mut Residuals,
        state: u32,
        rid: u32,
        budget: usize,
    ) -> Option<bool> {
        if rid == DEAD {
            return Some(false);
        }
        let start = (state, rid);
        if let Some(v) = self.known(start) {
            return Some(v);
        }
        let mut nodes: FxHashMap<Pos, Node> = FxHashMap::default();
        let mut verdict: FxHashMap<Pos, bool> = FxHashMap::default();
        let mut stack: Vec<Pos> = Vec::new();
        // (position, next successor index)
        let mut frames: Vec<(Pos, usize)> = Vec::new();
        let mut counter = 0u32;
        nodes.insert(start, self.open(bsa, x, res, start, counter));
        counter += 1;
        stack.push(start);
        frames.push((start, 0));
        while let Some(&(v, i)) = frames.last() {
            let node = &nodes[&v];
            if i < node.succ.len() {
                let w = node.succ[i];
                frames.last_mut().unwrap().1 += 1;
                if verdict.contains_key(&w) {
                    continue;
                }
                match nodes.get(&w) {
                    Some(n) => {
                        if n.on_stack {
                            let wi = n.index;
                            let nv = nodes.get_mut(&v).unwrap();
                            nv.low = nv.low.min(wi);
                        }
                    }
                    None => {
                        if nodes.len() >= budget {
                            self.work += nodes.len() as u64;
                            self.total_work += nodes.len() as u64;
                            return None;
                        }
                        let n = self.open(bsa, x, res, w, counter);
                        counter += 1;
                        nodes.insert(w, n);
                        stack.push(w);
                        frames.push((w, 0));
                    }
                }
                continue;
            }
            frames.pop();
            let (vlow, vindex) = (nodes[&v].low, nodes[&v].index);
            if let Some(&(u, _)) = frames.last() {
                let un = nodes.get_mut(&u).unwrap();
                un.low = un.low.min(vlow);
            }
            if vlow != vindex {
                continue;
            }
            // v is the root of an SCC.
            let pos = stack.iter().rposition(|&p| p == v).unwrap();
            let members: Vec<Pos> = stack.drain(pos..).collect();
            for m in &members {
                nodes.get_mut(m).unwrap().on_stack = false;
            }
            let nontrivial = members.len() > 1 || nodes[&v].self_loop;
            let mut live = nontrivial && members.iter().any(|m| bsa.accepting[m.0 as usize]);
            if !live {
                live = members.iter().any(|m| {
                    let n = &nodes[m];
                    n.live_leaf || n.succ.iter().any(|s| verdict.get(s) == Some(&true))
                });
            }
            for m in members {
                verdict.insert(m, live);
            }
        }
        self.work += nodes.len() as u64;
        self.total_work += nodes.len() as u64;
        for (p, live) in verdict {
            self.memo.insert(p, if live { Memo::Live(self.epoch) } else { Memo::Dead });
        }
        self.known(start)
    }
}
