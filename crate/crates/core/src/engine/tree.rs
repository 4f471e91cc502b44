//! Block trees: prefix trees of finite runs with incrementally extended effects.

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::automata::effect::lookup;
use crate::automata::{Bsa, TransId};
use crate::ltl::UpdateRhs;
use crate::term::{PredId, TermArena, TermId};

pub const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub state: u32,
    pub parent: u32,
    pub trans: TransId,
    pub depth: u32,
}

/// Outcome of taking one transition from an expanded block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// The constraint set of the extended run contains a predicate term with both polarities.
    Conflict,
    /// New cell terms and the constraints not already implied by the ancestors.
    Child { terms: SmallVec<[TermId; 4]>, delta: SmallVec<[(PredId, bool); 4]> },
}

/// Blocks with their execution effects, stored as a parent-linked arena.
#[derive(Default)]
pub struct BlockTree {
    blocks: Vec<Block>,
    ncells: usize,
    terms: Vec<TermId>,
    delta_start: Vec<u32>,
    delta: Vec<(PredId, bool)>,
}

impl BlockTree {
    pub fn new(ncells: usize) -> BlockTree {
        BlockTree { ncells, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn get(&self, b: u32) -> Block {
        self.blocks[b as usize]
    }

    pub fn root(&mut self, state: u32, cell_terms: &[TermId]) -> u32 {
        self.push(Block { state, parent: NONE, trans: NONE, depth: 0 }, cell_terms, &[])
    }

    pub fn child(&mut self, parent: u32, trans: TransId, state: u32, terms: &[TermId], delta: &[(PredId, bool)]) -> u32 {
        let depth = self.blocks[parent as usize].depth + 1;
        self.push(Block { state, parent, trans, depth }, terms, delta)
    }

    fn push(&mut self, b: Block, terms: &[TermId], delta: &[(PredId, bool)]) -> u32 {
        debug_assert_eq!(terms.len(), self.ncells);
        let id = self.blocks.len() as u32;
        self.blocks.push(b);
        self.terms.extend_from_slice(terms);
        self.delta_start.push(self.delta.len() as u32);
        self.delta.extend_from_slice(delta);
        id
    }

    pub fn term_map(&self, b: u32) -> &[TermId] {
        let s = b as usize * self.ncells;
        &self.terms[s..s + self.ncells]
    }

    pub fn delta(&self, b: u32) -> &[(PredId, bool)] {
        let s = self.delta_start[b as usize] as usize;
        let e = self.delta_start.get(b as usize + 1).map_or(self.delta.len(), |&x| x as usize);
        &self.delta[s..e]
    }

    /// Transition word from the root to `b`.
    pub fn trace(&self, mut b: u32) -> Vec<TransId> {
        let mut out = Vec::with_capacity(self.blocks[b as usize].depth as usize);
        while self.blocks[b as usize].parent != NONE {
            out.push(self.blocks[b as usize].trans);
            b = self.blocks[b as usize].parent;
        }
        out.reverse();
        out
    }

    /// Blocks on the path from the root to `b`, inclusive.
    pub fn path(&self, mut b: u32) -> Vec<u32> {
        let mut out = vec![b];
        while self.blocks[b as usize].parent != NONE {
            b = self.blocks[b as usize].parent;
            out.push(b);
        }
        out.reverse();
        out
    }

    /// The accumulated constraint set of `trace(b)`.
    pub fn constraints(&self, mut b: u32) -> FxHashMap<PredId, bool> {
        let mut m = FxHashMap::default();
        loop {
            for &(p, v) in self.delta(b) {
                m.insert(p, v);
            }
            let parent = self.blocks[b as usize].parent;
            if parent == NONE {
                return m;
            }
            b = parent;
        }
    }

    /// Ancestors in the same state with an accepting state at or after them, nearest first.
    pub fn find_accepting_loops(&self, bsa: &Bsa, b: u32) -> Vec<u32> {
        let state = self.blocks[b as usize].state;
        let mut out = Vec::new();
        let mut seen_accepting = false;
        let mut p = self.blocks[b as usize].parent;
        while p != NONE {
            let bp = self.blocks[p as usize];
            if bsa.accepting[bp.state as usize] {
                seen_accepting = true;
            }
            if bp.state == state && seen_accepting {
                out.push(p);
            }
            p = bp.parent;
        }
        out
    }

    /// Evaluates every outgoing transition of `b`, in transition order.
    pub fn expand(&self, arena: &TermArena, bsa: &Bsa, b: u32) -> Vec<(TransId, Step)> {
        let block = self.blocks[b as usize];
        let range = bsa.out_range(block.state);
        if range.is_empty() {
            return Vec::new();
        }
        let constraints = self.constraints(b);
        let tm = self.term_map(b);
        let f = lookup(&bsa.cells, tm, arena);
        let ng = bsa.guards.len();
        let evaluated: Vec<PredId> = bsa.guards.iter().map(|&g| arena.subst_pred(g, &f)).collect();
        // Guards evaluating to the same predicate term share a class.
        let mut first: FxHashMap<PredId, usize> = FxHashMap::default();
        let class: Vec<usize> = (0..ng).map(|i| *first.entry(evaluated[i]).or_insert(i)).collect();
        let forced: Vec<Option<bool>> = evaluated.iter().map(|p| constraints.get(p).copied()).collect();
        let mut update_cache: FxHashMap<(usize, u16), TermId> = FxHashMap::default();
        let mut seen: Vec<Option<bool>> = vec![None; ng];
        let mut out = Vec::with_capacity(range.len());
        for ti in range {
            let t = &bsa.transitions[ti as usize];
            let mut conflict = false;
            let mut delta: SmallVec<[(PredId, bool); 4]> = SmallVec::new();
            for (i, v) in t.guard.literals() {
                if forced[i] == Some(!v) {
                    conflict = true;
                    break;
                }
                let c = class[i];
                match seen[c] {
                    Some(w) if w != v => {
                        conflict = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        seen[c] = Some(v);
                        if forced[i].is_none() {
                            delta.push((evaluated[i], v));
                        }
                    }
                }
            }
            for (i, _) in t.guard.literals() {
                seen[class[i]] = None;
            }
            if conflict {
                out.push((ti, Step::Conflict));
                continue;
            }
            let mut terms = SmallVec::new();
            for c in 0..bsa.cells.len() {
                let k = t.updates[c];
                let term = *update_cache.entry((c, k)).or_insert_with(|| match bsa.updates[c][k as usize] {
                    UpdateRhs::Term(u) => arena.subst(u, &f),
                    UpdateRhs::Star => panic!("STAR update in a finitary search"),
                });
                terms.push(term);
            }
            delta.sort();
            out.push((ti, Step::Child { terms, delta }));
        }
        out
    }
}
