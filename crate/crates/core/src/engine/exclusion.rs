//! The exclusion set: a BFS tree of consistent runs from every state whose conflicting
//! one-transition extensions are the excluded words, plus the suffix-residual matcher.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use super::tree::{BlockTree, Step};
use crate::automata::{Bsa, TransId};
use crate::term::TermArena;

const CONFLICT: u32 = u32::MAX;
const UNEXPANDED: u32 = u32::MAX;

pub struct ExclusionSet {
    pub tree: BlockTree,
    roots: Vec<u32>,
    kids_start: Vec<u32>,
    kids: Vec<u32>,
    /// A node is relevant if it is a proper prefix of some excluded word.
    relevant: Vec<bool>,
    queue: VecDeque<u32>,
    /// Excluded words as (node, transition): `trace(node).t`.
    pub words: Vec<(u32, TransId)>,
    /// Bumped on every new excluded word.
    pub version: u64,
    pub steps: u64,
}

impl ExclusionSet {
    pub fn new(bsa: &Bsa) -> ExclusionSet {
        let mut tree = BlockTree::new(bsa.cells.len());
        let mut queue = VecDeque::new();
        let roots: Vec<u32> = (0..bsa.num_states as u32)
            .map(|q| {
                let r = tree.root(q, &bsa.cell_terms);
                queue.push_back(r);
                r
            })
            .collect();
        let n = roots.len();
        ExclusionSet {
            tree,
            roots,
            kids_start: vec![UNEXPANDED; n],
            kids: Vec::new(),
            relevant: vec![false; n],
            queue,
            words: Vec::new(),
            version: 0,
            steps: 0,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.tree.len()
    }

    pub fn depth(&self) -> u32 {
        self.queue.front().map_or(0, |&b| self.tree.get(b).depth)
    }

    /// Expands one block. Returns false when there is nothing left to do.
    pub fn step(&mut self, arena: &TermArena, bsa: &Bsa) -> bool {
        let Some(m) = self.queue.pop_front() else { return false };
        self.steps += 1;
        let outcomes = self.tree.expand(arena, bsa, m);
        self.kids_start[m as usize] = self.kids.len() as u32;
        for (t, o) in outcomes {
            match o {
                Step::Conflict => {
                    self.kids.push(CONFLICT);
                    self.words.push((m, t));
                    self.version += 1;
                    self.mark_relevant(m);
                }
                Step::Child { terms, delta } => {
                    let dst = bsa.transitions[t as usize].dst;
                    let k = self.tree.child(m, t, dst, &terms, &delta);
                    self.kids_start.push(UNEXPANDED);
                    self.relevant.push(false);
                    self.kids.push(k);
                    self.queue.push_back(k);
                }
            }
        }
        true
    }

    fn mark_relevant(&mut self, mut m: u32) {
        while m != super::tree::NONE && !self.relevant[m as usize] {
            self.relevant[m as usize] = true;
            m = self.tree.get(m).parent;
        }
    }

    /// Residual transition: `None` if some suffix of the input extended by `t` is excluded.
    pub fn advance(&self, bsa: &Bsa, current: &[u32], t: TransId, out: &mut Vec<u32>) -> bool {
        out.clear();
        let tr = &bsa.transitions[t as usize];
        let off = t - bsa.out_range(tr.src).start;
        let root = self.roots[tr.src as usize];
        let candidates = current.iter().copied().chain(self.relevant[root as usize].then_some(root));
        for m in candidates {
            let start = self.kids_start[m as usize];
            if start == UNEXPANDED {
                continue;
            }
            let k = self.kids[(start + off) as usize];
            if k == CONFLICT {
                return false;
            }
            if self.relevant[k as usize] {
                out.push(k);
            }
        }
        out.sort_unstable();
        out.dedup();
        true
    }
}

/// Interned residual sets; id 0 is the empty set.
pub struct Residuals {
    sets: Vec<Vec<u32>>,
    index: FxHashMap<Vec<u32>, u32>,
    buf: Vec<u32>,
}

pub const EMPTY: u32 = 0;
pub const DEAD: u32 = u32::MAX;

impl Default for Residuals {
    fn default() -> Self {
        let mut index = FxHashMap::default();
        index.insert(Vec::new(), 0);
        Residuals { sets: vec![Vec::new()], index, buf: Vec::new() }
    }
}

impl Residuals {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, rid: u32) -> &[u32] {
        &self.sets[rid as usize]
    }

    /// Interned successor residual, or `DEAD`.
    pub fn step(&mut self, x: &ExclusionSet, bsa: &Bsa, rid: u32, t: TransId) -> u32 {
        if rid == DEAD {
            return DEAD;
        }
        let mut buf = std::mem::take(&mut self.buf);
        let alive = x.advance(bsa, &self.sets[rid as usize], t, &mut buf);
        let r = if !alive {
            DEAD
        } else if let Some(&id) = self.index.get(&buf) {
            id
        } else {
            let id = self.sets.len() as u32;
            self.sets.push(buf.clone());
            self.index.insert(buf.clone(), id);
            id
        };
        self.buf = buf;
        r
    }
}
