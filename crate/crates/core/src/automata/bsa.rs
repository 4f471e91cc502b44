//! Büchi stream automata and the conversion from NBAs over the TSL AP universe.

use std::fmt::Write as _;
use std::ops::Range;

use smallvec::SmallVec;

use super::emptiness::{buchi_nonempty_from, BuchiGraph};
use super::nba::Nba;
use super::prop::{Cube, Prop};
use super::AutomataError;
use crate::bits::Bits;
use crate::ltl::{ApUniverse, Letter, UpdateRhs};
use crate::term::{PredId, Sym, TermArena, TermId};

pub type TransId = u32;

/// One BSA transition. `guard` ranges over guard indices; unmasked guards are free.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: u32,
    pub guard: Cube,
    /// Per cell, an index into `Bsa::updates[cell]`.
    pub updates: SmallVec<[u16; 4]>,
    pub dst: u32,
}

/// How NBA edges are turned into BSA transitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Expansion {
    /// One transition per legal total letter.
    Explicit,
    /// Update choices are enumerated, predicate don't-cares stay symbolic.
    #[default]
    Cube,
}

#[derive(Clone, Debug)]
pub struct Bsa {
    pub num_states: usize,
    pub initial: Vec<u32>,
    pub accepting: Vec<bool>,
    /// Guard predicate terms; guard `i` is AP `i` of the universe.
    pub guards: Vec<PredId>,
    pub cells: Vec<Sym>,
    /// The cell reference term of each cell.
    pub cell_terms: Vec<TermId>,
    /// Candidate update terms per cell.
    pub updates: Vec<Vec<UpdateRhs>>,
    /// Sorted by (src, guard, updates, dst).
    pub transitions: Vec<Transition>,
    pub finitary: bool,
    out: Vec<Range<u32>>,
}

impl Bsa {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_states: usize,
        initial: Vec<u32>,
        accepting: Vec<bool>,
        guards: Vec<PredId>,
        cells: Vec<Sym>,
        cell_terms: Vec<TermId>,
        updates: Vec<Vec<UpdateRhs>>,
        mut transitions: Vec<Transition>,
    ) -> Bsa {
        transitions.sort();
        transitions.dedup();
        let mut out = vec![0..0; num_states];
        let mut i = 0usize;
        for (s, r) in out.iter_mut().enumerate() {
            let start = i;
            while i < transitions.len() && transitions[i].src as usize == s {
                i += 1;
            }
            *r = start as u32..i as u32;
        }
        let finitary = updates.iter().flatten().all(|u| *u != UpdateRhs::Star);
        Bsa { num_states, initial, accepting, guards, cells, cell_terms, updates, transitions, finitary, out }
    }

    pub fn out_range(&self, q: u32) -> Range<u32> {
        self.out[q as usize].clone()
    }

    pub fn out(&self, q: u32) -> &[Transition] {
        let r = self.out_range(q);
        &self.transitions[r.start as usize..r.end as usize]
    }

    pub fn update_term(&self, t: &Transition, cell: usize) -> UpdateRhs {
        self.updates[cell][t.updates[cell] as usize]
    }

    pub fn cell_index(&self, c: Sym) -> Option<usize> {
        self.cells.iter().position(|&d| d == c)
    }

    /// `q --[guard-bits|updates]--> q'`
    pub fn show_transition(&self, arena: &TermArena, t: &Transition) -> String {
        let mut s = format!("q{} --[", t.src);
        s.push_str(&self.guard_bits(&t.guard));
        s.push('|');
        for c in 0..self.cells.len() {
            if c > 0 {
                s.push_str(", ");
            }
            let rhs = match self.update_term(t, c) {
                UpdateRhs::Term(x) => arena.show(x),
                UpdateRhs::Star => "STAR".into(),
            };
            let _ = write!(s, "{} <- {}", arena.name(self.cells[c]), rhs);
        }
        let _ = write!(s, "]--> q{}", t.dst);
        s
    }

    pub fn guard_bits(&self, g: &Cube) -> String {
        (0..self.guards.len())
            .map(|i| match g.get(i) {
                Some(true) => '1',
                Some(false) => '0',
                None => '-',
            })
            .collect()
    }

    /// The letter over `universe` of a transition with a total guard valuation `vals`.
    pub fn letter(&self, universe: &ApUniverse, t: &Transition, vals: &Bits) -> Letter {
        let mut l: Letter = (0..self.guards.len()).filter(|&i| vals.get(i)).collect();
        for (c, ids) in universe.cell_updates.iter().enumerate() {
            l.set(ids[t.updates[c] as usize], true);
        }
        l
    }

    pub fn is_structurally_empty(&self) -> bool {
        !self.initial.iter().any(|&q| buchi_nonempty_from(self, q as usize))
    }

    /// Total number of legal letters represented by the transitions.
    pub fn letter_count(&self) -> u128 {
        self.transitions
            .iter()
            .map(|t| 1u128 << (self.guards.len() - t.guard.len()).min(100))
            .sum()
    }
}

impl BuchiGraph for Bsa {
    fn successors(&self, v: usize, out: &mut Vec<usize>) {
        out.extend(self.out(v as u32).iter().map(|t| t.dst as usize));
    }
    fn is_accepting(&self, v: usize) -> bool {
        self.accepting[v]
    }
}

/// Converts an NBA over the TSL AP universe. Only legal letters (one update per cell)
/// produce transitions.
pub fn nba_to_bsa(
    nba: &Nba,
    universe: &ApUniverse,
    arena: &TermArena,
    expansion: Expansion,
    letter_cap: usize,
) -> Result<Bsa, AutomataError> {
    let np = universe.num_preds;
    let mut transitions = Vec::new();
    for (ei, e) in nba.edges.iter().enumerate() {
        // Candidate update choices per cell.
        let mut choices: Vec<Vec<u16>> = Vec::with_capacity(universe.cells.len());
        for ids in &universe.cell_updates {
            let forced: Vec<u16> = (0..ids.len() as u16).filter(|&k| e.label.get(ids[k as usize]) == Some(true)).collect();
            let c = if !forced.is_empty() {
                if forced.len() > 1 {
                    Vec::new()
                } else {
                    forced
                }
            } else {
                (0..ids.len() as u16).filter(|&k| e.label.get(ids[k as usize]) != Some(false)).collect()
            };
            choices.push(c);
        }
        let combos: usize = choices.iter().map(|c| c.len()).try_fold(1usize, |a, b| a.checked_mul(b)).unwrap_or(usize::MAX);
        if combos > letter_cap {
            return Err(AutomataError::LetterCap { edge: ei, src: e.src, dst: e.dst, letters: combos, cap: letter_cap });
        }
        if combos == 0 {
            continue;
        }
        let pred_cube = {
            let mut c = Cube::top();
            for (a, v) in e.label.literals().filter(|&(a, _)| a < np) {
                c.set(a, v);
            }
            c
        };
        let mut emitted = 0usize;
        let mut idx = vec![0usize; choices.len()];
        loop {
            let updates: SmallVec<[u16; 4]> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let mut fixed = pred_cube.clone();
            for (c, ids) in universe.cell_updates.iter().enumerate() {
                for (k, &ap) in ids.iter().enumerate() {
                    fixed.set(ap, k as u16 == updates[c]);
                }
            }
            let residual = nba.invariant.restrict(&fixed);
            let cubes = match residual {
                Prop::False => vec![],
                Prop::True => vec![Cube::top()],
                r => r.cover(),
            };
            for extra in cubes {
                let mut guard = pred_cube.clone();
                for (a, v) in extra.literals() {
                    guard.set(a, v);
                }
                let guard = guard.normalize();
                match expansion {
                    Expansion::Cube => {
                        emitted += 1;
                        transitions.push(Transition { src: e.src, guard, updates: updates.clone(), dst: e.dst });
                    }
                    Expansion::Explicit => {
                        let free: Vec<usize> = (0..np).filter(|&i| guard.get(i).is_none()).collect();
                        let n = 1usize.checked_shl(free.len() as u32).unwrap_or(usize::MAX);
                        emitted = emitted.saturating_add(n);
                        if emitted > letter_cap {
                            return Err(AutomataError::LetterCap {
                                edge: ei,
                                src: e.src,
                                dst: e.dst,
                                letters: emitted,
                                cap: letter_cap,
                            });
                        }
                        for bits in 0..n {
                            let mut g = guard.clone();
                            for (j, &i) in free.iter().enumerate() {
                                g.set(i, bits >> j & 1 == 1);
                            }
                            transitions.push(Transition { src: e.src, guard: g.normalize(), updates: updates.clone(), dst: e.dst });
                        }
                    }
                }
            }
            if emitted > letter_cap {
                return Err(AutomataError::LetterCap { edge: ei, src: e.src, dst: e.dst, letters: emitted, cap: letter_cap });
            }
            // Next combination.
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    let cell_terms = universe.cells.iter().map(|&c| arena.cell_sym(c)).collect();
    let updates = universe
        .cell_updates
        .iter()
        .map(|ids| {
            ids.iter()
                .map(|&i| match universe.aps[i] {
                    crate::ltl::Ap::Update { rhs, .. } => rhs,
                    _ => unreachable!(),
                })
                .collect()
        })
        .collect();
    Ok(Bsa::new(
        nba.num_states,
        nba.initial.clone(),
        nba.accepting.clone(),
        universe.preds().collect(),
        universe.cells.clone(),
        cell_terms,
        updates,
        transitions,
    ))
}
