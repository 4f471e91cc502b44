//! Execution effects of finite runs: current cell terms plus accumulated constraints.

use std::collections::BTreeSet;

use thiserror::Error;

use super::bsa::{Bsa, TransId, Transition};
use crate::ltl::UpdateRhs;
use crate::term::{PredId, Sym, TermArena, TermId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionEffect {
    /// Current term of each cell, parallel to `Bsa::cells`.
    pub term_map: Vec<TermId>,
    pub constraints: BTreeSet<(PredId, bool)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EffectError {
    #[error("STAR update on cell {0}")]
    Star(usize),
    #[error("run is not chained at position {0}")]
    Chain(usize),
    #[error("transition {0} does not exist")]
    NoTransition(TransId),
}

pub fn effect_empty(arena: &TermArena, cells: &[Sym]) -> ExecutionEffect {
    ExecutionEffect { term_map: cells.iter().map(|&c| arena.cell_sym(c)).collect(), constraints: BTreeSet::new() }
}

/// Substitution of cells by their current terms.
pub fn lookup<'a>(cells: &'a [Sym], terms: &'a [TermId], arena: &'a TermArena) -> impl Fn(Sym) -> TermId + 'a {
    move |c| match cells.iter().position(|&d| d == c) {
        Some(i) => terms[i],
        None => arena.cell_sym(c),
    }
}

pub fn effect_extend(
    arena: &TermArena,
    bsa: &Bsa,
    e: &ExecutionEffect,
    t: &Transition,
) -> Result<ExecutionEffect, EffectError> {
    let f = lookup(&bsa.cells, &e.term_map, arena);
    let mut constraints = e.constraints.clone();
    for (i, v) in t.guard.literals() {
        constraints.insert((arena.subst_pred(bsa.guards[i], &f), v));
    }
    let mut term_map = Vec::with_capacity(bsa.cells.len());
    for c in 0..bsa.cells.len() {
        match bsa.update_term(t, c) {
            UpdateRhs::Term(u) => term_map.push(arena.subst(u, &f)),
            UpdateRhs::Star => return Err(EffectError::Star(c)),
        }
    }
    Ok(ExecutionEffect { term_map, constraints })
}

/// Effect of a run given as transition indices, folded from the empty effect.
pub fn run_effect(arena: &TermArena, bsa: &Bsa, run: &[TransId]) -> Result<ExecutionEffect, EffectError> {
    let mut e = effect_empty(arena, &bsa.cells);
    let mut prev: Option<u32> = None;
    for (k, &ti) in run.iter().enumerate() {
        let t = bsa.transitions.get(ti as usize).ok_or(EffectError::NoTransition(ti))?;
        if prev.is_some_and(|p| p != t.src) {
            return Err(EffectError::Chain(k));
        }
        prev = Some(t.dst);
        e = effect_extend(arena, bsa, &e, t)?;
    }
    Ok(e)
}

/// Some predicate term constrained with both polarities.
pub fn find_syntactic_conflict(constraints: &BTreeSet<(PredId, bool)>) -> Option<PredId> {
    constraints
        .iter()
        .find(|&&(p, v)| v && constraints.contains(&(p, false)))
        .map(|&(p, _)| p)
}
