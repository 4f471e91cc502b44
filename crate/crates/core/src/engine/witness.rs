//! Lasso witnesses, their canonical-model summary, and from-scratch validation.

use std::collections::BTreeSet;

use serde::Serialize;

use super::tree::BlockTree;
use crate::automata::effect::{effect_empty, effect_extend, lookup, ExecutionEffect};
use crate::automata::{Bsa, Cube, TransId, Transition};
use crate::bits::Bits;
use crate::euf::{check_query, CongruenceStore, EufQuery, EufResult};
use crate::ltl::{ltl_lasso_check, ApUniverse, Letter, Ltl};
use crate::term::TermArena;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ModelSummary {
    /// Equivalence classes of function terms with more than one member.
    pub classes: Vec<Vec<String>>,
    /// Predicate terms of the query with their truth value.
    pub predicates: Vec<(String, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub pref: Vec<TransId>,
    pub rec: Vec<TransId>,
    /// Total guard valuation per step; don't-cares are taken from the canonical model.
    pub pref_vals: Vec<Bits>,
    pub rec_vals: Vec<Bits>,
    pub query: EufQuery,
    pub model: ModelSummary,
}

fn lasso_query(pref: &ExecutionEffect, full: &ExecutionEffect) -> EufQuery {
    EufQuery {
        signed_predicates: full.constraints.iter().copied().collect(),
        equalities: pref.term_map.iter().copied().zip(full.term_map.iter().copied()).collect(),
    }
    .normalized()
}

/// Builds the witness for the loop `start .. end` of a search tree. `store` holds the
/// satisfiable query.
pub fn build_witness(
    arena: &TermArena,
    bsa: &Bsa,
    tree: &BlockTree,
    start: u32,
    end: u32,
    query: EufQuery,
    store: &mut CongruenceStore<'_>,
) -> Witness {
    let path = tree.path(end);
    let split = tree.get(start).depth as usize;
    let mut vals = Vec::with_capacity(path.len() - 1);
    for w in path.windows(2) {
        let t = &bsa.transitions[tree.get(w[1]).trans as usize];
        let f = lookup(&bsa.cells, tree.term_map(w[0]), arena);
        let mut v = Bits::with_len(bsa.guards.len());
        for (i, &g) in bsa.guards.iter().enumerate() {
            let b = match t.guard.get(i) {
                Some(b) => b,
                None => store.pred_value(arena.subst_pred(g, &f)).unwrap_or(false),
            };
            v.set(i, b);
        }
        vals.push(v.normalized());
    }
    let trace = tree.trace(end);
    let model = summarize(arena, store, &query);
    let rec_vals = vals.split_off(split);
    Witness {
        pref: trace[..split].to_vec(),
        rec: trace[split..].to_vec(),
        pref_vals: vals,
        rec_vals,
        query,
        model,
    }
}

fn summarize(arena: &TermArena, store: &mut CongruenceStore<'_>, q: &EufQuery) -> ModelSummary {
    let mut classes: Vec<Vec<String>> = store
        .classes()
        .into_iter()
        .map(|c| {
            let mut names: Vec<String> = c.into_iter().map(|t| arena.show(t)).collect();
            names.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            names
        })
        .collect();
    classes.sort();
    let mut predicates: Vec<(String, bool)> =
        q.signed_predicates.iter().map(|&(p, _)| (arena.show_pred(p), store.pred_value(p).unwrap_or(false))).collect();
    predicates.sort();
    predicates.dedup();
    ModelSummary { classes, predicates }
}

impl Witness {
    pub fn pref_lines(&self, arena: &TermArena, bsa: &Bsa) -> Vec<String> {
        lines(arena, bsa, &self.pref, &self.pref_vals)
    }

    pub fn rec_lines(&self, arena: &TermArena, bsa: &Bsa) -> Vec<String> {
        lines(arena, bsa, &self.rec, &self.rec_vals)
    }

    /// The letter word of the lasso over `universe`.
    pub fn letters(&self, bsa: &Bsa, universe: &ApUniverse) -> (Vec<Letter>, Vec<Letter>) {
        let f = |ts: &[TransId], vs: &[Bits]| -> Vec<Letter> {
            ts.iter().zip(vs).map(|(&t, v)| bsa.letter(universe, &bsa.transitions[t as usize], v)).collect()
        };
        (f(&self.pref, &self.pref_vals), f(&self.rec, &self.rec_vals))
    }
}

fn explicit(bsa: &Bsa, t: &Transition, vals: &Bits) -> Transition {
    let mut guard = Cube::top();
    for i in 0..bsa.guards.len() {
        guard.set(i, vals.get(i));
    }
    Transition { src: t.src, guard: guard.normalize(), updates: t.updates.clone(), dst: t.dst }
}

fn lines(arena: &TermArena, bsa: &Bsa, ts: &[TransId], vals: &[Bits]) -> Vec<String> {
    ts.iter().zip(vals).map(|(&t, v)| bsa.show_transition(arena, &explicit(bsa, &bsa.transitions[t as usize], v))).collect()
}

/// Recomputes everything from scratch. `Err` names the first failed check.
pub fn validate_witness(
    arena: &TermArena,
    bsa: &Bsa,
    universe: &ApUniverse,
    ltl: &Ltl,
    w: &Witness,
) -> Result<(), String> {
    if w.rec.is_empty() {
        return Err("empty recurrence".into());
    }
    if w.pref.len() != w.pref_vals.len() || w.rec.len() != w.rec_vals.len() {
        return Err("guard valuations do not match the run".into());
    }
    let get = |t: TransId| bsa.transitions.get(t as usize).ok_or_else(|| format!("no transition {t}"));
    let run: Vec<&Transition> = w.pref.iter().chain(&w.rec).map(|&t| get(t)).collect::<Result<_, _>>()?;
    if !bsa.initial.contains(&run[0].src) {
        return Err("run does not start in an initial state".into());
    }
    for (k, p) in run.windows(2).enumerate() {
        if p[0].dst != p[1].src {
            return Err(format!("run is not chained at step {}", k + 1));
        }
    }
    let rec_start = run[w.pref.len()].src;
    if run.last().unwrap().dst != rec_start {
        return Err("recurrence does not return to its start state".into());
    }
    if !run[w.pref.len()..].iter().any(|t| bsa.accepting[t.src as usize]) {
        return Err("recurrence visits no accepting state".into());
    }
    let vals: Vec<&Bits> = w.pref_vals.iter().chain(&w.rec_vals).collect();
    for (k, (t, v)) in run.iter().zip(&vals).enumerate() {
        if t.guard.literals().any(|(i, b)| v.get(i) != b) {
            return Err(format!("guard valuation at step {k} contradicts the transition"));
        }
    }
    // Cube-level effect and the reported query.
    let fold = |ts: &[&Transition]| -> Result<ExecutionEffect, String> {
        let mut e = effect_empty(arena, &bsa.cells);
        for t in ts {
            e = effect_extend(arena, bsa, &e, t).map_err(|e| e.to_string())?;
        }
        Ok(e)
    };
    let pe = fold(&run[..w.pref.len()])?;
    let fe = fold(&run)?;
    if lasso_query(&pe, &fe) != w.query {
        return Err("reported query differs from the recomputed one".into());
    }
    if check_query(arena, &w.query) != EufResult::Sat {
        return Err("query is unsatisfiable".into());
    }
    // The explicit refinement chosen by the model must stay satisfiable.
    let ex: Vec<Transition> = run.iter().zip(&vals).map(|(t, v)| explicit(bsa, t, v)).collect();
    let exr: Vec<&Transition> = ex.iter().collect();
    let pe = fold(&exr[..w.pref.len()])?;
    let fe = fold(&exr)?;
    let conflicts: BTreeSet<_> = fe.constraints.iter().filter(|&&(p, v)| v && fe.constraints.contains(&(p, false))).collect();
    if !conflicts.is_empty() {
        return Err("explicit run has conflicting constraints".into());
    }
    if check_query(arena, &lasso_query(&pe, &fe)) != EufResult::Sat {
        return Err("explicit query is unsatisfiable".into());
    }
    let (stem, lp) = w.letters(bsa, universe);
    match ltl_lasso_check(&stem, &lp, ltl, universe.len()) {
        Ok(true) => Ok(()),
        Ok(false) => Err("letter word violates the LTL approximation".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// The query of the lasso `pref.rec^ω` recomputed from its transitions.
pub fn recompute_query(arena: &TermArena, bsa: &Bsa, pref: &[TransId], rec: &[TransId]) -> Option<EufQuery> {
    let run: Vec<TransId> = pref.iter().chain(rec).copied().collect();
    let pe = crate::automata::run_effect(arena, bsa, pref).ok()?;
    let fe = crate::automata::run_effect(arena, bsa, &run).ok()?;
    Some(lasso_query(&pe, &fe))
}
