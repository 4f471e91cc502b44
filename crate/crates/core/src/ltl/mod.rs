//! LTL approximation of TSL formulas, the finitary reduction and lasso evaluation.

use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::bits::Bits;
use crate::formula::{Formula, Problem};
use crate::parser::is_reserved;
use crate::term::{PredId, Sym, TermArena, TermId};

pub mod lasso;

pub use lasso::{ltl_lasso_check, LassoError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Finitary,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UpdateRhs {
    Term(TermId),
    Star,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ap {
    Pred(PredId),
    Update { cell: Sym, rhs: UpdateRhs },
}

pub type ApId = usize;

/// Ordered AP universe: predicates first (index = guard index), then updates grouped by cell.
#[derive(Clone, Debug)]
pub struct ApUniverse {
    pub aps: Vec<Ap>,
    pub num_preds: usize,
    pub cells: Vec<Sym>,
    /// AP ids of the update propositions of each cell, parallel to `cells`.
    pub cell_updates: Vec<Vec<ApId>>,
    index: FxHashMap<Ap, ApId>,
}

impl ApUniverse {
    pub fn len(&self) -> usize {
        self.aps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aps.is_empty()
    }

    pub fn id(&self, ap: &Ap) -> Option<ApId> {
        self.index.get(ap).copied()
    }

    pub fn is_pred(&self, id: ApId) -> bool {
        id < self.num_preds
    }

    pub fn preds(&self) -> impl Iterator<Item = PredId> + '_ {
        self.aps[..self.num_preds].iter().map(|a| match a {
            Ap::Pred(p) => *p,
            _ => unreachable!(),
        })
    }

    pub fn cell_index(&self, c: Sym) -> Option<usize> {
        self.cells.iter().position(|&d| d == c)
    }

    /// The printer's AP encoding: `p(x)` or `[x <- f(x)]`.
    pub fn show(&self, arena: &TermArena, id: ApId) -> String {
        match self.aps[id] {
            Ap::Pred(p) => arena.show_pred(p),
            Ap::Update { cell, rhs } => {
                let r = match rhs {
                    UpdateRhs::Term(t) => arena.show(t),
                    UpdateRhs::Star => "STAR".into(),
                };
                format!("[{} <- {}]", arena.name(cell), r)
            }
        }
    }

    fn build(preds: Vec<PredId>, cells: Vec<Sym>, updates: Vec<Vec<UpdateRhs>>) -> ApUniverse {
        let mut aps: Vec<Ap> = preds.into_iter().map(Ap::Pred).collect();
        let num_preds = aps.len();
        let mut cell_updates = Vec::new();
        for (&c, ups) in cells.iter().zip(updates) {
            let mut ids = Vec::new();
            for rhs in ups {
                ids.push(aps.len());
                aps.push(Ap::Update { cell: c, rhs });
            }
            cell_updates.push(ids);
        }
        let index = aps.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        ApUniverse { aps, num_preds, cells, cell_updates, index }
    }
}

/// A letter is a total truth assignment over the AP universe.
pub type Letter = Bits;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    Ap(ApId),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn not(a: Ltl) -> Ltl {
        Ltl::Not(Box::new(a))
    }
    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        Ltl::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Ltl::not(Ltl::and(Ltl::not(a), Ltl::not(b)))
    }
    pub fn next(a: Ltl) -> Ltl {
        Ltl::Next(Box::new(a))
    }
    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }
    pub fn globally(a: Ltl) -> Ltl {
        Ltl::not(Ltl::until(Ltl::True, Ltl::not(a)))
    }
    pub fn conj(items: impl IntoIterator<Item = Ltl>) -> Ltl {
        let mut it = items.into_iter();
        match it.next() {
            None => Ltl::True,
            Some(f) => it.fold(f, Ltl::and),
        }
    }
    pub fn disj(items: impl IntoIterator<Item = Ltl>) -> Ltl {
        let mut it = items.into_iter();
        match it.next() {
            None => Ltl::not(Ltl::True),
            Some(f) => it.fold(f, Ltl::or),
        }
    }

    /// `Some(a)` if this formula is `G a`.
    pub fn as_globally(&self) -> Option<&Ltl> {
        if let Ltl::Not(u) = self {
            if let Ltl::Until(t, na) = &**u {
                if let (Ltl::True, Ltl::Not(a)) = (&**t, &**na) {
                    return Some(a);
                }
            }
        }
        None
    }

    pub fn is_propositional(&self) -> bool {
        match self {
            Ltl::True | Ltl::Ap(_) => true,
            Ltl::Not(a) => a.is_propositional(),
            Ltl::And(a, b) => a.is_propositional() && b.is_propositional(),
            Ltl::Next(_) | Ltl::Until(..) => false,
        }
    }

    pub fn max_ap(&self) -> Option<ApId> {
        match self {
            Ltl::True => None,
            Ltl::Ap(a) => Some(*a),
            Ltl::Not(a) | Ltl::Next(a) => a.max_ap(),
            Ltl::And(a, b) | Ltl::Until(a, b) => a.max_ap().max(b.max_ap()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Ltl::True | Ltl::Ap(_) => 1,
            Ltl::Not(a) | Ltl::Next(a) => 1 + a.size(),
            Ltl::And(a, b) | Ltl::Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn conjuncts(&self) -> Vec<&Ltl> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Ltl::And(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                _ => out.push(f),
            }
        }
        out
    }

    /// Propositional evaluation on one letter.
    pub fn eval_prop(&self, letter: &Letter) -> bool {
        match self {
            Ltl::True => true,
            Ltl::Ap(a) => letter.get(*a),
            Ltl::Not(a) => !a.eval_prop(letter),
            Ltl::And(a, b) => a.eval_prop(letter) && b.eval_prop(letter),
            Ltl::Next(_) | Ltl::Until(..) => panic!("temporal operator in propositional context"),
        }
    }
}

/// Result of [`approximate`].
#[derive(Clone, Debug)]
pub struct Approximation {
    /// `φ' ∧ φ_least ∧ φ_most`
    pub ltl: Ltl,
    pub universe: ApUniverse,
    pub mode: Mode,
}

/// LTL approximation with exactly-one-update constraints.
pub fn approximate(problem: &Problem, mode: Mode) -> Approximation {
    let arena = &problem.arena;
    let f = &problem.formula;
    let cells = problem.cell_syms();
    let updates = f.all_updates();
    let per_cell: Vec<Vec<UpdateRhs>> = cells
        .iter()
        .map(|&c| {
            let mut v: Vec<UpdateRhs> = updates
                .iter()
                .filter(|(d, _)| *d == c)
                .map(|&(_, t)| UpdateRhs::Term(t))
                .collect();
            let extra = match mode {
                Mode::Finitary => UpdateRhs::Term(arena.cell_sym(c)),
                Mode::General => UpdateRhs::Star,
            };
            if !v.contains(&extra) {
                v.push(extra);
            }
            v
        })
        .collect();
    let universe = ApUniverse::build(f.all_predicates(), cells, per_cell);
    let main = to_ltl(f, &universe);
    let least = Ltl::conj(
        universe
            .cell_updates
            .iter()
            .map(|ids| Ltl::disj(ids.iter().map(|&i| Ltl::Ap(i)))),
    );
    let mut most_clauses = Vec::new();
    for ids in &universe.cell_updates {
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                most_clauses.push(Ltl::not(Ltl::and(Ltl::Ap(a), Ltl::Ap(b))));
            }
        }
    }
    let g = |x: Ltl| if x == Ltl::True { Ltl::True } else { Ltl::globally(x) };
    let most = g(Ltl::conj(most_clauses));
    let least = g(least);
    Approximation { ltl: Ltl::and(Ltl::and(main, least), most), universe, mode }
}

fn to_ltl(f: &Formula, u: &ApUniverse) -> Ltl {
    match f {
        Formula::True => Ltl::True,
        Formula::Not(a) => Ltl::not(to_ltl(a, u)),
        Formula::And(a, b) => Ltl::and(to_ltl(a, u), to_ltl(b, u)),
        Formula::Next(a) => Ltl::next(to_ltl(a, u)),
        Formula::Until(a, b) => Ltl::until(to_ltl(a, u), to_ltl(b, u)),
        Formula::Pred(p) => Ltl::Ap(u.id(&Ap::Pred(*p)).expect("predicate in universe")),
        Formula::Update(c, t) => Ltl::Ap(
            u.id(&Ap::Update { cell: *c, rhs: UpdateRhs::Term(*t) })
                .expect("update in universe"),
        ),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FinitarizeError {
    #[error("reserved symbol `{0}` already present")]
    Reserved(String),
}

/// `φ ∧ G[n <- new(n)] ∧ G ⋀_c (⋁ updates of c in φ ∨ [c <- pick_c(n)])`.
pub fn finitarize(problem: &Problem) -> Result<Problem, FinitarizeError> {
    let sig = &problem.signature;
    for name in sig.cells.iter().chain(sig.functions.keys()).chain(sig.predicates.keys()) {
        if is_reserved(name) {
            return Err(FinitarizeError::Reserved(name.clone()));
        }
    }
    let arena: &Arc<TermArena> = &problem.arena;
    let fresh = std::iter::once("n".to_string())
        .chain((0..).map(|i| format!("n{i}")))
        .find(|c| !sig.uses_name(c))
        .unwrap();
    let n = arena.cell(&fresh);
    let n_sym = arena.intern(&fresh);
    let mut new_sig = sig.clone();
    new_sig.functions.insert("new".into(), 1);
    let updates = problem.formula.all_updates();
    let mut per_cell = Vec::new();
    for c in &sig.cells {
        let pick = format!("pick_{c}");
        new_sig.functions.insert(pick.clone(), 1);
        let cs = arena.intern(c);
        let mut alts: Vec<Formula> = updates
            .iter()
            .filter(|(d, _)| *d == cs)
            .map(|&(d, t)| Formula::Update(d, t))
            .collect();
        alts.push(Formula::Update(cs, arena.apply(&pick, &[n])));
        per_cell.push(Formula::disj(alts));
    }
    new_sig.cells.push(fresh.clone());
    let step = Formula::globally(Formula::Update(n_sym, arena.apply("new", &[n])));
    let fin = Formula::and(step, Formula::globally(Formula::conj(per_cell)));
    Ok(Problem {
        arena: arena.clone(),
        signature: new_sig,
        formula: Formula::and(problem.formula.clone(), fin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    #[test]
    fn approximate_single_update() {
        let p = parse_formula("G [x <- f(x)]", None).unwrap();
        let a = approximate(&p, Mode::Finitary);
        let u = &a.universe;
        assert_eq!(u.len(), 2);
        assert_eq!(u.num_preds, 0);
        assert_eq!(u.show(&p.arena, 0), "[x <- f(x)]");
        assert_eq!(u.show(&p.arena, 1), "[x <- x]");
        let Ltl::And(_, most) = &a.ltl else { panic!() };
        let clause = most.as_globally().unwrap();
        assert_eq!(*clause, Ltl::not(Ltl::and(Ltl::Ap(0), Ltl::Ap(1))));
    }

    #[test]
    fn approximate_true_single_cell() {
        let sig = crate::Signature { cells: vec!["x".into()], ..Default::default() };
        let p = parse_formula("true", Some(&sig)).unwrap();
        let a = approximate(&p, Mode::Finitary);
        assert_eq!(a.ltl, Ltl::and(Ltl::and(Ltl::True, Ltl::globally(Ltl::Ap(0))), Ltl::True));
    }

    #[test]
    fn approximate_general_uses_star() {
        let p = parse_formula("[x <- f(x)] && !p(x) && X p(x)", None).unwrap();
        let a = approximate(&p, Mode::General);
        let names: Vec<_> = (0..a.universe.len()).map(|i| a.universe.show(&p.arena, i)).collect();
        assert_eq!(names, vec!["p(x)", "[x <- f(x)]", "[x <- STAR]"]);
    }

    #[test]
    fn exactly_one_update_letters() {
        let p = parse_formula("G ([x <- f(x)] || [x <- g(y)]) && [y <- h(y)]", None).unwrap();
        let a = approximate(&p, Mode::Finitary);
        let Ltl::And(lm, most) = &a.ltl else { panic!() };
        let Ltl::And(_, least) = &**lm else { panic!() };
        let (least, most) = (least.as_globally().unwrap(), most.as_globally().unwrap());
        let n = a.universe.len();
        for bits in 0u32..(1 << n) {
            let l: Letter = (0..n).filter(|i| bits >> i & 1 == 1).collect();
            let legal = a
                .universe
                .cell_updates
                .iter()
                .all(|ids| ids.iter().filter(|&&i| l.get(i)).count() == 1);
            assert_eq!(least.eval_prop(&l) && most.eval_prop(&l), legal);
        }
    }

    #[test]
    fn finitarize_shape() {
        let p = parse_formula("G [x <- f(x)]", None).unwrap();
        let q = finitarize(&p).unwrap();
        assert_eq!(
            q.show(),
            "G [x <- f(x)] && (G [n <- new(n)] && G ([x <- f(x)] || [x <- pick_x(n)]))"
        );
        let Formula::And(orig, _) = &q.formula else { panic!() };
        assert_eq!(**orig, p.formula);
        assert_eq!(q.signature.cells, vec!["x", "n"]);
        assert!(matches!(finitarize(&q), Err(FinitarizeError::Reserved(_))));
    }

    #[test]
    fn finitarize_cell_without_updates() {
        let p = parse_formula("G [x <- f(x)] && p(y)", None).unwrap();
        let q = finitarize(&p).unwrap();
        assert!(q.show().ends_with("G (([x <- f(x)] || [x <- pick_x(n)]) && [y <- pick_y(n)]))"), "{}", q.show());
    }

    #[test]
    fn finitarize_avoids_existing_n() {
        let p = parse_formula("p(n)", None).unwrap();
        let q = finitarize(&p).unwrap();
        assert_eq!(q.signature.cells, vec!["n", "n0"]);
    }
}
