//! Hash-consed terms, signatures and symbolic evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::RwLock;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

/// Interned symbol name.
pub type Sym = u32;

/// Function term (cell reference, application or Star).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

/// Predicate term. Lives in the same arena as function terms.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub u32);

pub type Args = SmallVec<[TermId; 2]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Cell(Sym),
    Apply(Sym, Args),
    Pred(Sym, Args),
    Star,
}

#[derive(Default)]
struct Inner {
    nodes: Vec<Node>,
    index: FxHashMap<Node, u32>,
    names: Vec<String>,
    name_index: FxHashMap<String, Sym>,
}

/// Append-only term store. Structurally equal terms share one id.
///
/// Reads and appends may come from several threads; appends are serialized.
#[derive(Default)]
pub struct TermArena {
    inner: RwLock<Inner>,
}

impl std::fmt::Debug for TermArena {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TermArena({} nodes)", self.len())
    }
}

impl TermArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intern(&self, name: &str) -> Sym {
        if let Some(&s) = self.inner.read().unwrap().name_index.get(name) {
            return s;
        }
        let mut g = self.inner.write().unwrap();
        if let Some(&s) = g.name_index.get(name) {
            return s;
        }
        let s = g.names.len() as Sym;
        g.names.push(name.to_string());
        g.name_index.insert(name.to_string(), s);
        s
    }

    pub fn lookup_sym(&self, name: &str) -> Option<Sym> {
        self.inner.read().unwrap().name_index.get(name).copied()
    }

    pub fn name(&self, s: Sym) -> String {
        self.inner.read().unwrap().names[s as usize].clone()
    }

    fn mk(&self, node: Node) -> u32 {
        if let Some(&id) = self.inner.read().unwrap().index.get(&node) {
            return id;
        }
        let mut g = self.inner.write().unwrap();
        if let Some(&id) = g.index.get(&node) {
            return id;
        }
        let id = g.nodes.len() as u32;
        g.nodes.push(node.clone());
        g.index.insert(node, id);
        id
    }

    pub fn node(&self, id: u32) -> Node {
        self.inner.read().unwrap().nodes[id as usize].clone()
    }

    pub fn term_node(&self, t: TermId) -> Node {
        self.node(t.0)
    }

    pub fn pred_node(&self, p: PredId) -> Node {
        self.node(p.0)
    }

    pub fn cell_sym(&self, s: Sym) -> TermId {
        TermId(self.mk(Node::Cell(s)))
    }

    pub fn cell(&self, name: &str) -> TermId {
        self.cell_sym(self.intern(name))
    }

    pub fn apply_sym(&self, f: Sym, args: Args) -> TermId {
        TermId(self.mk(Node::Apply(f, args)))
    }

    pub fn apply(&self, f: &str, args: &[TermId]) -> TermId {
        self.apply_sym(self.intern(f), args.iter().copied().collect())
    }

    pub fn pred_sym(&self, p: Sym, args: Args) -> PredId {
        PredId(self.mk(Node::Pred(p, args)))
    }

    pub fn pred(&self, p: &str, args: &[TermId]) -> PredId {
        self.pred_sym(self.intern(p), args.iter().copied().collect())
    }

    pub fn star(&self) -> TermId {
        TermId(self.mk(Node::Star))
    }

    pub fn is_star(&self, t: TermId) -> bool {
        matches!(self.term_node(t), Node::Star)
    }

    /// Cell symbol if `t` is a bare cell reference.
    pub fn as_cell(&self, t: TermId) -> Option<Sym> {
        match self.term_node(t) {
            Node::Cell(c) => Some(c),
            _ => None,
        }
    }

    /// Arguments of a predicate term.
    pub fn pred_args(&self, p: PredId) -> (Sym, Args) {
        match self.pred_node(p) {
            Node::Pred(s, a) => (s, a),
            n => panic!("not a predicate term: {n:?}"),
        }
    }

    /// Replace every cell by `f(cell)`; memoized over the term DAG.
    pub fn subst(&self, t: TermId, f: &impl Fn(Sym) -> TermId) -> TermId {
        let mut memo = FxHashMap::default();
        self.subst_memo(t, f, &mut memo)
    }

    fn subst_memo(
        &self,
        t: TermId,
        f: &impl Fn(Sym) -> TermId,
        memo: &mut FxHashMap<TermId, TermId>,
    ) -> TermId {
        if let Some(&r) = memo.get(&t) {
            return r;
        }
        let r = match self.term_node(t) {
            Node::Cell(c) => f(c),
            Node::Apply(g, args) => {
                let args = args.iter().map(|&a| self.subst_memo(a, f, memo)).collect();
                self.apply_sym(g, args)
            }
            Node::Star => t,
            Node::Pred(..) => panic!("predicate term in function position"),
        };
        memo.insert(t, r);
        r
    }

    pub fn subst_pred(&self, p: PredId, f: &impl Fn(Sym) -> TermId) -> PredId {
        let (s, args) = self.pred_args(p);
        let mut memo = FxHashMap::default();
        let args = args.iter().map(|&a| self.subst_memo(a, f, &mut memo)).collect();
        self.pred_sym(s, args)
    }

    /// All cells occurring in `t`, in first-occurrence order.
    pub fn cells_of(&self, t: TermId, out: &mut Vec<Sym>) {
        match self.term_node(t) {
            Node::Cell(c) => {
                if !out.contains(&c) {
                    out.push(c)
                }
            }
            Node::Apply(_, args) | Node::Pred(_, args) => {
                for a in args {
                    self.cells_of(a, out)
                }
            }
            Node::Star => {}
        }
    }

    pub fn show(&self, t: TermId) -> String {
        let mut s = String::new();
        self.write_node(t.0, &mut s);
        s
    }

    pub fn show_pred(&self, p: PredId) -> String {
        let mut s = String::new();
        self.write_node(p.0, &mut s);
        s
    }

    fn write_node(&self, id: u32, out: &mut String) {
        match self.node(id) {
            Node::Cell(c) => out.push_str(&self.name(c)),
            Node::Star => out.push_str("STAR"),
            Node::Apply(f, args) | Node::Pred(f, args) => {
                out.push_str(&self.name(f));
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.write_node(a.0, out);
                }
                out.push(')');
            }
        }
    }

    /// Size of a term counted as tree nodes (shared subterms counted repeatedly).
    pub fn depth(&self, t: TermId) -> usize {
        match self.term_node(t) {
            Node::Apply(_, args) => 1 + args.iter().map(|&a| self.depth(a)).max().unwrap_or(0),
            _ => 1,
        }
    }
}

/// Function, predicate and cell declarations. Names are pairwise disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub functions: BTreeMap<String, usize>,
    pub predicates: BTreeMap<String, usize>,
    /// Ordered by first occurrence.
    pub cells: Vec<String>,
}

impl Signature {
    pub fn has_cell(&self, name: &str) -> bool {
        self.cells.iter().any(|c| c == name)
    }

    pub fn uses_name(&self, name: &str) -> bool {
        self.has_cell(name) || self.functions.contains_key(name) || self.predicates.contains_key(name)
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "cells: {}", self.cells.join(", "));
        for (f, a) in &self.functions {
            let _ = write!(s, "; {f}/{a}");
        }
        for (p, a) in &self.predicates {
            let _ = write!(s, "; {p}/{a}?");
        }
        s
    }
}

/// Total map from cells to terms for one time step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(pub BTreeMap<Sym, TermId>);

impl Assignment {
    pub fn get(&self, c: Sym) -> Option<TermId> {
        self.0.get(&c).copied()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EtaError {
    #[error("time index {t} out of range for prefix of length {len}")]
    OutOfRange { t: usize, len: usize },
    #[error("assignment at step {step} has no entry for cell `{cell}`")]
    Partial { step: usize, cell: String },
    #[error("STAR cannot be evaluated")]
    Star,
}

/// Symbolic evaluation `η(ς, t, τ)`, following the recursive definition directly.
pub fn eta(arena: &TermArena, prefix: &[Assignment], t: usize, term: TermId) -> Result<TermId, EtaError> {
    if t > prefix.len() {
        return Err(EtaError::OutOfRange { t, len: prefix.len() });
    }
    let mut memo = FxHashMap::default();
    eta_rec(arena, prefix, t, term, &mut memo)
}

fn eta_rec(
    arena: &TermArena,
    prefix: &[Assignment],
    t: usize,
    term: TermId,
    memo: &mut FxHashMap<(usize, TermId), TermId>,
) -> Result<TermId, EtaError> {
    if let Some(&r) = memo.get(&(t, term)) {
        return Ok(r);
    }
    let r = match arena.term_node(term) {
        Node::Cell(_) if t == 0 => term,
        Node::Cell(c) => {
            let next = prefix[t - 1].get(c).ok_or_else(|| EtaError::Partial {
                step: t - 1,
                cell: arena.name(c),
            })?;
            eta_rec(arena, prefix, t - 1, next, memo)?
        }
        Node::Apply(f, args) => {
            let mut out = Args::new();
            for a in args {
                out.push(eta_rec(arena, prefix, t, a, memo)?);
            }
            arena.apply_sym(f, out)
        }
        Node::Star => return Err(EtaError::Star),
        Node::Pred(..) => panic!("predicate term in function position"),
    };
    memo.insert((t, term), r);
    Ok(r)
}

/// `η` lifted under a predicate head.
pub fn eta_pred(arena: &TermArena, prefix: &[Assignment], t: usize, p: PredId) -> Result<PredId, EtaError> {
    let (s, args) = arena.pred_args(p);
    let mut out = Args::new();
    for a in args {
        out.push(eta(arena, prefix, t, a)?);
    }
    Ok(arena.pred_sym(s, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_shares_ids() {
        let a = TermArena::new();
        let x = a.cell("x");
        let fx1 = a.apply("f", &[x]);
        let fx2 = a.apply("f", &[a.cell("x")]);
        assert_eq!(fx1, fx2);
        assert_ne!(fx1, a.apply("g", &[x]));
        assert_eq!(a.show(a.apply("h", &[x, fx1])), "h(x, f(x))");
    }

    #[test]
    fn eta_examples() {
        let a = TermArena::new();
        let x = a.cell("x");
        let xs = a.intern("x");
        let fx = a.apply("f", &[x]);
        let step = Assignment([(xs, fx)].into_iter().collect());
        assert_eq!(eta(&a, &[], 0, x), Ok(x));
        let px = a.pred("p", &[x]);
        assert_eq!(eta_pred(&a, &[step.clone()], 1, px), Ok(a.pred("p", &[fx])));
        let ffx = a.apply("f", &[fx]);
        assert_eq!(eta(&a, &[step.clone(), step.clone()], 2, x), Ok(ffx));
        let id = Assignment([(xs, x)].into_iter().collect());
        assert_eq!(eta_pred(&a, &[id], 1, px), Ok(px));
        assert!(matches!(eta(&a, &[], 1, x), Err(EtaError::OutOfRange { .. })));
    }

    #[test]
    fn eta_two_cells_swap() {
        let a = TermArena::new();
        let (x, y) = (a.cell("x"), a.cell("y"));
        let (xs, ys) = (a.intern("x"), a.intern("y"));
        let swap = Assignment([(xs, y), (ys, a.apply("g", &[x, y]))].into_iter().collect());
        let p = vec![swap.clone(), swap];
        // x1 = y, y1 = g(x,y); x2 = g(x,y), y2 = g(y, g(x,y))
        assert_eq!(a.show(eta(&a, &p, 2, x).unwrap()), "g(x, y)");
        assert_eq!(a.show(eta(&a, &p, 2, y).unwrap()), "g(y, g(x, y))");
    }
}
