//! Conjunctive equality queries over uninterpreted functions, decided by congruence closure.

use rustc_hash::FxHashMap;
use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

use crate::term::{Node, PredId, Sym, TermArena, TermId};

pub mod oracle;
pub mod smtlib;

pub use oracle::naive_closure_oracle;
pub use smtlib::{export_smtlib, ExternalSolver, SolverAnswer};

/// Signed predicate terms plus equalities between function terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EufQuery {
    pub signed_predicates: Vec<(PredId, bool)>,
    pub equalities: Vec<(TermId, TermId)>,
}

impl EufQuery {
    /// Sorted, deduplicated form; equalities oriented small-id first, trivial ones dropped.
    pub fn normalized(mut self) -> EufQuery {
        self.signed_predicates.sort();
        self.signed_predicates.dedup();
        self.equalities = self
            .equalities
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        self.equalities.sort();
        self.equalities.dedup();
        self
    }

    pub fn show(&self, arena: &TermArena) -> Vec<String> {
        let mut out: Vec<String> = self
            .signed_predicates
            .iter()
            .map(|&(p, v)| format!("{}={}", arena.show_pred(p), if v { "T" } else { "F" }))
            .collect();
        out.extend(self.equalities.iter().map(|&(a, b)| format!("{}={}", arena.show(a), arena.show(b))));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EufResult {
    Sat,
    Unsat,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EufError {
    #[error("query exceeds the term budget of {0}")]
    TermBudget(usize),
}

#[derive(Clone, Debug)]
enum Undo {
    NodeAdded(u32),
    Parent(u32, u32),
    Rank(u32, u32),
    UsesPush(u32),
    UsesTruncate(u32, usize),
    SigInsert(SigKey),
}

type SigKey = (Sym, SmallVec<[u32; 4]>);

/// Congruence closure with union-by-rank, path compression and an undo trail.
pub struct CongruenceStore<'a> {
    arena: &'a TermArena,
    /// Arena id (or `u32::MAX - k` for the sentinels) per node.
    origin: Vec<u32>,
    app: Vec<Option<(Sym, SmallVec<[u32; 2]>)>>,
    parent: Vec<u32>,
    rank: Vec<u32>,
    uses: Vec<Vec<u32>>,
    index: FxHashMap<u32, u32>,
    sig: FxHashMap<SigKey, u32>,
    pending: Vec<(u32, u32)>,
    trail: Vec<Undo>,
    marks: Vec<usize>,
    budget: usize,
    top: u32,
    bot: u32,
}

const TOP_ORIGIN: u32 = u32::MAX;
const BOT_ORIGIN: u32 = u32::MAX - 1;

impl<'a> CongruenceStore<'a> {
    pub fn new(arena: &'a TermArena) -> Self {
        Self::with_budget(arena, usize::MAX)
    }

    pub fn with_budget(arena: &'a TermArena, budget: usize) -> Self {
        let mut s = CongruenceStore {
            arena,
            origin: Vec::new(),
            app: Vec::new(),
            parent: Vec::new(),
            rank: Vec::new(),
            uses: Vec::new(),
            index: FxHashMap::default(),
            sig: FxHashMap::default(),
            pending: Vec::new(),
            trail: Vec::new(),
            marks: Vec::new(),
            budget,
            top: 0,
            bot: 1,
        };
        s.top = s.fresh(TOP_ORIGIN, None);
        s.bot = s.fresh(BOT_ORIGIN, None);
        s
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    fn fresh(&mut self, origin: u32, app: Option<(Sym, SmallVec<[u32; 2]>)>) -> u32 {
        let n = self.parent.len() as u32;
        self.origin.push(origin);
        self.app.push(app);
        self.parent.push(n);
        self.rank.push(0);
        self.uses.push(Vec::new());
        if origin < BOT_ORIGIN {
            self.index.insert(origin, n);
        }
        if !self.marks.is_empty() {
            self.trail.push(Undo::NodeAdded(origin));
        }
        n
    }

    fn record(&mut self, u: Undo) {
        if !self.marks.is_empty() {
            self.trail.push(u);
        }
    }

    pub fn find(&mut self, mut n: u32) -> u32 {
        let mut root = n;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[n as usize] != root {
            let next = self.parent[n as usize];
            self.record(Undo::Parent(n, next));
            self.parent[n as usize] = root;
            n = next;
        }
        root
    }

    fn signature(&mut self, n: u32) -> SigKey {
        let (f, args) = self.app[n as usize].clone().expect("application node");
        (f, args.iter().map(|&a| self.find(a)).collect())
    }

    fn add(&mut self, id: u32) -> Result<u32, EufError> {
        if let Some(&n) = self.index.get(&id) {
            return Ok(n);
        }
        let (f, args) = match self.arena.node(id) {
            Node::Apply(f, args) | Node::Pred(f, args) => (f, args),
            Node::Cell(c) => (c, SmallVec::new()),
            Node::Star => panic!("STAR in query"),
        };
        let mut kids = SmallVec::<[u32; 2]>::new();
        for a in args {
            kids.push(self.add(a.0)?);
        }
        if self.parent.len() >= self.budget {
            return Err(EufError::TermBudget(self.budget));
        }
        let n = self.fresh(id, Some((f, kids.clone())));
        let mut seen = SmallVec::<[u32; 4]>::new();
        for &k in &kids {
            let r = self.find(k);
            if !seen.contains(&r) {
                seen.push(r);
                self.uses[r as usize].push(n);
                self.record(Undo::UsesPush(r));
            }
        }
        let key = self.signature(n);
        match self.sig.get(&key) {
            Some(&m) => self.pending.push((n, m)),
            None => {
                self.sig.insert(key.clone(), n);
                self.record(Undo::SigInsert(key));
            }
        }
        self.close();
        Ok(n)
    }

    fn close(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (mut ra, mut rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            if self.rank[ra as usize] < self.rank[rb as usize] {
                std::mem::swap(&mut ra, &mut rb);
            }
            self.record(Undo::Parent(rb, rb));
            self.parent[rb as usize] = ra;
            if self.rank[ra as usize] == self.rank[rb as usize] {
                self.record(Undo::Rank(ra, self.rank[ra as usize]));
                self.rank[ra as usize] += 1;
            }
            let moved = self.uses[rb as usize].clone();
            for &u in &moved {
                let key = self.signature(u);
                match self.sig.get(&key) {
                    Some(&v) => {
                        if self.find(v) != self.find(u) {
                            self.pending.push((u, v));
                        }
                    }
                    None => {
                        self.sig.insert(key.clone(), u);
                        self.record(Undo::SigInsert(key));
                    }
                }
            }
            let len = self.uses[ra as usize].len();
            self.record(Undo::UsesTruncate(ra, len));
            self.uses[ra as usize].extend(moved);
        }
    }

    pub fn add_term(&mut self, t: TermId) -> Result<u32, EufError> {
        self.add(t.0)
    }

    pub fn add_pred(&mut self, p: PredId) -> Result<u32, EufError> {
        self.add(p.0)
    }

    pub fn assert_literal(&mut self, p: PredId, v: bool) -> Result<(), EufError> {
        let n = self.add(p.0)?;
        let s = if v { self.top } else { self.bot };
        self.pending.push((n, s));
        self.close();
        Ok(())
    }

    pub fn assert_eq(&mut self, a: TermId, b: TermId) -> Result<(), EufError> {
        let (x, y) = (self.add(a.0)?, self.add(b.0)?);
        self.pending.push((x, y));
        self.close();
        Ok(())
    }

    pub fn assert_query(&mut self, q: &EufQuery) -> Result<(), EufError> {
        for &(p, v) in &q.signed_predicates {
            self.assert_literal(p, v)?;
        }
        for &(a, b) in &q.equalities {
            self.assert_eq(a, b)?;
        }
        Ok(())
    }

    pub fn is_consistent(&mut self) -> bool {
        self.find(self.top) != self.find(self.bot)
    }

    pub fn push(&mut self) {
        self.marks.push(self.trail.len());
    }

    pub fn pop(&mut self) {
        let mark = self.marks.pop().expect("pop without push");
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::NodeAdded(origin) => {
                    self.origin.pop();
                    self.app.pop();
                    self.parent.pop();
                    self.rank.pop();
                    self.uses.pop();
                    self.index.remove(&origin);
                }
                Undo::Parent(n, old) => self.parent[n as usize] = old,
                Undo::Rank(n, old) => self.rank[n as usize] = old,
                Undo::UsesPush(n) => {
                    self.uses[n as usize].pop();
                }
                Undo::UsesTruncate(n, len) => self.uses[n as usize].truncate(len),
                Undo::SigInsert(key) => {
                    self.sig.remove(&key);
                }
            }
        }
    }

    /// Truth value of a predicate term in the canonical model (absent from TOP means false).
    pub fn pred_value(&mut self, p: PredId) -> Result<bool, EufError> {
        let n = self.add(p.0)?;
        Ok(self.find(n) == self.find(self.top))
    }

    pub fn same_class(&mut self, a: TermId, b: TermId) -> Result<bool, EufError> {
        let (x, y) = (self.add(a.0)?, self.add(b.0)?);
        Ok(self.find(x) == self.find(y))
    }

    /// Equivalence classes of function terms with more than one member.
    pub fn classes(&mut self) -> Vec<Vec<TermId>> {
        let mut by_root: std::collections::BTreeMap<u32, Vec<TermId>> = Default::default();
        for n in 0..self.parent.len() as u32 {
            let o = self.origin[n as usize];
            if o >= BOT_ORIGIN || !matches!(self.arena.node(o), Node::Apply(..) | Node::Cell(_)) {
                continue;
            }
            let r = self.find(n);
            by_root.entry(r).or_default().push(TermId(o));
        }
        by_root.into_values().filter(|c| c.len() > 1).collect()
    }

    /// Predicate terms in the store with their polarity.
    pub fn predicate_values(&mut self) -> Vec<(PredId, bool)> {
        let (t, b) = (self.find(self.top), self.find(self.bot));
        let mut out = Vec::new();
        for n in 0..self.parent.len() as u32 {
            let o = self.origin[n as usize];
            if o >= BOT_ORIGIN || !matches!(self.arena.node(o), Node::Pred(..)) {
                continue;
            }
            let r = self.find(n);
            if r == t {
                out.push((PredId(o), true));
            } else if r == b {
                out.push((PredId(o), false));
            }
        }
        out
    }
}

/// Decides a query from scratch.
pub fn check_query(arena: &TermArena, q: &EufQuery) -> EufResult {
    let mut s = CongruenceStore::new(arena);
    s.assert_query(q).expect("unbounded store");
    if s.is_consistent() {
        EufResult::Sat
    } else {
        EufResult::Unsat
    }
}
