//! LTL to Büchi translation: tableau construction to a transition-based generalized
//! Büchi automaton, followed by counter degeneralization.

use std::collections::{BTreeSet, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};

use super::nba::{Nba, NbaEdge};
use super::prop::{Cube, Prop};
use super::AutomataError;
use crate::bits::Bits;
use crate::ltl::{ApId, Ltl};

type N = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(ApId, bool),
    And(N, N),
    Or(N, N),
    Next(N),
    Until(N, N),
    Release(N, N),
}

#[derive(Default)]
struct Store {
    nodes: Vec<Node>,
    index: FxHashMap<Node, N>,
    untils: Vec<N>,
}

const TRUE: N = 0;
const FALSE: N = 1;

impl Store {
    fn new() -> Store {
        let mut s = Store::default();
        s.mk(Node::True);
        s.mk(Node::False);
        s
    }

    fn mk(&mut self, n: Node) -> N {
        let n = match n {
            Node::And(a, b) if a == FALSE || b == FALSE => return FALSE,
            Node::And(a, b) if a == TRUE => return b,
            Node::And(a, b) if b == TRUE || a == b => return a,
            Node::Or(a, b) if a == TRUE || b == TRUE => return TRUE,
            Node::Or(a, b) if a == FALSE => return b,
            Node::Or(a, b) if b == FALSE || a == b => return a,
            Node::Until(_, b) if b == TRUE || b == FALSE => return b,
            Node::Release(_, b) if b == TRUE || b == FALSE => return b,
            Node::Next(a) if a == TRUE || a == FALSE => return a,
            // Sort commutative operands for sharing.
            Node::And(a, b) if a > b => Node::And(b, a),
            Node::Or(a, b) if a > b => Node::Or(b, a),
            n => n,
        };
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as N;
        if matches!(n, Node::Until(..)) {
            self.untils.push(id);
        }
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    /// Top-level conjuncts of `n`, without `true`.
    fn split(&self, n: N, out: &mut BTreeSet<N>) {
        match self.nodes[n as usize] {
            Node::True => {}
            Node::And(a, b) => {
                self.split(a, out);
                self.split(b, out);
            }
            _ => {
                out.insert(n);
            }
        }
    }

    fn from_ltl(&mut self, f: &Ltl, pos: bool) -> N {
        match f {
            Ltl::True => {
                if pos {
                    TRUE
                } else {
                    FALSE
                }
            }
            Ltl::Ap(a) => self.mk(Node::Lit(*a, pos)),
            Ltl::Not(a) => self.from_ltl(a, !pos),
            Ltl::And(a, b) => {
                let (x, y) = (self.from_ltl(a, pos), self.from_ltl(b, pos));
                self.mk(if pos { Node::And(x, y) } else { Node::Or(x, y) })
            }
            Ltl::Next(a) => {
                let x = self.from_ltl(a, pos);
                self.mk(Node::Next(x))
            }
            Ltl::Until(a, b) => {
                let (x, y) = (self.from_ltl(a, pos), self.from_ltl(b, pos));
                self.mk(if pos { Node::Until(x, y) } else { Node::Release(x, y) })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Cover {
    cube: Cube,
    next: Vec<N>,
    postponed: Vec<N>,
}

#[derive(Clone)]
struct Partial {
    todo: Vec<N>,
    done: FxHashSet<N>,
    cube: Cube,
    next: BTreeSet<N>,
    postponed: BTreeSet<N>,
}

/// Translation limits.
#[derive(Clone, Copy, Debug)]
pub struct TableauLimits {
    pub max_states: usize,
    pub max_covers: usize,
}

impl Default for TableauLimits {
    fn default() -> Self {
        TableauLimits { max_states: 200_000, max_covers: 2_000_000 }
    }
}

struct Tableau<'a> {
    store: Store,
    invariant: &'a Prop,
    sat_cache: FxHashMap<Cube, bool>,
    covers_made: usize,
    limits: TableauLimits,
}

impl Tableau<'_> {
    fn consistent(&mut self, cube: &Cube) -> bool {
        if let Some(&v) = self.sat_cache.get(cube) {
            return v;
        }
        let v = self.invariant.satisfiable_under(cube);
        self.sat_cache.insert(cube.clone(), v);
        v
    }

    fn expand(&mut self, mut p: Partial, out: &mut Vec<Cover>) -> Result<(), AutomataError> {
        while let Some(f) = p.todo.pop() {
            if !p.done.insert(f) {
                continue;
            }
            match self.store.nodes[f as usize].clone() {
                Node::True => {}
                Node::False => return Ok(()),
                Node::Lit(a, v) => {
                    if !p.cube.set(a, v) {
                        return Ok(());
                    }
                }
                Node::And(a, b) => {
                    p.todo.push(b);
                    p.todo.push(a);
                }
                Node::Next(a) => self.store.split(a, &mut p.next),
                Node::Or(a, b) => {
                    if p.done.contains(&a) || p.done.contains(&b) {
                        continue;
                    }
                    let mut left = p.clone();
                    left.todo.push(a);
                    self.expand(left, out)?;
                    p.todo.push(b);
                }
                Node::Until(a, b) => {
                    if p.done.contains(&b) {
                        continue;
                    }
                    let mut now = p.clone();
                    now.todo.push(b);
                    self.expand(now, out)?;
                    p.todo.push(a);
                    p.next.insert(f);
                    p.postponed.insert(f);
                }
                Node::Release(a, b) => {
                    let mut now = p.clone();
                    now.todo.push(b);
                    now.todo.push(a);
                    self.expand(now, out)?;
                    p.todo.push(b);
                    p.next.insert(f);
                }
            }
        }
        if !self.consistent(&p.cube) {
            return Ok(());
        }
        self.covers_made += 1;
        if self.covers_made > self.limits.max_covers {
            return Err(AutomataError::TableauCap(format!("more than {} covers", self.limits.max_covers)));
        }
        out.push(Cover {
            cube: p.cube.normalize(),
            next: p.next.into_iter().collect(),
            postponed: p.postponed.into_iter().collect(),
        });
        Ok(())
    }

    fn covers(&mut self, state: &[N]) -> Result<Vec<Cover>, AutomataError> {
        let mut out = Vec::new();
        let start = Partial {
            todo: state.iter().rev().copied().collect(),
            done: FxHashSet::default(),
            cube: Cube::top(),
            next: BTreeSet::new(),
            postponed: BTreeSet::new(),
        };
        self.expand(start, &mut out)?;
        Ok(reduce(out))
    }
}

fn sorted_subset(a: &[N], b: &[N]) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

/// Drops duplicate and subsumed covers and merges covers differing in one literal.
fn reduce(mut covers: Vec<Cover>) -> Vec<Cover> {
    covers.sort();
    covers.dedup();
    loop {
        let mut changed = false;
        // Merge pairs differing in exactly one literal polarity.
        'outer: for i in 0..covers.len() {
            for j in i + 1..covers.len() {
                let (a, b) = (&covers[i], &covers[j]);
                if a.next != b.next || a.postponed != b.postponed || a.cube.mask != b.cube.mask {
                    continue;
                }
                let diff = a.cube.vals.xor(&b.cube.vals);
                if diff.count() == 1 {
                    let v = diff.iter().next().unwrap();
                    let merged = Cover { cube: a.cube.without(v), ..a.clone() };
                    covers.swap_remove(j);
                    covers[i] = merged;
                    changed = true;
                    break 'outer;
                }
            }
        }
        // Subsumption.
        let n = covers.len();
        let mut keep = vec![true; n];
        for i in 0..n {
            if !keep[i] {
                continue;
            }
            for j in 0..n {
                if i == j || !keep[j] {
                    continue;
                }
                let (a, b) = (&covers[i], &covers[j]);
                if a.cube.subsumes(&b.cube)
                    && sorted_subset(&a.next, &b.next)
                    && sorted_subset(&a.postponed, &b.postponed)
                {
                    keep[j] = false;
                    changed = true;
                }
            }
        }
        let mut it = keep.iter();
        covers.retain(|_| *it.next().unwrap());
        if !changed {
            break;
        }
        covers.sort();
    }
    covers
}

/// Builds an NBA for `φ`. Top-level conjuncts of the form `G p` with `p` propositional
/// become a global edge invariant instead of tableau obligations.
pub fn ltl_to_nba_with(phi: &Ltl, num_aps: usize, limits: TableauLimits) -> Result<Nba, AutomataError> {
    let mut inv_parts = Vec::new();
    let mut rest = Vec::new();
    for c in phi.conjuncts() {
        match c.as_globally() {
            Some(p) if p.is_propositional() => inv_parts.push(Prop::from_ltl(p)),
            _ if *c == Ltl::True => {}
            _ => rest.push(c.clone()),
        }
    }
    let invariant = Prop::and(inv_parts);
    let mut t = Tableau {
        store: Store::new(),
        invariant: &invariant,
        sat_cache: FxHashMap::default(),
        covers_made: 0,
        limits,
    };
    let root = {
        let f = Ltl::conj(rest);
        t.store.from_ltl(&f, true)
    };

    // Generalized automaton over obligation sets.
    let init: Vec<N> = {
        let mut s = BTreeSet::new();
        t.store.split(root, &mut s);
        s.into_iter().collect()
    };
    let mut states: Vec<Vec<N>> = vec![init.clone()];
    let mut index: FxHashMap<Vec<N>, u32> = FxHashMap::default();
    index.insert(init, 0);
    let mut gedges: Vec<(u32, u32, Cube, Vec<N>)> = Vec::new();
    let mut queue = VecDeque::from([0u32]);
    while let Some(s) = queue.pop_front() {
        let covers = t.covers(&states[s as usize].clone())?;
        for c in covers {
            let id = match index.get(&c.next) {
                Some(&id) => id,
                None => {
                    let id = states.len() as u32;
                    if states.len() >= limits.max_states {
                        return Err(AutomataError::TableauCap(format!("more than {} states", limits.max_states)));
                    }
                    states.push(c.next.clone());
                    index.insert(c.next.clone(), id);
                    queue.push_back(id);
                    id
                }
            };
            gedges.push((s, id, c.cube, c.postponed));
        }
    }

    // Acceptance sets: one per until that is ever postponed.
    let mut acc_untils: Vec<N> = gedges.iter().flat_map(|e| e.3.iter().copied()).collect();
    acc_untils.sort();
    acc_untils.dedup();
    let k = acc_untils.len();
    let marks = |post: &[N]| -> Bits {
        (0..k).filter(|&i| post.binary_search(&acc_untils[i]).is_err()).collect()
    };

    // Counter degeneralization: level k is accepting.
    let levels = k + 1;
    let ns = states.len();
    let id = |s: u32, lvl: usize| s as usize * levels + lvl;
    let mut edges = Vec::new();
    for (s, d, cube, post) in &gedges {
        let m = marks(post);
        for lvl in 0..levels {
            let mut j = if lvl == k { 0 } else { lvl };
            while j < k && m.get(j) {
                j += 1;
            }
            edges.push(NbaEdge { src: id(*s, lvl) as u32, dst: id(*d, j) as u32, label: cube.clone() });
        }
    }
    let accepting: Vec<bool> = (0..ns * levels).map(|v| v % levels == k).collect();
    let nba = Nba::new(ns * levels, vec![id(0, 0) as u32], accepting, edges, invariant, num_aps);
    Ok(nba.trimmed().bisimulation_quotient().trimmed())
}

pub fn ltl_to_nba(phi: &Ltl, num_aps: usize) -> Result<Nba, AutomataError> {
    ltl_to_nba_with(phi, num_aps, TableauLimits::default())
}
