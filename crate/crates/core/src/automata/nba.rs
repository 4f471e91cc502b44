//! Büchi automata with cube labels and a global propositional invariant.

use std::fmt::Write as _;
use std::ops::Range;

use super::emptiness::{buchi_nonempty_from, live_vertices, BuchiGraph};
use super::prop::{Cube, Prop};
use crate::ltl::{ApUniverse, Letter};
use crate::term::TermArena;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct NbaEdge {
    pub src: u32,
    pub dst: u32,
    pub label: Cube,
}

/// A letter `l` can take edge `e` iff `e.label` matches `l` and `invariant(l)` holds.
#[derive(Clone, Debug)]
pub struct Nba {
    pub num_states: usize,
    pub initial: Vec<u32>,
    pub accepting: Vec<bool>,
    /// Sorted by source state.
    pub edges: Vec<NbaEdge>,
    pub invariant: Prop,
    pub num_aps: usize,
    out: Vec<Range<usize>>,
}

impl Nba {
    pub fn new(
        num_states: usize,
        initial: Vec<u32>,
        accepting: Vec<bool>,
        mut edges: Vec<NbaEdge>,
        invariant: Prop,
        num_aps: usize,
    ) -> Nba {
        edges.sort();
        edges.dedup();
        let mut out = vec![0..0; num_states];
        let mut i = 0;
        for (s, r) in out.iter_mut().enumerate() {
            let start = i;
            while i < edges.len() && edges[i].src as usize == s {
                i += 1;
            }
            *r = start..i;
        }
        Nba { num_states, initial, accepting, edges, invariant, num_aps, out }
    }

    pub fn out_edges(&self, s: u32) -> &[NbaEdge] {
        &self.edges[self.out[s as usize].clone()]
    }

    pub fn edge_enabled(&self, e: &NbaEdge, letter: &Letter) -> bool {
        e.label.matches(letter) && self.invariant.eval(letter)
    }

    /// Keeps only states reachable from an initial state that can reach an accepting cycle,
    /// and edges whose label is consistent with the invariant. State ids are renumbered in
    /// order of first discovery.
    pub fn trimmed(&self) -> Nba {
        let usable: Vec<bool> = self
            .edges
            .iter()
            .map(|e| self.invariant.satisfiable_under(&e.label))
            .collect();
        let succ = |v: usize, out: &mut Vec<usize>| {
            for (k, e) in self.edges[self.out[v].clone()].iter().enumerate() {
                if usable[self.out[v].start + k] {
                    out.push(e.dst as usize);
                }
            }
        };
        let live = live_vertices(self.num_states, succ, |v| self.accepting[v]);
        let mut map = vec![u32::MAX; self.num_states];
        let mut order = Vec::new();
        let mut queue: std::collections::VecDeque<usize> = Default::default();
        for &i in &self.initial {
            if live[i as usize] && map[i as usize] == u32::MAX {
                map[i as usize] = order.len() as u32;
                order.push(i as usize);
                queue.push_back(i as usize);
            }
        }
        let mut buf = Vec::new();
        while let Some(v) = queue.pop_front() {
            buf.clear();
            succ(v, &mut buf);
            for &w in &buf {
                if live[w] && map[w] == u32::MAX {
                    map[w] = order.len() as u32;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        let edges = self
            .edges
            .iter()
            .zip(&usable)
            .filter(|(e, &u)| u && map[e.src as usize] != u32::MAX && map[e.dst as usize] != u32::MAX)
            .map(|(e, _)| NbaEdge { src: map[e.src as usize], dst: map[e.dst as usize], label: e.label.clone() })
            .collect();
        let initial = self
            .initial
            .iter()
            .filter(|&&i| map[i as usize] != u32::MAX)
            .map(|&i| map[i as usize])
            .collect();
        let accepting = order.iter().map(|&v| self.accepting[v]).collect();
        Nba::new(order.len(), initial, accepting, edges, self.invariant.clone(), self.num_aps)
    }

    /// Quotient by the coarsest bisimulation that respects acceptance, edge labels and
    /// the invariant. Blocks are numbered by their smallest member.
    pub fn bisimulation_quotient(&self) -> Nba {
        let n = self.num_states;
        let mut block: Vec<u32> = self.accepting.iter().map(|&a| a as u32).collect();
        loop {
            let mut sigs: Vec<(u32, Vec<(&Cube, u32)>)> = (0..n)
                .map(|q| {
                    let mut out: Vec<(&Cube, u32)> =
                        self.out_edges(q as u32).iter().map(|e| (&e.label, block[e.dst as usize])).collect();
                    out.sort();
                    out.dedup();
                    (block[q], out)
                })
                .collect();
            let mut ids: std::collections::HashMap<&(u32, Vec<(&Cube, u32)>), u32> = Default::default();
            let mut next = vec![0u32; n];
            for q in 0..n {
                let k = ids.len() as u32;
                next[q] = *ids.entry(&sigs[q]).or_insert(k);
            }
            let count = ids.len();
            drop(ids);
            sigs.clear();
            let before = {
                let mut b = block.clone();
                b.sort_unstable();
                b.dedup();
                b.len()
            };
            block = next;
            if count == before {
                break;
            }
        }
        let nb = block.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
        let mut accepting = vec![false; nb];
        for q in 0..n {
            accepting[block[q] as usize] = self.accepting[q];
        }
        let edges = self
            .edges
            .iter()
            .map(|e| NbaEdge { src: block[e.src as usize], dst: block[e.dst as usize], label: e.label.clone() })
            .collect();
        let mut initial: Vec<u32> = self.initial.iter().map(|&i| block[i as usize]).collect();
        initial.sort_unstable();
        initial.dedup();
        Nba::new(nb, initial, accepting, edges, self.invariant.clone(), self.num_aps)
    }

    /// No accepting lasso is reachable from any initial state.
    pub fn is_structurally_empty(&self) -> bool {
        let g = NbaGraph(self);
        !self.initial.iter().any(|&i| buchi_nonempty_from(&g, i as usize))
    }

    /// Acceptance of `stem · lp^ω`.
    pub fn accepts_lasso(&self, stem: &[Letter], lp: &[Letter]) -> bool {
        assert!(!lp.is_empty());
        let word: Vec<&Letter> = stem.iter().chain(lp.iter()).collect();
        let g = LassoProduct { nba: self, word, start: stem.len() };
        let len = g.word.len();
        self.initial.iter().any(|&i| buchi_nonempty_from(&g, i as usize * len))
    }

    /// HOA v1 text with state-based acceptance. AP names use the printer's encoding.
    /// The invariant is folded into every edge label.
    pub fn to_hoa(&self, universe: &ApUniverse, arena: &TermArena) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "HOA: v1");
        let _ = writeln!(s, "States: {}", self.num_states);
        for i in &self.initial {
            let _ = writeln!(s, "Start: {i}");
        }
        let _ = write!(s, "AP: {}", universe.len());
        for i in 0..universe.len() {
            let _ = write!(s, " \"{}\"", universe.show(arena, i).replace('"', "\\\""));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "acc-name: Buchi");
        let _ = writeln!(s, "Acceptance: 1 Inf(0)");
        let _ = writeln!(s, "--BODY--");
        let inv = prop_to_hoa(&self.invariant);
        for q in 0..self.num_states {
            let acc = if self.accepting[q] { " {0}" } else { "" };
            let _ = writeln!(s, "State: {q}{acc}");
            for e in self.out_edges(q as u32) {
                let lits: Vec<String> = e
                    .label
                    .literals()
                    .map(|(a, v)| if v { a.to_string() } else { format!("!{a}") })
                    .collect();
                let cube = if lits.is_empty() { "t".to_string() } else { lits.join(" & ") };
                let label = if inv == "t" { cube } else { format!("({cube}) & ({inv})") };
                let _ = writeln!(s, "  [{label}] {}", e.dst);
            }
        }
        let _ = writeln!(s, "--END--");
        s
    }
}

fn prop_to_hoa(p: &Prop) -> String {
    match p {
        Prop::True => "t".into(),
        Prop::False => "f".into(),
        Prop::Lit(a, true) => a.to_string(),
        Prop::Lit(a, false) => format!("!{a}"),
        Prop::And(xs) => xs.iter().map(|x| format!("({})", prop_to_hoa(x))).collect::<Vec<_>>().join(" & "),
        Prop::Or(xs) => xs.iter().map(|x| format!("({})", prop_to_hoa(x))).collect::<Vec<_>>().join(" | "),
    }
}

struct NbaGraph<'a>(&'a Nba);

impl BuchiGraph for NbaGraph<'_> {
    fn successors(&self, v: usize, out: &mut Vec<usize>) {
        out.extend(self.0.out_edges(v as u32).iter().map(|e| e.dst as usize));
    }
    fn is_accepting(&self, v: usize) -> bool {
        self.0.accepting[v]
    }
}

struct LassoProduct<'a> {
    nba: &'a Nba,
    word: Vec<&'a Letter>,
    start: usize,
}

impl BuchiGraph for LassoProduct<'_> {
    fn successors(&self, v: usize, out: &mut Vec<usize>) {
        let len = self.word.len();
        let (q, pos) = (v / len, v % len);
        let next = if pos + 1 < len { pos + 1 } else { self.start };
        for e in self.nba.out_edges(q as u32) {
            if self.nba.edge_enabled(e, self.word[pos]) {
                out.push(e.dst as usize * len + next);
            }
        }
    }
    fn is_accepting(&self, v: usize) -> bool {
        self.nba.accepting[v / self.word.len()]
    }
}
