//! The lasso search: BFS over consistent run prefixes from the initial states, pruned by
//! liveness in the exclusion product, with one congruence query per accepting loop.

use std::collections::VecDeque;
use std::path::Path;

use super::exclusion::{ExclusionSet, Residuals, DEAD, EMPTY};
use super::knowledge::Knowledge;
use super::tree::{BlockTree, Step, NONE};
use super::viability::Viability;
use super::witness::{build_witness, Witness};
use super::{CheckerConfig, UnknownReason, UnsatReason};
use crate::automata::Bsa;
use crate::euf::{check_query, export_smtlib, CongruenceStore, EufError, EufQuery, EufResult, SolverAnswer};
use crate::term::TermArena;

pub enum SearchStep {
    Continue,
    Sat(Box<Witness>),
    Unsat(UnsatReason),
    Unknown(UnknownReason),
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub blocks: u64,
    pub expanded: u64,
    pub pruned: u64,
    pub queries: u64,
    pub rechecks: u64,
    pub epochs: u64,
    pub max_depth: u32,
}

pub struct Search<'a> {
    arena: &'a TermArena,
    bsa: &'a Bsa,
    cfg: &'a CheckerConfig,
    pub tree: BlockTree,
    queue: VecDeque<u32>,
    /// (residual id, epoch it was computed in)
    residual: Vec<(u32, u32)>,
    res: Residuals,
    knowledge: Option<&'a Knowledge>,
    /// Knowledge node per block, when the abstraction is available.
    node: Vec<u32>,
    pub viability: Viability,
    version_at_epoch: u64,
    xsteps_at_epoch: u64,
    pub stats: SearchStats,
}

impl<'a> Search<'a> {
    pub fn new(arena: &'a TermArena, bsa: &'a Bsa, cfg: &'a CheckerConfig, knowledge: Option<&'a Knowledge>) -> Search<'a> {
        let mut tree = BlockTree::new(bsa.cells.len());
        let mut queue = VecDeque::new();
        let mut residual = Vec::new();
        let mut initial = bsa.initial.clone();
        initial.sort_unstable();
        initial.dedup();
        let mut node = Vec::new();
        for (i, q) in initial.into_iter().enumerate() {
            let b = tree.root(q, &bsa.cell_terms);
            residual.push((EMPTY, 0));
            // Knowledge roots are the same sorted initial states.
            if let Some(k) = knowledge {
                node.push(k.initial[i]);
                if !k.is_live(k.initial[i]) {
                    continue;
                }
            }
            queue.push_back(b);
        }
        let stats = SearchStats { blocks: tree.len() as u64, ..Default::default() };
        Search {
            arena,
            bsa,
            cfg,
            tree,
            queue,
            residual,
            res: Residuals::default(),
            knowledge,
            node,
            viability: Viability::default(),
            version_at_epoch: 0,
            xsteps_at_epoch: 0,
            stats,
        }
    }

    pub fn residual_sets(&self) -> usize {
        self.res.len()
    }

    /// Starts a new liveness epoch once the exclusion set has grown and enough exclusion
    /// work happened since the last one. Returns true if no initial state is live.
    fn maybe_new_epoch(&mut self, x: &ExclusionSet) -> bool {
        if x.version == self.version_at_epoch {
            return false;
        }
        let xwork = x.steps - self.xsteps_at_epoch;
        if xwork < self.viability.work.max(64) && !x.is_exhausted() {
            return false;
        }
        self.viability.next_epoch();
        self.stats.epochs += 1;
        self.version_at_epoch = x.version;
        self.xsteps_at_epoch = x.steps;
        let mut any_live = false;
        for &q in &self.bsa.initial {
            if self.viability.is_live(self.bsa, x, &mut self.res, q, EMPTY, self.cfg.product_budget) != Some(false) {
                any_live = true;
                break;
            }
        }
        !any_live
    }

    fn residual_of(&mut self, x: &ExclusionSet, b: u32) -> u32 {
        let epoch = self.viability.epoch;
        let mut chain = Vec::new();
        let mut cur = b;
        loop {
            let (rid, e) = self.residual[cur as usize];
            if e == epoch || rid == DEAD || self.tree.get(cur).parent == NONE {
                break;
            }
            chain.push(cur);
            cur = self.tree.get(cur).parent;
        }
        let mut rid = if self.tree.get(cur).parent == NONE { EMPTY } else { self.residual[cur as usize].0 };
        for &c in chain.iter().rev() {
            rid = self.res.step(x, self.bsa, rid, self.tree.get(c).trans);
            self.residual[c as usize] = (rid, epoch);
        }
        rid
    }

    pub fn step(&mut self, x: &ExclusionSet, query_no: &mut u64) -> SearchStep {
        if self.maybe_new_epoch(x) {
            return SearchStep::Unsat(UnsatReason::Exclusion);
        }
        let Some(b) = self.queue.pop_front() else {
            return SearchStep::Unsat(UnsatReason::SearchExhausted);
        };
        let block = self.tree.get(b);
        let rid = self.residual_of(x, b);
        let live = rid != DEAD
            && self.viability.is_live(self.bsa, x, &mut self.res, block.state, rid, self.cfg.product_budget) != Some(false);
        if !live {
            self.stats.pruned += 1;
            return SearchStep::Continue;
        }
        self.stats.max_depth = self.stats.max_depth.max(block.depth);
        match self.check_loops(b, query_no) {
            Ok(Some(w)) => return SearchStep::Sat(Box::new(w)),
            Ok(None) => {}
            Err(r) => return SearchStep::Unknown(r),
        }
        self.stats.expanded += 1;
        for (t, s) in self.tree.expand(self.arena, self.bsa, b) {
            if let Step::Child { terms, delta } = s {
                let n = match self.knowledge {
                    Some(k) => match k.step(self.bsa, self.node[b as usize], t) {
                        Some(n) if k.is_live(n) => n,
                        _ => {
                            self.stats.pruned += 1;
                            continue;
                        }
                    },
                    None => 0,
                };
                let r = self.res.step(x, self.bsa, rid, t);
                if r == DEAD {
                    continue;
                }
                let dst = self.bsa.transitions[t as usize].dst;
                let c = self.tree.child(b, t, dst, &terms, &delta);
                self.residual.push((r, self.viability.epoch));
                if self.knowledge.is_some() {
                    self.node.push(n);
                }
                self.queue.push_back(c);
                self.stats.blocks += 1;
            }
        }
        SearchStep::Continue
    }

    fn check_loops(&mut self, b: u32, query_no: &mut u64) -> Result<Option<Witness>, UnknownReason> {
        let loops = self.tree.find_accepting_loops(self.bsa, b);
        if loops.is_empty() {
            return Ok(None);
        }
        let cap = |e: EufError| UnknownReason::Cap(e.to_string());
        let mut literals: Vec<_> = self.tree.constraints(b).into_iter().collect();
        literals.sort();
        let mut store = CongruenceStore::with_budget(self.arena, self.cfg.term_budget);
        for &(p, v) in &literals {
            store.assert_literal(p, v).map_err(cap)?;
        }
        let end_terms = self.tree.term_map(b).to_vec();
        for bp in loops {
            *query_no += 1;
            self.stats.queries += 1;
            let query = EufQuery {
                signed_predicates: literals.clone(),
                equalities: self.tree.term_map(bp).iter().copied().zip(end_terms.iter().copied()).collect(),
            }
            .normalized();
            store.push();
            for &(s, t) in &query.equalities {
                store.assert_eq(s, t).map_err(cap)?;
            }
            let mut sat = store.is_consistent();
            if self.cfg.recheck_every > 0 && (*query_no).is_multiple_of(self.cfg.recheck_every) {
                self.stats.rechecks += 1;
                let fresh = check_query(self.arena, &query) == EufResult::Sat;
                assert_eq!(fresh, sat, "incremental congruence closure disagrees with a fresh check");
            }
            if let Some(dir) = &self.cfg.smt_dump {
                dump(dir, *query_no, &export_smtlib(self.arena, &query)).map_err(|e| UnknownReason::Io(e.to_string()))?;
            }
            if let Some(solver) = &self.cfg.solver {
                let answer = solver
                    .check(&export_smtlib(self.arena, &query))
                    .map_err(|e| UnknownReason::Solver(e.to_string()))?;
                let ext = match answer {
                    SolverAnswer::Sat => true,
                    SolverAnswer::Unsat => false,
                    SolverAnswer::Unknown => return Err(UnknownReason::Solver("solver answered unknown".into())),
                };
                if ext != sat {
                    return Err(UnknownReason::Solver(format!("solver disagrees on query {}", query_no)));
                }
                sat = ext;
            }
            if sat {
                let w = build_witness(self.arena, self.bsa, &self.tree, bp, b, query, &mut store);
                return Ok(Some(w));
            }
            store.pop();
        }
        Ok(None)
    }
}

fn dump(dir: &Path, n: u64, script: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("query_{n:06}.smt2")), script)
}
