//! The satisfiability checker: exclusion of inconsistent finite runs interleaved with a
//! lasso search over the Büchi stream automaton.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

pub mod exclusion;
pub mod knowledge;
pub mod report;
pub mod search;
pub mod tree;
pub mod viability;
pub mod witness;

pub use exclusion::ExclusionSet;
pub use knowledge::Knowledge;
pub use search::{Search, SearchStep};
pub use tree::{Block, BlockTree, Step};
pub use witness::{build_witness, recompute_query, validate_witness, ModelSummary, Witness};

use crate::automata::{ltl_to_nba_with, nba_from_hoa, nba_to_bsa, AutomataError, Bsa, Expansion, Nba, TableauLimits};
use crate::euf::ExternalSolver;
use crate::formula::Problem;
use crate::ltl::{approximate, finitarize, Approximation, FinitarizeError, Mode};

#[derive(Clone, Debug)]
pub struct CheckerConfig {
    pub mode: Mode,
    pub timeout: Duration,
    /// 1 or 2.
    pub workers: usize,
    /// Exclusion steps per search step in single-worker mode.
    pub exclude_per_search: usize,
    /// Share of `block_budget` the exclusion tree may use, in percent.
    pub exclude_share: usize,
    pub block_budget: usize,
    pub term_budget: usize,
    pub letter_cap: usize,
    /// Positions a single liveness exploration may visit before it gives up.
    pub product_budget: usize,
    pub expansion: Expansion,
    pub tableau: TableauLimits,
    /// Use this HOA automaton instead of the built-in translation.
    pub nba_hoa: Option<String>,
    pub smt_dump: Option<PathBuf>,
    pub solver: Option<ExternalSolver>,
    /// Answer UNSAT without searching when the automaton has no accepting lasso.
    pub empty_shortcut: bool,
    /// Every n-th query is re-decided from scratch; 0 disables.
    pub recheck_every: u64,
    /// Node limit of the knowledge abstraction; 0 disables it.
    pub knowledge_budget: usize,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            mode: Mode::Finitary,
            timeout: Duration::from_secs(300),
            workers: 1,
            exclude_per_search: 1,
            exclude_share: 25,
            block_budget: 5_000_000,
            term_budget: 1_000_000,
            letter_cap: 4096,
            product_budget: 2_000_000,
            expansion: Expansion::Cube,
            tableau: TableauLimits::default(),
            nba_hoa: None,
            smt_dump: None,
            solver: None,
            empty_shortcut: true,
            recheck_every: 100,
            knowledge_budget: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownReason {
    Timeout,
    Cap(String),
    Solver(String),
    Io(String),
}

impl std::fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnknownReason::Timeout => write!(f, "timeout"),
            UnknownReason::Cap(s) => write!(f, "cap: {s}"),
            UnknownReason::Solver(s) => write!(f, "solver: {s}"),
            UnknownReason::Io(s) => write!(f, "io: {s}"),
        }
    }
}

/// How UNSAT was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsatReason {
    /// The automaton has no accepting lasso at all.
    EmptyAutomaton,
    /// No accepting lasso avoids the excluded words.
    Exclusion,
    /// Every search branch was pruned.
    SearchExhausted,
    /// Every accepting run repeats a guard atom with the opposite value.
    Knowledge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Sat(Box<Witness>),
    Unsat(UnsatReason),
    Unknown(UnknownReason),
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Sat(_) => "SAT",
            Outcome::Unsat(_) => "UNSAT",
            Outcome::Unknown(_) => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub aps: usize,
    pub nba_states: usize,
    pub nba_edges: usize,
    pub bsa_states: usize,
    pub bsa_transitions: usize,
    pub search_blocks: u64,
    pub search_expanded: u64,
    pub search_pruned: u64,
    pub search_depth: u32,
    pub exclude_blocks: u64,
    pub exclude_depth: u32,
    pub exclusions: u64,
    pub queries: u64,
    pub rechecks: u64,
    pub epochs: u64,
    pub product_positions: u64,
    pub residual_sets: u64,
    pub knowledge_nodes: u64,
    /// Wall-clock time; excluded from determinism comparisons.
    pub wall_ms: u64,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: Stats,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Finitarize(#[from] FinitarizeError),
    #[error("{0}")]
    Hoa(String),
}

/// The automata built for a problem.
pub struct Prepared {
    /// The checked problem (finitarized in general mode).
    pub problem: Problem,
    pub approx: Approximation,
    pub nba: Nba,
    pub bsa: Bsa,
}

/// Builds the automata. `Ok(Err(reason))` when a size cap is hit.
pub fn prepare(problem: &Problem, cfg: &CheckerConfig) -> Result<Result<Prepared, UnknownReason>, CheckError> {
    let problem = match cfg.mode {
        Mode::Finitary => problem.clone(),
        Mode::General => finitarize(problem)?,
    };
    // The search needs a finitary automaton; general mode gets it through finitarize.
    let approx = approximate(&problem, Mode::Finitary);
    let nba = match &cfg.nba_hoa {
        Some(text) => nba_from_hoa(text, &approx.universe, &problem.arena).map_err(|e| CheckError::Hoa(e.to_string()))?,
        None => match ltl_to_nba_with(&approx.ltl, approx.universe.len(), cfg.tableau) {
            Ok(n) => n,
            Err(e) => return Ok(Err(UnknownReason::Cap(e.to_string()))),
        },
    };
    let bsa = match nba_to_bsa(&nba, &approx.universe, &problem.arena, cfg.expansion, cfg.letter_cap) {
        Ok(b) => b,
        Err(AutomataError::Hoa(e)) => return Err(CheckError::Hoa(e)),
        Err(e) => return Ok(Err(UnknownReason::Cap(e.to_string()))),
    };
    Ok(Ok(Prepared { problem, approx, nba, bsa }))
}

/// Parses nothing, builds everything, and decides satisfiability.
pub fn run_checker(problem: &Problem, cfg: &CheckerConfig) -> Result<(Verdict, Option<Prepared>), CheckError> {
    let start = Instant::now();
    let prep = match prepare(problem, cfg)? {
        Ok(p) => p,
        Err(r) => {
            let stats = Stats { wall_ms: start.elapsed().as_millis() as u64, ..Default::default() };
            return Ok((Verdict { outcome: Outcome::Unknown(r), stats }, None));
        }
    };
    let mut v = check_prepared(&prep, cfg, start);
    v.stats.wall_ms = start.elapsed().as_millis() as u64;
    Ok((v, Some(prep)))
}

fn base_stats(prep: &Prepared) -> Stats {
    Stats {
        aps: prep.approx.universe.len(),
        nba_states: prep.nba.num_states,
        nba_edges: prep.nba.edges.len(),
        bsa_states: prep.bsa.num_states,
        bsa_transitions: prep.bsa.transitions.len(),
        ..Default::default()
    }
}

fn finish(stats: &mut Stats, s: &Search<'_>, x: &ExclusionSet) {
    stats.search_blocks = s.stats.blocks;
    stats.search_expanded = s.stats.expanded;
    stats.search_pruned = s.stats.pruned;
    stats.search_depth = s.stats.max_depth;
    stats.queries = s.stats.queries;
    stats.rechecks = s.stats.rechecks;
    stats.epochs = s.stats.epochs;
    stats.product_positions = s.viability.total_work;
    stats.residual_sets = s.residual_sets() as u64;
    stats.exclude_blocks = x.num_nodes() as u64;
    stats.exclude_depth = x.depth();
    stats.exclusions = x.words.len() as u64;
}

/// Runs the search on prepared automata. SAT witnesses are validated before they are returned.
pub fn check_prepared(prep: &Prepared, cfg: &CheckerConfig, start: Instant) -> Verdict {
    let mut stats = base_stats(prep);
    if cfg.empty_shortcut && prep.bsa.is_structurally_empty() {
        return Verdict { outcome: Outcome::Unsat(UnsatReason::EmptyAutomaton), stats };
    }
    let knowledge = match cfg.knowledge_budget {
        0 => None,
        n => Knowledge::build(&prep.problem.arena, &prep.bsa, n),
    };
    if let Some(k) = &knowledge {
        stats.knowledge_nodes = k.len() as u64;
        if k.is_empty() {
            return Verdict { outcome: Outcome::Unsat(UnsatReason::Knowledge), stats };
        }
    }
    let outcome = if cfg.workers >= 2 {
        run_parallel(prep, cfg, knowledge.as_ref(), start, &mut stats)
    } else {
        run_sequential(prep, cfg, knowledge.as_ref(), start, &mut stats)
    };
    if let Outcome::Sat(w) = &outcome {
        if let Err(e) = validate_witness(&prep.problem.arena, &prep.bsa, &prep.approx.universe, &prep.approx.ltl, w) {
            panic!("witness failed validation: {e}");
        }
    }
    Verdict { outcome, stats }
}

fn run_sequential(
    prep: &Prepared,
    cfg: &CheckerConfig,
    knowledge: Option<&Knowledge>,
    start: Instant,
    stats: &mut Stats,
) -> Outcome {
    let arena = &*prep.problem.arena;
    let bsa = &prep.bsa;
    let mut x = ExclusionSet::new(bsa);
    let mut s = Search::new(arena, bsa, cfg, knowledge);
    let mut query_no = 0u64;
    let outcome = loop {
        if start.elapsed() >= cfg.timeout {
            break Outcome::Unknown(UnknownReason::Timeout);
        }
        if x.num_nodes() + s.tree.len() > cfg.block_budget {
            break Outcome::Unknown(UnknownReason::Cap(format!("block budget {} exhausted", cfg.block_budget)));
        }
        let xcap = cfg.block_budget / 100 * cfg.exclude_share;
        for _ in 0..cfg.exclude_per_search {
            if x.num_nodes() >= xcap || !x.step(arena, bsa) {
                break;
            }
        }
        match s.step(&x, &mut query_no) {
            SearchStep::Continue => {}
            SearchStep::Sat(w) => break Outcome::Sat(w),
            SearchStep::Unsat(r) => break Outcome::Unsat(r),
            SearchStep::Unknown(r) => break Outcome::Unknown(r),
        }
    };
    finish(stats, &s, &x);
    outcome
}

fn run_parallel(
    prep: &Prepared,
    cfg: &CheckerConfig,
    knowledge: Option<&Knowledge>,
    start: Instant,
    stats: &mut Stats,
) -> Outcome {
    let arena = &*prep.problem.arena;
    let bsa = &prep.bsa;
    let x = RwLock::new(ExclusionSet::new(bsa));
    let cancel = AtomicBool::new(false);
    let xnodes = AtomicU64::new(0);
    let result: Mutex<Option<Outcome>> = Mutex::new(None);
    let deliver = |o: Outcome| {
        let mut r = result.lock().unwrap();
        if r.is_none() {
            *r = Some(o);
        }
        cancel.store(true, Ordering::SeqCst);
    };
    let mut search_stats = None;
    std::thread::scope(|scope| {
        scope.spawn(|| {
            while !cancel.load(Ordering::Relaxed) {
                let mut g = x.write().unwrap();
                let mut progressed = false;
                for _ in 0..64 {
                    if g.num_nodes() >= cfg.block_budget / 100 * cfg.exclude_share || !g.step(arena, bsa) {
                        break;
                    }
                    progressed = true;
                }
                xnodes.store(g.num_nodes() as u64, Ordering::Relaxed);
                drop(g);
                if !progressed {
                    break;
                }
            }
        });
        let mut s = Search::new(arena, bsa, cfg, knowledge);
        let mut query_no = 0u64;
        loop {
            if cancel.load(Ordering::Relaxed) {
                break;
            }
            if start.elapsed() >= cfg.timeout {
                deliver(Outcome::Unknown(UnknownReason::Timeout));
                break;
            }
            if xnodes.load(Ordering::Relaxed) as usize + s.tree.len() > cfg.block_budget {
                deliver(Outcome::Unknown(UnknownReason::Cap(format!("block budget {} exhausted", cfg.block_budget))));
                break;
            }
            let g = x.read().unwrap();
            let step = s.step(&g, &mut query_no);
            drop(g);
            match step {
                SearchStep::Continue => {}
                SearchStep::Sat(w) => {
                    deliver(Outcome::Sat(w));
                    break;
                }
                SearchStep::Unsat(r) => {
                    deliver(Outcome::Unsat(r));
                    break;
                }
                SearchStep::Unknown(r) => {
                    deliver(Outcome::Unknown(r));
                    break;
                }
            }
        }
        cancel.store(true, Ordering::SeqCst);
        search_stats = Some(s);
    });
    let s = search_stats.unwrap();
    finish(stats, &s, &x.read().unwrap());
    result.into_inner().unwrap().unwrap_or(Outcome::Unknown(UnknownReason::Timeout))
}

/// Satisfiability of `¬ψ` decides validity of `ψ`.
pub fn run_validity(problem: &Problem, cfg: &CheckerConfig) -> Result<(Verdict, Option<Prepared>), CheckError> {
    let negated = Problem {
        arena: Arc::clone(&problem.arena),
        signature: problem.signature.clone(),
        formula: crate::formula::Formula::not(problem.formula.clone()),
    };
    run_checker(&negated, cfg)
}
