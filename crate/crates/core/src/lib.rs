//! Satisfiability checking for Temporal Stream Logic modulo uninterpreted functions.
//!
//! Pipeline: parse → LTL approximation → Büchi automaton → Büchi stream automaton →
//! dual lasso search with congruence-closure queries.

pub mod automata;
pub mod bits;
pub mod engine;
pub mod euf;
pub mod formula;
pub mod generators;
pub mod ltl;
pub mod parser;
pub mod term;

pub use formula::{show_formula, Formula, Problem};
pub use parser::{parse_formula, parse_with, ParseError, ParseErrorKind, ParseOptions};
pub use term::{eta, eta_pred, Assignment, EtaError, Node, PredId, Signature, Sym, TermArena, TermId};
pub use engine::{run_checker, run_validity, CheckerConfig, Outcome, Verdict};
pub use ltl::Mode;
