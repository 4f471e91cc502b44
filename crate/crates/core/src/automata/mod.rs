//! Büchi automata, Büchi stream automata and execution effects.

use thiserror::Error;

pub mod bsa;
pub mod effect;
pub mod emptiness;
pub mod hoa;
pub mod nba;
pub mod prop;
pub mod tableau;

pub use bsa::{nba_to_bsa, Bsa, Expansion, TransId, Transition};
pub use effect::{effect_empty, effect_extend, find_syntactic_conflict, run_effect, EffectError, ExecutionEffect};
pub use hoa::nba_from_hoa;
pub use emptiness::{buchi_nonempty_from, BuchiGraph};
pub use nba::{Nba, NbaEdge};
pub use prop::{Cube, Prop};
pub use tableau::{ltl_to_nba, ltl_to_nba_with, TableauLimits};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("tableau limit exceeded: {0}")]
    TableauCap(String),
    #[error("edge {edge} (q{src} -> q{dst}) expands to {letters} letters, cap is {cap}")]
    LetterCap { edge: usize, src: u32, dst: u32, letters: usize, cap: usize },
    #[error("HOA input: {0}")]
    Hoa(String),
}
