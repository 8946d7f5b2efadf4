//! Finite automata, transducers, and cost-enriched finite automata.

pub mod cefa;
pub mod nfa;
pub mod nft;

pub use cefa::{Cefa, CefaTransition, CostString, Int};
pub use nfa::{Nfa, NfaTransition, StateId};
pub use nft::{Nft, NftTransition};
