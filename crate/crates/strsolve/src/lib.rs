//! Path-feasibility solver for straight-line string-manipulating programs
//! with integer data.
//!
//! The library decides whether a straight-line (SSA) program built from
//! string concatenation, `replaceAll`/`replace` with constant replacement,
//! `reverse`, finite-transducer application, and `substring`, together with
//! assertions over regular membership, `length`, and `indexOf`, admits input
//! values that execute to the end.
//!
//! The solving pipeline works backwards: assertions are reduced to atomic
//! constraints, `indexOf`/`substring` corner cases are case-split,
//! `length`/`indexOf` are compiled into cost-enriched finite automata
//! (CEFAs: NFAs whose transitions additively update integer registers),
//! assignments are eliminated back-to-front by computing cost-enriched
//! pre-images, and the residual problem — linear integer arithmetic
//! constraints joint with CEFA memberships — is decided via a Parikh-image
//! flow encoding and an integer-complete LIA procedure. Satisfiable answers
//! come with witness strings that are re-validated against a reference
//! interpreter before being reported.
//!
//! See the crate examples for a tour: `automata_basics`, `regex_to_nfa`,
//! `replaceall_transducer`, `preimages`, `parikh_solving`,
//! `program_solving`, `smtlib_solving`, and `url_sanitise`.

pub mod alphabet;
pub mod automata;
pub mod bench;
pub mod builders;
pub mod engine;
pub mod error;
pub mod ids;
pub mod lia;
pub mod oracle;
pub mod preimage;
pub mod program;
pub mod regex;
pub mod smtlib;

pub use alphabet::{Alphabet, CharClass};
pub use automata::{Cefa, CostString, Int, Nfa, Nft};
pub use engine::{check_sat, SolveResult, SolverConfig, Verdict};
pub use error::{Error, Result};
pub use ids::{RegisterId, Session};
