//! Nondeterministic finite transducers.

use std::collections::BTreeSet;

use crate::alphabet::CharClass;
use crate::automata::nfa::StateId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NftTransition {
    pub src: StateId,
    pub label: CharClass,
    pub dst: StateId,
    /// Output emitted when the transition fires; may be empty. For a class
    /// label, every member letter shares this output.
    pub output: String,
}

/// A finite transducer with string outputs per transition. The `functional`
/// flag is user-declared: it records the intent that the defined transduction
/// is a partial function, and is checked opportunistically at run time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nft {
    pub num_states: usize,
    pub transitions: Vec<NftTransition>,
    pub initial: BTreeSet<StateId>,
    pub final_states: BTreeSet<StateId>,
    pub functional: bool,
}

impl Nft {
    pub fn new(
        num_states: usize,
        transitions: Vec<(StateId, CharClass, StateId, String)>,
        initial: impl IntoIterator<Item = StateId>,
        final_states: impl IntoIterator<Item = StateId>,
        functional: bool,
    ) -> Result<Self> {
        let nft = Nft {
            num_states,
            transitions: transitions
                .into_iter()
                .map(|(src, label, dst, output)| NftTransition {
                    src,
                    label,
                    dst,
                    output,
                })
                .collect(),
            initial: initial.into_iter().collect(),
            final_states: final_states.into_iter().collect(),
            functional,
        };
        nft.check()?;
        Ok(nft)
    }

    fn check(&self) -> Result<()> {
        for t in &self.transitions {
            if t.src >= self.num_states || t.dst >= self.num_states {
                return Err(Error::input("transducer transition endpoint outside state set"));
            }
        }
        if self
            .initial
            .iter()
            .chain(&self.final_states)
            .any(|&q| q >= self.num_states)
        {
            return Err(Error::input("transducer state outside state set"));
        }
        Ok(())
    }

    /// The identity transducer over the given full-alphabet class, expanded
    /// per letter.
    pub fn identity(alphabet: &crate::alphabet::Alphabet) -> Self {
        let transitions = alphabet
            .letters()
            .into_iter()
            .map(|c| NftTransition {
                src: 0,
                label: CharClass::singleton(c),
                dst: 0,
                output: c.to_string(),
            })
            .collect();
        Nft {
            num_states: 1,
            transitions,
            initial: BTreeSet::from([0]),
            final_states: BTreeSet::from([0]),
            functional: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    #[test]
    fn identity_shape() {
        let t = Nft::identity(&Alphabet::explicit("ab".chars()).unwrap());
        assert_eq!(t.num_states, 1);
        assert_eq!(t.transitions.len(), 2);
        assert!(t.functional);
    }

    #[test]
    fn endpoint_validation() {
        assert!(Nft::new(1, vec![(0, CharClass::singleton('a'), 3, String::new())], [0], [0], true).is_err());
    }
}
