//! Nondeterministic finite automata with class-labelled transitions.

use std::collections::BTreeSet;

use crate::alphabet::CharClass;
use crate::error::{Error, Result};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfaTransition {
    pub src: StateId,
    pub label: CharClass,
    pub dst: StateId,
}

/// An NFA over dense state ids `0..num_states`. A transition labelled by a
/// [`CharClass`] stands for one per-letter transition for each member letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub num_states: usize,
    pub transitions: Vec<NfaTransition>,
    pub initial: BTreeSet<StateId>,
    pub final_states: BTreeSet<StateId>,
}

impl Nfa {
    pub fn new(
        num_states: usize,
        transitions: Vec<(StateId, CharClass, StateId)>,
        initial: impl IntoIterator<Item = StateId>,
        final_states: impl IntoIterator<Item = StateId>,
    ) -> Result<Self> {
        let nfa = Nfa {
            num_states,
            transitions: transitions
                .into_iter()
                .map(|(src, label, dst)| NfaTransition { src, label, dst })
                .collect(),
            initial: initial.into_iter().collect(),
            final_states: final_states.into_iter().collect(),
        };
        nfa.check()?;
        Ok(nfa)
    }

    fn check(&self) -> Result<()> {
        for t in &self.transitions {
            if t.src >= self.num_states || t.dst >= self.num_states {
                return Err(Error::input("transition endpoint outside state set"));
            }
        }
        if let Some(&q) = self.initial.iter().chain(&self.final_states).find(|&&q| q >= self.num_states) {
            return Err(Error::input(format!("state {q} outside state set")));
        }
        Ok(())
    }

    /// Whether some accepting run on `w` exists. The empty string is accepted
    /// iff an initial state is final.
    pub fn accepts(&self, w: &str) -> bool {
        let mut current: BTreeSet<StateId> = self.initial.clone();
        for c in w.chars() {
            let mut next = BTreeSet::new();
            for t in &self.transitions {
                if current.contains(&t.src) && t.label.contains(c) {
                    next.insert(t.dst);
                }
            }
            current = next;
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|q| self.final_states.contains(q))
    }

    /// Whether the language is empty (no final state reachable from an
    /// initial state; transitions with empty labels do not count).
    pub fn is_empty(&self) -> bool {
        let mut seen: Vec<bool> = vec![false; self.num_states];
        let mut stack: Vec<StateId> = self.initial.iter().copied().collect();
        for &q in &self.initial {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            if self.final_states.contains(&q) {
                return false;
            }
            for t in &self.transitions {
                if t.src == q && !t.label.is_empty() && !seen[t.dst] {
                    seen[t.dst] = true;
                    stack.push(t.dst);
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::CharClass;

    fn cls(c: char) -> CharClass {
        CharClass::singleton(c)
    }

    #[test]
    fn rejects_bad_endpoints() {
        assert!(Nfa::new(1, vec![(0, cls('a'), 1)], [0], [0]).is_err());
        assert!(Nfa::new(1, vec![], [2], [0]).is_err());
    }

    #[test]
    fn accepts_basic() {
        // a b* over states 0 -a-> 1 -b-> 1
        let n = Nfa::new(2, vec![(0, cls('a'), 1), (1, cls('b'), 1)], [0], [1]).unwrap();
        assert!(n.accepts("a"));
        assert!(n.accepts("abb"));
        assert!(!n.accepts(""));
        assert!(!n.accepts("b"));
        assert!(!n.is_empty());
    }

    #[test]
    fn empty_language() {
        let n = Nfa::new(2, vec![(0, cls('a'), 0)], [0], [1]).unwrap();
        assert!(n.is_empty());
        let eps = Nfa::new(1, vec![], [0], [0]).unwrap();
        assert!(!eps.is_empty());
        assert!(eps.accepts(""));
    }
}
