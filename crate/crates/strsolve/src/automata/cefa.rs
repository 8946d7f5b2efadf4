//! Cost-enriched finite automata.
//!
//! A CEFA is an NFA whose transitions additively update a vector of integer
//! cost registers. It accepts pairs of a string and an integer vector: a run
//! on `w` accepts `(w, n̄)` when it ends in a final state and the per-register
//! sums of its updates equal `n̄`. The empty string is accepted with costs 0̄
//! iff an initial state is final.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num::BigInt;

use crate::alphabet::CharClass;
use crate::automata::nfa::{Nfa, StateId};
use crate::error::{Error, Result};
use crate::ids::RegisterId;

pub type Int = BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CefaTransition {
    pub src: StateId,
    pub label: CharClass,
    pub dst: StateId,
    /// Register updates, positionally aligned with the owning CEFA's
    /// register vector.
    pub update: Vec<Int>,
}

/// A cost-enriched finite automaton. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cefa {
    pub num_states: usize,
    /// Duplicate-free ordered register vector.
    pub registers: Vec<RegisterId>,
    pub transitions: Vec<CefaTransition>,
    pub initial: BTreeSet<StateId>,
    pub final_states: BTreeSet<StateId>,
}

/// A string paired with a cost vector, checked against a CEFA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostString {
    pub word: String,
    pub costs: Vec<Int>,
}

impl CostString {
    pub fn new(word: impl Into<String>, costs: Vec<i64>) -> Self {
        CostString {
            word: word.into(),
            costs: costs.into_iter().map(Int::from).collect(),
        }
    }
}

impl Cefa {
    pub fn new(
        num_states: usize,
        registers: Vec<RegisterId>,
        transitions: Vec<(StateId, CharClass, StateId, Vec<Int>)>,
        initial: impl IntoIterator<Item = StateId>,
        final_states: impl IntoIterator<Item = StateId>,
    ) -> Result<Self> {
        let cefa = Cefa {
            num_states,
            registers,
            transitions: transitions
                .into_iter()
                .map(|(src, label, dst, update)| CefaTransition {
                    src,
                    label,
                    dst,
                    update,
                })
                .collect(),
            initial: initial.into_iter().collect(),
            final_states: final_states.into_iter().collect(),
        };
        cefa.check()?;
        Ok(cefa)
    }

    fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.registers {
            if !seen.insert(r.clone()) {
                return Err(Error::input(format!("duplicate register {r}")));
            }
        }
        for t in &self.transitions {
            if t.src >= self.num_states || t.dst >= self.num_states {
                return Err(Error::input("transition endpoint outside state set"));
            }
            if t.update.len() != self.registers.len() {
                return Err(Error::input(format!(
                    "update arity {} does not cover register vector of length {}",
                    t.update.len(),
                    self.registers.len()
                )));
            }
        }
        if self
            .initial
            .iter()
            .chain(&self.final_states)
            .any(|&q| q >= self.num_states)
        {
            return Err(Error::input("state outside state set"));
        }
        Ok(())
    }

    /// Lifts an NFA to a 0-register CEFA with the same language.
    pub fn from_nfa(nfa: &Nfa) -> Self {
        Cefa {
            num_states: nfa.num_states,
            registers: Vec::new(),
            transitions: nfa
                .transitions
                .iter()
                .map(|t| CefaTransition {
                    src: t.src,
                    label: t.label.clone(),
                    dst: t.dst,
                    update: Vec::new(),
                })
                .collect(),
            initial: nfa.initial.clone(),
            final_states: nfa.final_states.clone(),
        }
    }

    /// Lifts an NFA to a CEFA counting string length in `register`:
    /// accepts {(w, |w|) | w in L(nfa)}.
    pub fn from_nfa_with_length(nfa: &Nfa, register: RegisterId) -> Self {
        Cefa {
            num_states: nfa.num_states,
            registers: vec![register],
            transitions: nfa
                .transitions
                .iter()
                .map(|t| CefaTransition {
                    src: t.src,
                    label: t.label.clone(),
                    dst: t.dst,
                    update: vec![Int::from(1)],
                })
                .collect(),
            initial: nfa.initial.clone(),
            final_states: nfa.final_states.clone(),
        }
    }

    /// The string projection of the language as an NFA (registers dropped).
    pub fn to_nfa(&self) -> Nfa {
        Nfa {
            num_states: self.num_states,
            transitions: self
                .transitions
                .iter()
                .map(|t| crate::automata::nfa::NfaTransition {
                    src: t.src,
                    label: t.label.clone(),
                    dst: t.dst,
                })
                .collect(),
            initial: self.initial.clone(),
            final_states: self.final_states.clone(),
        }
    }

    /// All cost vectors `n̄` with `(w, n̄)` accepted. Testing utility: the
    /// state×cost frontier can grow exponentially on long inputs.
    pub fn accepted_costs(&self, w: &str) -> BTreeSet<Vec<Int>> {
        let zero = vec![Int::from(0); self.registers.len()];
        let mut frontier: BTreeSet<(StateId, Vec<Int>)> = self
            .initial
            .iter()
            .map(|&q| (q, zero.clone()))
            .collect();
        for c in w.chars() {
            let mut next = BTreeSet::new();
            for (q, costs) in &frontier {
                for t in &self.transitions {
                    if t.src == *q && t.label.contains(c) {
                        let mut acc = costs.clone();
                        for (a, d) in acc.iter_mut().zip(&t.update) {
                            *a += d;
                        }
                        next.insert((t.dst, acc));
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                return BTreeSet::new();
            }
        }
        frontier
            .into_iter()
            .filter(|(q, _)| self.final_states.contains(q))
            .map(|(_, costs)| costs)
            .collect()
    }

    /// Whether `(cs.word, cs.costs)` is accepted. Testing utility with an
    /// exponential worst case; the solving path goes through the Parikh
    /// encoding instead.
    pub fn accepts(&self, cs: &CostString) -> Result<bool> {
        if cs.costs.len() != self.registers.len() {
            return Err(Error::input(format!(
                "cost vector of length {} checked against {} registers",
                cs.costs.len(),
                self.registers.len()
            )));
        }
        Ok(self.accepted_costs(&cs.word).contains(&cs.costs))
    }

    /// Synchronized product. Accepts `(w, (n̄1, n̄2))` iff `self` accepts
    /// `(w, n̄1)` and `other` accepts `(w, n̄2)`. Register sets must be
    /// disjoint; callers rename first. Only state pairs reachable from the
    /// initial pairs are materialized.
    pub fn product(&self, other: &Cefa) -> Result<Cefa> {
        let mine: BTreeSet<&RegisterId> = self.registers.iter().collect();
        if other.registers.iter().any(|r| mine.contains(r)) {
            return Err(Error::input(
                "product requires disjoint register vectors; rename first",
            ));
        }
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());

        let mut index: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
        let mut worklist: Vec<(StateId, StateId)> = Vec::new();
        for &q1 in &self.initial {
            for &q2 in &other.initial {
                if !index.contains_key(&(q1, q2)) {
                    index.insert((q1, q2), index.len());
                    worklist.push((q1, q2));
                }
            }
        }
        let mut transitions = Vec::new();
        let initial: BTreeSet<StateId> = index.values().copied().collect();
        while let Some((q1, q2)) = worklist.pop() {
            let src = index[&(q1, q2)];
            for t1 in self.transitions.iter().filter(|t| t.src == q1) {
                for t2 in other.transitions.iter().filter(|t| t.src == q2) {
                    let label = t1.label.intersect(&t2.label);
                    if label.is_empty() {
                        continue;
                    }
                    let key = (t1.dst, t2.dst);
                    let dst = match index.get(&key) {
                        Some(&id) => id,
                        None => {
                            let id = index.len();
                            index.insert(key, id);
                            worklist.push(key);
                            id
                        }
                    };
                    let mut update = t1.update.clone();
                    update.extend(t2.update.iter().cloned());
                    transitions.push(CefaTransition {
                        src,
                        label,
                        dst,
                        update,
                    });
                }
            }
        }
        let final_states: BTreeSet<StateId> = index
            .iter()
            .filter(|((q1, q2), _)| {
                self.final_states.contains(q1) && other.final_states.contains(q2)
            })
            .map(|(_, &id)| id)
            .collect();
        Ok(Cefa {
            num_states: index.len(),
            registers,
            transitions,
            initial,
            final_states,
        })
    }

    /// Replaces the register vector by `fresh` positionally; structure and
    /// accepted cost-string set are unchanged.
    pub fn rename(&self, fresh: Vec<RegisterId>) -> Result<Cefa> {
        if fresh.len() != self.registers.len() {
            return Err(Error::input(format!(
                "rename vector of length {} for {} registers",
                fresh.len(),
                self.registers.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for r in &fresh {
            if !seen.insert(r.clone()) {
                return Err(Error::input(format!("duplicate register {r} in rename")));
            }
            if self.registers.contains(r) {
                return Err(Error::input(format!(
                    "rename target {r} collides with existing register"
                )));
            }
        }
        Ok(Cefa {
            registers: fresh,
            ..self.clone()
        })
    }

    /// Whether the string projection of the language is empty. A sound,
    /// incomplete inconsistency test: empty projection implies no model.
    pub fn string_empty(&self) -> bool {
        self.to_nfa().is_empty()
    }

    /// Removes states that are unreachable from the initial states or cannot
    /// reach a final state, renumbering densely. Language-preserving.
    pub fn trim(&self) -> Cefa {
        let mut fwd = vec![false; self.num_states];
        let mut stack: Vec<StateId> = self.initial.iter().copied().collect();
        for &q in &self.initial {
            fwd[q] = true;
        }
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); self.num_states];
        let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); self.num_states];
        for (i, t) in self.transitions.iter().enumerate() {
            if !t.label.is_empty() {
                out_edges[t.src].push(i);
                in_edges[t.dst].push(i);
            }
        }
        while let Some(q) = stack.pop() {
            for &i in &out_edges[q] {
                let d = self.transitions[i].dst;
                if !fwd[d] {
                    fwd[d] = true;
                    stack.push(d);
                }
            }
        }
        let mut bwd = vec![false; self.num_states];
        let mut stack: Vec<StateId> = self.final_states.iter().copied().collect();
        for &q in &self.final_states {
            bwd[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &i in &in_edges[q] {
                let s = self.transitions[i].src;
                if !bwd[s] {
                    bwd[s] = true;
                    stack.push(s);
                }
            }
        }
        let mut remap: Vec<Option<StateId>> = vec![None; self.num_states];
        let mut count = 0;
        for q in 0..self.num_states {
            if fwd[q] && bwd[q] {
                remap[q] = Some(count);
                count += 1;
            }
        }
        // Merge parallel transitions (same endpoints and update) into one
        // class label; keeps flow encodings small.
        let mut merged: BTreeMap<(StateId, StateId, Vec<Int>), CharClass> = BTreeMap::new();
        for t in &self.transitions {
            let (Some(src), Some(dst)) = (remap[t.src], remap[t.dst]) else {
                continue;
            };
            merged
                .entry((src, dst, t.update.clone()))
                .and_modify(|c| *c = c.union(&t.label))
                .or_insert_with(|| t.label.clone());
        }
        Cefa {
            num_states: count,
            registers: self.registers.clone(),
            transitions: merged
                .into_iter()
                .map(|((src, dst, update), label)| CefaTransition {
                    src,
                    label,
                    dst,
                    update,
                })
                .collect(),
            initial: self.initial.iter().filter_map(|&q| remap[q]).collect(),
            final_states: self.final_states.iter().filter_map(|&q| remap[q]).collect(),
        }
    }

    /// Textual dump: `regs:`/`init:`/`final:` headers, then one line per
    /// transition `src -[label]{r:+c,...}-> dst`, sorted by source, label,
    /// destination so dumps are diffable.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let regs: Vec<String> = self.registers.iter().map(|r| r.to_string()).collect();
        writeln!(out, "regs: {}", regs.join(",")).unwrap();
        let fmt_states = |s: &BTreeSet<StateId>| {
            s.iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(out, "init: {}", fmt_states(&self.initial)).unwrap();
        writeln!(out, "final: {}", fmt_states(&self.final_states)).unwrap();
        let mut lines: Vec<(StateId, String, StateId, String)> = self
            .transitions
            .iter()
            .map(|t| {
                let mut upd = String::new();
                for (r, c) in self.registers.iter().zip(&t.update) {
                    if !upd.is_empty() {
                        upd.push(',');
                    }
                    let sign = if c >= &Int::from(0) { "+" } else { "" };
                    write!(upd, "{r}:{sign}{c}").unwrap();
                }
                (t.src, t.label.to_string(), t.dst, upd)
            })
            .collect();
        lines.sort();
        lines.dedup();
        for (src, label, dst, upd) in lines {
            writeln!(out, "{src} -[{label}]{{{upd}}}-> {dst}").unwrap();
        }
        out
    }
}

/// NFA dump in the same format (no registers).
impl Nfa {
    pub fn dump(&self) -> String {
        Cefa::from_nfa(self).dump()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::ids::Session;

    fn len_cefa(session: &Session, alphabet: &Alphabet) -> Cefa {
        // Single state, full-alphabet self-loop, r += 1.
        Cefa::new(
            1,
            vec![session.fresh("r1")],
            vec![(0, alphabet.full_class(), 0, vec![Int::from(1)])],
            [0],
            [0],
        )
        .unwrap()
    }

    #[test]
    fn accepts_length_pairs() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = len_cefa(&s, &ab);
        assert!(a.accepts(&CostString::new("aba", vec![3])).unwrap());
        assert!(a.accepts(&CostString::new("", vec![0])).unwrap());
        assert!(!a.accepts(&CostString::new("a", vec![2])).unwrap());
        assert!(a.accepts(&CostString::new("a", vec![0])).is_ok());
        assert!(a.accepts(&CostString::new("a", vec![0, 1])).is_err());
    }

    #[test]
    fn epsilon_rule() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = len_cefa(&s, &ab);
        // (eps, n) accepted iff n = 0 and an initial state is final.
        assert!(a.accepts(&CostString::new("", vec![0])).unwrap());
        assert!(!a.accepts(&CostString::new("", vec![1])).unwrap());
        let no_eps = Cefa::new(
            2,
            vec![s.fresh("r")],
            vec![(0, ab.full_class(), 1, vec![Int::from(1)])],
            [0],
            [1],
        )
        .unwrap();
        assert!(!no_eps.accepts(&CostString::new("", vec![0])).unwrap());
    }

    #[test]
    fn product_language_law_on_len() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a1 = len_cefa(&s, &ab);
        let a2 = len_cefa(&s, &ab);
        let p = a1.product(&a2).unwrap();
        assert!(p.accepts(&CostString::new("ab", vec![2, 2])).unwrap());
        assert!(!p.accepts(&CostString::new("ab", vec![2, 3])).unwrap());
    }

    #[test]
    fn product_rejects_register_overlap() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a1 = len_cefa(&s, &ab);
        assert!(a1.product(&a1).is_err());
    }

    #[test]
    fn rename_preserves_acceptance_and_composes() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = len_cefa(&s, &ab);
        let renamed = a.rename(vec![s.fresh("i5")]).unwrap();
        assert!(renamed.accepts(&CostString::new("ab", vec![2])).unwrap());
        let twice = renamed.rename(vec![s.fresh("i6")]).unwrap();
        assert!(twice.accepts(&CostString::new("ab", vec![2])).unwrap());
        // Renaming makes registers disjoint from the original: product works.
        assert!(renamed.product(&a).is_ok());
        // Errors: wrong length, duplicate, collision.
        assert!(a.rename(vec![]).is_err());
        let r = s.fresh("x");
        let two = a.product(&renamed).unwrap();
        assert!(two.rename(vec![r.clone(), r.clone()]).is_err());
        assert!(two
            .rename(vec![two.registers[0].clone(), s.fresh("y")])
            .is_err());
    }

    #[test]
    fn trim_drops_dead_states() {
        let s = Session::new();
        let a = Cefa::new(
            4,
            vec![s.fresh("r")],
            vec![
                (0, CharClass::singleton('a'), 1, vec![Int::from(1)]),
                (2, CharClass::singleton('a'), 1, vec![Int::from(1)]), // unreachable src
                (0, CharClass::singleton('b'), 3, vec![Int::from(1)]), // dead dst
            ],
            [0],
            [1],
        )
        .unwrap();
        let t = a.trim();
        assert_eq!(t.num_states, 2);
        assert_eq!(t.transitions.len(), 1);
        assert!(t.accepts(&CostString::new("a", vec![1])).unwrap());
    }

    #[test]
    fn dump_is_sorted_and_stable() {
        let s = Session::new();
        let a = Cefa::new(
            2,
            vec![s.fresh("r1")],
            vec![
                (1, CharClass::singleton('b'), 0, vec![Int::from(-2)]),
                (0, CharClass::singleton('a'), 1, vec![Int::from(1)]),
            ],
            [0],
            [1],
        )
        .unwrap();
        let d = a.dump();
        assert_eq!(
            d,
            "regs: r1\ninit: 0\nfinal: 1\n0 -[a]{r1:+1}-> 1\n1 -[b]{r1:-2}-> 0\n"
        );
    }
}
