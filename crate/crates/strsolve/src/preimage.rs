//! Cost-enriched pre-images of CEFA languages under the string operations:
//! concatenation, reverse, substring, transducer application, and
//! replaceAll.
//!
//! A pre-image is represented as a union of tuples of CEFAs (one per string
//! argument of the operation) together with linear terms that reconstruct
//! the original register values from fresh per-argument register copies.
//! Every tuple slot carries the argument's own input-integer registers (for
//! substring: start and length) followed by the fresh copies of the
//! pre-imaged automaton's registers. Register vectors are positionally
//! identical across the disjuncts of one representation.

use std::collections::BTreeMap;

use crate::automata::{Cefa, CefaTransition, Int, Nft, StateId};
use crate::error::{Error, Result};
use crate::ids::{RegisterId, Session};
use crate::regex::Regex;

/// A linear integer term: constant plus coefficient map (nonzero
/// coefficients only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearTerm {
    pub constant: Int,
    pub coeffs: BTreeMap<RegisterId, Int>,
}

impl LinearTerm {
    pub fn constant_term(c: impl Into<Int>) -> Self {
        LinearTerm {
            constant: c.into(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(r: RegisterId) -> Self {
        LinearTerm {
            constant: Int::from(0),
            coeffs: BTreeMap::from([(r, Int::from(1))]),
        }
    }

    pub fn add_var(mut self, r: RegisterId, coeff: impl Into<Int>) -> Self {
        let coeff = coeff.into();
        let entry = self.coeffs.entry(r).or_insert_with(|| Int::from(0));
        *entry += coeff;
        if *entry == Int::from(0) {
            self.coeffs.retain(|_, v| *v != Int::from(0));
        }
        self
    }

    pub fn evaluate(&self, values: &BTreeMap<RegisterId, Int>) -> Result<Int> {
        let mut acc = self.constant.clone();
        for (r, c) in &self.coeffs {
            let v = values
                .get(r)
                .ok_or_else(|| Error::internal(format!("no value for register {r}")))?;
            acc += c * v;
        }
        Ok(acc)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, r: &RegisterId) -> Int {
        self.coeffs.get(r).cloned().unwrap_or_else(|| Int::from(0))
    }

    pub fn add(&self, other: &LinearTerm) -> LinearTerm {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (r, c) in &other.coeffs {
            let entry = out.coeffs.entry(r.clone()).or_insert_with(|| Int::from(0));
            *entry += c;
        }
        out.coeffs.retain(|_, c| *c != Int::from(0));
        out
    }

    pub fn scale(&self, k: &Int) -> LinearTerm {
        if *k == Int::from(0) {
            return LinearTerm::constant_term(0);
        }
        LinearTerm {
            constant: &self.constant * k,
            coeffs: self.coeffs.iter().map(|(r, c)| (r.clone(), c * k)).collect(),
        }
    }

    pub fn sub(&self, other: &LinearTerm) -> LinearTerm {
        self.add(&other.scale(&Int::from(-1)))
    }

    /// Substitutes `r := replacement` and drops `r` from the term.
    pub fn substitute(&self, r: &RegisterId, replacement: &LinearTerm) -> LinearTerm {
        let c = self.coeff(r);
        if c == Int::from(0) {
            return self.clone();
        }
        let mut without = self.clone();
        without.coeffs.remove(r);
        without.add(&replacement.scale(&c))
    }

    pub fn vars(&self) -> impl Iterator<Item = &RegisterId> {
        self.coeffs.keys()
    }
}

/// One disjunct of a pre-image: a CEFA per string argument slot.
pub type Disjunct = Vec<Cefa>;

/// CEFA representation of a cost-enriched recognisable relation plus the
/// reconstruction terms.
#[derive(Debug, Clone)]
pub struct CerrRepresentation {
    /// Number of string arguments of the pre-imaged operation.
    pub arity: usize,
    pub disjuncts: Vec<Disjunct>,
    /// One term per original register, over the fresh per-argument copies.
    pub terms: Vec<LinearTerm>,
    /// Fresh register copies of the original vector, one vector per argument
    /// slot, in slot order. Positionally identical across disjuncts.
    pub copies: Vec<Vec<RegisterId>>,
    /// Input-integer registers per argument slot (substring start/length);
    /// empty for operations without integer inputs.
    pub int_inputs: Vec<Vec<RegisterId>>,
}

fn fresh_copies(a: &Cefa, session: &Session, tag: &str) -> Vec<RegisterId> {
    a.registers
        .iter()
        .map(|r| session.fresh(format!("{}{}", r.name(), tag)))
        .collect()
}

/// Pre-image under concatenation: one disjunct per state `q`, pairing the
/// prefix copy (finals = {q}) with the suffix copy (initials = {q}); terms
/// are the pairwise register sums.
pub fn preimage_concat(a: &Cefa, session: &Session) -> CerrRepresentation {
    let r1 = fresh_copies(a, session, "'");
    let r2 = fresh_copies(a, session, "''");
    let mut disjuncts = Vec::with_capacity(a.num_states);
    for q in 0..a.num_states {
        let prefix = Cefa {
            num_states: a.num_states,
            registers: r1.clone(),
            transitions: a.transitions.clone(),
            initial: a.initial.clone(),
            final_states: [q].into_iter().collect(),
        };
        let suffix = Cefa {
            num_states: a.num_states,
            registers: r2.clone(),
            transitions: a.transitions.clone(),
            initial: [q].into_iter().collect(),
            final_states: a.final_states.clone(),
        };
        disjuncts.push(vec![prefix, suffix]);
    }
    let terms = r1
        .iter()
        .zip(&r2)
        .map(|(x, y)| LinearTerm::var(x.clone()).add_var(y.clone(), 1))
        .collect();
    CerrRepresentation {
        arity: 2,
        disjuncts,
        terms,
        copies: vec![r1, r2],
        int_inputs: vec![vec![], vec![]],
    }
}

/// Pre-image under reverse: transitions reversed, initial and final states
/// swapped, identity terms.
pub fn preimage_reverse(a: &Cefa, session: &Session) -> CerrRepresentation {
    let r1 = fresh_copies(a, session, "'");
    let reversed = Cefa {
        num_states: a.num_states,
        registers: r1.clone(),
        transitions: a
            .transitions
            .iter()
            .map(|t| CefaTransition {
                src: t.dst,
                label: t.label.clone(),
                dst: t.src,
                update: t.update.clone(),
            })
            .collect(),
        initial: a.final_states.clone(),
        final_states: a.initial.clone(),
    };
    CerrRepresentation {
        arity: 1,
        disjuncts: vec![vec![reversed]],
        terms: r1.iter().cloned().map(LinearTerm::var).collect(),
        copies: vec![r1],
        int_inputs: vec![vec![]],
    }
}

/// Pre-image under substring: the argument CEFA runs over `Q x {p0,p1,p2}`
/// (before / inside / after the substring window) with two extra registers
/// for the start position and window length. Accepts
/// `(w, n1, n2, d̄)` when the window `w[n1 .. n1+n2-1]` is accepted by `a`
/// with register values `d̄` and `n1 + n2 <= |w|`; empty windows
/// `(w, n1, 0, 0̄)` with `0 <= n1 <= |w|` are accepted when `a` accepts the
/// empty string.
pub fn preimage_substring(
    a: &Cefa,
    session: &Session,
    alphabet: &crate::alphabet::Alphabet,
) -> CerrRepresentation {
    let start = session.fresh("r'1,1");
    let len = session.fresh("r'1,2");
    let copies = fresh_copies(a, session, "'");
    let k = a.registers.len();
    let zero_k = vec![Int::from(0); k];
    let phase = |q: StateId, p: usize| q * 3 + p;
    let mut transitions: Vec<CefaTransition> = Vec::new();
    let full_updates = |one_start: bool, one_len: bool, inner: &[Int]| {
        let mut u = Vec::with_capacity(k + 2);
        u.push(Int::from(if one_start { 1 } else { 0 }));
        u.push(Int::from(if one_len { 1 } else { 0 }));
        u.extend(inner.iter().cloned());
        u
    };
    let eps_accepting = a.initial.iter().any(|q| a.final_states.contains(q));
    let full = alphabet.full_class();
    for &q in &a.initial {
        // p0: before the window; counts the start position.
        transitions.push(CefaTransition {
            src: phase(q, 0),
            label: full.clone(),
            dst: phase(q, 0),
            update: full_updates(true, false, &zero_k),
        });
        // Empty window: jump straight past it and consume the rest.
        if a.final_states.contains(&q) {
            transitions.push(CefaTransition {
                src: phase(q, 0),
                label: full.clone(),
                dst: phase(q, 2),
                update: full_updates(false, false, &zero_k),
            });
        }
    }
    for t in &a.transitions {
        // First window letter (source must be initial).
        if a.initial.contains(&t.src) {
            transitions.push(CefaTransition {
                src: phase(t.src, 0),
                label: t.label.clone(),
                dst: phase(t.dst, 1),
                update: full_updates(false, true, &t.update),
            });
            if a.final_states.contains(&t.dst) {
                transitions.push(CefaTransition {
                    src: phase(t.src, 0),
                    label: t.label.clone(),
                    dst: phase(t.dst, 2),
                    update: full_updates(false, true, &t.update),
                });
            }
        }
        // Window interior.
        transitions.push(CefaTransition {
            src: phase(t.src, 1),
            label: t.label.clone(),
            dst: phase(t.dst, 1),
            update: full_updates(false, true, &t.update),
        });
        // Last window letter.
        if a.final_states.contains(&t.dst) {
            transitions.push(CefaTransition {
                src: phase(t.src, 1),
                label: t.label.clone(),
                dst: phase(t.dst, 2),
                update: full_updates(false, true, &t.update),
            });
        }
    }
    for &q in &a.final_states {
        // p2: after the window.
        transitions.push(CefaTransition {
            src: phase(q, 2),
            label: full.clone(),
            dst: phase(q, 2),
            update: full_updates(false, false, &zero_k),
        });
    }
    let initial: Vec<StateId> = a.initial.iter().map(|&q| phase(q, 0)).collect();
    let mut final_states: Vec<StateId> =
        a.final_states.iter().map(|&q| phase(q, 2)).collect();
    if eps_accepting {
        final_states.extend(
            a.initial
                .iter()
                .filter(|q| a.final_states.contains(q))
                .map(|&q| phase(q, 0)),
        );
    }
    let mut registers = vec![start.clone(), len.clone()];
    registers.extend(copies.iter().cloned());
    let cefa = Cefa {
        num_states: a.num_states * 3,
        registers,
        transitions,
        initial: initial.into_iter().collect(),
        final_states: final_states.into_iter().collect(),
    }
    .trim();
    CerrRepresentation {
        arity: 1,
        disjuncts: vec![vec![cefa]],
        terms: copies.iter().cloned().map(LinearTerm::var).collect(),
        copies: vec![copies],
        int_inputs: vec![vec![start, len]],
    }
}

/// Maximum transducer output length tolerated when summing register paths.
pub const DEFAULT_MAX_OUTPUT_LEN: usize = 64;

/// Pre-image under a transducer: the product simulates `t` on the input and
/// `a` on the produced output, summing `a`'s register updates along each
/// output path. The declared-functional flag is the caller's concern
/// (non-functional transducers downgrade unsat answers to unknown at the
/// engine level).
pub fn preimage_transducer(t: &Nft, a: &Cefa, session: &Session) -> Result<CerrRepresentation> {
    preimage_transducer_with(t, a, session, DEFAULT_MAX_OUTPUT_LEN)
}

pub fn preimage_transducer_with(
    t: &Nft,
    a: &Cefa,
    session: &Session,
    max_output_len: usize,
) -> Result<CerrRepresentation> {
    let copies = fresh_copies(a, session, "'");
    let k = a.registers.len();
    let pair = |p: StateId, q: StateId, num_a: usize| p * num_a + q;
    let num_a = a.num_states.max(1);
    let mut transitions: Vec<CefaTransition> = Vec::new();
    for tt in &t.transitions {
        if tt.output.chars().count() > max_output_len {
            return Err(Error::ResourceLimit(format!(
                "transducer output {:?} longer than the configured bound {max_output_len}",
                tt.output
            )));
        }
        if tt.output.is_empty() {
            for q in 0..a.num_states {
                transitions.push(CefaTransition {
                    src: pair(tt.src, q, num_a),
                    label: tt.label.clone(),
                    dst: pair(tt.dst, q, num_a),
                    update: vec![Int::from(0); k],
                });
            }
        } else {
            // All paths of `a` over the output string, with summed updates.
            for q in 0..a.num_states {
                let mut frontier: BTreeMap<(StateId, Vec<Int>), ()> =
                    BTreeMap::from([((q, vec![Int::from(0); k]), ())]);
                for c in tt.output.chars() {
                    let mut next = BTreeMap::new();
                    for ((p, sums), ()) in &frontier {
                        for at in a.transitions.iter().filter(|at| at.src == *p) {
                            if at.label.contains(c) {
                                let mut acc = sums.clone();
                                for (s, d) in acc.iter_mut().zip(&at.update) {
                                    *s += d;
                                }
                                next.insert((at.dst, acc), ());
                            }
                        }
                    }
                    frontier = next;
                    if frontier.is_empty() {
                        break;
                    }
                }
                for ((p, sums), ()) in frontier {
                    transitions.push(CefaTransition {
                        src: pair(tt.src, q, num_a),
                        label: tt.label.clone(),
                        dst: pair(tt.dst, p, num_a),
                        update: sums,
                    });
                }
            }
        }
    }
    let mut initial = Vec::new();
    for &p in &t.initial {
        for &q in &a.initial {
            initial.push(pair(p, q, num_a));
        }
    }
    let mut final_states = Vec::new();
    for &p in &t.final_states {
        for &q in &a.final_states {
            final_states.push(pair(p, q, num_a));
        }
    }
    let cefa = Cefa {
        num_states: t.num_states * num_a,
        registers: copies.clone(),
        transitions,
        initial: initial.into_iter().collect(),
        final_states: final_states.into_iter().collect(),
    }
    .trim();
    Ok(CerrRepresentation {
        arity: 1,
        disjuncts: vec![vec![cefa]],
        terms: copies.iter().cloned().map(LinearTerm::var).collect(),
        copies: vec![copies],
        int_inputs: vec![vec![]],
    })
}

/// Pre-image under replaceall: build the replaceAll transducer and take its
/// transducer pre-image. The pattern must not match the empty string.
pub fn preimage_replaceall(
    e: &Regex,
    u: &str,
    a: &Cefa,
    session: &Session,
    alphabet: &crate::alphabet::Alphabet,
) -> Result<CerrRepresentation> {
    let t = crate::builders::build_replaceall_nft(e, u, alphabet)?;
    preimage_transducer(&t, a, session)
}

/// Pre-image under replace-first.
pub fn preimage_replace(
    e: &Regex,
    u: &str,
    a: &Cefa,
    session: &Session,
    alphabet: &crate::alphabet::Alphabet,
) -> Result<CerrRepresentation> {
    let t = crate::builders::build_replace_nft(e, u, alphabet)?;
    preimage_transducer(&t, a, session)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Alphabet, CharClass};
    use crate::automata::CostString;
    use crate::builders::build_len_cefa;
    use crate::oracle::words_up_to;

    fn ints(values: &[i64]) -> Vec<Int> {
        values.iter().map(|&v| Int::from(v)).collect()
    }

    fn eval_terms(rep: &CerrRepresentation, slot_costs: &[Vec<Int>]) -> Vec<Int> {
        // Map each copy register (and int-input register) to its value, then
        // evaluate the reconstruction terms.
        let mut values: BTreeMap<RegisterId, Int> = BTreeMap::new();
        for (slot, costs) in slot_costs.iter().enumerate() {
            let regs: Vec<RegisterId> = rep.int_inputs[slot]
                .iter()
                .chain(&rep.copies[slot])
                .cloned()
                .collect();
            assert_eq!(regs.len(), costs.len());
            for (r, v) in regs.into_iter().zip(costs) {
                values.insert(r, v.clone());
            }
        }
        rep.terms
            .iter()
            .map(|t| t.evaluate(&values).unwrap())
            .collect()
    }

    #[test]
    fn concat_preimage_shape_and_membership() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = build_len_cefa(&s, &ab);
        let rep = preimage_concat(&a, &s);
        assert_eq!(rep.arity, 2);
        assert_eq!(rep.disjuncts.len(), a.num_states);
        // (("a",(1)), ("bb",(2))) is in the relation with term value 3.
        let d = &rep.disjuncts[0];
        assert!(d[0].accepts(&CostString::new("a", vec![1])).unwrap());
        assert!(d[1].accepts(&CostString::new("bb", vec![2])).unwrap());
        assert_eq!(eval_terms(&rep, &[ints(&[1]), ints(&[2])]), ints(&[3]));
        // ((eps,(0)), (eps,(0))) with term 0.
        assert!(d[0].accepts(&CostString::new("", vec![0])).unwrap());
        assert!(d[1].accepts(&CostString::new("", vec![0])).unwrap());
        assert_eq!(eval_terms(&rep, &[ints(&[0]), ints(&[0])]), ints(&[0]));
    }

    #[test]
    fn concat_preimage_covers_all_splits() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = build_len_cefa(&s, &ab);
        let rep = preimage_concat(&a, &s);
        let w = "abab";
        for cut in 0..=w.len() {
            let (y, z) = w.split_at(cut);
            let ok = rep.disjuncts.iter().any(|d| {
                d[0].accepts(&CostString::new(y, vec![y.len() as i64])).unwrap()
                    && d[1].accepts(&CostString::new(z, vec![z.len() as i64])).unwrap()
            });
            assert!(ok, "split {y:?} {z:?} not covered");
        }
    }

    #[test]
    fn reverse_preimage() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        // CEFA counting occurrences of 'b'.
        let a = Cefa::new(
            1,
            vec![s.fresh("r")],
            vec![
                (0, CharClass::singleton('a'), 0, ints(&[0])),
                (0, CharClass::singleton('b'), 0, ints(&[1])),
            ],
            [0],
            [0],
        )
        .unwrap();
        let rep = preimage_reverse(&a, &s);
        assert_eq!(rep.disjuncts.len(), 1);
        let b = &rep.disjuncts[0][0];
        // a accepts ("ab",(1)) so the pre-image accepts ("ba",(1)).
        assert!(b.accepts(&CostString::new("ba", vec![1])).unwrap());
        // Double reverse is the identity on accepted sets.
        let s2 = Session::new();
        let rep2 = preimage_reverse(b, &s2);
        let bb = &rep2.disjuncts[0][0];
        for w in words_up_to(&ab, 4) {
            assert_eq!(a.accepted_costs(&w), bb.accepted_costs(&w), "w={w}");
        }
    }

    #[test]
    fn substring_preimage_even_length_example() {
        // L = {(w, |w|) | w in (aa)*}: two states alternating on 'a'.
        let s = Session::new();
        let a = Cefa::new(
            2,
            vec![s.fresh("r1")],
            vec![
                (0, CharClass::singleton('a'), 1, ints(&[1])),
                (1, CharClass::singleton('a'), 0, ints(&[1])),
            ],
            [0],
            [0],
        )
        .unwrap();
        let rep = preimage_substring(&a, &s, &Alphabet::explicit("ab".chars()).unwrap());
        assert_eq!(rep.disjuncts.len(), 1);
        let b = &rep.disjuncts[0][0];
        // Accepts ("aaaa", (1,2,2)): window of length 2 starting at 1.
        assert!(b.accepts(&CostString::new("aaaa", vec![1, 2, 2])).unwrap());
        // Accepts ("aaa", (2,0,0)): empty window at position 2.
        assert!(b.accepts(&CostString::new("aaa", vec![2, 0, 0])).unwrap());
        // Rejects ("aaa", (1,3,3)): window would overrun the string.
        assert!(!b.accepts(&CostString::new("aaa", vec![1, 3, 3])).unwrap());
    }

    #[test]
    fn transducer_preimage_examples() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        // Identity transducer: pre-image accepts what `a` accepts.
        let id = Nft::identity(&ab);
        let a = build_len_cefa(&s, &ab);
        let rep = preimage_transducer(&id, &a, &s).unwrap();
        let b = &rep.disjuncts[0][0];
        for w in words_up_to(&ab, 4) {
            assert_eq!(a.accepted_costs(&w), b.accepted_costs(&w));
        }
        // Doubling transducer (a -> aa): pre-image of the length CEFA
        // accepts ("aa", (4)) and rejects ("aa", (3)).
        let doubling = Nft::new(
            1,
            vec![(0, CharClass::singleton('a'), 0, "aa".into())],
            [0],
            [0],
            true,
        )
        .unwrap();
        let rep = preimage_transducer(&doubling, &a, &s).unwrap();
        let b = &rep.disjuncts[0][0];
        assert!(b.accepts(&CostString::new("aa", vec![4])).unwrap());
        assert!(!b.accepts(&CostString::new("aa", vec![3])).unwrap());
        // Erase-all transducer with a accepting only (eps, 0):
        // everything maps to eps with zero cost.
        let erase = Nft::new(
            1,
            vec![(0, ab.full_class(), 0, String::new())],
            [0],
            [0],
            true,
        )
        .unwrap();
        let eps_only = Cefa::new(1, vec![s.fresh("r")], vec![], [0], [0]).unwrap();
        let rep = preimage_transducer(&erase, &eps_only, &s).unwrap();
        let b = &rep.disjuncts[0][0];
        assert!(b.accepts(&CostString::new("aaa", vec![0])).unwrap());
    }

    #[test]
    fn transducer_preimage_output_length_bound() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let long = Nft::new(
            1,
            vec![(0, CharClass::singleton('a'), 0, "a".repeat(100))],
            [0],
            [0],
            true,
        )
        .unwrap();
        let a = build_len_cefa(&s, &ab);
        assert!(matches!(
            preimage_transducer(&long, &a, &s),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn replaceall_preimage_examples() {
        let s = Session::new();
        let alpha = Alphabet::ascii_printable();
        // e = "script", u = "", L = lift(Sigma* script Sigma*).
        let e = crate::regex::parse_regex("script").unwrap();
        let contains = crate::builders::build_contains_substring_nfa("script", &alpha).unwrap();
        let a = Cefa::from_nfa(&contains);
        let rep = preimage_replaceall(&e, "", &a, &s, &alpha).unwrap();
        let b = &rep.disjuncts[0][0];
        // replaceall("scrscriptipt") = "script", which is in L.
        assert!(b.accepts(&CostString::new("scrscriptipt", vec![])).unwrap());
        // replaceall("script") = "", not in L.
        assert!(!b.accepts(&CostString::new("script", vec![])).unwrap());
        // e = (ab)+, u = "c", L = {acac}: pre-image contains "aababaab".
        let e = crate::regex::parse_regex("(ab)+").unwrap();
        let acac = Cefa::from_nfa(&crate::builders::build_const_nfa("acac"));
        let rep = preimage_replaceall(&e, "c", &acac, &s, &alpha).unwrap();
        let b = &rep.disjuncts[0][0];
        assert!(b.accepts(&CostString::new("aababaab", vec![])).unwrap());
    }

    #[test]
    fn register_freshness_across_slots() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = build_len_cefa(&s, &ab);
        let rep = preimage_concat(&a, &s);
        let r1 = &rep.copies[0];
        let r2 = &rep.copies[1];
        assert!(r1.iter().all(|r| !r2.contains(r)));
        assert!(r1.iter().all(|r| !a.registers.contains(r)));
        assert!(r2.iter().all(|r| !a.registers.contains(r)));
    }
}
