//! Constructions of the special automata the solver needs: constant and
//! substring-pattern NFAs, the length and indexOf CEFAs, and the
//! replaceAll/replace transducers.

use std::collections::{BTreeMap, BTreeSet};

use crate::alphabet::{Alphabet, CharClass};
use crate::automata::{Cefa, Int, Nfa, Nft, StateId};
use crate::error::{Error, Result};
use crate::ids::Session;
use crate::regex::{regex_to_nfa, Regex};

/// Groups per-letter edges that share a key into class-labelled edges.
fn compress<K: Ord + Clone>(edges: Vec<(char, K)>) -> Vec<(CharClass, K)> {
    let mut by_key: BTreeMap<K, Vec<u32>> = BTreeMap::new();
    for (c, k) in edges {
        by_key.entry(k).or_default().push(c as u32);
    }
    by_key
        .into_iter()
        .map(|(k, cps)| (CharClass::from_code_points(&cps), k))
        .collect()
}

/// NFA accepting exactly `{w}`.
pub fn build_const_nfa(w: &str) -> Nfa {
    let chars: Vec<char> = w.chars().collect();
    let transitions = chars
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, CharClass::singleton(c), i + 1))
        .collect();
    Nfa::new(chars.len() + 1, transitions, [0], [chars.len()])
        .expect("chain construction is valid")
}

/// NFA accepting `{w | v is not a factor of w}`, built as the KMP failure
/// automaton on the proper prefixes of `v` (transitions that would complete
/// a match are omitted). `v` must be nonempty.
pub fn build_avoid_substring_nfa(v: &str, alphabet: &Alphabet) -> Result<Nfa> {
    let vs: Vec<char> = v.chars().collect();
    if vs.is_empty() {
        return Err(Error::input("avoid-substring pattern must be nonempty"));
    }
    // State s = length of the longest prefix of v matching a suffix of the
    // input read so far; s ranges over 0..|v|-1.
    let num_states = vs.len();
    let mut transitions = Vec::new();
    for s in 0..num_states {
        let mut edges = Vec::new();
        for c in alphabet.letters() {
            // Longest j <= |v| with v[0..j] a suffix of v[0..s] + c.
            let mut next = None;
            for j in (1..=(s + 1).min(vs.len())).rev() {
                if vs[j - 1] == c && vs[..j - 1] == vs[s + 1 - j..s] {
                    next = Some(j);
                    break;
                }
            }
            let j = next.unwrap_or(0);
            if j < vs.len() {
                edges.push((c, j));
            }
        }
        for (label, dst) in compress(edges) {
            transitions.push((s, label, dst));
        }
    }
    Nfa::new(num_states, transitions, [0], 0..num_states)
}

/// NFA accepting `Σ* v Σ*`. `v` must be nonempty.
pub fn build_contains_substring_nfa(v: &str, alphabet: &Alphabet) -> Result<Nfa> {
    let vs: Vec<char> = v.chars().collect();
    if vs.is_empty() {
        return Err(Error::input("contains-substring pattern must be nonempty"));
    }
    let full = alphabet.full_class();
    let mut transitions = vec![(0, full.clone(), 0), (vs.len(), full, vs.len())];
    for (i, &c) in vs.iter().enumerate() {
        transitions.push((i, CharClass::singleton(c), i + 1));
    }
    Nfa::new(vs.len() + 1, transitions, [0], [vs.len()])
}

/// The length CEFA: a single state with a full-alphabet self-loop adding 1,
/// accepting exactly `{(w, |w|)}`.
pub fn build_len_cefa(session: &Session, alphabet: &Alphabet) -> Cefa {
    Cefa::new(
        1,
        vec![session.fresh("r1")],
        vec![(0, alphabet.full_class(), 0, vec![Int::from(1)])],
        [0],
        [0],
    )
    .expect("length CEFA is valid")
}

/// Window profile for a fixed pattern `v`: bit i records whether the prefix
/// v[0..=i] matches the last i+1 characters read. Length is exactly |v|-1;
/// only defined for |v| >= 2.
pub type WindowProfile = Vec<bool>;

/// Profile update after reading letter `b`.
pub fn uwp_update(pi: &[bool], b: char, v: &str) -> Result<WindowProfile> {
    let vs: Vec<char> = v.chars().collect();
    if vs.len() < 2 {
        return Err(Error::input("window profiles are defined for |v| >= 2"));
    }
    if pi.len() != vs.len() - 1 {
        return Err(Error::input(format!(
            "window profile of length {} for pattern of length {}",
            pi.len(),
            vs.len()
        )));
    }
    let mut out = vec![false; pi.len()];
    out[0] = b == vs[0];
    for i in 1..pi.len() {
        out[i] = pi[i - 1] && b == vs[i];
    }
    Ok(out)
}

/// The set of window profiles reachable from the seed profiles; expected to
/// have at most |v| elements.
pub fn reachable_window_profiles(v: &str, alphabet: &Alphabet) -> Result<BTreeSet<WindowProfile>> {
    let vs: Vec<char> = v.chars().collect();
    if vs.len() < 2 {
        return Err(Error::input("window profiles are defined for |v| >= 2"));
    }
    let mut set: BTreeSet<WindowProfile> = BTreeSet::new();
    let mut work: Vec<WindowProfile> = Vec::new();
    for c in alphabet.letters() {
        let mut seed = vec![false; vs.len() - 1];
        seed[0] = c == vs[0];
        if set.insert(seed.clone()) {
            work.push(seed);
        }
    }
    while let Some(pi) = work.pop() {
        for c in alphabet.letters() {
            let next = uwp_update(&pi, c, v)?;
            if set.insert(next.clone()) {
                work.push(next);
            }
        }
    }
    Ok(set)
}

/// The indexOf CEFA for pattern `v`: registers (r1, r2), accepting exactly
/// `{(w, (n, indexof_v(w, n))) | 0 <= n <= indexof_v(w, n) < |w|}`. Corner
/// cases (no occurrence, out-of-range start) are handled by the engine's
/// case splits, not here.
pub fn build_indexof_cefa(v: &str, session: &Session, alphabet: &Alphabet) -> Result<Cefa> {
    let vs: Vec<char> = v.chars().collect();
    if vs.is_empty() {
        return Err(Error::input("indexof pattern must be nonempty"));
    }
    let registers = vec![session.fresh("r1"), session.fresh("r2")];
    let upd = |a: i64, b: i64| vec![Int::from(a), Int::from(b)];
    if vs.len() == 1 {
        // Three states: 0 = before the start position, 1 = at or after the
        // start with no occurrence yet, 2 = occurrence found.
        let a = vs[0];
        let full = alphabet.full_class();
        let not_a = alphabet.class_without(&[a]);
        let mut transitions = vec![
            (0, full.clone(), 0, upd(1, 1)),
            (0, CharClass::singleton(a), 2, upd(0, 0)),
            (1, CharClass::singleton(a), 2, upd(0, 0)),
            (2, full, 2, upd(0, 0)),
        ];
        if !not_a.is_empty() {
            transitions.push((0, not_a.clone(), 1, upd(0, 1)));
            transitions.push((1, not_a, 1, upd(0, 1)));
        }
        return Cefa::new(3, registers, transitions, [0], [2]);
    }

    // Window-profile construction. States: q0, q1 (match found), reachable
    // profiles pi, and match-tracking pairs (pi, j) for j in 1..=|v|-1.
    let n = vs.len();
    #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum St {
        Q0,
        Q1,
        Profile(WindowProfile),
        Tracking(WindowProfile, usize),
    }
    fn intern<St: Ord + Clone>(
        st: St,
        work: &mut Vec<St>,
        index: &mut BTreeMap<St, StateId>,
    ) -> StateId {
        if let Some(&id) = index.get(&st) {
            return id;
        }
        let id = index.len();
        index.insert(st.clone(), id);
        work.push(st);
        id
    }
    let mut index: BTreeMap<St, StateId> = BTreeMap::new();
    let mut work: Vec<St> = Vec::new();
    let q0 = intern(St::Q0, &mut work, &mut index);
    let mut edges: Vec<(StateId, char, StateId, (i64, i64))> = Vec::new();
    while let Some(st) = work.pop() {
        let src = index[&st];
        match &st {
            St::Q0 => {
                for c in alphabet.letters() {
                    // Stay before the start position.
                    edges.push((src, c, q0, (1, 1)));
                    // Consume the letter at the start position and begin
                    // scanning for the first occurrence.
                    let mut seed = vec![false; n - 1];
                    seed[0] = c == vs[0];
                    let dst = intern(St::Profile(seed.clone()), &mut work, &mut index);
                    edges.push((src, c, dst, (0, 0)));
                    // The occurrence may begin exactly at the start position.
                    if c == vs[0] {
                        let dst = intern(St::Tracking(seed, 1), &mut work, &mut index);
                        edges.push((src, c, dst, (0, 0)));
                    }
                }
            }
            St::Q1 => {
                for c in alphabet.letters() {
                    edges.push((src, c, src, (0, 0)));
                }
            }
            St::Profile(pi) => {
                for c in alphabet.letters() {
                    // Moving past this position is only allowed if it does
                    // not complete an occurrence of v.
                    if pi[n - 2] && c == vs[n - 1] {
                        continue;
                    }
                    let next = uwp_update(pi, c, v)?;
                    let dst = intern(St::Profile(next.clone()), &mut work, &mut index);
                    edges.push((src, c, dst, (0, 1)));
                    if c == vs[0] {
                        let dst = intern(St::Tracking(next, 1), &mut work, &mut index);
                        edges.push((src, c, dst, (0, 1)));
                    }
                }
            }
            St::Tracking(pi, j) => {
                if *j == n - 1 {
                    let dst = intern(St::Q1, &mut work, &mut index);
                    edges.push((src, vs[n - 1], dst, (0, 0)));
                } else {
                    for c in alphabet.letters() {
                        if c != vs[*j] {
                            continue;
                        }
                        // An occurrence completing here would have started
                        // before the tracked one: the tracked match would
                        // not be the first.
                        if pi[n - 2] && c == vs[n - 1] {
                            continue;
                        }
                        let next = uwp_update(pi, c, v)?;
                        let dst = intern(St::Tracking(next, j + 1), &mut work, &mut index);
                        edges.push((src, c, dst, (0, 0)));
                    }
                }
            }
        }
    }
    let q1 = match index.get(&St::Q1) {
        Some(&id) => id,
        // v cannot occur over this alphabet; the accepted set is empty.
        None => {
            let id = index.len();
            index.insert(St::Q1, id);
            id
        }
    };
    let mut grouped: BTreeMap<(StateId, StateId, (i64, i64)), Vec<char>> = BTreeMap::new();
    for (src, c, dst, u) in edges {
        grouped.entry((src, dst, u)).or_default().push(c);
    }
    let transitions: Vec<(StateId, CharClass, StateId, Vec<Int>)> = grouped
        .into_iter()
        .map(|((src, dst, (a, b)), cs)| {
            let cps: Vec<u32> = cs.into_iter().map(|c| c as u32).collect();
            (src, CharClass::from_code_points(&cps), dst, upd(a, b))
        })
        .collect();
    let cefa = Cefa::new(index.len(), registers, transitions, [q0], [q1])?;
    Ok(cefa.trim())
}

// Scanner states of the replaceAll/replace transducers. `violations` tracks
// NFA runs that must never accept: runs from positions where the scanner
// decided no match starts, and continuations of a taken match that would
// make it longer than chosen.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum ScanSt {
    Scan(BTreeSet<StateId>),
    Match(BTreeSet<StateId>, BTreeSet<StateId>),
    /// After the first replacement (replace-first only): copy mode, with
    /// violation tracking still live.
    After(BTreeSet<StateId>),
}

struct ScanBuilder {
    nfa: Nfa,
    letters: Vec<char>,
    replacement: String,
    first_only: bool,
    index: BTreeMap<ScanSt, StateId>,
    work: Vec<ScanSt>,
    edges: Vec<(StateId, char, StateId, String)>,
}

impl ScanBuilder {
    fn step(&self, from: &BTreeSet<StateId>, c: char) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        for t in &self.nfa.transitions {
            if from.contains(&t.src) && t.label.contains(c) {
                out.insert(t.dst);
            }
        }
        out
    }

    fn hits_final(&self, set: &BTreeSet<StateId>) -> bool {
        set.iter().any(|q| self.nfa.final_states.contains(q))
    }

    fn intern(&mut self, st: ScanSt) -> StateId {
        if let Some(&id) = self.index.get(&st) {
            return id;
        }
        let id = self.index.len();
        self.index.insert(st.clone(), id);
        self.work.push(st);
        id
    }

    fn build(mut self) -> Result<Nft> {
        let start = self.intern(ScanSt::Scan(BTreeSet::new()));
        let initial_states = self.nfa.initial.clone();
        while let Some(st) = self.work.pop() {
            if self.index.len() > 200_000 {
                return Err(Error::ResourceLimit(
                    "replaceAll transducer construction exceeded 200000 states".into(),
                ));
            }
            let src = self.index[&st];
            for c in self.letters.clone() {
                match &st {
                    ScanSt::Scan(v) => {
                        // Copy: decide no match starts here; track the run
                        // from this position among the violations.
                        let mut watched = v.clone();
                        watched.extend(initial_states.iter().copied());
                        let copied = self.step(&watched, c);
                        if !self.hits_final(&copied) {
                            let dst = self.intern(ScanSt::Scan(copied));
                            self.edges.push((src, c, dst, c.to_string()));
                        }
                        // Take a match starting here.
                        let v_stepped = self.step(v, c);
                        if !self.hits_final(&v_stepped) {
                            let m = self.step(&initial_states, c);
                            if !m.is_empty() {
                                if self.hits_final(&m) {
                                    // One-letter match ends immediately; its
                                    // continuations join the violation set so
                                    // a longer match at this position kills
                                    // the run.
                                    let mut after = v_stepped.clone();
                                    after.extend(m.iter().copied());
                                    let dst = self.intern(self.after_match(after));
                                    self.edges.push((src, c, dst, self.replacement.clone()));
                                }
                                let dst = self.intern(ScanSt::Match(v_stepped, m));
                                self.edges.push((src, c, dst, self.replacement.clone()));
                            }
                        }
                    }
                    ScanSt::Match(v, m) => {
                        let v_stepped = self.step(v, c);
                        if self.hits_final(&v_stepped) {
                            continue;
                        }
                        let m_stepped = self.step(m, c);
                        if m_stepped.is_empty() {
                            continue;
                        }
                        if self.hits_final(&m_stepped) {
                            let mut after = v_stepped.clone();
                            after.extend(m_stepped.iter().copied());
                            let dst = self.intern(self.after_match(after));
                            self.edges.push((src, c, dst, String::new()));
                        }
                        let dst = self.intern(ScanSt::Match(v_stepped, m_stepped));
                        self.edges.push((src, c, dst, String::new()));
                    }
                    ScanSt::After(v) => {
                        let stepped = self.step(v, c);
                        if !self.hits_final(&stepped) {
                            let dst = self.intern(ScanSt::After(stepped));
                            self.edges.push((src, c, dst, c.to_string()));
                        }
                    }
                }
            }
        }
        let final_states: Vec<StateId> = self
            .index
            .iter()
            .filter(|(st, _)| matches!(st, ScanSt::Scan(_) | ScanSt::After(_)))
            .map(|(_, &id)| id)
            .collect();
        let mut grouped: BTreeMap<(StateId, StateId, String), Vec<u32>> = BTreeMap::new();
        let mut copy_edges: Vec<(StateId, CharClass, StateId, String)> = Vec::new();
        for (src, c, dst, out) in self.edges {
            if out.chars().eq(std::iter::once(c)) {
                // Copy edges keep per-letter labels (output depends on c).
                copy_edges.push((src, CharClass::singleton(c), dst, out));
            } else {
                grouped.entry((src, dst, out)).or_default().push(c as u32);
            }
        }
        let mut transitions: Vec<(StateId, CharClass, StateId, String)> = grouped
            .into_iter()
            .map(|((src, dst, out), cps)| (src, CharClass::from_code_points(&cps), dst, out))
            .collect();
        transitions.extend(copy_edges);
        Nft::new(self.index.len(), transitions, [start], final_states, true)
    }

    fn after_match(&self, violations: BTreeSet<StateId>) -> ScanSt {
        if self.first_only {
            ScanSt::After(violations)
        } else {
            ScanSt::Scan(violations)
        }
    }
}

fn build_scan_nft(
    e: &Regex,
    u: &str,
    alphabet: &Alphabet,
    first_only: bool,
) -> Result<Nft> {
    let nfa = regex_to_nfa(e, alphabet);
    if nfa.initial.iter().any(|q| nfa.final_states.contains(q)) {
        return Err(Error::input(
            "replacement pattern must not match the empty string",
        ));
    }
    if !alphabet.contains_str(u) {
        return Err(Error::input("replacement string outside the alphabet"));
    }
    ScanBuilder {
        nfa,
        letters: alphabet.letters(),
        replacement: u.to_string(),
        first_only,
        index: BTreeMap::new(),
        work: Vec::new(),
        edges: Vec::new(),
    }
    .build()
}

/// Functional transducer computing replaceall_{e,u} (leftmost-longest).
/// The pattern must not match the empty string.
pub fn build_replaceall_nft(e: &Regex, u: &str, alphabet: &Alphabet) -> Result<Nft> {
    build_scan_nft(e, u, alphabet, false)
}

/// Functional transducer replacing only the first leftmost-longest match;
/// identity if there is no match.
pub fn build_replace_nft(e: &Regex, u: &str, alphabet: &Alphabet) -> Result<Nft> {
    build_scan_nft(e, u, alphabet, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::CostString;
    use crate::oracle::{self, words_up_to};
    use crate::regex::parse_regex;

    fn ab() -> Alphabet {
        Alphabet::explicit("ab".chars()).unwrap()
    }

    #[test]
    fn const_nfa() {
        let n = build_const_nfa("");
        assert!(n.accepts(""));
        assert!(!n.accepts("a"));
        let n = build_const_nfa("ab");
        assert!(n.accepts("ab"));
        assert!(!n.accepts("a"));
        assert!(!n.accepts("abb"));
    }

    #[test]
    fn avoid_substring() {
        let a = ab();
        let n = build_avoid_substring_nfa("ab", &a).unwrap();
        assert!(n.accepts("ba"));
        assert!(n.accepts("aaa"));
        assert!(!n.accepts("aab"));
        let n = build_avoid_substring_nfa("aa", &a).unwrap();
        assert!(!n.accepts("aa"));
        assert!(n.accepts("aba"));
        assert!(build_avoid_substring_nfa("", &a).is_err());
    }

    #[test]
    fn avoid_matches_naive_search_exhaustively() {
        let a = ab();
        for v in ["a", "ab", "aa", "aba", "abab"] {
            let n = build_avoid_substring_nfa(v, &a).unwrap();
            for w in words_up_to(&a, 6) {
                assert_eq!(n.accepts(&w), !w.contains(v), "v={v} w={w}");
            }
        }
    }

    #[test]
    fn contains_substring() {
        let a = Alphabet::ascii_printable();
        let n = build_contains_substring_nfa("script", &a).unwrap();
        assert!(n.accepts("xscripty"));
        assert!(n.accepts("script"));
        assert!(!n.accepts("scrip"));
        assert!(build_contains_substring_nfa("", &a).is_err());
    }

    #[test]
    fn avoid_and_contains_partition() {
        let a = ab();
        for v in ["a", "ab", "ba", "aab"] {
            let avoid = build_avoid_substring_nfa(v, &a).unwrap();
            let contains = build_contains_substring_nfa(v, &a).unwrap();
            for w in words_up_to(&a, 6) {
                assert_ne!(avoid.accepts(&w), contains.accepts(&w), "v={v} w={w}");
            }
        }
    }

    #[test]
    fn len_cefa() {
        let s = Session::new();
        let a = build_len_cefa(&s, &ab());
        assert!(a.accepts(&CostString::new("", vec![0])).unwrap());
        assert!(a.accepts(&CostString::new("aba", vec![3])).unwrap());
        assert!(!a.accepts(&CostString::new("a", vec![0])).unwrap());
    }

    #[test]
    fn uwp_examples_for_aba() {
        // v = "aba", profiles of length 2.
        let v = "aba";
        assert_eq!(uwp_update(&[false, false], 'a', v).unwrap(), vec![true, false]);
        assert_eq!(uwp_update(&[true, false], 'b', v).unwrap(), vec![false, true]);
        assert_eq!(uwp_update(&[true, true], 'a', v).unwrap(), vec![true, false]);
        assert!(uwp_update(&[false], 'a', v).is_err());
        assert!(uwp_update(&[], 'a', "a").is_err());
    }

    #[test]
    fn uwp_equals_naive_recomputation() {
        // Profile after reading u = prefix bits: pi[i] = last i+1 chars == v[0..=i].
        let a = ab();
        for v in ["ab", "aba", "abab", "aabb"] {
            let vs: Vec<char> = v.chars().collect();
            for w in words_up_to(&a, 5) {
                let ws: Vec<char> = w.chars().collect();
                let mut pi = vec![false; vs.len() - 1];
                for (k, &c) in ws.iter().enumerate() {
                    pi = uwp_update(&pi, c, v).unwrap();
                    let naive: Vec<bool> = (0..vs.len() - 1)
                        .map(|i| k + 1 > i && ws[k - i..=k] == vs[..=i])
                        .collect();
                    assert_eq!(pi, naive, "v={v} w={w} k={k}");
                }
            }
        }
    }

    #[test]
    fn window_profile_count_bound() {
        // Expected observation from the construction: at most |v| reachable
        // profiles.
        let a = ab();
        for v in ["ab", "aba", "abab", "aabab", "bbbbb"] {
            let wp = reachable_window_profiles(v, &a).unwrap();
            assert!(
                wp.len() <= v.len(),
                "|WP_{v}| = {} exceeds |v| = {}",
                wp.len(),
                v.len()
            );
        }
    }

    #[test]
    fn indexof_cefa_examples() {
        let s = Session::new();
        let a = build_indexof_cefa("ab", &s, &ab()).unwrap();
        // indexof_ab("aaba", -1) clamps to 0 and indexof_ab("aaba", 1) = 1.
        assert!(a.accepts(&CostString::new("aaba", vec![0, 1])).unwrap());
        assert!(a.accepts(&CostString::new("aaba", vec![1, 1])).unwrap());
        // indexof_ab("aaba", 2) = -1: no accepted pair with first entry 2.
        for m in 0..6 {
            assert!(!a.accepts(&CostString::new("aaba", vec![2, m])).unwrap());
        }
    }

    #[test]
    fn indexof_cefa_matches_oracle_exhaustively() {
        let s = Session::new();
        let alpha = ab();
        for v in ["a", "b", "ab", "aa", "aba", "aab"] {
            let cefa = build_indexof_cefa(v, &s, &alpha).unwrap();
            for w in words_up_to(&alpha, 6) {
                let accepted = cefa.accepted_costs(&w);
                let mut expected = BTreeSet::new();
                for n in 0..w.chars().count() as i64 {
                    let m = oracle::eval_indexof(v, &w, &Int::from(n)).unwrap();
                    if m >= Int::from(n) {
                        expected.insert(vec![Int::from(n), m]);
                    }
                }
                assert_eq!(accepted, expected, "v={v} w={w}");
                // No accepted pair has output < start.
                for pair in &accepted {
                    assert!(pair[1] >= pair[0]);
                }
            }
        }
    }

    #[test]
    fn replaceall_nft_matches_worked_example() {
        let alpha = Alphabet::explicit("abc".chars()).unwrap();
        let e = parse_regex("(ab)+").unwrap();
        let t = build_replaceall_nft(&e, "c", &alpha).unwrap();
        assert_eq!(
            oracle::run_transducer(&t, "aababaab").unwrap(),
            Some("acac".to_string())
        );
        assert_eq!(oracle::run_transducer(&t, "ba").unwrap(), Some("ba".into()));
        assert_eq!(oracle::run_transducer(&t, "").unwrap(), Some("".into()));
    }

    #[test]
    fn replaceall_nft_rejects_nullable_pattern() {
        let alpha = ab();
        assert!(build_replaceall_nft(&parse_regex("a*").unwrap(), "b", &alpha).is_err());
        assert!(build_replaceall_nft(&parse_regex("a?").unwrap(), "b", &alpha).is_err());
    }

    #[test]
    fn replaceall_nft_agrees_with_oracle() {
        let alpha = ab();
        for pat in ["a", "ab", "(ab)+", "a(a|b)b", "aa|b"] {
            let e = parse_regex(pat).unwrap();
            for u in ["", "b", "ba"] {
                let t = build_replaceall_nft(&e, u, &alpha).unwrap();
                for w in words_up_to(&alpha, 7) {
                    let expected = oracle::eval_replaceall(&e, u, &w).unwrap();
                    let got = oracle::run_transducer(&t, &w).unwrap();
                    assert_eq!(got, Some(expected), "pat={pat} u={u} w={w}");
                }
            }
        }
    }

    #[test]
    fn replace_first_nft_agrees_with_oracle() {
        let alpha = ab();
        for pat in ["ab", "(ab)+", "a|bb"] {
            let e = parse_regex(pat).unwrap();
            for u in ["", "x"] {
                let alpha_x = Alphabet::explicit("abx".chars()).unwrap();
                let t = build_replace_nft(&e, u, &alpha_x).unwrap();
                for w in words_up_to(&alpha, 6) {
                    let expected = oracle::eval_replace(&e, u, &w).unwrap();
                    let got = oracle::run_transducer(&t, &w).unwrap();
                    assert_eq!(got, Some(expected), "pat={pat} u={u} w={w}");
                }
            }
        }
    }

    #[test]
    fn replace_examples() {
        let alpha = Alphabet::explicit("abx".chars()).unwrap();
        let e = parse_regex("ab").unwrap();
        let t = build_replace_nft(&e, "x", &alpha).unwrap();
        assert_eq!(oracle::run_transducer(&t, "abab").unwrap(), Some("xab".into()));
        assert_eq!(oracle::run_transducer(&t, "bb").unwrap(), Some("bb".into()));
        assert_eq!(oracle::run_transducer(&t, "aab").unwrap(), Some("ax".into()));
    }
}
