//! Reference semantics: direct evaluators for the string operations, a
//! forward interpreter for validating models, and a bounded brute-force
//! solver for differential testing.
//!
//! Everything here is written for clarity over speed and is independent of
//! the automata-based solving path it is used to check (the regex matcher is
//! a recursive evaluator, not a compiled NFA).

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num::{Signed, ToPrimitive};

use crate::alphabet::Alphabet;
use crate::automata::{Int, Nft};
use crate::error::{Error, Result};
use crate::program::{
    Atom, ConcreteAssignment, Formula, IntTerm, SlintProgram, Statement, StrAutomaton, StrFun,
};
use crate::regex::Regex;

/// substring(y, t1, t2): empty if t1 < 0, t1 >= |y|, or t2 <= 0; otherwise
/// the characters from position t1 up to position min(t1+t2, |y|) - 1.
pub fn eval_substring(y: &str, t1: &Int, t2: &Int) -> String {
    let chars: Vec<char> = y.chars().collect();
    let n = Int::from(chars.len());
    if t1.is_negative() || *t1 >= n || !t2.is_positive() {
        return String::new();
    }
    let start = t1.to_usize().expect("0 <= t1 < |y|");
    let end = (t1 + t2).min(n).to_usize().expect("bounded by |y|");
    chars[start..end].iter().collect()
}

/// indexof_v(x, i): starting position of the first occurrence of `v` in `x`
/// at position >= i, clamping negative `i` to 0; -1 if i >= |x| or there is
/// no such occurrence. `v` must be nonempty.
pub fn eval_indexof(v: &str, x: &str, i: &Int) -> Result<Int> {
    eval_indexof_with(v, x, i, false)
}

/// Like [`eval_indexof`], but with SMT-LIB-strict treatment of negative
/// start positions (returns -1 instead of clamping to 0).
pub fn eval_indexof_with(v: &str, x: &str, i: &Int, smtlib_strict: bool) -> Result<Int> {
    if v.is_empty() {
        return Err(Error::input("indexof pattern must be nonempty"));
    }
    if smtlib_strict && i.is_negative() {
        return Ok(Int::from(-1));
    }
    let start = if i.is_negative() { Int::from(0) } else { i.clone() };
    let xs: Vec<char> = x.chars().collect();
    let vs: Vec<char> = v.chars().collect();
    if start >= Int::from(xs.len()) {
        return Ok(Int::from(-1));
    }
    let start = start.to_usize().expect("0 <= start < |x|");
    for p in start..xs.len() {
        if p + vs.len() <= xs.len() && xs[p..p + vs.len()] == vs[..] {
            return Ok(Int::from(p));
        }
    }
    Ok(Int::from(-1))
}

/// End positions of matches of `e` in `w` starting at `pos` (recursive
/// evaluation; star closure by fixpoint).
pub fn match_ends(e: &Regex, w: &[char], pos: usize) -> BTreeSet<usize> {
    match e {
        Regex::EmptySet => BTreeSet::new(),
        Regex::Epsilon => BTreeSet::from([pos]),
        Regex::Class(c) => {
            if pos < w.len() && c.contains(w[pos]) {
                BTreeSet::from([pos + 1])
            } else {
                BTreeSet::new()
            }
        }
        Regex::Concat(parts) => {
            let mut ends = BTreeSet::from([pos]);
            for part in parts {
                let mut next = BTreeSet::new();
                for &p in &ends {
                    next.extend(match_ends(part, w, p));
                }
                ends = next;
                if ends.is_empty() {
                    break;
                }
            }
            ends
        }
        Regex::Union(parts) => parts.iter().flat_map(|p| match_ends(p, w, pos)).collect(),
        Regex::Star(inner) => {
            let mut ends = BTreeSet::from([pos]);
            loop {
                let mut grew = false;
                for p in ends.clone() {
                    for n in match_ends(inner, w, p) {
                        grew |= ends.insert(n);
                    }
                }
                if !grew {
                    return ends;
                }
            }
        }
        Regex::Plus(inner) => {
            let star = Regex::Star(inner.clone());
            let mut out = BTreeSet::new();
            for p in match_ends(inner, w, pos) {
                out.extend(match_ends(&star, w, p));
            }
            out
        }
        Regex::Opt(inner) => {
            let mut out = match_ends(inner, w, pos);
            out.insert(pos);
            out
        }
    }
}

fn require_no_epsilon(e: &Regex) -> Result<()> {
    if e.nullable() {
        return Err(Error::input(
            "replacement pattern must not match the empty string",
        ));
    }
    Ok(())
}

/// replaceall: scan left to right; at the first position where a match of
/// `e` starts, take the longest match there, emit `u`, and resume after the
/// match; otherwise copy one character.
pub fn eval_replaceall(e: &Regex, u: &str, x: &str) -> Result<String> {
    require_no_epsilon(e)?;
    Ok(scan_replace(e, u, x, None))
}

/// replace: like replaceall but only the first leftmost-longest match is
/// replaced; identity if there is no match.
pub fn eval_replace(e: &Regex, u: &str, x: &str) -> Result<String> {
    require_no_epsilon(e)?;
    Ok(scan_replace(e, u, x, Some(1)))
}

fn scan_replace(e: &Regex, u: &str, x: &str, mut budget: Option<usize>) -> String {
    let chars: Vec<char> = x.chars().collect();
    let mut out = String::new();
    let mut pos = 0;
    while pos < chars.len() {
        if budget == Some(0) {
            out.extend(&chars[pos..]);
            break;
        }
        let longest = match_ends(e, &chars, pos).into_iter().max();
        match longest {
            Some(end) if end > pos => {
                out.push_str(u);
                pos = end;
                if let Some(b) = budget.as_mut() {
                    *b -= 1;
                }
            }
            _ => {
                out.push(chars[pos]);
                pos += 1;
            }
        }
    }
    out
}

/// Output of an accepting run of `t` on `w`, if any. For transducers
/// declared functional, finding two distinct outputs is reported as a
/// functionality violation (the flag is user-declared, so this is a
/// diagnostic, not a guarantee).
pub fn run_transducer(t: &Nft, w: &str) -> Result<Option<String>> {
    let chars: Vec<char> = w.chars().collect();
    // frontier[q] = distinct run outputs reaching state q on the prefix read
    // so far.
    let mut frontier: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for &q in &t.initial {
        frontier.entry(q).or_default().insert(String::new());
    }
    for &c in &chars {
        let mut next: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for (q, outs) in &frontier {
            for tr in t.transitions.iter().filter(|tr| tr.src == *q) {
                if tr.label.contains(c) {
                    let entry = next.entry(tr.dst).or_default();
                    for o in outs {
                        entry.insert(format!("{o}{}", tr.output));
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let mut outputs: BTreeSet<String> = BTreeSet::new();
    for &q in &t.final_states {
        if let Some(outs) = frontier.get(&q) {
            outputs.extend(outs.iter().cloned());
        }
    }
    if t.functional && outputs.len() > 1 {
        let mut it = outputs.iter();
        return Err(Error::input(format!(
            "functionality violation: transducer maps {w:?} to both {:?} and {:?}",
            it.next().unwrap(),
            it.next().unwrap()
        )));
    }
    Ok(outputs.into_iter().next())
}

/// Outcome of forward interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// Index of the first failing statement.
    Infeasible { at_statement: usize },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

struct Env {
    strings: BTreeMap<String, String>,
    ints: BTreeMap<String, Int>,
    smtlib_strict: bool,
}

impl Env {
    fn string(&self, v: &str) -> Result<&str> {
        self.strings
            .get(v)
            .map(String::as_str)
            .ok_or_else(|| Error::input(format!("assignment does not cover string variable '{v}'")))
    }

    fn int(&self, v: &str) -> Result<&Int> {
        self.ints
            .get(v)
            .ok_or_else(|| Error::input(format!("assignment does not cover integer variable '{v}'")))
    }

    fn eval_term(&self, t: &IntTerm) -> Result<Int> {
        match t {
            IntTerm::Const(c) => Ok(c.clone()),
            IntTerm::Var(v) => self.int(v).cloned(),
            IntTerm::Length(x) => Ok(Int::from(self.string(x)?.chars().count())),
            IntTerm::IndexOf { pattern, arg, start } => {
                let s = self.eval_term(start)?;
                eval_indexof_with(pattern, self.string(arg)?, &s, self.smtlib_strict)
            }
            IntTerm::Mul(c, inner) => Ok(c * self.eval_term(inner)?),
            IntTerm::Add(a, b) => Ok(self.eval_term(a)? + self.eval_term(b)?),
        }
    }

    fn eval_formula(&self, f: &Formula) -> Result<bool> {
        match f {
            Formula::Atom(a) => self.eval_atom(a),
            Formula::And(fs) => {
                for g in fs {
                    if !self.eval_formula(g)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for g in fs {
                    if self.eval_formula(g)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn eval_atom(&self, a: &Atom) -> Result<bool> {
        match a {
            Atom::Cmp { lhs, rel, rhs } => Ok(rel.eval(&self.eval_term(lhs)?, &self.eval_term(rhs)?)),
            Atom::InAutomaton { var, automaton } => {
                let w = self.string(var)?;
                match automaton {
                    StrAutomaton::Nfa(nfa) => Ok(nfa.accepts(w)),
                    // A CEFA assertion binds each register to the integer
                    // variable it was renamed to; look the values up by name.
                    StrAutomaton::Cefa(cefa) => {
                        let costs: Result<Vec<Int>> = cefa
                            .registers
                            .iter()
                            .map(|r| self.int(r.name()).cloned())
                            .collect();
                        cefa.accepts(&crate::automata::CostString {
                            word: w.to_string(),
                            costs: costs?,
                        })
                    }
                }
            }
        }
    }
}

/// Executes `p` under `a`, in order: feasible iff every assertion holds and
/// every transducer application produces an output.
pub fn interpret_program(p: &SlintProgram, a: &ConcreteAssignment) -> Result<Feasibility> {
    interpret_program_with(p, a, false)
}

/// The string environment after a feasible run (inputs and computed
/// variables); `None` when the run is infeasible.
pub fn final_environment(
    p: &SlintProgram,
    a: &ConcreteAssignment,
    smtlib_strict: bool,
) -> Result<Option<BTreeMap<String, String>>> {
    match run_program(p, a, smtlib_strict)? {
        (Feasibility::Feasible, env) => Ok(Some(env)),
        _ => Ok(None),
    }
}

pub fn interpret_program_with(
    p: &SlintProgram,
    a: &ConcreteAssignment,
    smtlib_strict: bool,
) -> Result<Feasibility> {
    Ok(run_program(p, a, smtlib_strict)?.0)
}

fn run_program(
    p: &SlintProgram,
    a: &ConcreteAssignment,
    smtlib_strict: bool,
) -> Result<(Feasibility, BTreeMap<String, String>)> {
    let mut env = Env {
        strings: a.strings.clone(),
        ints: a.ints.clone(),
        smtlib_strict,
    };
    for (k, st) in p.statements.iter().enumerate() {
        match st {
            Statement::Assign { var, fun } => {
                let value = match fun {
                    StrFun::Concat(y, z) => {
                        let mut s = env.string(y)?.to_string();
                        s.push_str(env.string(z)?);
                        s
                    }
                    StrFun::ReplaceAll {
                        pattern,
                        replacement,
                        arg,
                    } => eval_replaceall(pattern, replacement, env.string(arg)?)?,
                    StrFun::Replace {
                        pattern,
                        replacement,
                        arg,
                    } => eval_replace(pattern, replacement, env.string(arg)?)?,
                    StrFun::Reverse(y) => env.string(y)?.chars().rev().collect(),
                    StrFun::Transduce { transducer, arg } => {
                        match run_transducer(transducer, env.string(arg)?)? {
                            Some(out) => out,
                            None => {
                                return Ok((
                                    Feasibility::Infeasible { at_statement: k },
                                    env.strings,
                                ))
                            }
                        }
                    }
                    StrFun::Substring { arg, start, len } => {
                        let t1 = env.eval_term(start)?;
                        let t2 = env.eval_term(len)?;
                        eval_substring(env.string(arg)?, &t1, &t2)
                    }
                };
                env.strings.insert(var.clone(), value);
            }
            Statement::Assert(f) => {
                if !env.eval_formula(f)? {
                    return Ok((Feasibility::Infeasible { at_statement: k }, env.strings));
                }
            }
        }
    }
    Ok((Feasibility::Feasible, env.strings))
}

/// All strings over `alphabet` up to `max_len`, in length-then-lexicographic
/// order.
pub fn words_up_to(alphabet: &Alphabet, max_len: usize) -> Vec<String> {
    let letters = alphabet.letters();
    let mut words = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for w in &layer {
            for &c in &letters {
                next.push(format!("{w}{c}"));
            }
        }
        words.extend(next.iter().cloned());
        layer = next;
    }
    words
}

/// Exhaustive search over input assignments: strings up to `max_len`,
/// integers in `[int_lo, int_hi]`. Returns the first witness in canonical
/// (length-then-lexicographic, box row-major) order.
pub fn brute_force_solve(
    p: &SlintProgram,
    alphabet: &Alphabet,
    max_len: usize,
    int_lo: i64,
    int_hi: i64,
) -> Result<Option<ConcreteAssignment>> {
    let svars = p.input_string_vars();
    let ivars = p.int_vars();
    let words = words_up_to(alphabet, max_len);
    let ints: Vec<Int> = (int_lo..=int_hi).map(Int::from).collect();

    let mut s_idx = vec![0usize; svars.len()];
    loop {
        let mut i_idx = vec![0usize; ivars.len()];
        loop {
            let assignment = ConcreteAssignment {
                strings: svars
                    .iter()
                    .zip(&s_idx)
                    .map(|(v, &i)| (v.clone(), words[i].clone()))
                    .collect(),
                ints: ivars
                    .iter()
                    .zip(&i_idx)
                    .map(|(v, &i)| (v.clone(), ints[i].clone()))
                    .collect(),
            };
            if interpret_program(p, &assignment)?.is_feasible() {
                return Ok(Some(assignment));
            }
            if ivars.is_empty() || !advance(&mut i_idx, ints.len()) {
                break;
            }
        }
        if svars.is_empty() || !advance(&mut s_idx, words.len()) {
            break;
        }
    }
    Ok(None)
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::CharClass;
    use crate::program::Rel;
    use crate::regex::parse_regex;
    use std::sync::Arc;

    fn int(v: i64) -> Int {
        Int::from(v)
    }

    #[test]
    fn substring_semantics() {
        assert_eq!(eval_substring("abaab", &int(-1), &int(1)), "");
        assert_eq!(eval_substring("abaab", &int(3), &int(2)), "ab");
        assert_eq!(eval_substring("abaab", &int(3), &int(3)), "ab");
        assert_eq!(eval_substring("abaab", &int(3), &int(0)), "");
        // t2 < 0 returns the empty string; t1 = |y| too.
        assert_eq!(eval_substring("abaab", &int(2), &int(-3)), "");
        assert_eq!(eval_substring("abaab", &int(5), &int(1)), "");
        // Single character: substring(y, i, 1) = y[i].
        assert_eq!(eval_substring("abaab", &int(1), &int(1)), "b");
    }

    #[test]
    fn indexof_semantics() {
        assert_eq!(eval_indexof("ab", "aaba", &int(-1)).unwrap(), int(1));
        assert_eq!(eval_indexof("ab", "aaba", &int(1)).unwrap(), int(1));
        assert_eq!(eval_indexof("ab", "aaba", &int(2)).unwrap(), int(-1));
        assert_eq!(eval_indexof("ab", "aaba", &int(4)).unwrap(), int(-1));
        assert!(eval_indexof("", "x", &int(0)).is_err());
        // Negative start on the empty string: clamp to 0, then 0 >= |x|.
        assert_eq!(eval_indexof("a", "", &int(-2)).unwrap(), int(-1));
        // Strict mode: negative start is -1 even when there is an occurrence.
        assert_eq!(
            eval_indexof_with("ab", "aaba", &int(-1), true).unwrap(),
            int(-1)
        );
    }

    #[test]
    fn replaceall_semantics() {
        let e = parse_regex("(ab)+").unwrap();
        assert_eq!(eval_replaceall(&e, "c", "aababaab").unwrap(), "acac");
        assert_eq!(eval_replaceall(&e, "c", "").unwrap(), "");
        assert_eq!(eval_replaceall(&e, "c", "ba").unwrap(), "ba");
        let ab = parse_regex("ab").unwrap();
        assert_eq!(eval_replaceall(&ab, "", "xaby").unwrap(), "xy");
        // Epsilon-matching patterns are rejected.
        assert!(eval_replaceall(&parse_regex("a*").unwrap(), "c", "x").is_err());
    }

    #[test]
    fn replace_first_semantics() {
        let e = parse_regex("ab").unwrap();
        assert_eq!(eval_replace(&e, "x", "abab").unwrap(), "xab");
        assert_eq!(eval_replace(&e, "x", "bb").unwrap(), "bb");
        assert_eq!(eval_replace(&e, "x", "aab").unwrap(), "ax");
    }

    #[test]
    fn transducer_runs() {
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let id = Nft::identity(&ab);
        assert_eq!(run_transducer(&id, "ab").unwrap(), Some("ab".into()));
        // No accepting run.
        let partial = Nft::new(
            2,
            vec![(0, CharClass::singleton('a'), 1, "x".into())],
            [0],
            [1],
            true,
        )
        .unwrap();
        assert_eq!(run_transducer(&partial, "b").unwrap(), None);
        assert_eq!(run_transducer(&partial, "a").unwrap(), Some("x".into()));
        // Declared functional but two outputs: violation reported.
        let broken = Nft::new(
            2,
            vec![
                (0, CharClass::singleton('a'), 1, "x".into()),
                (0, CharClass::singleton('a'), 1, "y".into()),
            ],
            [0],
            [1],
            true,
        )
        .unwrap();
        assert!(run_transducer(&broken, "a").is_err());
    }

    #[test]
    fn interpret_and_brute_force() {
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        // x := y . z; assert(x in L(ab)); assert(length(y) = 1)
        let lit_ab = crate::regex::regex_to_nfa(&parse_regex("ab").unwrap(), &ab);
        let p = SlintProgram::new(vec![
            Statement::Assign {
                var: "x".into(),
                fun: StrFun::Concat("y".into(), "z".into()),
            },
            Statement::Assert(Formula::Atom(Atom::InAutomaton {
                var: "x".into(),
                automaton: StrAutomaton::Nfa(Arc::new(lit_ab)),
            })),
            Statement::Assert(Formula::Atom(Atom::Cmp {
                lhs: IntTerm::Length("y".into()),
                rel: Rel::Eq,
                rhs: IntTerm::constant(1),
            })),
        ]);
        let mut a = ConcreteAssignment::default();
        a.strings.insert("y".into(), "a".into());
        a.strings.insert("z".into(), "b".into());
        assert!(interpret_program(&p, &a).unwrap().is_feasible());
        a.strings.insert("y".into(), "ab".into());
        a.strings.insert("z".into(), String::new());
        assert_eq!(
            interpret_program(&p, &a).unwrap(),
            Feasibility::Infeasible { at_statement: 2 }
        );
        let witness = brute_force_solve(&p, &ab, 2, 0, 0).unwrap().unwrap();
        assert_eq!(witness.strings["y"], "a");
        assert_eq!(witness.strings["z"], "b");
    }

    #[test]
    fn words_are_length_then_lex() {
        let ab = Alphabet::explicit("ba".chars()).unwrap();
        let ws = words_up_to(&ab, 2);
        assert_eq!(ws, vec!["", "a", "b", "aa", "ab", "ba", "bb"]);
    }
}
