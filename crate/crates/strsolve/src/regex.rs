//! Regular expressions: AST, concrete-syntax parser, and compilation to
//! epsilon-free NFAs.
//!
//! Concrete syntax: plain characters are literals; `[x-y,...]`-style classes
//! (items are characters or `x-y` ranges); `|` for union; juxtaposition for
//! concatenation; postfix `*`, `+`, `?`; parentheses; `\` escapes for the
//! metacharacters `( ) [ ] | * + ? \ -`. Precedence: postfix operators bind
//! tighter than concatenation, which binds tighter than union. `[]` denotes
//! the empty set; the empty string denotes epsilon.

use std::collections::BTreeSet;

use crate::alphabet::{Alphabet, CharClass};
use crate::automata::{Nfa, StateId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    EmptySet,
    Epsilon,
    Class(CharClass),
    Concat(Vec<Regex>),
    Union(Vec<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Opt(Box<Regex>),
}

impl Regex {
    pub fn literal(c: char) -> Regex {
        Regex::Class(CharClass::singleton(c))
    }

    /// The regex matching exactly `s`.
    pub fn literal_str(s: &str) -> Regex {
        match s.chars().count() {
            0 => Regex::Epsilon,
            1 => Regex::literal(s.chars().next().unwrap()),
            _ => Regex::Concat(s.chars().map(Regex::literal).collect()),
        }
    }

    /// Whether epsilon is in the language (no automaton needed).
    pub fn nullable(&self) -> bool {
        match self {
            Regex::EmptySet | Regex::Class(_) => false,
            Regex::Epsilon | Regex::Star(_) | Regex::Opt(_) => true,
            Regex::Concat(parts) => parts.iter().all(Regex::nullable),
            Regex::Union(parts) => parts.iter().any(Regex::nullable),
            Regex::Plus(inner) => inner.nullable(),
        }
    }
}

const METACHARS: &[char] = &['(', ')', '[', ']', '|', '*', '+', '?', '\\', '-'];

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        let _ = self.text;
        Error::Syntax {
            line: 1,
            col: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn union(&mut self) -> Result<Regex> {
        let mut parts = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.bump();
            parts.push(self.concat()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Regex::Union(parts)
        })
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            parts.push(self.postfix()?);
        }
        Ok(match parts.len() {
            0 => Regex::Epsilon,
            1 => parts.pop().unwrap(),
            _ => Regex::Concat(parts),
        })
    }

    fn postfix(&mut self) -> Result<Regex> {
        let mut e = self.atom()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => e = Regex::Star(Box::new(e)),
                '+' => e = Regex::Plus(Box::new(e)),
                '?' => e = Regex::Opt(Box::new(e)),
                _ => break,
            }
            self.bump();
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Regex> {
        match self.peek() {
            None => Err(self.err("unexpected end of pattern")),
            Some('(') => {
                self.bump();
                let inner = self.union()?;
                if self.bump() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some('[') => {
                self.bump();
                self.class()
            }
            Some('\\') => {
                self.bump();
                let c = self.bump().ok_or_else(|| self.err("dangling escape"))?;
                if METACHARS.contains(&c) {
                    Ok(Regex::literal(c))
                } else {
                    Err(self.err(format!("unknown escape '\\{c}'")))
                }
            }
            Some(c) if matches!(c, ')' | ']' | '*' | '+' | '?' | '|') => {
                Err(self.err(format!("unexpected '{c}'")))
            }
            Some(c) => {
                self.bump();
                Ok(Regex::literal(c))
            }
        }
    }

    fn class_char(&mut self) -> Result<char> {
        match self.bump() {
            None => Err(self.err("unterminated class")),
            Some('\\') => {
                let c = self.bump().ok_or_else(|| self.err("dangling escape"))?;
                if METACHARS.contains(&c) {
                    Ok(c)
                } else {
                    Err(self.err(format!("unknown escape '\\{c}'")))
                }
            }
            Some(c) => Ok(c),
        }
    }

    fn class(&mut self) -> Result<Regex> {
        let mut ranges: Vec<(u32, u32)> = Vec::new();
        if self.peek() == Some(']') {
            self.bump();
            return Ok(Regex::EmptySet);
        }
        loop {
            let lo = self.class_char()?;
            let hi = if self.peek() == Some('-') {
                self.bump();
                self.class_char()?
            } else {
                lo
            };
            if (lo as u32) > (hi as u32) {
                return Err(self.err(format!("empty range {lo}-{hi}")));
            }
            ranges.push((lo as u32, hi as u32));
            match self.peek() {
                Some(']') => {
                    self.bump();
                    return Ok(Regex::Class(CharClass::from_ranges(ranges)));
                }
                Some(_) => continue,
                None => return Err(self.err("unterminated class")),
            }
        }
    }
}

/// Parses the concrete regex syntax; total on valid input.
pub fn parse_regex(text: &str) -> Result<Regex> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        text,
    };
    let e = p.union()?;
    match p.peek() {
        None => Ok(e),
        Some(c) => Err(p.err(format!("unexpected '{c}'"))),
    }
}

// Thompson construction over an implicit epsilon-NFA, eliminated before
// returning.
struct Thompson {
    num_states: usize,
    eps: Vec<(StateId, StateId)>,
    labeled: Vec<(StateId, CharClass, StateId)>,
}

impl Thompson {
    fn fresh(&mut self) -> StateId {
        self.num_states += 1;
        self.num_states - 1
    }

    fn build(&mut self, e: &Regex, alphabet: &Alphabet) -> (StateId, StateId) {
        let s = self.fresh();
        let t = self.fresh();
        match e {
            Regex::EmptySet => {}
            Regex::Epsilon => self.eps.push((s, t)),
            Regex::Class(c) => {
                let c = alphabet.restrict(c);
                if !c.is_empty() {
                    self.labeled.push((s, c, t));
                }
            }
            Regex::Concat(parts) => {
                let mut prev = s;
                for part in parts {
                    let (ps, pt) = self.build(part, alphabet);
                    self.eps.push((prev, ps));
                    prev = pt;
                }
                self.eps.push((prev, t));
            }
            Regex::Union(parts) => {
                for part in parts {
                    let (ps, pt) = self.build(part, alphabet);
                    self.eps.push((s, ps));
                    self.eps.push((pt, t));
                }
            }
            Regex::Star(inner) => {
                let (is, it) = self.build(inner, alphabet);
                self.eps.push((s, t));
                self.eps.push((s, is));
                self.eps.push((it, is));
                self.eps.push((it, t));
            }
            Regex::Plus(inner) => {
                let (is, it) = self.build(inner, alphabet);
                self.eps.push((s, is));
                self.eps.push((it, is));
                self.eps.push((it, t));
            }
            Regex::Opt(inner) => {
                let (is, it) = self.build(inner, alphabet);
                self.eps.push((s, is));
                self.eps.push((s, t));
                self.eps.push((it, t));
            }
        }
        (s, t)
    }
}

/// Compiles a regex to an epsilon-free NFA with `L(result) = L(e)`
/// (intersected with the alphabet).
pub fn regex_to_nfa(e: &Regex, alphabet: &Alphabet) -> Nfa {
    let mut th = Thompson {
        num_states: 0,
        eps: Vec::new(),
        labeled: Vec::new(),
    };
    let (start, end) = th.build(e, alphabet);

    // Epsilon closures.
    let mut closure: Vec<BTreeSet<StateId>> = (0..th.num_states)
        .map(|q| BTreeSet::from([q]))
        .collect();
    let mut eps_out: Vec<Vec<StateId>> = vec![Vec::new(); th.num_states];
    for &(a, b) in &th.eps {
        eps_out[a].push(b);
    }
    for q in 0..th.num_states {
        let mut stack: Vec<StateId> = vec![q];
        let mut seen = BTreeSet::from([q]);
        while let Some(p) = stack.pop() {
            for &n in &eps_out[p] {
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        closure[q] = seen;
    }

    // q --c--> p' whenever some p in closure(q) has p --c--> p'.
    let mut merged: std::collections::BTreeMap<(StateId, StateId), CharClass> =
        std::collections::BTreeMap::new();
    for q in 0..th.num_states {
        for &(src, ref label, dst) in &th.labeled {
            if closure[q].contains(&src) {
                merged
                    .entry((q, dst))
                    .and_modify(|c| *c = c.union(label))
                    .or_insert_with(|| label.clone());
            }
        }
    }
    let transitions: Vec<(StateId, CharClass, StateId)> = merged
        .into_iter()
        .map(|((src, dst), label)| (src, label, dst))
        .collect();
    let final_states: Vec<StateId> = (0..th.num_states)
        .filter(|&q| closure[q].contains(&end))
        .collect();
    let nfa = Nfa::new(th.num_states, transitions, [start], final_states)
        .expect("thompson construction produces valid states");
    trim_nfa(&nfa)
}

fn trim_nfa(nfa: &Nfa) -> Nfa {
    let c = crate::automata::Cefa::from_nfa(nfa).trim();
    c.to_nfa()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference matcher: end positions of matches of `e` starting at `pos`.
    pub(crate) fn match_ends(e: &Regex, w: &[char], pos: usize) -> BTreeSet<usize> {
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
                }
                ends
            }
            Regex::Union(parts) => parts
                .iter()
                .flat_map(|part| match_ends(part, w, pos))
                .collect(),
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

    fn matches(e: &Regex, w: &str) -> bool {
        let chars: Vec<char> = w.chars().collect();
        match_ends(e, &chars, 0).contains(&chars.len())
    }

    fn ab() -> Alphabet {
        Alphabet::explicit("abcx".chars()).unwrap()
    }

    #[test]
    fn parse_shapes() {
        assert_eq!(
            parse_regex("(ab)+").unwrap(),
            Regex::Plus(Box::new(Regex::Concat(vec![
                Regex::literal('a'),
                Regex::literal('b')
            ])))
        );
        // Star binds tighter than union.
        assert_eq!(
            parse_regex("a|b*").unwrap(),
            Regex::Union(vec![
                Regex::literal('a'),
                Regex::Star(Box::new(Regex::literal('b')))
            ])
        );
        assert_eq!(
            parse_regex("[a-c]x").unwrap(),
            Regex::Concat(vec![
                Regex::Class(CharClass::range('a', 'c').unwrap()),
                Regex::literal('x')
            ])
        );
    }

    #[test]
    fn parse_errors_have_position() {
        match parse_regex("a(b").unwrap_err() {
            Error::Syntax { col, .. } => assert_eq!(col, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_regex("*a").is_err());
        assert!(parse_regex("[b-a]").is_err());
        assert!(parse_regex("\\q").is_err());
    }

    #[test]
    fn escapes_and_empty_class() {
        assert_eq!(parse_regex("\\*").unwrap(), Regex::literal('*'));
        assert_eq!(parse_regex("[]").unwrap(), Regex::EmptySet);
        assert_eq!(parse_regex("").unwrap(), Regex::Epsilon);
    }

    #[test]
    fn nfa_examples() {
        let a = ab();
        // (ab)+ rejects eps, accepts "ab", "abab".
        let n = regex_to_nfa(&parse_regex("(ab)+").unwrap(), &a);
        assert!(!n.accepts(""));
        assert!(n.accepts("ab"));
        assert!(n.accepts("abab"));
        assert!(!n.accepts("aba"));
        // Empty set.
        let n = regex_to_nfa(&Regex::EmptySet, &a);
        assert!(n.is_empty());
        // a* accepts "", "a", "aa".
        let n = regex_to_nfa(&parse_regex("a*").unwrap(), &a);
        assert!(n.accepts(""));
        assert!(n.accepts("a"));
        assert!(n.accepts("aa"));
        assert!(!n.accepts("b"));
        // a(b|c)* from the membership examples.
        let n = regex_to_nfa(&parse_regex("a(b|c)*").unwrap(), &a);
        assert!(n.accepts("abc"));
        assert!(!n.accepts(""));
    }

    #[test]
    fn agrees_with_reference_matcher() {
        // All regexes of small depth over {a,b} x all strings up to length 6.
        let a = Alphabet::explicit("ab".chars()).unwrap();
        let atoms = vec![
            Regex::literal('a'),
            Regex::literal('b'),
            Regex::Epsilon,
            Regex::EmptySet,
        ];
        let mut layer = atoms.clone();
        for _ in 0..2 {
            let mut next = Vec::new();
            for e1 in &layer {
                next.push(Regex::Star(Box::new(e1.clone())));
                next.push(Regex::Plus(Box::new(e1.clone())));
                next.push(Regex::Opt(Box::new(e1.clone())));
                for e2 in &atoms {
                    next.push(Regex::Concat(vec![e1.clone(), e2.clone()]));
                    next.push(Regex::Union(vec![e1.clone(), e2.clone()]));
                }
            }
            layer = next;
        }
        let mut words = vec![String::new()];
        let mut layer_words = vec![String::new()];
        for _ in 0..6 {
            let mut next = Vec::new();
            for w in &layer_words {
                for c in ['a', 'b'] {
                    next.push(format!("{w}{c}"));
                }
            }
            words.extend(next.iter().cloned());
            layer_words = next;
        }
        for e in layer.iter().take(400) {
            let n = regex_to_nfa(e, &a);
            for w in &words {
                assert_eq!(
                    n.accepts(w),
                    matches(e, w),
                    "mismatch for {e:?} on {w:?}"
                );
            }
        }
    }
}
