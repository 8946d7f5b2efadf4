//! Alphabets and character classes.
//!
//! An [`Alphabet`] is the finite set of letters all automata in a solver run
//! range over: either printable ASCII (0x20..=0x7E) or an explicit set of
//! code points. Transitions are labelled by a [`CharClass`], a sorted list of
//! disjoint inclusive code-point intervals; a class label stands for one
//! expanded per-letter transition for each member letter, all sharing the
//! same register update.

use std::fmt;

use crate::error::{Error, Result};

/// A finite alphabet of code points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    kind: AlphabetKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum AlphabetKind {
    AsciiPrintable,
    /// Sorted, deduplicated code points.
    Explicit(Vec<u32>),
}

pub const ASCII_PRINTABLE_LO: u32 = 0x20;
pub const ASCII_PRINTABLE_HI: u32 = 0x7e;

impl Alphabet {
    /// Printable ASCII, code points 0x20..=0x7E.
    pub fn ascii_printable() -> Self {
        Alphabet {
            kind: AlphabetKind::AsciiPrintable,
        }
    }

    /// An explicit alphabet. Duplicates are removed; must be nonempty.
    pub fn explicit(letters: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut cps: Vec<u32> = letters.into_iter().map(|c| c as u32).collect();
        cps.sort_unstable();
        cps.dedup();
        if cps.is_empty() {
            return Err(Error::input("alphabet must be nonempty"));
        }
        Ok(Alphabet {
            kind: AlphabetKind::Explicit(cps),
        })
    }

    pub fn size(&self) -> usize {
        match &self.kind {
            AlphabetKind::AsciiPrintable => (ASCII_PRINTABLE_HI - ASCII_PRINTABLE_LO + 1) as usize,
            AlphabetKind::Explicit(cps) => cps.len(),
        }
    }

    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        match &self.kind {
            AlphabetKind::AsciiPrintable => (ASCII_PRINTABLE_LO..=ASCII_PRINTABLE_HI).contains(&cp),
            AlphabetKind::Explicit(cps) => cps.binary_search(&cp).is_ok(),
        }
    }

    pub fn contains_str(&self, s: &str) -> bool {
        s.chars().all(|c| self.contains(c))
    }

    /// All letters, ascending.
    pub fn letters(&self) -> Vec<char> {
        match &self.kind {
            AlphabetKind::AsciiPrintable => (ASCII_PRINTABLE_LO..=ASCII_PRINTABLE_HI)
                .map(|cp| char::from_u32(cp).unwrap())
                .collect(),
            AlphabetKind::Explicit(cps) => cps
                .iter()
                .map(|&cp| char::from_u32(cp).expect("alphabet code point"))
                .collect(),
        }
    }

    /// The class containing every letter of the alphabet.
    pub fn full_class(&self) -> CharClass {
        match &self.kind {
            AlphabetKind::AsciiPrintable => {
                CharClass::from_ranges(vec![(ASCII_PRINTABLE_LO, ASCII_PRINTABLE_HI)])
            }
            AlphabetKind::Explicit(cps) => CharClass::from_code_points(cps),
        }
    }

    /// The class of all alphabet letters except `excluded`.
    pub fn class_without(&self, excluded: &[char]) -> CharClass {
        let mut ex: Vec<u32> = excluded.iter().map(|&c| c as u32).collect();
        ex.sort_unstable();
        ex.dedup();
        let cps: Vec<u32> = match &self.kind {
            AlphabetKind::AsciiPrintable => (ASCII_PRINTABLE_LO..=ASCII_PRINTABLE_HI)
                .filter(|cp| ex.binary_search(cp).is_err())
                .collect(),
            AlphabetKind::Explicit(cps) => cps
                .iter()
                .copied()
                .filter(|cp| ex.binary_search(cp).is_err())
                .collect(),
        };
        CharClass::from_code_points(&cps)
    }

    /// Restricts `class` to this alphabet.
    pub fn restrict(&self, class: &CharClass) -> CharClass {
        class.intersect(&self.full_class())
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::ascii_printable()
    }
}

/// A set of letters as sorted, disjoint, inclusive code-point intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharClass {
    /// Invariant: nonoverlapping, non-adjacent, sorted by lower bound.
    ranges: Vec<(u32, u32)>,
}

impl CharClass {
    pub fn empty() -> Self {
        CharClass { ranges: Vec::new() }
    }

    pub fn singleton(c: char) -> Self {
        CharClass {
            ranges: vec![(c as u32, c as u32)],
        }
    }

    pub fn range(lo: char, hi: char) -> Result<Self> {
        if (lo as u32) > (hi as u32) {
            return Err(Error::input(format!("empty range {lo:?}-{hi:?}")));
        }
        Ok(CharClass {
            ranges: vec![(lo as u32, hi as u32)],
        })
    }

    /// Builds a class from arbitrary inclusive ranges, normalizing overlaps
    /// and adjacency.
    pub fn from_ranges(mut ranges: Vec<(u32, u32)>) -> Self {
        ranges.retain(|&(lo, hi)| lo <= hi);
        ranges.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            match out.last_mut() {
                Some((_, phi)) if lo <= phi.saturating_add(1) => {
                    if hi > *phi {
                        *phi = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        CharClass { ranges: out }
    }

    pub fn from_code_points(cps: &[u32]) -> Self {
        CharClass::from_ranges(cps.iter().map(|&cp| (cp, cp)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        self.ranges
            .binary_search_by(|&(lo, hi)| {
                if cp < lo {
                    std::cmp::Ordering::Greater
                } else if cp > hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn intersect(&self, other: &CharClass) -> CharClass {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ranges.len() && j < other.ranges.len() {
            let (alo, ahi) = self.ranges[i];
            let (blo, bhi) = other.ranges[j];
            let lo = alo.max(blo);
            let hi = ahi.min(bhi);
            if lo <= hi {
                out.push((lo, hi));
            }
            if ahi < bhi {
                i += 1;
            } else {
                j += 1;
            }
        }
        CharClass { ranges: out }
    }

    pub fn union(&self, other: &CharClass) -> CharClass {
        let mut ranges = self.ranges.clone();
        ranges.extend_from_slice(&other.ranges);
        CharClass::from_ranges(ranges)
    }

    /// Number of letters in the class.
    pub fn len(&self) -> usize {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as usize)
            .sum()
    }

    /// Smallest code point, if any.
    pub fn min_letter(&self) -> Option<char> {
        self.ranges.first().map(|&(lo, _)| {
            char::from_u32(lo).expect("class code point")
        })
    }

    /// All letters, ascending.
    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.ranges
            .iter()
            .flat_map(|&(lo, hi)| (lo..=hi).filter_map(char::from_u32))
    }

    pub fn ranges(&self) -> &[(u32, u32)] {
        &self.ranges
    }
}

fn fmt_class_char(cp: u32, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match char::from_u32(cp) {
        Some(c) if (0x21..=0x7e).contains(&cp) && !matches!(c, '-' | ',' | ']' | '[' | '\\') => {
            write!(f, "{c}")
        }
        _ => write!(f, "\\u{{{cp:04x}}}"),
    }
}

/// Dump syntax: `a-z,0-9,\u{0020}`; single-letter ranges print as one char.
impl fmt::Display for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, &(lo, hi)) in self.ranges.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            fmt_class_char(lo, f)?;
            if hi != lo {
                write!(f, "-")?;
                fmt_class_char(hi, f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_printable_bounds() {
        let a = Alphabet::ascii_printable();
        assert_eq!(a.size(), 95);
        assert!(a.contains(' '));
        assert!(a.contains('~'));
        assert!(!a.contains('\n'));
        assert!(!a.contains('\u{7f}'));
    }

    #[test]
    fn explicit_dedup_and_reject_empty() {
        let a = Alphabet::explicit("abba".chars()).unwrap();
        assert_eq!(a.size(), 2);
        assert_eq!(a.letters(), vec!['a', 'b']);
        assert!(Alphabet::explicit(std::iter::empty()).is_err());
    }

    #[test]
    fn class_normalization_merges() {
        let c = CharClass::from_ranges(vec![(10, 12), (13, 20), (5, 7), (11, 14)]);
        assert_eq!(c.ranges(), &[(5, 7), (10, 20)]);
        assert_eq!(c.len(), 14);
    }

    #[test]
    fn intersection_and_union() {
        let ab = CharClass::range('a', 'f').unwrap();
        let cd = CharClass::range('d', 'z').unwrap();
        let i = ab.intersect(&cd);
        assert_eq!(i.ranges(), &[('d' as u32, 'f' as u32)]);
        let u = ab.union(&cd);
        assert_eq!(u.ranges(), &[('a' as u32, 'z' as u32)]);
        assert!(ab.intersect(&CharClass::singleton('z')).is_empty());
    }

    #[test]
    fn class_without() {
        let a = Alphabet::explicit("abcd".chars()).unwrap();
        let c = a.class_without(&['b', 'd']);
        assert_eq!(c.letters().collect::<Vec<_>>(), vec!['a', 'c']);
    }

    #[test]
    fn min_letter_and_display() {
        let c = CharClass::from_ranges(vec![('b' as u32, 'd' as u32), ('x' as u32, 'x' as u32)]);
        assert_eq!(c.min_letter(), Some('b'));
        assert_eq!(c.to_string(), "b-d,x");
        let sp = CharClass::singleton(' ');
        assert_eq!(sp.to_string(), "\\u{0020}");
    }
}
