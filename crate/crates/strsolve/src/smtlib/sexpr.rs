//! S-expression reader with source positions.
//!
//! Handles SMT-LIB simple symbols (including `:keywords`), string literals
//! with `""` escaping, numerals, `;` comments, and the bracketed character
//! classes `[...]` used by the transducer format. `|`-quoted symbols are
//! not supported.

use num::BigInt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Sym(String),
    Str(String),
    Num(BigInt),
    /// Raw `[...]` class body (unescaped lazily by the class parser).
    Class(String),
    List(Vec<Spanned>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub expr: Sexpr,
    pub line: usize,
    pub col: usize,
}

impl Spanned {
    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match &self.expr {
            Sexpr::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Spanned]> {
        match &self.expr {
            Sexpr::List(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn as_str_lit(&self) -> Option<&str> {
        match &self.expr {
            Sexpr::Str(s) => Some(s),
            _ => None,
        }
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    text: &'a str,
}

const SYMBOL_EXTRA: &[char] = &[
    '~', '!', '@', '$', '%', '^', '&', '*', '_', '-', '+', '=', '<', '>', '.', '?', '/', ':',
];

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || SYMBOL_EXTRA.contains(&c)
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            text,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let _ = self.text;
        Error::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some(';') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn read(&mut self) -> Result<Option<Spanned>> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let spanned = |expr| Spanned { expr, line, col };
        let Some(c) = self.peek() else { return Ok(None) };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    if self.peek() == Some(')') {
                        self.bump();
                        return Ok(Some(spanned(Sexpr::List(items))));
                    }
                    match self.read()? {
                        Some(item) => items.push(item),
                        None => return Err(self.err("unclosed '('")),
                    }
                }
            }
            ')' => Err(self.err("unexpected ')'")),
            '"' => {
                self.bump();
                let mut out = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated string literal")),
                        Some('"') => {
                            // SMT-LIB escaping: "" is a literal quote.
                            if self.peek() == Some('"') {
                                self.bump();
                                out.push('"');
                            } else {
                                return Ok(Some(spanned(Sexpr::Str(out))));
                            }
                        }
                        Some(c) => out.push(c),
                    }
                }
            }
            '[' => {
                self.bump();
                let mut out = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unclosed '['")),
                        Some('\\') => {
                            out.push('\\');
                            match self.bump() {
                                Some(e) => out.push(e),
                                None => return Err(self.err("dangling escape in class")),
                            }
                        }
                        Some(']') => return Ok(Some(spanned(Sexpr::Class(out)))),
                        Some(c) => out.push(c),
                    }
                }
            }
            '|' => Err(self.err("quoted symbols |...| are not supported")),
            c if c.is_ascii_digit() => {
                let mut out = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        out.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(Some(spanned(Sexpr::Num(out.parse().expect("digits")))))
            }
            c if is_symbol_char(c) => {
                let mut out = String::new();
                while let Some(c) = self.peek() {
                    if is_symbol_char(c) {
                        out.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(Some(spanned(Sexpr::Sym(out))))
            }
            other => Err(self.err(format!("unexpected character {other:?}"))),
        }
    }
}

/// Reads all top-level forms.
pub fn parse_all(text: &str) -> Result<Vec<Spanned>> {
    let mut lexer = Lexer::new(text);
    let mut out = Vec::new();
    while let Some(form) = lexer.read()? {
        out.push(form);
    }
    Ok(out)
}

/// Parses the body of a `[...]` class token into a character class.
pub fn parse_class_body(body: &str, at: &Spanned) -> Result<crate::alphabet::CharClass> {
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    let mut ranges: Vec<(u32, u32)> = Vec::new();
    let read_char = |i: &mut usize| -> Result<Option<char>> {
        if *i >= chars.len() {
            return Ok(None);
        }
        let c = chars[*i];
        *i += 1;
        if c != '\\' {
            return Ok(Some(c));
        }
        let Some(&e) = chars.get(*i) else {
            return Err(at.err("dangling escape in class"));
        };
        *i += 1;
        match e {
            '\\' | ']' | '[' | ',' | '-' => Ok(Some(e)),
            's' => Ok(Some(' ')),
            'x' => {
                let hex: String = chars.get(*i..*i + 2).unwrap_or(&[]).iter().collect();
                if hex.len() != 2 {
                    return Err(at.err("\\x needs two hex digits"));
                }
                *i += 2;
                let cp = u32::from_str_radix(&hex, 16)
                    .map_err(|_| at.err("\\x needs two hex digits"))?;
                Ok(char::from_u32(cp).map(Some).unwrap_or(None))
            }
            other => Err(at.err(format!("unknown class escape '\\{other}'"))),
        }
    };
    if chars.is_empty() {
        return Ok(crate::alphabet::CharClass::empty());
    }
    loop {
        let Some(lo) = read_char(&mut i)? else { break };
        let mut hi = lo;
        if chars.get(i) == Some(&'-') {
            i += 1;
            hi = read_char(&mut i)?.ok_or_else(|| at.err("range missing upper bound"))?;
        }
        if (lo as u32) > (hi as u32) {
            return Err(at.err(format!("empty range {lo}-{hi}")));
        }
        ranges.push((lo as u32, hi as u32));
        match chars.get(i) {
            None => break,
            Some(',') => {
                i += 1;
            }
            Some(other) => return Err(at.err(format!("expected ',' in class, found {other:?}"))),
        }
    }
    Ok(crate::alphabet::CharClass::from_ranges(ranges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_forms_with_positions() {
        let forms = parse_all("(assert (= x 3)) ; comment\n(check-sat)").unwrap();
        assert_eq!(forms.len(), 2);
        let list = forms[0].as_list().unwrap();
        assert_eq!(list[0].as_sym(), Some("assert"));
        assert_eq!(forms[1].line, 2);
    }

    #[test]
    fn string_escaping() {
        let forms = parse_all(r#"(x "a""b")"#).unwrap();
        let list = forms[0].as_list().unwrap();
        assert_eq!(list[1].as_str_lit(), Some("a\"b"));
    }

    #[test]
    fn class_tokens() {
        let forms = parse_all(r"(t [a-z,0-9] [\s] [!-~])").unwrap();
        let list = forms[0].as_list().unwrap();
        let c1 = match &list[1].expr {
            Sexpr::Class(c) => parse_class_body(c, &list[1]).unwrap(),
            _ => panic!(),
        };
        assert!(c1.contains('m') && c1.contains('5') && !c1.contains('!'));
        let c2 = match &list[2].expr {
            Sexpr::Class(c) => parse_class_body(c, &list[2]).unwrap(),
            _ => panic!(),
        };
        assert!(c2.contains(' ') && c2.len() == 1);
        let c3 = match &list[3].expr {
            Sexpr::Class(c) => parse_class_body(c, &list[3]).unwrap(),
            _ => panic!(),
        };
        assert!(c3.contains('!') && c3.contains('~') && !c3.contains(' '));
    }

    #[test]
    fn errors_have_positions() {
        match parse_all("(a\n  (b").unwrap_err() {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_all("|quoted|").is_err());
        assert!(parse_all("\"open").is_err());
    }
}
