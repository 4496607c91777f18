//! Concrete syntax: emission and a parser for the emitted grammar.
//!
//! Grammar accepted by [`parse`]:
//!
//! ```text
//! alt    := concat ('|' concat)*
//! concat := repeat+
//! repeat := atom ('*' | '+' | '?' | '{' m '}' | '{' m ',' n '}')*
//! atom   := char | '\' char | class | '(?:' alt ')' | '(' alt ')'
//! class  := one of [0-9] [A-Z] [a-z] [0-9A-Z] [0-9a-z] [A-Za-z] [0-9A-Za-z] [0-9A-F] [0-9a-f]
//! ```
//!
//! Emission wraps precedence parentheses as non-capturing `(?:...)`, so a
//! bare `(` in emitted text always opens a capturing group.

use thiserror::Error;

use crate::ast::{CharClass, RangeLit, Regex};

const META: &[char] = &['\\', '.', '^', '$', '|', '?', '*', '+', '(', ')', '[', ']', '{', '}'];

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Alt,
    Concat,
    Repeat,
}

fn prec(r: &Regex) -> Prec {
    match r {
        Regex::Union(..) => Prec::Alt,
        Regex::Concat(_) => Prec::Concat,
        Regex::Kleene(_) | Regex::Plus(_) | Regex::Optional(_) | Regex::Range(..) => Prec::Repeat,
        Regex::Literal(_) | Regex::Class(_) | Regex::Group(_) => Prec::Repeat,
    }
}

fn is_atom(r: &Regex) -> bool {
    matches!(r, Regex::Literal(_) | Regex::Class(_) | Regex::Group(_))
}

/// Deterministic concrete syntax for `r`.
pub fn emit(r: &Regex) -> String {
    let mut out = String::new();
    write_regex(r, &mut out);
    out
}

fn write_wrapped(r: &Regex, wrap: bool, out: &mut String) {
    if wrap {
        out.push_str("(?:");
        write_regex(r, out);
        out.push(')');
    } else {
        write_regex(r, out);
    }
}

fn write_regex(r: &Regex, out: &mut String) {
    match r {
        Regex::Literal(c) => {
            if META.contains(c) {
                out.push('\\');
            }
            out.push(*c);
        }
        Regex::Class(c) => out.push_str(c.as_str()),
        Regex::Union(a, b) => {
            // The parser folds alternation to the left.
            write_wrapped(a, false, out);
            out.push('|');
            write_wrapped(b, prec(b) == Prec::Alt, out);
        }
        Regex::Concat(parts) => {
            for p in parts {
                write_wrapped(p, prec(p) < Prec::Concat, out);
            }
        }
        Regex::Kleene(inner) | Regex::Plus(inner) | Regex::Optional(inner) | Regex::Range(inner, _) => {
            write_wrapped(inner, !is_atom(inner), out);
            match r {
                Regex::Kleene(_) => out.push('*'),
                Regex::Plus(_) => out.push('+'),
                Regex::Optional(_) => out.push('?'),
                Regex::Range(_, lit) => out.push_str(&lit.to_string()),
                _ => unreachable!(),
            }
        }
        Regex::Group(inner) => {
            out.push('(');
            write_regex(inner, out);
            out.push(')');
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Parses the emitted grammar back into a syntax tree.
pub fn parse(text: &str) -> Result<Regex, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut p = Parser { chars, pos: 0, group_depth: 0 };
    let r = p.alt()?;
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected ')'"));
    }
    Ok(r)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    group_depth: usize,
}

impl Parser {
    fn error(&self, message: &str) -> ParseError {
        ParseError { offset: self.pos, message: message.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn alt(&mut self) -> Result<Regex, ParseError> {
        let mut left = self.concat()?;
        while self.eat('|') {
            let right = self.concat()?;
            left = Regex::union(left, right);
        }
        Ok(left)
    }

    fn concat(&mut self) -> Result<Regex, ParseError> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            parts.push(self.repeat()?);
        }
        if parts.is_empty() {
            return Err(self.error("empty expression"));
        }
        Ok(Regex::concat(parts))
    }

    fn repeat(&mut self) -> Result<Regex, ParseError> {
        let mut r = self.atom()?;
        loop {
            r = match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    Regex::kleene(r)
                }
                Some('+') => {
                    self.pos += 1;
                    Regex::plus(r)
                }
                Some('?') => {
                    self.pos += 1;
                    Regex::optional(r)
                }
                Some('{') => {
                    let start = self.pos;
                    self.pos += 1;
                    let m = self.number()?;
                    let n = if self.eat(',') { self.number()? } else { m };
                    if !self.eat('}') {
                        return Err(self.error("expected '}'"));
                    }
                    let bad = |message: &str| ParseError { offset: start, message: message.into() };
                    match (m, n) {
                        _ if n < m => return Err(bad("bad repetition bounds")),
                        (0, 0) => return Err(bad("empty repetition")),
                        (1, 1) => r,
                        (0, 1) => Regex::optional(r),
                        _ if m == n => Regex::range(r, RangeLit::Exact(m)),
                        _ => Regex::range(r, RangeLit::Between(m, n)),
                    }
                }
                _ => return Ok(r),
            };
        }
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| ParseError { offset: start, message: "expected a number".into() })
    }

    fn atom(&mut self) -> Result<Regex, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of pattern"));
        };
        match c {
            '(' => {
                if self.eat_str("(?:") {
                    let inner = self.alt()?;
                    if !self.eat(')') {
                        return Err(self.error("expected ')'"));
                    }
                    return Ok(inner);
                }
                self.pos += 1;
                if self.group_depth > 0 {
                    return Err(self.error("nested capturing group"));
                }
                self.group_depth += 1;
                let inner = self.alt()?;
                self.group_depth -= 1;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(Regex::group(inner))
            }
            '[' => {
                let start = self.pos;
                let end = self.chars[start..].iter().position(|&c| c == ']').map(|i| start + i);
                let Some(end) = end else {
                    return Err(self.error("unterminated class"));
                };
                let text: String = self.chars[start..=end].iter().collect();
                let class = CharClass::from_bracket(&text)
                    .ok_or_else(|| ParseError { offset: start, message: format!("unsupported class {text}") })?;
                self.pos = end + 1;
                Ok(Regex::Class(class))
            }
            '\\' => {
                self.pos += 1;
                let Some(e) = self.peek() else {
                    return Err(self.error("dangling escape"));
                };
                if e.is_ascii_alphanumeric() {
                    return Err(self.error("unsupported escape"));
                }
                self.pos += 1;
                Ok(Regex::Literal(e))
            }
            '*' | '+' | '?' | '{' => Err(self.error("quantifier without operand")),
            '.' | '^' | '$' | ']' | '}' => Err(self.error("unsupported metacharacter")),
            _ => {
                self.pos += 1;
                Ok(Regex::Literal(c))
            }
        }
    }
}
