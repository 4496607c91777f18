//! Regular expression syntax tree.
//!
//! This is the program representation shared by the enumerator (which decodes
//! solver models into it), the matching engine and the capture synthesizer.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Character classes available to the synthesizer.
///
/// The family is fixed: the three base classes, their four unions, and the
/// two hexadecimal classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CharClass {
    Digit,
    Upper,
    Lower,
    DigitUpper,
    DigitLower,
    Alpha,
    Alnum,
    HexUpper,
    HexLower,
}

impl CharClass {
    /// All classes, in the canonical family order.
    pub const FAMILY: [CharClass; 9] = [
        CharClass::Digit,
        CharClass::Upper,
        CharClass::Lower,
        CharClass::DigitUpper,
        CharClass::DigitLower,
        CharClass::Alpha,
        CharClass::Alnum,
        CharClass::HexUpper,
        CharClass::HexLower,
    ];

    pub fn contains(self, c: char) -> bool {
        let digit = c.is_ascii_digit();
        let upper = c.is_ascii_uppercase();
        let lower = c.is_ascii_lowercase();
        match self {
            CharClass::Digit => digit,
            CharClass::Upper => upper,
            CharClass::Lower => lower,
            CharClass::DigitUpper => digit || upper,
            CharClass::DigitLower => digit || lower,
            CharClass::Alpha => upper || lower,
            CharClass::Alnum => digit || upper || lower,
            CharClass::HexUpper => digit || ('A'..='F').contains(&c),
            CharClass::HexLower => digit || ('a'..='f').contains(&c),
        }
    }

    /// Bracket syntax, e.g. `[0-9A-F]`.
    pub fn as_str(self) -> &'static str {
        match self {
            CharClass::Digit => "[0-9]",
            CharClass::Upper => "[A-Z]",
            CharClass::Lower => "[a-z]",
            CharClass::DigitUpper => "[0-9A-Z]",
            CharClass::DigitLower => "[0-9a-z]",
            CharClass::Alpha => "[A-Za-z]",
            CharClass::Alnum => "[0-9A-Za-z]",
            CharClass::HexUpper => "[0-9A-F]",
            CharClass::HexLower => "[0-9a-f]",
        }
    }

    pub fn from_bracket(text: &str) -> Option<CharClass> {
        CharClass::FAMILY.into_iter().find(|c| c.as_str() == text)
    }

    /// Smallest member of the class.
    pub fn first_member(self) -> char {
        match self {
            CharClass::Upper | CharClass::Alpha => 'A',
            CharClass::Lower => 'a',
            _ => '0',
        }
    }

    /// Every member of the class, in code point order.
    pub fn members(self) -> impl Iterator<Item = char> {
        ('0'..='z').filter(move |&c| self.contains(c))
    }
}

impl fmt::Display for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Argument of the range quantifier: `{m}` or `{m,n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RangeLit {
    Exact(u32),
    Between(u32, u32),
}

impl RangeLit {
    /// `Exact(m)` needs `m >= 2`; `Between(m, n)` needs `m < n` and excludes
    /// `(0, 1)`, which is the option quantifier.
    pub fn is_valid(self) -> bool {
        match self {
            RangeLit::Exact(m) => m >= 2,
            RangeLit::Between(m, n) => m < n && (m, n) != (0, 1),
        }
    }

    pub fn lo(self) -> u32 {
        match self {
            RangeLit::Exact(m) | RangeLit::Between(m, _) => m,
        }
    }

    pub fn hi(self) -> u32 {
        match self {
            RangeLit::Exact(m) | RangeLit::Between(_, m) => m,
        }
    }
}

impl fmt::Display for RangeLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RangeLit::Exact(m) => write!(f, "{{{m}}}"),
            RangeLit::Between(m, n) => write!(f, "{{{m},{n}}}"),
        }
    }
}

/// A regular expression.
///
/// `Concat` always has at least two children and never directly contains
/// another `Concat`; build it through [`Regex::concat`] to keep that shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regex {
    Literal(char),
    Class(CharClass),
    Union(Box<Regex>, Box<Regex>),
    Concat(Vec<Regex>),
    Kleene(Box<Regex>),
    Plus(Box<Regex>),
    Optional(Box<Regex>),
    Range(Box<Regex>, RangeLit),
    Group(Box<Regex>),
}

impl Regex {
    pub fn literal_str(s: &str) -> Regex {
        Regex::concat(s.chars().map(Regex::Literal).collect())
    }

    /// Flattening concatenation. A single part is returned as is.
    ///
    /// # Panics
    /// If `parts` is empty: the syntax has no empty-string regex.
    pub fn concat(parts: Vec<Regex>) -> Regex {
        let mut flat = Vec::with_capacity(parts.len());
        for part in parts {
            match part {
                Regex::Concat(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        assert!(!flat.is_empty(), "concatenation of nothing");
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Regex::Concat(flat)
        }
    }

    pub fn union(a: Regex, b: Regex) -> Regex {
        Regex::Union(Box::new(a), Box::new(b))
    }

    pub fn kleene(r: Regex) -> Regex {
        Regex::Kleene(Box::new(r))
    }

    pub fn plus(r: Regex) -> Regex {
        Regex::Plus(Box::new(r))
    }

    pub fn optional(r: Regex) -> Regex {
        Regex::Optional(Box::new(r))
    }

    pub fn range(r: Regex, lit: RangeLit) -> Regex {
        Regex::Range(Box::new(r), lit)
    }

    pub fn group(r: Regex) -> Regex {
        Regex::Group(Box::new(r))
    }

    pub fn children(&self) -> Vec<&Regex> {
        match self {
            Regex::Literal(_) | Regex::Class(_) => Vec::new(),
            Regex::Union(a, b) => vec![a, b],
            Regex::Concat(parts) => parts.iter().collect(),
            Regex::Kleene(r) | Regex::Plus(r) | Regex::Optional(r) | Regex::Range(r, _) | Regex::Group(r) => {
                vec![r]
            }
        }
    }

    /// Whether the empty string is in the language.
    pub fn is_nullable(&self) -> bool {
        match self {
            Regex::Literal(_) | Regex::Class(_) => false,
            Regex::Union(a, b) => a.is_nullable() || b.is_nullable(),
            Regex::Concat(parts) => parts.iter().all(Regex::is_nullable),
            Regex::Kleene(_) | Regex::Optional(_) => true,
            Regex::Plus(r) | Regex::Group(r) => r.is_nullable(),
            Regex::Range(r, lit) => lit.lo() == 0 || r.is_nullable(),
        }
    }

    pub fn group_count(&self) -> usize {
        let own = usize::from(matches!(self, Regex::Group(_)));
        own + self.children().into_iter().map(Regex::group_count).sum::<usize>()
    }

    /// Copy of the expression with every group replaced by its content.
    pub fn strip_groups(&self) -> Regex {
        match self {
            Regex::Literal(_) | Regex::Class(_) => self.clone(),
            Regex::Union(a, b) => Regex::union(a.strip_groups(), b.strip_groups()),
            Regex::Concat(parts) => Regex::concat(parts.iter().map(Regex::strip_groups).collect()),
            Regex::Kleene(r) => Regex::kleene(r.strip_groups()),
            Regex::Plus(r) => Regex::plus(r.strip_groups()),
            Regex::Optional(r) => Regex::optional(r.strip_groups()),
            Regex::Range(r, lit) => Regex::range(r.strip_groups(), *lit),
            Regex::Group(r) => r.strip_groups(),
        }
    }

    /// Literal characters used anywhere in the expression.
    pub fn literals(&self) -> Vec<char> {
        let mut out = Vec::new();
        self.visit(&mut |r| {
            if let Regex::Literal(c) = r {
                out.push(*c);
            }
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn classes(&self) -> Vec<CharClass> {
        let mut out = Vec::new();
        self.visit(&mut |r| {
            if let Regex::Class(c) = r {
                out.push(*c);
            }
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Regex)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    /// Number of syntax nodes; range literals count as a node.
    pub fn size(&self) -> usize {
        let own = if matches!(self, Regex::Range(..)) { 2 } else { 1 };
        own + self.children().into_iter().map(Regex::size).sum::<usize>()
    }

    /// Whether the expression is well-formed: valid range literals, concat
    /// arity, and no nested groups.
    pub fn is_well_formed(&self) -> bool {
        fn check(r: &Regex, in_group: bool) -> bool {
            match r {
                Regex::Literal(_) | Regex::Class(_) => true,
                Regex::Concat(parts) => {
                    parts.len() >= 2
                        && parts.iter().all(|p| !matches!(p, Regex::Concat(_)) && check(p, in_group))
                }
                Regex::Range(inner, lit) => lit.is_valid() && check(inner, in_group),
                Regex::Group(inner) => !in_group && check(inner, true),
                _ => r.children().into_iter().all(|c| check(c, in_group)),
            }
        }
        check(self, false)
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::engine::emit(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_membership() {
        assert!(CharClass::HexUpper.contains('F'));
        assert!(!CharClass::HexUpper.contains('G'));
        assert!(!CharClass::HexUpper.contains('a'));
        assert!(CharClass::Alnum.contains('z'));
        assert!(!CharClass::Alnum.contains('/'));
        assert_eq!(CharClass::Digit.members().count(), 10);
        assert_eq!(CharClass::Alnum.members().count(), 62);
    }

    #[test]
    fn bracket_round_trip() {
        for class in CharClass::FAMILY {
            assert_eq!(CharClass::from_bracket(class.as_str()), Some(class));
        }
    }

    #[test]
    fn range_literal_validity() {
        assert!(!RangeLit::Exact(1).is_valid());
        assert!(RangeLit::Exact(2).is_valid());
        assert!(!RangeLit::Between(0, 1).is_valid());
        assert!(RangeLit::Between(0, 2).is_valid());
        assert!(!RangeLit::Between(3, 3).is_valid());
    }

    #[test]
    fn concat_flattens() {
        let r = Regex::concat(vec![
            Regex::Literal('a'),
            Regex::concat(vec![Regex::Literal('b'), Regex::Literal('c')]),
        ]);
        assert_eq!(
            r,
            Regex::Concat(vec![Regex::Literal('a'), Regex::Literal('b'), Regex::Literal('c')])
        );
        assert_eq!(Regex::concat(vec![Regex::Literal('a')]), Regex::Literal('a'));
    }

    #[test]
    fn nullability() {
        assert!(Regex::range(Regex::Literal('a'), RangeLit::Between(0, 3)).is_nullable());
        assert!(!Regex::range(Regex::Literal('a'), RangeLit::Exact(2)).is_nullable());
        assert!(Regex::union(Regex::Literal('a'), Regex::kleene(Regex::Literal('b'))).is_nullable());
    }
}
