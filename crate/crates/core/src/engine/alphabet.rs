//! Finite alphabet over which languages are compared.

use crate::ast::{CharClass, Regex};

/// Characters that behave like every other character of the session.
///
/// Two characters behave alike when they belong to the same classes and
/// neither is an explicit character (one occurring in an example or as a
/// literal). The alphabet holds every explicit character plus one
/// representative per remaining behaviour: a member of each class-membership
/// cell that is not fully explicit, and one character outside every class.
/// Comparing languages over these symbols therefore decides equivalence for
/// all strings built from ASCII and the explicit characters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionAlphabet {
    symbols: Vec<char>,
    explicit: usize,
}

/// Cells of the partition of alphanumerics by class membership.
const CELLS: [(char, char); 5] = [('0', '9'), ('A', 'F'), ('G', 'Z'), ('a', 'f'), ('g', 'z')];

impl SessionAlphabet {
    pub fn new(explicit: impl IntoIterator<Item = char>) -> Self {
        let mut symbols: Vec<char> = explicit.into_iter().collect();
        symbols.sort_unstable();
        symbols.dedup();
        let explicit = symbols.len();
        for (lo, hi) in CELLS {
            if let Some(c) = (lo..=hi).find(|c| !symbols[..explicit].contains(c)) {
                symbols.push(c);
            }
        }
        let outside = (' '..='~')
            .find(|&c| !c.is_ascii_alphanumeric() && !symbols[..explicit].contains(&c));
        if let Some(c) = outside {
            symbols.push(c);
        }
        SessionAlphabet { symbols, explicit }
    }

    /// Alphabet for comparing the given expressions on strings that look like
    /// the given examples.
    pub fn for_session<'a>(examples: impl IntoIterator<Item = &'a str>, regexes: &[&Regex]) -> Self {
        let mut chars: Vec<char> = examples.into_iter().flat_map(str::chars).collect();
        for r in regexes {
            chars.extend(r.literals());
        }
        SessionAlphabet::new(chars)
    }

    /// Symbols in preference order: explicit characters by code point, then
    /// class representatives, then the out-of-class character.
    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn explicit(&self) -> &[char] {
        &self.symbols[..self.explicit]
    }

    /// The symbol that stands for `c`, if `c` is covered by the alphabet.
    pub fn representative(&self, c: char) -> Option<char> {
        if self.explicit().contains(&c) {
            return Some(c);
        }
        let sig = signature(c);
        self.symbols[self.explicit..]
            .iter()
            .copied()
            .find(|&r| signature(r) == sig)
            .filter(|_| c.is_ascii() || sig == 0)
    }
}

fn signature(c: char) -> u16 {
    CharClass::FAMILY
        .iter()
        .enumerate()
        .filter(|(_, k)| k.contains(c))
        .fold(0, |acc, (i, _)| acc | 1 << i)
}
