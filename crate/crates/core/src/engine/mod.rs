//! Emission, parsing, matching and language comparison of regexes.

mod alphabet;
mod automaton;
mod captures;
mod distinguish;
mod syntax;

pub use alphabet::SessionAlphabet;
pub use automaton::{Automaton, AutomatonError, Bits, Symbol, MAX_REPEAT};
pub use captures::{extract_captures, CaptureMatcher, Captures};
pub use distinguish::{distinguish_automata, distinguishing_input, Distinction};
pub use syntax::{emit, parse, ParseError};

use crate::ast::Regex;

/// Whether all of `s` is in the language of `r`.
pub fn full_match(r: &Regex, s: &str) -> bool {
    match Automaton::new(r) {
        Ok(a) => a.matches(s),
        // Beyond the expansion limit fall back to a backtracking-free engine.
        Err(_) => CaptureMatcher::new(r).spans(s).is_some(),
    }
}

/// Whether the two expressions agree on every string over `alphabet`.
pub fn equivalent(r1: &Regex, r2: &Regex, alphabet: &SessionAlphabet) -> Result<bool, AutomatonError> {
    Ok(distinguishing_input(r1, r2, alphabet)? == Distinction::Equivalent)
}
