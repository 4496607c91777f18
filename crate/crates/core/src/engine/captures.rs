//! Integer capture extraction.

use crate::ast::Regex;

use super::syntax::emit;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Captures {
    /// Integer value of each group, left to right.
    Values(Vec<i64>),
    /// Some group captured text that is not a non-empty digit string, or a
    /// value too large for `i64`.
    NonNumeric,
    NoMatch,
}

/// Compiled anchored matcher for capture extraction.
#[derive(Clone, Debug)]
pub struct CaptureMatcher {
    re: regex::Regex,
    groups: usize,
}

impl CaptureMatcher {
    pub fn new(r: &Regex) -> Self {
        let pattern = format!("^(?:{})$", emit(r));
        // Emitted syntax is always accepted, but huge repetitions can exceed
        // the default size limit.
        let re = regex::RegexBuilder::new(&pattern)
            .size_limit(1 << 28)
            .build()
            .expect("emitted pattern compiles");
        CaptureMatcher { re, groups: r.group_count() }
    }

    pub fn captures(&self, s: &str) -> Captures {
        let Some(caps) = self.re.captures(s) else {
            return Captures::NoMatch;
        };
        let mut values = Vec::with_capacity(self.groups);
        for i in 1..=self.groups {
            let text = caps.get(i).map_or("", |m| m.as_str());
            match parse_digits(text) {
                Some(v) => values.push(v),
                None => return Captures::NonNumeric,
            }
        }
        Captures::Values(values)
    }

    /// Byte ranges of each group in a matching string.
    pub fn spans(&self, s: &str) -> Option<Vec<Option<(usize, usize)>>> {
        let caps = self.re.captures(s)?;
        Some((1..=self.groups).map(|i| caps.get(i).map(|m| (m.start(), m.end()))).collect())
    }
}

fn parse_digits(text: &str) -> Option<i64> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Captured integers of `s` under `r`.
pub fn extract_captures(r: &Regex, s: &str) -> Captures {
    CaptureMatcher::new(r).captures(s)
}
