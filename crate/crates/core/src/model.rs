//! Example sets, capture conditions and regex validations.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Regex;
use crate::engine::{self, Captures};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExampleError {
    #[error("no valid examples")]
    NoValid,
    #[error("empty string is only allowed as an invalid example")]
    EmptyNotInvalid,
    #[error("example {0:?} appears in more than one section")]
    CrossDuplicate(String),
    #[error("line {line}: unknown section header {header:?}")]
    BadHeader { line: usize, header: String },
    #[error("line {0}: example before any section header")]
    NoSection(usize),
    #[error("section {0} appears twice")]
    RepeatedSection(&'static str),
}

/// Which of the three lists an example belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    Valid,
    Invalid,
    ConditionalInvalid,
}

impl ExampleKind {
    fn header(self) -> &'static str {
        match self {
            ExampleKind::Valid => "++",
            ExampleKind::Invalid => "--",
            ExampleKind::ConditionalInvalid => "+-",
        }
    }
}

/// Valid, invalid and conditional-invalid example strings.
///
/// Construct through [`ExampleSet::new`] or [`parse_benchmark`]; both enforce
/// that the valid list is non-empty, that the lists are disjoint and that the
/// empty string only appears as an invalid example.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExampleSet {
    valid: Vec<String>,
    invalid: Vec<String>,
    conditional_invalid: Vec<String>,
}

impl ExampleSet {
    /// Builds a set, dropping repeats within a list (first occurrence kept).
    pub fn new(
        valid: Vec<String>,
        invalid: Vec<String>,
        conditional_invalid: Vec<String>,
    ) -> Result<Self, ExampleError> {
        let valid = dedup(valid);
        let invalid = dedup(invalid);
        let conditional_invalid = dedup(conditional_invalid);
        if valid.is_empty() {
            return Err(ExampleError::NoValid);
        }
        if valid.iter().chain(&conditional_invalid).any(String::is_empty) {
            return Err(ExampleError::EmptyNotInvalid);
        }
        let mut seen = HashSet::new();
        for s in valid.iter().chain(&invalid).chain(&conditional_invalid) {
            if !seen.insert(s.as_str()) {
                return Err(ExampleError::CrossDuplicate(s.clone()));
            }
        }
        Ok(ExampleSet { valid, invalid, conditional_invalid })
    }

    pub fn valid(&self) -> &[String] {
        &self.valid
    }

    pub fn invalid(&self) -> &[String] {
        &self.invalid
    }

    pub fn conditional_invalid(&self) -> &[String] {
        &self.conditional_invalid
    }

    pub fn list(&self, kind: ExampleKind) -> &[String] {
        match kind {
            ExampleKind::Valid => &self.valid,
            ExampleKind::Invalid => &self.invalid,
            ExampleKind::ConditionalInvalid => &self.conditional_invalid,
        }
    }

    pub fn kind_of(&self, s: &str) -> Option<ExampleKind> {
        [ExampleKind::Valid, ExampleKind::Invalid, ExampleKind::ConditionalInvalid]
            .into_iter()
            .find(|&k| self.list(k).iter().any(|x| x == s))
    }

    /// Adds an example answered during disambiguation.
    ///
    /// Fails if the string is already present in another list; adding it
    /// again to the same list is a no-op.
    pub fn add(&mut self, kind: ExampleKind, s: String) -> Result<(), ExampleError> {
        match self.kind_of(&s) {
            Some(k) if k == kind => return Ok(()),
            Some(_) => return Err(ExampleError::CrossDuplicate(s)),
            None => {}
        }
        if s.is_empty() && kind != ExampleKind::Invalid {
            return Err(ExampleError::EmptyNotInvalid);
        }
        match kind {
            ExampleKind::Valid => self.valid.push(s),
            ExampleKind::Invalid => self.invalid.push(s),
            ExampleKind::ConditionalInvalid => self.conditional_invalid.push(s),
        }
        Ok(())
    }

    /// Every example with its kind, valid first.
    pub fn iter(&self) -> impl Iterator<Item = (ExampleKind, &str)> {
        [ExampleKind::Valid, ExampleKind::Invalid, ExampleKind::ConditionalInvalid]
            .into_iter()
            .flat_map(move |k| self.list(k).iter().map(move |s| (k, s.as_str())))
    }

    pub fn len(&self) -> usize {
        self.valid.len() + self.invalid.len() + self.conditional_invalid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn dedup(list: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    list.into_iter().filter(|s| seen.insert(s.clone())).collect()
}

/// Parses the sectioned benchmark format.
///
/// A line `++`, `--` or `+-` starts the valid, invalid or conditional-invalid
/// section. Every other non-empty line is one example, taken verbatim except
/// for a trailing carriage return.
pub fn parse_benchmark(text: &str) -> Result<ExampleSet, ExampleError> {
    let mut lists: [Option<Vec<String>>; 3] = [None, None, None];
    let mut current: Option<usize> = None;
    for (idx, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let section = match line {
            "++" => Some(0),
            "--" => Some(1),
            "+-" => Some(2),
            _ => None,
        };
        if let Some(sec) = section {
            if lists[sec].is_some() {
                return Err(ExampleError::RepeatedSection(["++", "--", "+-"][sec]));
            }
            lists[sec] = Some(Vec::new());
            current = Some(sec);
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match current {
            Some(sec) => lists[sec].as_mut().unwrap().push(line.to_string()),
            None if looks_like_header(line) => {
                return Err(ExampleError::BadHeader { line: idx + 1, header: line.to_string() })
            }
            None => return Err(ExampleError::NoSection(idx + 1)),
        }
    }
    let [valid, invalid, cond] = lists;
    ExampleSet::new(valid.unwrap_or_default(), invalid.unwrap_or_default(), cond.unwrap_or_default())
}

fn looks_like_header(line: &str) -> bool {
    line.len() <= 3 && line.chars().all(|c| c == '+' || c == '-')
}

/// Writes an example set in the benchmark format; empty sections are omitted.
///
/// Examples that contain a newline or that equal a section header cannot be
/// represented and are written as is; the result then will not reparse to
/// the same set.
pub fn serialize_benchmark(examples: &ExampleSet) -> String {
    let mut out = String::new();
    for kind in [ExampleKind::Valid, ExampleKind::Invalid, ExampleKind::ConditionalInvalid] {
        let list = examples.list(kind);
        if list.is_empty() && kind != ExampleKind::Valid {
            continue;
        }
        out.push_str(kind.header());
        out.push('\n');
        for s in list {
            out.push_str(s);
            out.push('\n');
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub fn holds(self, value: i64, bound: i64) -> bool {
        match self {
            CmpOp::Le => value <= bound,
            CmpOp::Ge => value >= bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }
}

/// `$group op bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CaptureCondition {
    pub group: usize,
    pub op: CmpOp,
    pub bound: i64,
}

impl CaptureCondition {
    pub fn new(group: usize, op: CmpOp, bound: i64) -> Self {
        CaptureCondition { group, op, bound }
    }

    pub fn holds(&self, captures: &[i64]) -> bool {
        captures.get(self.group).is_some_and(|&v| self.op.holds(v, self.bound))
    }
}

impl fmt::Display for CaptureCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${} {} {}", self.group, self.op.symbol(), self.bound)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConditionParseError {
    #[error("condition {0:?} is not of the form `$i <= b` or `$i >= b`")]
    Malformed(String),
}

impl std::str::FromStr for CaptureCondition {
    type Err = ConditionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConditionParseError::Malformed(s.to_string());
        let t = s.trim();
        let rest = t.strip_prefix('$').ok_or_else(bad)?;
        let (op, at) = if let Some(i) = rest.find("<=") {
            (CmpOp::Le, i)
        } else if let Some(i) = rest.find(">=") {
            (CmpOp::Ge, i)
        } else {
            return Err(bad());
        };
        let group = rest[..at].trim().parse().map_err(|_| bad())?;
        let bound = rest[at + 2..].trim().parse().map_err(|_| bad())?;
        Ok(CaptureCondition { group, op, bound })
    }
}

/// Joins conditions for human-readable reports.
pub fn format_conditions(conditions: &[CaptureCondition]) -> String {
    conditions.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ∧ ")
}

/// Joins conditions for machine-readable output.
pub fn format_conditions_ascii(conditions: &[CaptureCondition]) -> String {
    conditions.iter().map(ToString::to_string).collect::<Vec<_>>().join(" && ")
}

/// How a validation classifies one string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Matches and satisfies every condition.
    Accept,
    /// Does not match the pattern.
    NoMatch,
    /// Matches the pattern but a condition fails (or a capture is not numeric).
    ConditionFail,
}

/// A regex with capturing groups plus a conjunction of capture conditions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegexValidation {
    pub regex: Regex,
    pub conditions: Vec<CaptureCondition>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidationParseError {
    #[error("empty validation file")]
    Empty,
    #[error("regex: {0}")]
    Regex(#[from] engine::ParseError),
    #[error(transparent)]
    Condition(#[from] ConditionParseError),
    #[error("condition {0} refers to a group the regex does not have")]
    NoSuchGroup(CaptureCondition),
}

impl RegexValidation {
    pub fn new(regex: Regex, conditions: Vec<CaptureCondition>) -> Self {
        RegexValidation { regex, conditions }
    }

    pub fn pattern_only(regex: Regex) -> Self {
        RegexValidation { regex, conditions: Vec::new() }
    }

    /// Parses the truth file format: the regex on the first non-empty line,
    /// then conditions one per line (a line may also join several with `&&`
    /// or `∧`). There is no comment syntax, since a regex may start with `#`.
    pub fn parse(text: &str) -> Result<Self, ValidationParseError> {
        let mut lines = text
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .filter(|l| !l.trim().is_empty());
        let regex = engine::parse(lines.next().ok_or(ValidationParseError::Empty)?)?;
        let mut conditions = Vec::new();
        for line in lines {
            for part in line.split("&&").flat_map(|p| p.split('∧')) {
                conditions.push(part.parse::<CaptureCondition>()?);
            }
        }
        let groups = regex.group_count();
        if let Some(c) = conditions.iter().find(|c| c.group >= groups) {
            return Err(ValidationParseError::NoSuchGroup(*c));
        }
        Ok(RegexValidation { regex, conditions })
    }

    /// Inverse of [`RegexValidation::parse`].
    pub fn to_file_text(&self) -> String {
        let mut out = engine::emit(&self.regex);
        out.push('\n');
        for c in &self.conditions {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    pub fn verdict(&self, s: &str) -> Verdict {
        if !engine::full_match(&self.regex, s) {
            return Verdict::NoMatch;
        }
        if self.conditions.is_empty() {
            return Verdict::Accept;
        }
        match engine::extract_captures(&self.regex, s) {
            Captures::Values(values) if self.conditions.iter().all(|c| c.holds(&values)) => Verdict::Accept,
            Captures::NoMatch => Verdict::NoMatch,
            _ => Verdict::ConditionFail,
        }
    }

    pub fn accepts(&self, s: &str) -> bool {
        self.verdict(s) == Verdict::Accept
    }
}

impl fmt::Display for RegexValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.regex)?;
        if !self.conditions.is_empty() {
            write!(f, " where {}", format_conditions(&self.conditions))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExampleCheck {
    pub example: String,
    pub kind: ExampleKind,
    /// `None` when the example is classified as its list requires.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ExampleCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failure.is_none())
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExampleCheck> {
        self.checks.iter().filter(|c| c.failure.is_some())
    }
}

/// Checks every example against the clause its list requires.
pub fn validate(validation: &RegexValidation, examples: &ExampleSet) -> ValidationReport {
    let checks = examples
        .iter()
        .map(|(kind, s)| {
            let verdict = validation.verdict(s);
            let failure = match (kind, verdict) {
                (ExampleKind::Valid, Verdict::Accept)
                | (ExampleKind::Invalid, Verdict::NoMatch)
                | (ExampleKind::ConditionalInvalid, Verdict::ConditionFail) => None,
                (ExampleKind::Valid, Verdict::NoMatch) => Some("valid example does not match".to_string()),
                (ExampleKind::Valid, Verdict::ConditionFail) => {
                    Some("valid example violates a condition".to_string())
                }
                (ExampleKind::Invalid, _) => Some("invalid example matches".to_string()),
                (ExampleKind::ConditionalInvalid, Verdict::NoMatch) => {
                    Some("conditional-invalid example does not match".to_string())
                }
                (ExampleKind::ConditionalInvalid, Verdict::Accept) => {
                    Some("conditional-invalid example satisfies every condition".to_string())
                }
            };
            ExampleCheck { example: s.to_string(), kind, failure }
        })
        .collect();
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_valid_rejected() {
        assert_eq!(ExampleSet::new(vec![], vec!["a".into()], vec![]), Err(ExampleError::NoValid));
        assert_eq!(
            ExampleSet::new(vec!["".into()], vec![], vec![]),
            Err(ExampleError::EmptyNotInvalid)
        );
        assert!(ExampleSet::new(vec!["a".into()], vec!["".into()], vec![]).is_ok());
    }

    #[test]
    fn minimal_file() {
        let set = parse_benchmark("++\nab").unwrap();
        assert_eq!(set.valid(), ["ab"]);
        assert!(set.invalid().is_empty());
        assert!(set.conditional_invalid().is_empty());
    }

    #[test]
    fn sections_any_order_and_crlf() {
        let set = parse_benchmark("--\r\nx\r\n+-\r\nz\r\n++\r\ny\r\n").unwrap();
        assert_eq!(set.valid(), ["y"]);
        assert_eq!(set.invalid(), ["x"]);
        assert_eq!(set.conditional_invalid(), ["z"]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_benchmark("--\nx\n"), Err(ExampleError::NoValid));
        assert_eq!(parse_benchmark("++\na\n--\na\n"), Err(ExampleError::CrossDuplicate("a".into())));
        assert_eq!(parse_benchmark("a\n"), Err(ExampleError::NoSection(1)));
        assert!(matches!(parse_benchmark("+++\na\n"), Err(ExampleError::BadHeader { .. })));
        assert_eq!(parse_benchmark("++\na\n++\nb\n"), Err(ExampleError::RepeatedSection("++")));
    }

    #[test]
    fn condition_text() {
        let c: CaptureCondition = "$1 >= -3".parse().unwrap();
        assert_eq!(c, CaptureCondition::new(1, CmpOp::Ge, -3));
        assert_eq!(c.to_string(), "$1 >= -3");
        assert!("$x <= 3".parse::<CaptureCondition>().is_err());
        assert!("0 <= 3".parse::<CaptureCondition>().is_err());
    }

    #[test]
    fn add_rejects_conflicts() {
        let mut set = ExampleSet::new(vec!["a".into()], vec!["b".into()], vec![]).unwrap();
        assert!(set.add(ExampleKind::Valid, "a".into()).is_ok());
        assert_eq!(set.valid().len(), 1);
        assert!(set.add(ExampleKind::Valid, "b".into()).is_err());
        set.add(ExampleKind::ConditionalInvalid, "c".into()).unwrap();
        assert_eq!(set.kind_of("c"), Some(ExampleKind::ConditionalInvalid));
    }
}
