//! Capturing groups and integer conditions over their values.

use std::collections::BTreeSet;

use crate::ast::Regex;
use crate::engine::{full_match, CaptureMatcher, Captures};
use crate::model::{CaptureCondition, CmpOp};
use crate::solver::{Backend, BoolVar, IntVar, SatResult, SolverError, Term};

/// Top-level concatenation units of `r`. Groups make no sense inside them.
pub fn atomic_decompose(r: &Regex) -> Vec<Regex> {
    match r {
        Regex::Concat(parts) => parts.clone(),
        other => vec![other.clone()],
    }
}

/// Half-open intervals over the atomic units, one per group.
pub type Placement = Vec<(usize, usize)>;

/// Placements of exactly `g` groups over `len` units, in lexicographic
/// order of their interval bounds.
pub fn enumerate_placements(len: usize, g: usize) -> Placements {
    Placements { len, g, next: (g >= 1 && g <= len).then(|| minimal_from(&[], 2 * g)) }
}

pub struct Placements {
    len: usize,
    g: usize,
    next: Option<Vec<usize>>,
}

/// Smallest continuation of a flattened bound list `[s0, e0, s1, e1, ..]`.
fn minimal_from(prefix: &[usize], total: usize) -> Vec<usize> {
    let mut v = prefix.to_vec();
    while v.len() < total {
        let k = v.len();
        let x = match (k % 2, v.last()) {
            (_, None) => 0,
            (1, Some(&s)) => s + 1,
            (_, Some(&e)) => e,
        };
        v.push(x);
    }
    v
}

impl Iterator for Placements {
    type Item = Placement;

    fn next(&mut self) -> Option<Placement> {
        let cur = self.next.take()?;
        let total = 2 * self.g;
        // Successor: bump the rightmost bound whose minimal completion fits.
        for j in (0..total).rev() {
            let mut prefix = cur[..j].to_vec();
            prefix.push(cur[j] + 1);
            let cand = minimal_from(&prefix, total);
            if cand[total - 1] <= self.len {
                self.next = Some(cand);
                break;
            }
        }
        Some(cur.chunks(2).map(|w| (w[0], w[1])).collect())
    }
}

/// `units` with the given intervals wrapped in groups.
pub fn apply_placement(units: &[Regex], placement: &[(usize, usize)]) -> Regex {
    let mut parts = Vec::new();
    let mut i = 0;
    for &(s, e) in placement {
        parts.extend(units[i..s].iter().cloned());
        parts.push(Regex::group(Regex::concat(units[s..e].to_vec())));
        i = e;
    }
    parts.extend(units[i..].iter().cloned());
    Regex::concat(parts)
}

/// Integer captures of every string, or `None` if some string does not
/// match or captures non-numeric text.
pub fn capture_table<S: AsRef<str>>(r: &Regex, strings: &[S]) -> Option<Vec<Vec<i64>>> {
    let m = CaptureMatcher::new(r);
    strings
        .iter()
        .map(|s| match m.captures(s.as_ref()) {
            Captures::Values(v) => Some(v),
            _ => None,
        })
        .collect()
}

struct ConditionVars {
    conds: Vec<(usize, CmpOp, BoolVar, IntVar)>,
}

/// Candidate bound values for one group: every seen capture and its
/// neighbours, never negative. These cover the tightest and loosest bound
/// separating any two seen values.
fn bound_domain(values: impl Iterator<Item = i64>) -> Vec<i64> {
    let mut d = BTreeSet::new();
    for v in values {
        for x in [v - 1, v, v + 1] {
            if x >= 0 {
                d.insert(x);
            }
        }
    }
    if d.is_empty() {
        d.insert(0);
    }
    d.into_iter().collect()
}

fn smt(op: CmpOp, b: IntVar, value: i64) -> Term {
    match op {
        CmpOp::Le => Term::IntGe(b, value),
        CmpOp::Ge => Term::IntLe(b, value),
    }
}

/// Declares `u`/`b` per candidate condition and the satisfaction
/// variables per capture and example, and asserts the hard clause.
fn encode_conditions(
    b: &mut dyn Backend,
    groups: usize,
    valid: &[Vec<i64>],
    invalid: &[Vec<i64>],
) -> Result<ConditionVars, SolverError> {
    let mut conds = Vec::new();
    for g in 0..groups {
        let dom = bound_domain(valid.iter().chain(invalid).map(|c| c[g]));
        for op in [CmpOp::Le, CmpOp::Ge] {
            let u = b.new_bool(&format!("u{g}{}", op.symbol()));
            let v = b.new_int(&format!("b{g}{}", op.symbol()), &dom);
            conds.push((g, op, u, v));
        }
    }
    for (rows, is_valid) in [(valid, true), (invalid, false)] {
        for caps in rows {
            let mut sats = Vec::new();
            for (g, &value) in caps.iter().enumerate() {
                let s = b.new_bool("s");
                let body: Vec<Term> = conds
                    .iter()
                    .filter(|c| c.0 == g)
                    .map(|&(_, op, u, v)| Term::implies(Term::Bool(u), smt(op, v, value)))
                    .collect();
                b.assert(&Term::iff(Term::Bool(s), Term::And(body)))?;
                sats.push(Term::Bool(s));
            }
            if is_valid {
                b.assert(&Term::And(sats))?;
            } else {
                b.assert(&Term::Or(sats.into_iter().map(Term::not).collect()))?;
            }
        }
    }
    Ok(ConditionVars { conds })
}

fn read_conditions(b: &dyn Backend, vars: &ConditionVars) -> Vec<CaptureCondition> {
    vars.conds
        .iter()
        .filter(|c| b.bool_value(c.2) == Some(true))
        .map(|&(g, op, _, v)| CaptureCondition::new(g, op, b.int_value(v).expect("model value")))
        .collect()
}

/// Moves each bound onto the valid captures: `<=` bounds to the largest
/// valid value, `>=` bounds to the smallest.
pub fn tighten(conditions: &[CaptureCondition], valid: &[Vec<i64>]) -> Vec<CaptureCondition> {
    conditions
        .iter()
        .map(|c| {
            let values = valid.iter().map(|v| v[c.group]);
            let bound = match c.op {
                CmpOp::Le => values.max(),
                CmpOp::Ge => values.min(),
            };
            CaptureCondition::new(c.group, c.op, bound.unwrap_or(c.bound))
        })
        .collect()
}

/// Moves each bound outward as far as the conditional-invalid captures
/// allow, one condition at a time. A condition that no invalid row depends
/// on is dropped. The result still rejects every row of `invalid`.
pub fn widen(conditions: &[CaptureCondition], invalid: &[Vec<i64>]) -> Vec<CaptureCondition> {
    let mut conds: Vec<Option<CaptureCondition>> = conditions.iter().copied().map(Some).collect();
    for i in 0..conds.len() {
        let Some(c) = conds[i] else { continue };
        // Rows that only this condition rejects.
        let rows = invalid.iter().filter(|row| {
            conds.iter().enumerate().all(|(j, o)| j == i || o.is_none_or(|o| o.holds(row)))
        });
        let values = rows.map(|row| row[c.group]);
        let bound = match c.op {
            CmpOp::Ge => values.max().map(|v| v + 1),
            CmpOp::Le => values.min().map(|v| v - 1),
        };
        conds[i] = bound.map(|b| CaptureCondition::new(c.group, c.op, b));
    }
    conds.into_iter().flatten().collect()
}

/// Minimum-size condition set separating the valid captures from the
/// conditional-invalid ones, with tightened bounds. `None` if no set of
/// per-group bounds separates them.
pub fn synthesize_conditions(
    b: &mut dyn Backend,
    groups: usize,
    valid: &[Vec<i64>],
    invalid: &[Vec<i64>],
) -> Result<Option<Vec<CaptureCondition>>, SolverError> {
    let vars = encode_conditions(b, groups, valid, invalid)?;
    for c in &vars.conds {
        b.assert_soft(&Term::not(Term::Bool(c.2)));
    }
    if b.maximize()?.is_none() {
        return Ok(None);
    }
    Ok(Some(tighten(&read_conditions(b, &vars), valid)))
}

/// Another condition set of at most `size` conditions that separates the
/// examples and is none of `blocked`. Bounds are returned as found.
pub fn alternative_conditions(
    b: &mut dyn Backend,
    groups: usize,
    valid: &[Vec<i64>],
    invalid: &[Vec<i64>],
    size: usize,
    blocked: &[Vec<CaptureCondition>],
) -> Result<Option<Vec<CaptureCondition>>, SolverError> {
    let vars = encode_conditions(b, groups, valid, invalid)?;
    let used: Vec<Term> = vars.conds.iter().map(|c| Term::Bool(c.2)).collect();
    b.assert(&Term::not(Term::AtLeast(used, size + 1)))?;
    for set in blocked {
        let clause = vars
            .conds
            .iter()
            .map(|&(g, op, u, v)| match set.iter().find(|c| c.group == g && c.op == op) {
                Some(c) => Term::Or(vec![Term::not(Term::Bool(u)), Term::not(Term::IntEq(v, c.bound))]),
                None => Term::Bool(u),
            })
            .collect();
        b.assert(&Term::Or(clause))?;
    }
    match b.check()? {
        SatResult::Unsat => Ok(None),
        SatResult::Sat => Ok(Some(read_conditions(b, &vars))),
    }
}

/// Values of group `g` allowed by the conditions on it, as an inclusive
/// interval (`None` = unbounded).
fn interval(conds: &[CaptureCondition], g: usize) -> (Option<i64>, Option<i64>) {
    let mut lo = None;
    let mut hi = None;
    for c in conds.iter().filter(|c| c.group == g) {
        match c.op {
            CmpOp::Ge => lo = Some(lo.map_or(c.bound, |x: i64| x.max(c.bound))),
            CmpOp::Le => hi = Some(hi.map_or(c.bound, |x: i64| x.min(c.bound))),
        }
    }
    (lo, hi)
}

fn inside(v: i64, (lo, hi): (Option<i64>, Option<i64>)) -> bool {
    lo.is_none_or(|l| v >= l) && hi.is_none_or(|h| v <= h)
}

/// Conditions of `a` that are not in `b`.
pub fn strip_shared(a: &[CaptureCondition], b: &[CaptureCondition]) -> Vec<CaptureCondition> {
    a.iter().filter(|c| !b.contains(c)).cloned().collect()
}

/// Value for group `g` that satisfies exactly one of the two condition
/// sets on that group, chosen in the middle of the first differing
/// segment (next to the boundary when the segment is unbounded).
fn separating_value(s1: &[CaptureCondition], s2: &[CaptureCondition], g: usize) -> Option<i64> {
    let (i1, i2) = (interval(s1, g), interval(s2, g));
    if i1 == i2 {
        return None;
    }
    // Breakpoints of both intervals split the line into segments on which
    // membership is constant.
    let mut points: Vec<i64> = [i1.0, i1.1.map(|h| h + 1), i2.0, i2.1.map(|h| h + 1)].into_iter().flatten().collect();
    points.sort_unstable();
    points.dedup();
    let differs = |v: i64| inside(v, i1) != inside(v, i2);
    for (k, &start) in points.iter().enumerate() {
        if let Some(&end) = points.get(k + 1) {
            if differs(start) {
                return Some(start + (end - 1 - start) / 2);
            }
        } else if differs(start) {
            return Some(start);
        }
    }
    let before = points[0] - 1;
    differs(before).then_some(before)
}

/// Capture values accepted by exactly one of the two condition sets.
/// Groups not involved keep `base`. Shared conditions are ignored, as they
/// hold or fail identically under both sets.
pub fn distinguishing_captures(s1: &[CaptureCondition], s2: &[CaptureCondition], base: &[i64]) -> Option<Vec<i64>> {
    let a = strip_shared(s1, s2);
    let b = strip_shared(s2, s1);
    for g in 0..base.len() {
        if let Some(v) = separating_value(&a, &b, g) {
            let mut out = base.to_vec();
            out[g] = v;
            return Some(out);
        }
    }
    None
}

/// Replaces the captured text in `example` with `values`, zero-padded to
/// the original width. `None` if the result would not match `r` or would
/// capture different values.
pub fn splice(r: &Regex, example: &str, values: &[i64]) -> Option<String> {
    if values.iter().any(|&v| v < 0) {
        return None;
    }
    let m = CaptureMatcher::new(r);
    let spans = m.spans(example)?;
    let mut out = String::new();
    let mut last = 0;
    for (span, &v) in spans.iter().zip(values) {
        let (s, e) = (*span)?;
        out.push_str(&example[last..s]);
        out.push_str(&format!("{v:0width$}", width = example[s..e].len()));
        last = e;
    }
    out.push_str(&example[last..]);
    (full_match(r, &out) && m.captures(&out) == Captures::Values(values.to_vec())).then_some(out)
}

/// A string accepted by exactly one of the two condition sets, built from
/// the first valid example that can host the distinguishing values.
pub fn distinguish_conditions(
    r: &Regex,
    s1: &[CaptureCondition],
    s2: &[CaptureCondition],
    valid: &[String],
) -> Option<String> {
    let m = CaptureMatcher::new(r);
    valid.iter().find_map(|x| {
        let Captures::Values(base) = m.captures(x) else { return None };
        let values = distinguishing_captures(s1, s2, &base)?;
        splice(r, x, &values)
    })
}
