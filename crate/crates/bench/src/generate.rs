//! Seeded example generation from a ground-truth validation.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use regval::engine::full_match;
use regval::{ExampleKind, ExampleSet, Regex, RegexValidation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub valid: usize,
    pub invalid: usize,
    pub conditional_invalid: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("at least one valid example is required")]
    NoValid,
    #[error("conditional-invalid examples need a truth with conditions")]
    NoConditions,
    #[error("could only sample {got} of {wanted} {kind:?} examples")]
    TooSmall { kind: ExampleKind, wanted: usize, got: usize },
}

const ATTEMPTS_PER_STRING: usize = 2000;

/// A random string of the language of `r`. Unbounded repetition takes
/// between zero and three rounds.
pub fn sample(r: &Regex, rng: &mut impl Rng) -> String {
    let mut out = String::new();
    sample_into(r, rng, &mut out);
    out
}

fn sample_into(r: &Regex, rng: &mut impl Rng, out: &mut String) {
    match r {
        Regex::Literal(c) => out.push(*c),
        Regex::Class(k) => {
            let members: Vec<char> = k.members().collect();
            out.push(*members.choose(rng).expect("classes are non-empty"));
        }
        Regex::Union(a, b) => sample_into(if rng.gen_bool(0.5) { a } else { b }, rng, out),
        Regex::Concat(parts) => parts.iter().for_each(|p| sample_into(p, rng, out)),
        Regex::Group(a) => sample_into(a, rng, out),
        Regex::Kleene(a) | Regex::Plus(a) | Regex::Optional(a) | Regex::Range(a, _) => {
            let (lo, hi) = match r {
                Regex::Kleene(_) => (0, 3),
                Regex::Plus(_) => (1, 3),
                Regex::Optional(_) => (0, 1),
                Regex::Range(_, lit) => (lit.lo(), lit.hi()),
                _ => unreachable!(),
            };
            for _ in 0..rng.gen_range(lo..=hi) {
                sample_into(a, rng, out);
            }
        }
    }
}

/// Breaks `s` by one random edit.
fn mutate(s: &str, pool: &[char], rng: &mut impl Rng) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let n = chars.len();
    match rng.gen_range(0..5) {
        0 if n > 0 => {
            chars.remove(rng.gen_range(0..n));
        }
        1 => chars.insert(rng.gen_range(0..=n), *pool.choose(rng).expect("non-empty pool")),
        2 if n > 0 => chars[rng.gen_range(0..n)] = *pool.choose(rng).expect("non-empty pool"),
        3 if n > 1 => chars.swap(rng.gen_range(0..n - 1), rng.gen_range(0..n)),
        _ => chars.truncate(rng.gen_range(0..n.max(1))),
    }
    chars.into_iter().collect()
}

/// Samples an example set classified by `truth`: valid strings are accepted,
/// invalid ones are edits of language members that no longer match, and
/// conditional-invalid ones match but violate a condition.
pub fn generate_examples(truth: &RegexValidation, counts: Counts, seed: u64) -> Result<ExampleSet, GenError> {
    generate_avoiding(truth, counts, seed, &HashSet::new())
}

/// As [`generate_examples`], never producing a string of `avoid`.
pub fn generate_avoiding(
    truth: &RegexValidation,
    counts: Counts,
    seed: u64,
    avoid: &HashSet<String>,
) -> Result<ExampleSet, GenError> {
    if counts.valid == 0 {
        return Err(GenError::NoValid);
    }
    if counts.conditional_invalid > 0 && truth.conditions.is_empty() {
        return Err(GenError::NoConditions);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<String> = avoid.clone();
    let mut take = |kind: ExampleKind, wanted: usize, rng: &mut ChaCha8Rng, f: &mut dyn FnMut(&mut ChaCha8Rng) -> Option<String>| {
        let mut got = Vec::new();
        for _ in 0..wanted * ATTEMPTS_PER_STRING {
            if got.len() == wanted {
                break;
            }
            if let Some(s) = f(rng) {
                if seen.insert(s.clone()) {
                    got.push(s);
                }
            }
        }
        if got.len() < wanted {
            return Err(GenError::TooSmall { kind, wanted, got: got.len() });
        }
        Ok(got)
    };
    let r = &truth.regex;
    let valid = take(ExampleKind::Valid, counts.valid, &mut rng, &mut |rng| {
        let s = sample(r, rng);
        (!s.is_empty() && truth.accepts(&s)).then_some(s)
    })?;
    let mut pool: Vec<char> = valid.iter().flat_map(|s| s.chars()).collect();
    pool.extend(['a', 'Z', '0', '7', '/', '-', '.', ' ', ':']);
    pool.sort_unstable();
    pool.dedup();
    let invalid = take(ExampleKind::Invalid, counts.invalid, &mut rng, &mut |rng| {
        let s = mutate(&sample(r, rng), &pool, rng);
        (!full_match(r, &s)).then_some(s)
    })?;
    let conditional = take(ExampleKind::ConditionalInvalid, counts.conditional_invalid, &mut rng, &mut |rng| {
        let s = sample(r, rng);
        (!s.is_empty() && !truth.accepts(&s)).then_some(s)
    })?;
    Ok(ExampleSet::new(valid, invalid, conditional).expect("generated lists are disjoint"))
}

/// At most `valid` valid and `invalid` invalid examples, chosen at random;
/// conditional-invalid examples are capped at `invalid` as well.
pub fn subsample(examples: &ExampleSet, valid: usize, invalid: usize, seed: u64) -> ExampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |list: &[String], n: usize| {
        let mut v = list.to_vec();
        v.shuffle(&mut rng);
        v.truncate(n);
        v
    };
    let v = pick(examples.valid(), valid.max(1));
    let i = pick(examples.invalid(), invalid);
    let c = pick(examples.conditional_invalid(), invalid);
    ExampleSet::new(v, i, c).expect("subsets of a valid set")
}
