use std::collections::BTreeSet;

use regval::dsl::{DslSpec, Op, Production};
use regval::engine::full_match;
use regval::enumerator::{Enumerator, Layout, Pruning, TreeShape};
use regval::solver::NativeBackend;
use regval::{RangeLit, Regex};

fn small_dsl() -> DslSpec {
    DslSpec::custom(vec!['a', 'b'], vec![], vec![RangeLit::Exact(2)], Op::ALL.to_vec())
}

fn enumerate(dsl: &DslSpec, n: u32, d: u32, pruning: Pruning, examples: &[(&str, bool)]) -> Vec<(Vec<Vec<u32>>, Regex)> {
    let mut e = Enumerator::new(Box::new(NativeBackend::new()), Layout::dynamic(dsl, n), d, pruning).unwrap();
    for &(x, ok) in examples {
        e.add_example(x, ok).unwrap();
    }
    let mut out = Vec::new();
    while let Some(p) = e.next_program().unwrap() {
        e.block_equivalent(&p).unwrap();
        out.push((p.trees, p.regex));
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Need {
    Re,
    Lit,
    Empty,
}

/// All assignments of the subtree at `node`, generated top-down from what
/// the parent requires. Written independently of the solver encoding.
fn brute(dsl: &DslSpec, shape: TreeShape, node: u32, need: Need) -> Vec<Vec<(u32, u32)>> {
    if node > shape.tree_nodes() {
        return vec![vec![]];
    }
    let leaf = node >= shape.first_leaf();
    let mut out = Vec::new();
    for id in 0..dsl.len() as u32 {
        let p = dsl.production(id);
        let (fits, kids) = match (need, p) {
            (Need::Empty, Production::Epsilon) => (true, [Need::Empty, Need::Empty]),
            (Need::Re, Production::Literal(_) | Production::Class(_)) => (true, [Need::Empty, Need::Empty]),
            (Need::Lit, Production::Range(_)) => (true, [Need::Empty, Need::Empty]),
            (Need::Re, Production::Op(op)) if !leaf => match op {
                Op::Union | Op::Concat => (true, [Need::Re, Need::Re]),
                Op::Range => (true, [Need::Re, Need::Lit]),
                _ => (true, [Need::Re, Need::Empty]),
            },
            _ => (false, [Need::Empty, Need::Empty]),
        };
        if !fits {
            continue;
        }
        for l in brute(dsl, shape, 2 * node, kids[0]) {
            for r in brute(dsl, shape, 2 * node + 1, kids[1]) {
                let mut a = vec![(node, id)];
                a.extend(l.iter().copied());
                a.extend(r.iter().copied());
                out.push(a);
            }
        }
    }
    out
}

#[test]
fn unpruned_enumeration_matches_brute_force() {
    let dsl = small_dsl();
    for d in 1..=3 {
        let shape = TreeShape::new(1, d);
        let expected: BTreeSet<Vec<u32>> = brute(&dsl, shape, 1, Need::Re)
            .into_iter()
            .map(|mut a| {
                a.sort();
                a.into_iter().map(|(_, v)| v).collect()
            })
            .collect();
        let got: Vec<Vec<u32>> = enumerate(&dsl, 1, d, Pruning::none(), &[]).into_iter().map(|(t, _)| t[0].clone()).collect();
        let got_set: BTreeSet<Vec<u32>> = got.iter().cloned().collect();
        assert_eq!(got.len(), got_set.len(), "duplicate program at depth {d}");
        assert_eq!(got_set, expected, "depth {d}");
    }
}

fn words(alphabet: &[char], max: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for &c in alphabet {
                next.push(format!("{w}{c}"));
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

fn signature(r: &Regex, ws: &[String]) -> Vec<bool> {
    ws.iter().map(|w| full_match(r, w)).collect()
}

#[test]
fn pruning_keeps_every_language() {
    let dsl = small_dsl();
    let ws = words(&['a', 'b', 'c'], 5);
    let full: BTreeSet<Vec<bool>> =
        enumerate(&dsl, 1, 3, Pruning::none(), &[]).iter().map(|(_, r)| signature(r, &ws)).collect();
    let pruned_programs = enumerate(&dsl, 1, 3, Pruning::all(), &[]);
    let pruned: BTreeSet<Vec<bool>> = pruned_programs.iter().map(|(_, r)| signature(r, &ws)).collect();
    assert_eq!(full, pruned);
    assert!(pruned_programs.len() < enumerate(&dsl, 1, 3, Pruning::none(), &[]).len());
}

#[test]
fn example_constraints_match_the_engine() {
    let dsl = DslSpec::custom(
        vec!['a', 'b'],
        vec![],
        vec![RangeLit::Exact(2), RangeLit::Between(0, 2), RangeLit::Between(1, 3)],
        Op::ALL.to_vec(),
    );
    let cases: &[&[(&str, bool)]] = &[
        &[("ab", true), ("", false)],
        &[("aab", true), ("ab", false), ("b", true)],
        &[("", true), ("abab", true), ("aba", false)],
        &[("bbb", true), ("bb", false)],
    ];
    for (n, d) in [(1, 2), (1, 3), (2, 2)] {
        let all = enumerate(&dsl, n, d, Pruning::none(), &[]);
        for examples in cases {
            let expected: BTreeSet<Vec<Vec<u32>>> = all
                .iter()
                .filter(|(_, r)| examples.iter().all(|&(x, ok)| full_match(r, x) == ok))
                .map(|(t, _)| t.clone())
                .collect();
            let got: BTreeSet<Vec<Vec<u32>>> =
                enumerate(&dsl, n, d, Pruning::none(), examples).into_iter().map(|(t, _)| t).collect();
            assert_eq!(got, expected, "shape ({n},{d}) examples {examples:?}");
        }
    }
}

#[test]
fn fixed_columns_are_literal() {
    let dsl = DslSpec::custom(vec!['1'], vec![], vec![RangeLit::Exact(2)], Op::ALL.to_vec());
    let layout = Layout {
        columns: vec![
            regval::enumerator::ColumnSpec::Tree(dsl.clone()),
            regval::enumerator::ColumnSpec::Fixed("/".into()),
            regval::enumerator::ColumnSpec::Tree(dsl),
        ],
    };
    let mut e = Enumerator::new(Box::new(NativeBackend::new()), layout, 2, Pruning::all()).unwrap();
    e.add_example("11/1", true).unwrap();
    e.add_example("1/1", false).unwrap();
    let p = e.next_program().unwrap().unwrap();
    assert!(full_match(&p.regex, "11/1"));
    assert!(!full_match(&p.regex, "1/1"));
    assert_eq!(p.trees[1], Vec::<u32>::new());
}

#[test]
fn union_swaps_are_blocked() {
    let dsl = DslSpec::custom(vec!['a', 'b', 'c'], vec![], vec![], vec![Op::Union]);
    let progs = enumerate(&dsl, 1, 2, Pruning::all(), &[("a", true), ("b", true), ("c", false)]);
    // a|b in both orders is one program once swaps are blocked.
    let texts: Vec<String> = progs.iter().map(|(_, r)| r.to_string()).collect();
    assert_eq!(texts.len(), 1, "{texts:?}");
    assert!(texts[0] == "a|b" || texts[0] == "b|a");
}
