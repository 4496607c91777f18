use proptest::prelude::*;

use regval::solver::{Backend, NativeBackend, SatResult, SmtLibBackend, SmtLibConfig, Term};

const BOOLS: usize = 4;
const INTS: usize = 2;
const DOMAIN: [i64; 4] = [0, 1, 2, 5];

/// Truth of `t` under a full assignment.
fn eval_assignment(t: &Term, bools: &[bool], ints: &[i64]) -> bool {
    let ev = |x: &Term| eval_assignment(x, bools, ints);
    match t {
        Term::True => true,
        Term::False => false,
        Term::Bool(v) => bools[v.0 as usize],
        Term::Not(x) => !ev(x),
        Term::And(xs) => xs.iter().all(ev),
        Term::Or(xs) => xs.iter().any(ev),
        Term::Implies(x, y) => !ev(x) || ev(y),
        Term::Iff(x, y) => ev(x) == ev(y),
        Term::IntEq(v, k) => ints[v.0 as usize] == *k,
        Term::IntLe(v, k) => ints[v.0 as usize] <= *k,
        Term::IntGe(v, k) => ints[v.0 as usize] >= *k,
        Term::VarEq(x, y) => ints[x.0 as usize] == ints[y.0 as usize],
        Term::AtLeast(xs, k) => xs.iter().filter(|x| ev(x)).count() >= *k,
    }
}

fn term() -> impl Strategy<Value = Term> {
    use regval::solver::{BoolVar, IntVar};
    let leaf = prop_oneof![
        (0..BOOLS as u32).prop_map(|i| Term::Bool(BoolVar(i))),
        (0..INTS as u32, prop::sample::select(DOMAIN.to_vec())).prop_map(|(v, k)| Term::IntEq(IntVar(v), k)),
        (0..INTS as u32, 0i64..6).prop_map(|(v, k)| Term::IntLe(IntVar(v), k)),
        (0..INTS as u32, 0i64..6).prop_map(|(v, k)| Term::IntGe(IntVar(v), k)),
        Just(Term::VarEq(IntVar(0), IntVar(1))),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::not),
            prop::collection::vec(inner.clone(), 1..3).prop_map(Term::And),
            prop::collection::vec(inner.clone(), 1..3).prop_map(Term::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::iff(a, b)),
            (prop::collection::vec(inner, 1..4), 0usize..4).prop_map(|(ts, k)| Term::AtLeast(ts, k)),
        ]
    })
}

/// Best number of satisfied soft terms over all assignments, or `None`
/// if no assignment satisfies the hard terms.
fn brute_optimum(hard: &[Term], soft: &[Term]) -> Option<usize> {
    let mut best = None;
    for bits in 0..1u32 << BOOLS {
        let bools: Vec<bool> = (0..BOOLS).map(|i| bits >> i & 1 == 1).collect();
        for &a in &DOMAIN {
            for &b in &DOMAIN {
                let ints = [a, b];
                if hard.iter().all(|t| eval_assignment(t, &bools, &ints)) {
                    let n = soft.iter().filter(|t| eval_assignment(t, &bools, &ints)).count();
                    best = best.max(Some(n));
                }
            }
        }
    }
    best
}

fn solve(b: &mut dyn Backend, hard: &[Term], soft: &[Term]) -> Option<usize> {
    for i in 0..BOOLS {
        b.new_bool(&format!("p{i}"));
    }
    for i in 0..INTS {
        b.new_int(&format!("x{i}"), &DOMAIN);
    }
    for t in hard {
        b.assert(t).unwrap();
    }
    for t in soft {
        b.assert_soft(t);
    }
    let got = b.maximize().unwrap();
    if got.is_some() {
        // The reported model must satisfy what it claims.
        let bools: Vec<bool> = (0..BOOLS as u32).map(|i| b.bool_value(regval::solver::BoolVar(i)).unwrap()).collect();
        let ints: Vec<i64> = (0..INTS as u32).map(|i| b.int_value(regval::solver::IntVar(i)).unwrap()).collect();
        assert!(hard.iter().all(|t| eval_assignment(t, &bools, &ints)));
        assert_eq!(soft.iter().filter(|t| eval_assignment(t, &bools, &ints)).count(), got.unwrap());
    }
    got
}

fn z3() -> Option<SmtLibBackend> {
    let cmd = std::env::var("REGVAL_SOLVER").unwrap_or_else(|_| "z3".into());
    SmtLibBackend::spawn(&SmtLibConfig::from_command(&cmd)).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn native_maximize_is_optimal(hard in prop::collection::vec(term(), 0..4), soft in prop::collection::vec(term(), 0..5)) {
        prop_assert_eq!(solve(&mut NativeBackend::new(), &hard, &soft), brute_optimum(&hard, &soft));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn smtlib_maximize_is_optimal(hard in prop::collection::vec(term(), 0..4), soft in prop::collection::vec(term(), 0..4)) {
        let Some(mut b) = z3() else { return Ok(()) };
        prop_assert_eq!(solve(&mut b, &hard, &soft), brute_optimum(&hard, &soft));
    }
}

#[test]
fn scopes_retract_assertions() {
    let mut backends: Vec<Box<dyn Backend>> = vec![Box::new(NativeBackend::new())];
    if let Some(b) = z3() {
        backends.push(Box::new(b));
    } else {
        eprintln!("z3 not found; only the native backend is checked");
    }
    for mut b in backends {
        let p = b.new_bool("p");
        let x = b.new_int("x", &[1, 2, 3]);
        b.assert(&Term::Or(vec![Term::Bool(p), Term::IntEq(x, 2)])).unwrap();
        b.push().unwrap();
        b.assert(&Term::not(Term::Bool(p))).unwrap();
        b.assert(&Term::ne(x, 2)).unwrap();
        assert_eq!(b.check().unwrap(), SatResult::Unsat);
        b.pop().unwrap();
        assert_eq!(b.check().unwrap(), SatResult::Sat);
        assert!(b.pop().is_err());
    }
}
