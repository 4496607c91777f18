use regval::engine::{equivalent, parse, SessionAlphabet};
use regval::Regex;
use regval::orchestrator::{run, AcceptFirst, Answer, GroundTruth, Phase, Question, Status, SynthOptions};
use regval::{parse_benchmark, ExampleSet, RegexValidation};

const DATES: &str = "++
19/08/1996
26/10/1998
22/09/2000
01/12/2001
29/09/2003
31/08/2015
--
19/08/96
26-10-1998
22.09.2000
1/12/2001
29/9/2003
2015/08/31
+-
33/08/1996
26/00/1998
22/13/2000
00/12/2001
12/31/2003
52/03/2015
";

fn same_lang(a: &Regex, b: &Regex) -> bool {
    let alpha = SessionAlphabet::for_session(["0123456789/-.abc"], &[a, b]);
    equivalent(a, b, &alpha).unwrap()
}

fn date_truth() -> RegexValidation {
    RegexValidation::parse("([0-9]{2})/([0-9]{2})/[0-9]{4}\n$0 <= 31\n$0 >= 1\n$1 <= 12\n$1 >= 1\n").unwrap()
}

/// Acceptance of the two validations over every day/month pair and a few years.
fn same_behaviour(a: &RegexValidation, b: &RegexValidation) -> Option<String> {
    for d in 0..100 {
        for m in 0..100 {
            for y in ["1996", "0000", "2999"] {
                let s = format!("{d:02}/{m:02}/{y}");
                if a.accepts(&s) != b.accepts(&s) {
                    return Some(s);
                }
            }
        }
    }
    None
}

#[test]
fn dates_with_ground_truth() {
    let ex = parse_benchmark(DATES).unwrap();
    let truth = date_truth();
    let mut oracle = GroundTruth(truth.clone());
    let out = run(ex, &SynthOptions::default(), &mut oracle);
    assert_eq!(out.status, Status::Done, "{:?}", out.transcript);
    let got = out.result.unwrap();
    assert!(same_lang(&got.regex, &truth.regex), "regex {}", got.regex);
    assert_eq!(got.conditions.len(), 4, "{got}");
    assert_eq!(same_behaviour(&got, &truth), None, "{got}");
    assert_eq!(out.stats.questions, out.transcript.len());
    assert!(out.transcript.iter().any(|t| t.phase == Phase::Captures));
}

#[test]
fn dates_without_questions() {
    let ex = parse_benchmark(DATES).unwrap();
    let out = run(ex.clone(), &SynthOptions::default(), &mut AcceptFirst);
    assert_eq!(out.status, Status::Done);
    assert!(out.transcript.is_empty());
    let got = out.result.unwrap();
    assert!(regval::validate(&got, &ex).passed());
    assert!(!got.conditions.is_empty());
}

#[test]
fn abort_stops_the_session() {
    let ex = parse_benchmark(DATES).unwrap();
    let mut oracle = |_: &Question| Answer::Abort;
    let out = run(ex, &SynthOptions::default(), &mut oracle);
    assert!(matches!(out.status, Status::Failed(_)));
}

#[test]
fn question_cap_is_respected() {
    let ex = parse_benchmark(DATES).unwrap();
    let opts = SynthOptions { max_questions: 2, ..Default::default() };
    let mut oracle = GroundTruth(date_truth());
    let out = run(ex, &opts, &mut oracle);
    assert!(out.transcript.len() <= 2);
    assert!(out.result.is_some());
}

#[test]
fn unmatched_conditional_invalid_is_reported() {
    let ex = ExampleSet::new(vec!["aa".into(), "ab".into()], vec!["b".into()], vec!["cc".into()]).unwrap();
    let out = run(ex, &SynthOptions::default(), &mut AcceptFirst);
    match out.status {
        Status::Done => {
            // Stage one had to cover "cc" as a must-match string.
            let r = out.result.unwrap();
            assert!(regval::engine::full_match(&r.regex, "cc"));
        }
        Status::Failed(m) => assert!(m.contains("cc") || m.contains("conditions"), "{m}"),
        s => panic!("{s:?}"),
    }
}

#[test]
fn ktree_mode_finds_a_small_regex() {
    let ex = ExampleSet::new(vec!["ab".into(), "aab".into(), "aaab".into()], vec!["b".into(), "aa".into()], vec![]).unwrap();
    let opts = SynthOptions { mode: regval::orchestrator::Mode::Ktree, ..Default::default() };
    let truth = RegexValidation::pattern_only(parse("a+b").unwrap());
    let out = run(ex, &opts, &mut GroundTruth(truth.clone()));
    assert_eq!(out.status, Status::Done);
    assert!(same_lang(&out.result.unwrap().regex, &truth.regex));
}

#[test]
fn dates_through_smtlib_backend() {
    use regval::solver::{SmtLibBackend, SmtLibConfig, SolverChoice};
    let cfg = SmtLibConfig::from_command(&std::env::var("REGVAL_SOLVER").unwrap_or_else(|_| "z3".into()));
    if SmtLibBackend::spawn(&cfg).is_err() {
        eprintln!("z3 not found; skipped");
        return;
    }
    let ex = parse_benchmark(DATES).unwrap();
    let opts = SynthOptions { solver: SolverChoice::SmtLib(cfg), ..Default::default() };
    let truth = date_truth();
    let start = std::time::Instant::now();
    let out = run(ex, &opts, &mut GroundTruth(truth.clone()));
    eprintln!("smtlib run took {:?}", start.elapsed());
    assert_eq!(out.status, Status::Done);
    let got = out.result.unwrap();
    assert_eq!(same_behaviour(&got, &truth), None, "{got}");
}
