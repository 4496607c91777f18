//! Runs cases under several configurations and reports the results.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;

use regval::engine::emit;
use regval::enumerator::Pruning;
use regval::orchestrator::{run, GroundTruth, Mode, Status, SynthOptions};
use regval::model::format_conditions_ascii;
use regval::RegexValidation;

use crate::corpus::Case;
use crate::generate::{generate_avoiding, subsample, Counts};

/// Synthesizer configuration compared by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchMode {
    Multitree,
    Ktree,
    NoPruning,
    DynamicOnly,
}

impl BenchMode {
    pub const ALL: [BenchMode; 4] = [BenchMode::Multitree, BenchMode::Ktree, BenchMode::NoPruning, BenchMode::DynamicOnly];

    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Multitree => "multitree",
            BenchMode::Ktree => "ktree",
            BenchMode::NoPruning => "no-pruning",
            BenchMode::DynamicOnly => "dynamic-only",
        }
    }

    pub fn parse(s: &str) -> Option<BenchMode> {
        BenchMode::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn apply(self, base: &SynthOptions) -> SynthOptions {
        let mut o = base.clone();
        match self {
            BenchMode::Multitree => {}
            BenchMode::Ktree => o.mode = Mode::Ktree,
            BenchMode::NoPruning => o.pruning = Pruning::none(),
            BenchMode::DynamicOnly => o.split = false,
        }
        o
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub modes: Vec<BenchMode>,
    /// Synthesizer options before the mode is applied; `timeout` is the
    /// per-run budget.
    pub synth: SynthOptions,
    /// Reduce each case to at most this many valid and invalid examples.
    pub subsample: Option<(usize, usize)>,
    pub seed: u64,
    /// Held-out strings of each kind used to measure accuracy.
    pub holdout: usize,
    /// Cases run concurrently.
    pub jobs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            modes: vec![BenchMode::Multitree],
            synth: SynthOptions { timeout: Duration::from_secs(60), max_questions: 60, ..Default::default() },
            subsample: None,
            seed: 1,
            holdout: 100,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub mode: &'static str,
    pub solved: bool,
    pub status: String,
    pub seconds: f64,
    pub programs_enumerated: u64,
    pub questions: usize,
    /// Share of held-out strings classified like the truth; only for
    /// solved runs.
    pub accuracy: Option<f64>,
    pub regex: Option<String>,
    pub conditions: String,
}

/// Agreement with the truth on freshly generated strings that are not
/// among `training`.
pub fn holdout_accuracy(
    result: &RegexValidation,
    truth: &RegexValidation,
    training: &HashSet<String>,
    n: usize,
    seed: u64,
) -> Option<f64> {
    let cond = if truth.conditions.is_empty() { 0 } else { n };
    // Small languages cannot supply `n` fresh strings; shrink until they can.
    let mut want = n;
    let set = loop {
        let counts = Counts { valid: want, invalid: n, conditional_invalid: cond.min(want) };
        match generate_avoiding(truth, counts, seed ^ 0x5eed, training) {
            Ok(s) => break s,
            Err(_) if want > 1 => want /= 2,
            Err(_) => return None,
        }
    };
    let all: Vec<&str> = set.iter().map(|(_, s)| s).collect();
    let agree = all.iter().filter(|s| result.accepts(s) == truth.accepts(s)).count();
    Some(agree as f64 / all.len() as f64)
}

pub fn run_case(case: &Case, mode: BenchMode, cfg: &SuiteConfig) -> CaseReport {
    let examples = match cfg.subsample {
        Some((v, i)) => subsample(&case.examples, v, i, cfg.seed),
        None => case.examples.clone(),
    };
    let opts = mode.apply(&cfg.synth);
    let out = run(examples, &opts, &mut GroundTruth(case.truth.clone()));
    let solved = out.status == Status::Done && out.result.is_some();
    let training: HashSet<String> = out.examples.iter().map(|(_, s)| s.to_string()).collect();
    let accuracy = if solved {
        holdout_accuracy(out.result.as_ref().unwrap(), &case.truth, &training, cfg.holdout, cfg.seed)
    } else {
        None
    };
    let status = match &out.status {
        Status::Done => "done".to_string(),
        Status::BestEffort(m) => format!("best-effort: {m}"),
        Status::Failed(m) => format!("failed: {m}"),
    };
    log::info!("{} [{}]: {status} in {:.2}s", case.name, mode.name(), out.stats.seconds);
    CaseReport {
        case: case.name.clone(),
        mode: mode.name(),
        solved,
        status,
        seconds: out.stats.seconds,
        programs_enumerated: out.stats.programs_enumerated,
        questions: out.stats.questions,
        accuracy,
        regex: out.result.as_ref().map(|r| emit(&r.regex)),
        conditions: out.result.as_ref().map(|r| format_conditions_ascii(&r.conditions)).unwrap_or_default(),
    }
}

/// Every case under every mode, in (case, mode) order. Failures are
/// recorded in the report, never fatal.
pub fn run_suite(cases: &[Case], cfg: &SuiteConfig) -> Vec<CaseReport> {
    let jobs: Vec<(usize, &Case, BenchMode)> = cases
        .iter()
        .flat_map(|c| cfg.modes.iter().map(move |&m| (c, m)))
        .enumerate()
        .map(|(i, (c, m))| (i, c, m))
        .collect();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.max(1) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, case, mode)) = jobs.get(k) else { break };
                let report = run_case(case, mode, cfg);
                results.lock().unwrap_or_else(|e| e.into_inner()).push((i, report));
            });
        }
    });
    let mut results = results.into_inner().unwrap_or_else(|e| e.into_inner());
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

pub fn to_csv(rows: &[CaseReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Per-run rows followed by per-mode counts of runs solved within 10 s,
/// 60 s and the timeout.
pub fn render_table(rows: &[CaseReport], timeout: Duration) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<13} {:<7} {:>8} {:>10} {:>5} {:>8}  regex",
        "case", "mode", "solved", "seconds", "programs", "qs", "accuracy"
    );
    for r in rows {
        let acc = r.accuracy.map_or("-".to_string(), |a| format!("{:.1}%", a * 100.0));
        let regex = match (&r.regex, r.conditions.is_empty()) {
            (Some(x), true) => x.clone(),
            (Some(x), false) => format!("{x}  {}", r.conditions),
            (None, _) => r.status.clone(),
        };
        let _ = writeln!(
            out,
            "{:<18} {:<13} {:<7} {:>8.2} {:>10} {:>5} {:>8}  {regex}",
            r.case,
            r.mode,
            if r.solved { "yes" } else { "no" },
            r.seconds,
            r.programs_enumerated,
            r.questions,
            acc
        );
    }
    let _ = writeln!(out);
    let mut modes: Vec<&str> = rows.iter().map(|r| r.mode).collect();
    modes.dedup();
    let mut seen = HashSet::new();
    modes.retain(|m| seen.insert(*m));
    let limit = timeout.as_secs_f64();
    let _ = writeln!(out, "{:<13} {:>6} {:>6} {:>6} {:>6}", "mode", "<10s", "<60s", format!("<{limit:.0}s"), "cases");
    for m in modes {
        let of: Vec<&CaseReport> = rows.iter().filter(|r| r.mode == m).collect();
        let within = |t: f64| of.iter().filter(|r| r.solved && r.seconds < t).count();
        let _ = writeln!(
            out,
            "{m:<13} {:>6} {:>6} {:>6} {:>6}",
            within(10.0),
            within(60.0),
            of.iter().filter(|r| r.solved).count(),
            of.len()
        );
    }
    out
}
