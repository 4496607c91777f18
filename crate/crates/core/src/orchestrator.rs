//! The two-stage interactive search.
//!
//! Stage one enumerates regexes shape by shape until one fits the
//! examples, then keeps enumerating to the end of that shape, asking the
//! oracle to classify a distinguishing input whenever a non-equivalent
//! candidate shows up. Stage two runs when there are conditional-invalid
//! examples: it places capturing groups over the regex and looks for a
//! minimum set of bounds on the captured integers, again asking about
//! inputs that tell competing condition sets apart.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::ast::Regex;
use crate::capture;
use crate::dsl::build_dsl;
use crate::engine::{distinguishing_input, full_match, Distinction, SessionAlphabet};
use crate::enumerator::{shape_schedule, Enumerator, Layout, Pruning, ScheduleMode, ShapeLimits};
use crate::model::{validate, CaptureCondition, ExampleKind, ExampleSet, RegexValidation};
use crate::solver::{SolverChoice, SolverError, DEFAULT_CHECK_TIMEOUT};
use crate::splitter::split;

/// Program representation used in stage one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Split on dividing substrings when possible, else grow (trees, depth).
    #[default]
    Multitree,
    /// A single tree of growing depth.
    Ktree,
}

#[derive(Clone, Debug)]
pub struct SynthOptions {
    pub mode: Mode,
    pub pruning: Pruning,
    /// Use the dividing-substring split when the examples allow it.
    pub split: bool,
    pub solver: SolverChoice,
    pub check_timeout: Duration,
    /// Wall-clock budget for the whole run.
    pub timeout: Duration,
    pub limits: ShapeLimits,
    pub max_programs_per_shape: u64,
    pub max_questions: usize,
    /// Largest number of capturing groups tried.
    pub max_groups: usize,
    /// Set from another thread to stop the run.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            mode: Mode::Multitree,
            pruning: Pruning::all(),
            split: true,
            solver: SolverChoice::Native,
            check_timeout: DEFAULT_CHECK_TIMEOUT,
            timeout: Duration::from_secs(3600),
            limits: ShapeLimits::default(),
            max_programs_per_shape: 100_000,
            max_questions: 20,
            max_groups: 4,
            cancel: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Regex,
    Captures,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Question {
    pub text: String,
    pub phase: Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Valid,
    Invalid,
    /// Stop the session.
    Abort,
}

/// Source of answers to distinguishing questions.
pub trait Oracle {
    fn ask(&mut self, q: &Question) -> Answer;

    /// `false` for oracles that never answer: the first solution is kept.
    fn asks(&self) -> bool {
        true
    }
}

/// Answers from a reference validation. Pattern questions are judged by
/// the reference regex alone; value questions by the whole validation.
pub struct GroundTruth(pub RegexValidation);

impl Oracle for GroundTruth {
    fn ask(&mut self, q: &Question) -> Answer {
        let ok = match q.phase {
            Phase::Regex => full_match(&self.0.regex, &q.text),
            Phase::Captures => self.0.accepts(&q.text),
        };
        if ok {
            Answer::Valid
        } else {
            Answer::Invalid
        }
    }
}

/// Never asks; keeps the first solution of each stage.
pub struct AcceptFirst;

impl Oracle for AcceptFirst {
    fn ask(&mut self, _q: &Question) -> Answer {
        Answer::Abort
    }

    fn asks(&self) -> bool {
        false
    }
}

impl<F: FnMut(&Question) -> Answer> Oracle for F {
    fn ask(&mut self, q: &Question) -> Answer {
        self(q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub question: String,
    pub phase: Phase,
    pub valid: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub programs_enumerated: u64,
    pub questions: usize,
    pub seconds: f64,
    pub shapes_explored: usize,
    /// Shape `(n,d)` the regex was found in.
    pub shape: Option<String>,
    /// Stage-one strategy that produced the regex: static, dynamic or ktree.
    pub strategy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Status {
    Done,
    /// Budget ran out; the result is the best found so far.
    BestEffort(String),
    Failed(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub status: Status,
    pub result: Option<RegexValidation>,
    pub stats: Stats,
    pub transcript: Vec<TranscriptEntry>,
    /// Examples after all answers were added.
    pub examples: ExampleSet,
}

enum Stop {
    Timeout,
    Aborted,
    Failed(String),
}

impl From<SolverError> for Stop {
    fn from(e: SolverError) -> Self {
        Stop::Failed(format!("solver: {e}"))
    }
}

struct Run<'a> {
    opts: &'a SynthOptions,
    oracle: &'a mut dyn Oracle,
    examples: ExampleSet,
    stats: Stats,
    transcript: Vec<TranscriptEntry>,
    start: Instant,
}

/// Synthesizes a regex validation for `examples`.
pub fn run(examples: ExampleSet, opts: &SynthOptions, oracle: &mut dyn Oracle) -> Outcome {
    let mut r = Run { opts, oracle, examples, stats: Stats::default(), transcript: Vec::new(), start: Instant::now() };
    let mut best: Option<RegexValidation> = None;
    let status = match r.regex_stage() {
        Ok(regex) => {
            best = Some(RegexValidation::pattern_only(regex.clone()));
            if r.examples.conditional_invalid().is_empty() {
                Status::Done
            } else {
                match r.capture_stage(&regex) {
                    Ok(v) => {
                        best = Some(v);
                        Status::Done
                    }
                    Err(Stop::Timeout) => Status::BestEffort("timeout during capture synthesis".into()),
                    Err(Stop::Aborted) => Status::Failed("aborted".into()),
                    Err(Stop::Failed(m)) => Status::Failed(m),
                }
            }
        }
        Err((Stop::Timeout, Some(incumbent))) => {
            best = Some(RegexValidation::pattern_only(incumbent));
            Status::BestEffort("timeout during regex synthesis".into())
        }
        Err((Stop::Timeout, None)) => Status::Failed("timeout".into()),
        Err((Stop::Aborted, _)) => Status::Failed("aborted".into()),
        Err((Stop::Failed(m), _)) => Status::Failed(m),
    };
    if status == Status::Done {
        if let Some(v) = &best {
            let report = validate(v, &r.examples);
            debug_assert!(report.passed(), "result does not fit the examples: {:?}", report.failures().collect::<Vec<_>>());
            if !report.passed() {
                warn!("result {v} does not fit every example");
            }
        }
    }
    r.stats.seconds = r.start.elapsed().as_secs_f64();
    r.stats.questions = r.transcript.len();
    info!("finished: {status:?} after {:.2}s", r.stats.seconds);
    Outcome { status, result: best, stats: r.stats, transcript: r.transcript, examples: r.examples }
}

enum Plan {
    Static(Layout),
    Dynamic,
    Ktree,
}

impl Run<'_> {
    fn remaining(&self) -> Option<Duration> {
        self.opts.timeout.checked_sub(self.start.elapsed()).filter(|d| !d.is_zero())
    }

    fn check_budget(&self) -> Result<(), Stop> {
        if self.opts.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(Stop::Aborted);
        }
        self.remaining().map(|_| ()).ok_or(Stop::Timeout)
    }

    fn check_timeout(&self) -> Duration {
        self.remaining().map_or(Duration::ZERO, |r| r.min(self.opts.check_timeout))
    }

    /// Asks the oracle, records the answer and adds the string to the
    /// examples. `Ok(None)` when the question budget is spent.
    fn ask(&mut self, text: String, phase: Phase) -> Result<Option<bool>, Stop> {
        if !self.oracle.asks() || self.transcript.len() >= self.opts.max_questions {
            return Ok(None);
        }
        let q = Question { text, phase };
        let valid = match self.oracle.ask(&q) {
            Answer::Valid => true,
            Answer::Invalid => false,
            Answer::Abort => return Err(Stop::Aborted),
        };
        debug!("question {:?} answered {}", q.text, if valid { "valid" } else { "invalid" });
        let kind = match (valid, phase) {
            (true, _) => ExampleKind::Valid,
            (false, Phase::Regex) => ExampleKind::Invalid,
            (false, Phase::Captures) => ExampleKind::ConditionalInvalid,
        };
        self.examples
            .add(kind, q.text.clone())
            .map_err(|e| Stop::Failed(format!("answer contradicts the examples: {e}")))?;
        self.transcript.push(TranscriptEntry { question: q.text, phase, valid });
        Ok(Some(valid))
    }

    /// Strings the regex must match in stage one: valid and
    /// conditional-invalid examples.
    fn must_match(&self) -> Vec<String> {
        self.examples.valid().iter().chain(self.examples.conditional_invalid()).cloned().collect()
    }

    fn fits(&self, r: &Regex) -> bool {
        self.must_match().iter().all(|s| full_match(r, s)) && !self.examples.invalid().iter().any(|s| full_match(r, s))
    }

    fn plans(&self) -> Result<Vec<Plan>, Stop> {
        if self.opts.mode == Mode::Ktree {
            return Ok(vec![Plan::Ktree]);
        }
        let mut plans = Vec::new();
        if self.opts.split {
            let s = split(self.examples.valid(), self.examples.invalid());
            if s.has_dividers() {
                match Layout::from_split(&s) {
                    Ok(layout) => plans.push(Plan::Static(layout)),
                    Err(e) => warn!("split unusable: {e}"),
                }
            }
        }
        plans.push(Plan::Dynamic);
        Ok(plans)
    }

    fn regex_stage(&mut self) -> Result<Regex, (Stop, Option<Regex>)> {
        let plans = self.plans().map_err(|s| (s, None))?;
        for plan in plans {
            let (name, shapes): (&str, Vec<(Option<Layout>, u32, u32)>) = match &plan {
                Plan::Static(layout) => (
                    "static",
                    shape_schedule(ScheduleMode::Static(layout.n()), self.opts.limits)
                        .map(|s| (Some(layout.clone()), s.n, s.d))
                        .collect(),
                ),
                Plan::Dynamic => {
                    ("dynamic", shape_schedule(ScheduleMode::Dynamic, self.opts.limits).map(|s| (None, s.n, s.d)).collect())
                }
                Plan::Ktree => ("ktree", (2..=self.opts.limits.max_depth).map(|d| (None, 1, d)).collect()),
            };
            for (layout, n, d) in shapes {
                let layout = match layout {
                    Some(l) => l,
                    None => Layout::dynamic(&build_dsl(self.examples.valid()).map_err(|e| (Stop::Failed(e.to_string()), None))?, n),
                };
                match self.search_shape(layout, d) {
                    Ok(Some(regex)) => {
                        self.stats.shape = Some(format!("({n},{d})"));
                        self.stats.strategy = Some(name.into());
                        return Ok(regex);
                    }
                    Ok(None) => {}
                    Err(e) => return Err(e),
                }
            }
            info!("{name} search exhausted its shapes");
        }
        Err((Stop::Failed("no regex found within the shape limits".into()), None))
    }

    /// Enumerates one shape. Returns the surviving candidate if any program
    /// of the shape fits the examples.
    fn search_shape(&mut self, layout: Layout, depth: u32) -> Result<Option<Regex>, (Stop, Option<Regex>)> {
        self.check_budget().map_err(|s| (s, None))?;
        self.stats.shapes_explored += 1;
        let n = layout.n();
        debug!("shape ({n},{depth})");
        let mut incumbent: Option<Regex> = None;
        let fail = |e: Stop, inc: &Option<Regex>| (e, inc.clone());
        let backend = self.opts.solver.create(self.check_timeout()).map_err(|e| fail(e.into(), &None))?;
        let mut en = Enumerator::new(backend, layout, depth, self.opts.pruning).map_err(|e| fail(e.into(), &None))?;
        for s in self.must_match() {
            en.add_example(&s, true).map_err(|e| fail(e.into(), &None))?;
        }
        for s in self.examples.invalid() {
            en.add_example(s, false).map_err(|e| fail(e.into(), &None))?;
        }
        let mut in_shape = 0u64;
        loop {
            if let Err(stop) = self.check_budget() {
                return Err((stop, incumbent));
            }
            if in_shape >= self.opts.max_programs_per_shape {
                debug!("program cap reached in shape ({n},{depth})");
                break;
            }
            en.backend_mut().set_timeout(self.check_timeout());
            let program = match en.next_program() {
                Ok(Some(p)) => p,
                Ok(None) => break,
                Err(SolverError::Timeout) => {
                    if self.remaining().is_none() {
                        return Err((Stop::Timeout, incumbent));
                    }
                    warn!("solver timed out in shape ({n},{depth}); moving on");
                    break;
                }
                Err(e) => return Err(fail(e.into(), &incumbent)),
            };
            in_shape += 1;
            self.stats.programs_enumerated += 1;
            let candidate = program.regex.clone();
            if !self.fits(&candidate) {
                warn!("enumerated program {candidate} does not fit the examples; skipped");
            } else if let Some(inc) = &incumbent {
                let alpha = SessionAlphabet::for_session(
                    self.examples.iter().map(|(_, s)| s),
                    &[inc, &candidate],
                );
                match distinguishing_input(inc, &candidate, &alpha) {
                    Ok(Distinction::Equivalent) => {}
                    Ok(Distinction::Witness(w)) => match self.ask(w.clone(), Phase::Regex).map_err(|e| fail(e, &incumbent))? {
                        None => return Ok(incumbent),
                        Some(valid) => {
                            en.add_example(&w, valid).map_err(|e| fail(e.into(), &incumbent))?;
                            if full_match(inc, &w) != valid {
                                incumbent = Some(candidate);
                            }
                        }
                    },
                    Err(e) => warn!("cannot compare {inc} and {candidate}: {e}"),
                }
            } else {
                info!("first fitting regex {candidate} in shape ({n},{depth})");
                incumbent = Some(candidate);
                if !self.oracle.asks() {
                    return Ok(incumbent);
                }
            }
            en.block_equivalent(&program).map_err(|e| fail(e.into(), &incumbent))?;
        }
        Ok(incumbent)
    }

    fn capture_stage(&mut self, regex: &Regex) -> Result<RegexValidation, Stop> {
        if let Some(x) = self.examples.conditional_invalid().iter().find(|x| !full_match(regex, x)) {
            return Err(Stop::Failed(format!("conditional-invalid example {x:?} does not match {regex}")));
        }
        let units = capture::atomic_decompose(regex);
        for g in 1..=self.opts.max_groups.min(units.len()) {
            for placement in capture::enumerate_placements(units.len(), g) {
                self.check_budget()?;
                let r = capture::apply_placement(&units, &placement);
                let Some(first) = self.conditions_for(&r)? else { continue };
                info!("conditions found with groups {r}");
                return self.refine_conditions(r, first);
            }
        }
        Err(Stop::Failed("no capture conditions separate the valid from the conditional-invalid examples".into()))
    }

    fn tables(&self, r: &Regex) -> Option<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
        Some((
            capture::capture_table(r, self.examples.valid())?,
            capture::capture_table(r, self.examples.conditional_invalid())?,
        ))
    }

    fn conditions_for(&self, r: &Regex) -> Result<Option<Vec<CaptureCondition>>, Stop> {
        let Some((valid, invalid)) = self.tables(r) else { return Ok(None) };
        let mut b = self.opts.solver.create(self.check_timeout())?;
        Ok(capture::synthesize_conditions(b.as_mut(), r.group_count(), &valid, &invalid)?)
    }

    /// Asks about competing condition sets until none is left.
    fn refine_conditions(&mut self, r: Regex, mut current: Vec<CaptureCondition>) -> Result<RegexValidation, Stop> {
        if !self.oracle.asks() {
            return Ok(RegexValidation::new(r, current));
        }
        'outer: loop {
            self.check_budget()?;
            let (valid, invalid) =
                self.tables(&r).ok_or_else(|| Stop::Failed("answer made the captures non-numeric".into()))?;
            let mut blocked = vec![current.clone()];
            loop {
                self.check_budget()?;
                let mut b = self.opts.solver.create(self.check_timeout())?;
                let alt =
                    capture::alternative_conditions(b.as_mut(), r.group_count(), &valid, &invalid, current.len(), &blocked)?;
                let Some(other) = alt else { break 'outer };
                // Asking at the loosest version of the alternative halves
                // the undecided range instead of stepping by one.
                let wide = capture::widen(&other, &invalid);
                let text = capture::distinguish_conditions(&r, &current, &wide, self.examples.valid())
                    .or_else(|| capture::distinguish_conditions(&r, &current, &other, self.examples.valid()));
                let Some(text) = text else {
                    blocked.push(other);
                    continue;
                };
                match self.ask(text, Phase::Captures)? {
                    None => break 'outer,
                    Some(_) => {
                        current = self.conditions_for(&r)?.ok_or_else(|| {
                            Stop::Failed(format!("no conditions over {r} fit the answers"))
                        })?;
                        continue 'outer;
                    }
                }
            }
        }
        Ok(RegexValidation::new(r, current))
    }
}
