//! HTTP session service.
//!
//! Each session runs the synthesizer on its own thread. The thread talks to
//! the HTTP side through the session's snapshot (read by polling clients)
//! and a channel that carries answers back to the waiting oracle.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, SyncSender};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use regval::engine::{emit, extract_captures, full_match, parse, Captures};
use regval::orchestrator::{run, Answer, Mode, Oracle, Phase, Question, Status, SynthOptions};
use regval::{CaptureCondition, ExampleSet, RegexValidation};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Sessions still running or awaiting an answer.
    pub max_sessions: usize,
    /// Sessions not polled or answered for this long are dropped.
    pub idle_timeout: Duration,
    /// Defaults for every session; requests may override some fields.
    pub synth: SynthOptions,
    /// Origin allowed by CORS; any origin when `None`.
    pub allowed_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_sessions: 64,
            idle_timeout: Duration::from_secs(30 * 60),
            synth: SynthOptions::default(),
            allowed_origin: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Running,
    AwaitingAnswer,
    Done,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuestionView {
    pub text: String,
    pub phase: Phase,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultView {
    pub regex: String,
    pub conditions: Vec<String>,
}

impl From<&RegexValidation> for ResultView {
    fn from(v: &RegexValidation) -> Self {
        ResultView { regex: emit(&v.regex), conditions: v.conditions.iter().map(ToString::to_string).collect() }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StatsView {
    pub programs_enumerated: u64,
    pub questions: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionResource {
    pub id: String,
    pub state: SessionState,
    pub question: Option<QuestionView>,
    pub result: Option<ResultView>,
    pub stats: StatsView,
    /// Why the session failed, or why its result is only best effort.
    pub message: Option<String>,
}

struct Session {
    view: Mutex<SessionResource>,
    answers: SyncSender<bool>,
    touched: Mutex<Instant>,
    cancel: Arc<AtomicBool>,
}

impl Session {
    fn view(&self) -> MutexGuard<'_, SessionResource> {
        self.view.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn touch(&self) {
        *self.touched.lock().unwrap_or_else(|e| e.into_inner()) = Instant::now();
    }

    fn idle(&self) -> Duration {
        self.touched.lock().unwrap_or_else(|e| e.into_inner()).elapsed()
    }

    fn live(&self) -> bool {
        matches!(self.view().state, SessionState::Running | SessionState::AwaitingAnswer)
    }
}

/// Publishes questions on the session snapshot and waits for the answer.
struct ChannelOracle {
    session: Arc<Session>,
    answers: Receiver<bool>,
    start: Instant,
}

impl Oracle for ChannelOracle {
    fn ask(&mut self, q: &Question) -> Answer {
        {
            let mut v = self.session.view();
            v.state = SessionState::AwaitingAnswer;
            v.question = Some(QuestionView { text: q.text.clone(), phase: q.phase });
            v.stats.seconds = self.start.elapsed().as_secs_f64();
        }
        loop {
            match self.answers.recv_timeout(Duration::from_millis(500)) {
                Ok(valid) => {
                    // The handler already moved the snapshot back to running.
                    self.session.view().stats.questions += 1;
                    return if valid { Answer::Valid } else { Answer::Invalid };
                }
                Err(RecvTimeoutError::Timeout) if !self.session.cancel.load(Ordering::Relaxed) => {}
                Err(_) => return Answer::Abort,
            }
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<Mutex<HashMap<String, Arc<Session>>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState { config: Arc::new(config), sessions: Arc::default() }
    }

    fn sessions(&self) -> MutexGuard<'_, HashMap<String, Arc<Session>>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions().get(id).cloned()
    }

    /// Drops sessions idle for longer than the configured timeout and
    /// stops their workers. Returns how many were dropped.
    pub fn evict_idle(&self) -> usize {
        let limit = self.config.idle_timeout;
        let mut map = self.sessions();
        let before = map.len();
        map.retain(|id, s| {
            let keep = s.idle() < limit;
            if !keep {
                info!("evicting idle session {id}");
                s.cancel.store(true, Ordering::Relaxed);
            }
            keep
        });
        before - map.len()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionOptions {
    pub mode: Option<Mode>,
    pub pruning: Option<bool>,
    pub split: Option<bool>,
    pub timeout_seconds: Option<u64>,
    pub max_questions: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub valid: Vec<String>,
    #[serde(default)]
    pub invalid: Vec<String>,
    #[serde(default)]
    pub conditional_invalid: Vec<String>,
    #[serde(default)]
    pub options: SessionOptions,
}

#[derive(Debug, Deserialize)]
pub struct AnswerBody {
    pub valid: bool,
}

#[derive(Debug, Deserialize)]
pub struct EvalBody {
    pub regex: String,
    #[serde(default)]
    pub conditions: Vec<String>,
    pub input: String,
}

#[derive(Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResult {
    pub matches: bool,
    pub captures: Option<Vec<i64>>,
    pub satisfies_conditions: Option<bool>,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: msg.into() })).into_response()
}

/// JSON body parsing where every malformed body is a 400.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(bytes).map_err(|e| error(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

fn options(base: &SynthOptions, o: &SessionOptions, cancel: Arc<AtomicBool>) -> SynthOptions {
    let mut opts = base.clone();
    if let Some(m) = o.mode {
        opts.mode = m;
    }
    if let Some(p) = o.pruning {
        opts.pruning = if p { regval::enumerator::Pruning::all() } else { regval::enumerator::Pruning::none() };
    }
    if let Some(s) = o.split {
        opts.split = s;
    }
    if let Some(t) = o.timeout_seconds {
        opts.timeout = Duration::from_secs(t).min(base.timeout);
    }
    if let Some(q) = o.max_questions {
        opts.max_questions = q;
    }
    opts.cancel = Some(cancel);
    opts
}

async fn create_session(State(app): State<AppState>, bytes: Bytes) -> Response {
    let req: CreateSession = match body(&bytes) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let examples = match ExampleSet::new(req.valid, req.invalid, req.conditional_invalid) {
        Ok(e) => e,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let cancel = Arc::new(AtomicBool::new(false));
    let opts = options(&app.config.synth, &req.options, cancel.clone());
    let (tx, rx) = mpsc::sync_channel(1);
    let session = Arc::new(Session {
        view: Mutex::new(SessionResource {
            id: id.clone(),
            state: SessionState::Running,
            question: None,
            result: None,
            stats: StatsView::default(),
            message: None,
        }),
        answers: tx,
        touched: Mutex::new(Instant::now()),
        cancel,
    });
    {
        let mut map = app.sessions();
        if map.values().filter(|s| s.live()).count() >= app.config.max_sessions {
            return error(StatusCode::SERVICE_UNAVAILABLE, "session limit reached");
        }
        map.insert(id.clone(), session.clone());
    }
    let worker = session.clone();
    std::thread::spawn(move || {
        let mut oracle = ChannelOracle { session: worker.clone(), answers: rx, start: Instant::now() };
        let out = run(examples, &opts, &mut oracle);
        let mut v = worker.view();
        v.question = None;
        v.stats = StatsView {
            programs_enumerated: out.stats.programs_enumerated,
            questions: out.stats.questions,
            seconds: out.stats.seconds,
        };
        v.result = out.result.as_ref().map(ResultView::from);
        (v.state, v.message) = match out.status {
            Status::Done => (SessionState::Done, None),
            Status::BestEffort(m) => (SessionState::Done, Some(m)),
            Status::Failed(m) => (SessionState::Failed, Some(m)),
        };
        info!("session {} finished: {:?}", v.id, v.state);
    });
    (StatusCode::CREATED, Json(serde_json::json!({ "id": id }))).into_response()
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    match app.get(&id) {
        Some(s) => {
            s.touch();
            let v = s.view().clone();
            Json(v).into_response()
        }
        None => error(StatusCode::NOT_FOUND, "unknown session"),
    }
}

async fn answer(State(app): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> Response {
    let Some(s) = app.get(&id) else {
        return error(StatusCode::NOT_FOUND, "unknown session");
    };
    let req: AnswerBody = match body(&bytes) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    s.touch();
    let mut v = s.view();
    if v.state != SessionState::AwaitingAnswer {
        return error(StatusCode::CONFLICT, "no pending question");
    }
    // The worker is blocked waiting, so the one-slot channel has room.
    if s.answers.try_send(req.valid).is_err() {
        warn!("session {id} worker is gone");
        return error(StatusCode::CONFLICT, "session is no longer running");
    }
    v.state = SessionState::Running;
    v.question = None;
    StatusCode::NO_CONTENT.into_response()
}

/// Stateless evaluation of a validation on one input.
pub fn evaluate(req: &EvalBody) -> Result<EvalResult, String> {
    let regex = parse(&req.regex).map_err(|e| format!("regex: {e}"))?;
    let conditions = req
        .conditions
        .iter()
        .map(|c| c.parse::<CaptureCondition>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(c) = conditions.iter().find(|c| c.group >= regex.group_count()) {
        return Err(format!("condition {c} refers to a group the regex does not have"));
    }
    if !full_match(&regex, &req.input) {
        return Ok(EvalResult { matches: false, captures: None, satisfies_conditions: None });
    }
    let validation = RegexValidation::new(regex, conditions);
    let captures = match extract_captures(&validation.regex, &req.input) {
        Captures::Values(v) => Some(v),
        _ => None,
    };
    Ok(EvalResult { matches: true, captures, satisfies_conditions: Some(validation.accepts(&req.input)) })
}

async fn eval(bytes: Bytes) -> Response {
    let req: EvalBody = match body(&bytes) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    match evaluate(&req) {
        Ok(r) => Json(r).into_response(),
        Err(e) => error(StatusCode::BAD_REQUEST, e),
    }
}

pub fn router(app: AppState) -> Router {
    let origin = match &app.config.allowed_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(h) => AllowOrigin::exact(h),
            Err(_) => {
                warn!("bad CORS origin {o:?}; allowing any");
                AllowOrigin::any()
            }
        },
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new().allow_origin(origin).allow_methods(Any).allow_headers(Any);
    Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/answer", post(answer))
        .route("/api/eval", post(eval))
        .layer(cors)
        .with_state(app)
}

/// Serves the API until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let app = AppState::new(config);
    let sweeper = app.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.evict_idle();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app)).await
}
