use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use regval::engine::full_match;
use regval::RegexValidation;
use regval_service::{router, AppState, ServiceConfig};

fn date_body() -> Value {
    json!({
        "valid": ["19/08/1996", "26/10/1998", "22/09/2000", "01/12/2001", "29/09/2003", "31/08/2015"],
        "invalid": ["19/08/96", "26-10-1998", "22.09.2000", "1/12/2001", "29/9/2003", "2015/08/31"],
        "conditional_invalid": ["33/08/1996", "26/00/1998", "22/13/2000", "00/12/2001", "12/31/2003", "52/03/2015"]
    })
}

fn truth() -> RegexValidation {
    RegexValidation::parse("([0-9]{2})/([0-9]{2})/[0-9]{4}\n$0 <= 31\n$0 >= 1\n$1 <= 12\n$1 >= 1\n").unwrap()
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(app: &axum::Router, body: &Value) -> (StatusCode, Value) {
    call(app, "POST", "/api/sessions", Some(body.to_string())).await
}

/// Polls until the session leaves the running state.
async fn settle(app: &axum::Router, id: &str) -> Value {
    for _ in 0..2400 {
        let (status, v) = call(app, "GET", &format!("/api/sessions/{id}"), None).await;
        assert_eq!(status, StatusCode::OK);
        if v["state"] != "running" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    panic!("session {id} never settled");
}

#[tokio::test(flavor = "multi_thread")]
async fn date_session_end_to_end() {
    let app = router(AppState::new(ServiceConfig::default()));
    let (status, created) = create(&app, &date_body()).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["id"].as_str().unwrap().to_string();
    let truth = truth();
    let mut capture_questions = Vec::new();
    let done = loop {
        let v = settle(&app, &id).await;
        if v["state"] != "awaiting_answer" {
            break v;
        }
        let q = v["question"]["text"].as_str().unwrap().to_string();
        let valid = match v["question"]["phase"].as_str().unwrap() {
            "regex" => full_match(&truth.regex, &q),
            "captures" => {
                capture_questions.push(q.clone());
                truth.accepts(&q)
            }
            p => panic!("phase {p}"),
        };
        // Polling again does not change anything.
        let (_, again) = call(&app, "GET", &format!("/api/sessions/{id}"), None).await;
        assert_eq!(again["question"], v["question"]);
        let (status, _) =
            call(&app, "POST", &format!("/api/sessions/{id}/answer"), Some(json!({ "valid": valid }).to_string())).await;
        assert_eq!(status, StatusCode::NO_CONTENT);
    };
    assert_eq!(done["state"], "done", "{done}");
    assert_eq!(done["result"]["regex"], "([0-9]{2})/([0-9]{2})/[0-9]{4}");
    let mut conds: Vec<String> =
        done["result"]["conditions"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
    conds.sort();
    assert_eq!(conds, vec!["$0 <= 31", "$0 >= 1", "$1 <= 12", "$1 >= 1"]);
    assert_eq!(capture_questions.first().map(String::as_str), Some("32/08/1996"));
    assert!(done["stats"]["programs_enumerated"].as_u64().unwrap() > 0);

    // Nothing is pending any more.
    let (status, _) =
        call(&app, "POST", &format!("/api/sessions/{id}/answer"), Some(json!({ "valid": true }).to_string())).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn rejects_bad_requests() {
    let app = router(AppState::new(ServiceConfig::default()));
    let (status, _) = create(&app, &json!({ "valid": [], "invalid": ["a"] })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/api/sessions", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "GET", "/api/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/api/sessions/nope/answer", Some(json!({ "valid": true }).to_string())).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn answer_errors() {
    let app = router(AppState::new(ServiceConfig::default()));
    let (_, created) = create(&app, &date_body()).await;
    let id = created["id"].as_str().unwrap();
    let v = settle(&app, id).await;
    assert_eq!(v["state"], "awaiting_answer");
    let uri = format!("/api/sessions/{id}/answer");
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "valid": "yes" }).to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "valid": false }).to_string())).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    // A second answer before the next question is a conflict, unless the
    // worker already asked again.
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "valid": false }).to_string())).await;
    assert!(status == StatusCode::CONFLICT || status == StatusCode::NO_CONTENT);
}

#[tokio::test(flavor = "multi_thread")]
async fn session_cap() {
    let config = ServiceConfig { max_sessions: 2, ..Default::default() };
    let app = router(AppState::new(config));
    for _ in 0..2 {
        let (status, created) = create(&app, &date_body()).await;
        assert_eq!(status, StatusCode::CREATED);
        // Waiting on a question keeps the session live.
        assert_eq!(settle(&app, created["id"].as_str().unwrap()).await["state"], "awaiting_answer");
    }
    let (status, _) = create(&app, &date_body()).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test(flavor = "multi_thread")]
async fn idle_sessions_are_evicted() {
    let state = AppState::new(ServiceConfig { idle_timeout: Duration::ZERO, ..Default::default() });
    let app = router(state.clone());
    let (_, created) = create(&app, &date_body()).await;
    let id = created["id"].as_str().unwrap();
    assert_eq!(state.evict_idle(), 1);
    let (status, _) = call(&app, "GET", &format!("/api/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn eval_endpoint() {
    let app = router(AppState::new(ServiceConfig::default()));
    let body = |input: &str| {
        json!({
            "regex": "([0-9]{2})/([0-9]{2})/[0-9]{4}",
            "conditions": ["$0 <= 31", "$0 >= 1", "$1 <= 12", "$1 >= 1"],
            "input": input
        })
        .to_string()
    };
    let (status, v) = call(&app, "POST", "/api/eval", Some(body("19/08/1996"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!({ "matches": true, "captures": [19, 8], "satisfies_conditions": true }));
    let (_, v) = call(&app, "POST", "/api/eval", Some(body("33/08/1996"))).await;
    assert_eq!(v, json!({ "matches": true, "captures": [33, 8], "satisfies_conditions": false }));
    let (_, v) = call(&app, "POST", "/api/eval", Some(body("19-08-1996"))).await;
    assert_eq!(v, json!({ "matches": false, "captures": null, "satisfies_conditions": null }));
    let bad = json!({ "regex": "([0-9]", "conditions": [], "input": "1" }).to_string();
    let (status, _) = call(&app, "POST", "/api/eval", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}
