//! HTTP/JSON auth server. Holds the sweetword file, block state and alarm
//! log; it never learns `t`, only whether the honeyChecker said OK or ALARM.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hbat_core::framework::PasswordRecord;
use hbat_core::honeychecker::{apply_block_policy, BlockEffect, BlockPolicy, BlockState};
use hbat_core::{HbatError, SchemeTag, Verdict};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::config::Config;
use crate::engine::{Engines, LiveChallenge};
use crate::error::Result;
use crate::honeychecker::HoneyCheckerClient;
use crate::persist::{append_line, atomic_write, open_append, read_or_empty, unix_time};
use crate::protocol::{valid_username, Reply};

pub const PASSWORD_FILE: &str = "passwords.txt";
pub const BLOCK_FILE: &str = "blocked.txt";
pub const ALARM_FILE: &str = "alarms.log";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlarmRecord {
    pub username: String,
    /// Unix seconds.
    pub time: u64,
    pub policy_applied: BlockPolicy,
}

impl AlarmRecord {
    fn to_line(&self) -> String {
        format!("{}\t{}\t{}", self.time, self.username, self.policy_applied)
    }

    fn parse_line(line: &str) -> Option<Self> {
        let mut it = line.split('\t');
        let time = it.next()?.parse().ok()?;
        let username = it.next()?.to_string();
        let policy_applied = it.next()?.parse().ok()?;
        Some(Self { username, time, policy_applied })
    }
}

struct Store {
    users: BTreeMap<String, PasswordRecord>,
    blocked: BlockState,
    alarms: Vec<AlarmRecord>,
    password_log: File,
    alarm_log: File,
}

struct Session {
    username: String,
    scheme: SchemeTag,
    challenge: Arc<LiveChallenge>,
    /// Next round expected, 1-based.
    next_round: usize,
    responses: Vec<String>,
}

pub struct AuthState {
    engines: Engines,
    policy: BlockPolicy,
    defaults: crate::config::Defaults,
    admin_token: String,
    data_dir: PathBuf,
    checker: HoneyCheckerClient,
    // registration holds this across the honeyChecker SET, so it is async
    store: tokio::sync::Mutex<Store>,
    sessions: Mutex<HashMap<String, Session>>,
}

impl AuthState {
    pub fn open(config: &Config) -> Result<Arc<Self>> {
        let dir = config.auth.data_dir.clone();
        let password_path = dir.join(PASSWORD_FILE);
        let mut users = BTreeMap::new();
        for line in read_or_empty(&password_path)?.lines().filter(|l| !l.trim().is_empty()) {
            let rec = PasswordRecord::parse_line(line)?;
            users.insert(rec.username.clone(), rec);
        }
        let alarms = read_or_empty(&dir.join(ALARM_FILE))?.lines().filter_map(AlarmRecord::parse_line).collect();
        let store = Store {
            users,
            blocked: BlockState::from_text(&read_or_empty(&dir.join(BLOCK_FILE))?),
            alarms,
            password_log: open_append(&password_path)?,
            alarm_log: open_append(&dir.join(ALARM_FILE))?,
        };
        Ok(Arc::new(Self {
            engines: Engines::default(),
            policy: config.policy,
            defaults: config.defaults.clone(),
            admin_token: config.auth.admin_token.clone(),
            data_dir: dir,
            checker: HoneyCheckerClient::new(config.honeychecker_addr(), Duration::from_millis(config.auth.timeout_ms)),
            store: tokio::sync::Mutex::new(store),
            sessions: Mutex::new(HashMap::new()),
        }))
    }
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<crate::error::ServiceError> for ApiError {
    fn from(e: crate::error::ServiceError) -> Self {
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

fn bad_request(e: impl ToString) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, e.to_string())
}

#[derive(Debug, Deserialize)]
pub struct RegisterRequest {
    pub username: String,
    pub password: String,
    pub scheme: Option<String>,
    pub k: Option<usize>,
}

async fn register(
    State(st): State<Arc<AuthState>>,
    Json(req): Json<RegisterRequest>,
) -> std::result::Result<Response, ApiError> {
    if !valid_username(&req.username) {
        return Err(bad_request("username must be 1-64 characters of [A-Za-z0-9._@-]"));
    }
    let scheme: SchemeTag = match &req.scheme {
        Some(s) => s.parse().map_err(bad_request)?,
        None => st.defaults.scheme().map_err(ApiError::from)?,
    };
    let k = req.k.unwrap_or_else(|| st.defaults.k_for(scheme));

    let mut store = st.store.lock().await;
    if store.users.contains_key(&req.username) {
        return Err(ApiError(StatusCode::CONFLICT, "username already registered".into()));
    }
    let st2 = st.clone();
    let (username, password) = (req.username.clone(), req.password.clone());
    let (record, index) = tokio::task::spawn_blocking(move || {
        st2.engines.enroll(scheme, &username, &password, k, &mut StdRng::from_entropy())
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| match e {
        HbatError::KOutOfRange { .. } | HbatError::KTooLarge { .. } => {
            ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
        }
        other => bad_request(other),
    })?;
    // the honeyChecker must hold t before the account exists
    match st.checker.set(&req.username, index).await {
        Ok(Reply::Ok) => {}
        Ok(other) => return Err(ApiError(StatusCode::BAD_GATEWAY, format!("honeyChecker replied {other}"))),
        Err(e) => return Err(ApiError(StatusCode::SERVICE_UNAVAILABLE, e.to_string())),
    }
    append_line(&mut store.password_log, &record.to_line())?;
    store.users.insert(req.username.clone(), record);
    Ok((StatusCode::CREATED, Json(json!({ "username": req.username, "scheme": scheme, "k": k }))).into_response())
}

#[derive(Debug, Deserialize)]
pub struct SessionRequest {
    pub username: String,
}

fn new_session_id() -> String {
    format!("{:032x}", rand::thread_rng().gen::<u128>())
}

async fn start_session(
    State(st): State<Arc<AuthState>>,
    Json(req): Json<SessionRequest>,
) -> std::result::Result<Json<Value>, ApiError> {
    let record = {
        let store = st.store.lock().await;
        let Some(record) = store.users.get(&req.username) else {
            return Err(ApiError(StatusCode::NOT_FOUND, "unknown user".into()));
        };
        if store.blocked.is_blocked(&req.username) {
            return Err(ApiError(StatusCode::LOCKED, "account locked".into()));
        }
        record.clone()
    };
    let st2 = st.clone();
    let rec2 = record.clone();
    let challenge = tokio::task::spawn_blocking(move || st2.engines.start(&rec2, &mut StdRng::from_entropy()))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let id = new_session_id();
    let payload = st.engines.payload(&challenge, 1, &id);
    let rounds = st.engines.rounds(record.scheme);
    st.sessions.lock().unwrap().insert(
        id.clone(),
        Session {
            username: req.username,
            scheme: record.scheme,
            challenge: Arc::new(challenge),
            next_round: 1,
            responses: Vec::new(),
        },
    );
    Ok(Json(json!({ "session_id": id, "scheme": record.scheme, "round": 1, "rounds": rounds, "challenge": payload })))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ResponseValue {
    Text(String),
    Number(u64),
}

#[derive(Debug, Deserialize)]
pub struct RoundResponse {
    pub response: ResponseValue,
    /// When present, must name the round being answered.
    pub round: Option<usize>,
}

async fn submit(
    State(st): State<Arc<AuthState>>,
    Path(id): Path<String>,
    Json(req): Json<RoundResponse>,
) -> std::result::Result<Json<Value>, ApiError> {
    let response = match req.response {
        ResponseValue::Text(s) => s,
        ResponseValue::Number(n) => n.to_string(),
    };
    // consume the round under the session lock: each round is accepted once
    let finished = {
        let mut sessions = st.sessions.lock().unwrap();
        let Some(session) = sessions.get_mut(&id) else {
            return Err(ApiError(StatusCode::NOT_FOUND, "unknown or finished session".into()));
        };
        if let Some(r) = req.round {
            if r != session.next_round {
                return Err(ApiError(StatusCode::CONFLICT, format!("expected round {}", session.next_round)));
            }
        }
        st.engines.check_response(session.scheme, &response).map_err(bad_request)?;
        session.responses.push(response);
        session.next_round += 1;
        let rounds = st.engines.rounds(session.scheme);
        if session.next_round <= rounds {
            let payload = st.engines.payload(&session.challenge, session.next_round, &id);
            return Ok(Json(
                json!({ "session_id": id, "round": session.next_round, "rounds": rounds, "challenge": payload }),
            ));
        }
        sessions.remove(&id).expect("present")
    };
    let accepted = finish(&st, finished).await?;
    Ok(Json(json!({ "result": if accepted { "accepted" } else { "denied" } })))
}

/// Identifies the sweetword and asks the honeyChecker. Any failure denies.
async fn finish(st: &Arc<AuthState>, session: Session) -> std::result::Result<bool, ApiError> {
    let record = {
        let store = st.store.lock().await;
        match store.users.get(&session.username) {
            Some(r) => r.clone(),
            None => return Ok(false),
        }
    };
    let index = match st.engines.judge(&session.challenge, &record, &session.responses) {
        Ok(Verdict::Identified(j)) => j,
        _ => return Ok(false),
    };
    match st.checker.check(&session.username, index).await {
        Ok(Reply::Ok) => {
            let store = st.store.lock().await;
            Ok(!store.blocked.is_blocked(&session.username))
        }
        Ok(Reply::Alarm) => {
            let mut store = st.store.lock().await;
            let effect = apply_block_policy(st.policy, Some(&session.username), &mut store.blocked);
            if effect != BlockEffect::None {
                atomic_write(&st.data_dir.join(BLOCK_FILE), &store.blocked.to_text())?;
            }
            let alarm =
                AlarmRecord { username: session.username.clone(), time: unix_time(), policy_applied: st.policy };
            append_line(&mut store.alarm_log, &alarm.to_line())?;
            store.alarms.push(alarm);
            Ok(false)
        }
        // NOUSER, BADREQ, timeout, connection refused: fail closed
        _ => Ok(false),
    }
}

async fn alarms(
    State(st): State<Arc<AuthState>>,
    headers: HeaderMap,
) -> std::result::Result<Json<Vec<AlarmRecord>>, ApiError> {
    let expected = format!("Bearer {}", st.admin_token);
    let authorized = headers.get("authorization").and_then(|v| v.to_str().ok()) == Some(expected.as_str());
    if !authorized || st.admin_token.is_empty() {
        return Err(ApiError(StatusCode::UNAUTHORIZED, "admin token required".into()));
    }
    Ok(Json(st.store.lock().await.alarms.clone()))
}

pub fn router(state: Arc<AuthState>) -> Router {
    Router::new()
        .route("/register", post(register))
        .route("/session", post(start_session))
        .route("/session/{id}/response", post(submit))
        .route("/admin/alarms", get(alarms))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: Arc<AuthState>) -> Result<()> {
    axum::serve(listener, router(state)).await?;
    Ok(())
}
