#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hbat_core::cop::{Cop, CopParams};
use hbat_core::s3pas::{S3pas, S3pasParams};
use hbat_core::Scheme;
use hbat_services::auth::{self, AuthState};
use hbat_services::honeychecker::{self, HoneyCheckerService};
use hbat_services::Config;
use rand::SeedableRng;
use serde_json::{json, Value};
use tokio::net::TcpListener;

pub const TOKEN: &str = "admin-secret";

pub struct Harness {
    pub dir: tempfile::TempDir,
    pub base: String,
    pub hc_addr: SocketAddr,
    pub hc: Arc<HoneyCheckerService>,
    pub client: reqwest::Client,
}

impl Harness {
    pub fn auth_dir(&self) -> PathBuf {
        self.dir.path().join("auth")
    }

    pub fn hc_dir(&self) -> PathBuf {
        self.dir.path().join("hc")
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let r = self.client.post(format!("{}{path}", self.base)).json(&body).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn alarms(&self) -> Vec<Value> {
        let r = self
            .client
            .get(format!("{}/admin/alarms", self.base))
            .header("authorization", format!("Bearer {TOKEN}"))
            .send()
            .await
            .unwrap();
        assert_eq!(r.status().as_u16(), 200);
        r.json::<Vec<Value>>().await.unwrap()
    }

    /// The sweetword list as stored by the auth server (what a file thief sees).
    pub fn stored_sweetwords(&self, username: &str) -> Vec<String> {
        let text = std::fs::read_to_string(self.auth_dir().join(auth::PASSWORD_FILE)).unwrap();
        let line = text.lines().rev().find(|l| l.starts_with(&format!("{username}\t"))).unwrap();
        line.split('\t').nth(3).unwrap().split('|').map(str::to_string).collect()
    }
}

pub fn config(dir: &Path, policy: &str, hc_addr: &str, timeout_ms: u64) -> Config {
    let text = format!(
        r#"
policy = "{policy}"
[auth]
port = 0
data_dir = "{}"
admin_token = "{TOKEN}"
honeychecker_addr = "{hc_addr}"
timeout_ms = {timeout_ms}
[honeychecker]
port = 0
data_dir = "{}"
"#,
        dir.join("auth").display(),
        dir.join("hc").display()
    );
    Config::parse(&text).unwrap()
}

pub async fn start_honeychecker(dir: &Path) -> (SocketAddr, Arc<HoneyCheckerService>) {
    let hc = Arc::new(HoneyCheckerService::open(&dir.join("hc")).unwrap());
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(honeychecker::serve(listener, hc.clone()));
    (addr, hc)
}

pub async fn start_auth(config: &Config) -> String {
    let state = AuthState::open(config).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(auth::serve(listener, state));
    format!("http://{addr}")
}

pub async fn harness(policy: &str) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let (hc_addr, hc) = start_honeychecker(dir.path()).await;
    let base = start_auth(&config(dir.path(), policy, &hc_addr.to_string(), 2000)).await;
    Harness { dir, base, hc_addr, hc, client: reqwest::Client::new() }
}

/// Answers a round using only what the client was shown, as the holder of `sweetword`.
pub fn answer(scheme: &str, challenge: &Value, round: usize, sweetword: &str) -> String {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(round as u64);
    match scheme {
        "s3pas" => {
            let e = S3pas::new(S3pasParams::default()).unwrap();
            let grid: Vec<char> = challenge["grid"]
                .as_array()
                .unwrap()
                .iter()
                .flat_map(|row| row.as_str().unwrap().chars().collect::<Vec<_>>())
                .collect();
            let ch = e.challenge_from_grid(grid, 1).unwrap();
            e.respond(&ch, round, &sweetword.to_string(), &mut rng).to_string()
        }
        "cop" => {
            let e = Cop::new(CopParams::default()).unwrap();
            let cols = e.params().columns;
            let mut digits = vec![0u8; e.params().cells()];
            for cell in challenge["cells"].as_array().unwrap() {
                let i = cell["y"].as_u64().unwrap() as usize * cols + cell["x"].as_u64().unwrap() as usize;
                digits[i] = cell["digit"].as_u64().unwrap() as u8;
            }
            e.legit_response(sweetword, &digits).unwrap().to_string()
        }
        other => panic!("no payload responder for {other}"),
    }
}

/// Runs a whole login as the holder of `sweetword`; returns the final body.
pub async fn login(h: &Harness, username: &str, scheme: &str, sweetword: &str) -> (u16, Value) {
    let (status, mut body) = h.post("/session", json!({ "username": username })).await;
    if status != 200 {
        return (status, body);
    }
    let id = body["session_id"].as_str().unwrap().to_string();
    loop {
        let round = body["round"].as_u64().unwrap() as usize;
        let resp = answer(scheme, &body["challenge"], round, sweetword);
        let (status, next) =
            h.post(&format!("/session/{id}/response"), json!({ "response": resp, "round": round })).await;
        assert_eq!(status, 200, "{next}");
        if next.get("result").is_some() {
            return (status, next);
        }
        body = next;
    }
}
