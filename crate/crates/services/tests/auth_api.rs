mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use common::{harness, login, Harness};
use hbat_core::chc::{Chc, ChcParams};
use hbat_core::pas::{Pas, PasParams};
use hbat_core::Scheme;
use hbat_services::auth::{ALARM_FILE, BLOCK_FILE, PASSWORD_FILE};
use hbat_services::honeychecker::INDEX_FILE;
use rand::SeedableRng;
use serde_json::{json, Value};

async fn register(h: &Harness, user: &str, password: &str, scheme: &str, k: usize) -> u16 {
    h.post("/register", json!({ "username": user, "password": password, "scheme": scheme, "k": k })).await.0
}

fn honeyword(h: &Harness, user: &str, password: &str) -> String {
    h.stored_sweetwords(user).into_iter().find(|w| w != password).unwrap()
}

#[tokio::test]
async fn register_conflict_and_unknown_user() {
    let h = harness("light").await;
    assert_eq!(register(&h, "alex", "2KZW", "s3pas", 4).await, 201);
    assert_eq!(register(&h, "alex", "2KZW", "s3pas", 4).await, 409);
    assert_eq!(register(&h, "bad name", "2KZW", "s3pas", 4).await, 400);
    assert_eq!(register(&h, "bo", "2KZW", "pin", 4).await, 400);
    assert_eq!(register(&h, "bo", "2KZW", "s3pas", 1).await, 422);
    assert_eq!(h.post("/session", json!({ "username": "ghost" })).await.0, 404);
}

#[tokio::test]
async fn s3pas_legit_then_honeyword_then_blocked() {
    let h = harness("light").await;
    assert_eq!(register(&h, "alex", "2KZW", "s3pas", 6).await, 201);
    let (_, body) = login(&h, "alex", "s3pas", "2KZW").await;
    assert_eq!(body["result"], "accepted");
    assert!(h.alarms().await.is_empty());

    let hw = honeyword(&h, "alex", "2KZW");
    let (_, body) = login(&h, "alex", "s3pas", &hw).await;
    assert_eq!(body["result"], "denied");
    let alarms = h.alarms().await;
    assert_eq!(alarms.len(), 1);
    assert_eq!(alarms[0]["username"], "alex");
    assert_eq!(alarms[0]["policy_applied"], "light");

    assert_eq!(h.post("/session", json!({ "username": "alex" })).await.0, 423);
    // light policy leaves other accounts alone
    assert_eq!(register(&h, "kim", "A1B3", "cop", 5).await, 201);
    assert_eq!(login(&h, "kim", "cop", "A1B3").await.1["result"], "accepted");
}

#[tokio::test]
async fn strict_policy_freezes_everyone() {
    let h = harness("strict").await;
    assert_eq!(register(&h, "alex", "A1B3", "cop", 5).await, 201);
    assert_eq!(register(&h, "kim", "QJw9", "cop", 5).await, 201);
    let hw = honeyword(&h, "alex", "A1B3");
    assert_eq!(login(&h, "alex", "cop", &hw).await.1["result"], "denied");
    assert_eq!(h.post("/session", json!({ "username": "kim" })).await.0, 423);
    assert_eq!(std::fs::read_to_string(h.auth_dir().join(BLOCK_FILE)).unwrap(), "*\n");
}

#[tokio::test]
async fn wrong_password_is_denied_without_alarm() {
    let h = harness("light").await;
    assert_eq!(register(&h, "alex", "A1B3", "cop", 3).await, 201);
    let (_, start) = h.post("/session", json!({ "username": "alex" })).await;
    let id = start["session_id"].as_str().unwrap();
    // a digit outside every sweetword's landing digit
    let stored = h.stored_sweetwords("alex");
    let used: BTreeSet<String> = stored.iter().map(|w| common::answer("cop", &start["challenge"], 1, w)).collect();
    let free = (0..10).map(|d: u8| d.to_string()).find(|d| !used.contains(d)).unwrap();
    let (_, body) = h.post(&format!("/session/{id}/response"), json!({ "response": free })).await;
    assert_eq!(body["result"], "denied");
    assert!(h.alarms().await.is_empty());
    assert_eq!(h.post("/session", json!({ "username": "alex" })).await.0, 200);
}

#[tokio::test]
async fn rounds_are_consumed_once() {
    let h = harness("light").await;
    assert_eq!(register(&h, "alex", "2KZW", "s3pas", 4).await, 201);
    let (_, start) = h.post("/session", json!({ "username": "alex" })).await;
    let id = start["session_id"].as_str().unwrap().to_string();
    let path = format!("/session/{id}/response");
    let r1 = common::answer("s3pas", &start["challenge"], 1, "2KZW");
    assert_eq!(h.post(&path, json!({ "response": r1, "round": 2 })).await.0, 409);
    let (s, next) = h.post(&path, json!({ "response": r1, "round": 1 })).await;
    assert_eq!((s, next["round"].as_u64()), (200, Some(2)));
    // replaying round 1 is refused
    assert_eq!(h.post(&path, json!({ "response": r1, "round": 1 })).await.0, 409);
    assert_eq!(h.post(&path, json!({ "response": "not a char" })).await.0, 400);
    let mut body = next;
    while body.get("result").is_none() {
        let round = body["round"].as_u64().unwrap() as usize;
        let r = common::answer("s3pas", &body["challenge"], round, "2KZW");
        body = h.post(&path, json!({ "response": r })).await.1;
    }
    assert_eq!(body["result"], "accepted");
    assert_eq!(h.post(&path, json!({ "response": r1 })).await.0, 404);
}

#[tokio::test]
async fn admin_requires_token() {
    let h = harness("light").await;
    let r = h.client.get(format!("{}/admin/alarms", h.base)).send().await.unwrap();
    assert_eq!(r.status().as_u16(), 401);
    let r =
        h.client.get(format!("{}/admin/alarms", h.base)).header("authorization", "Bearer nope").send().await.unwrap();
    assert_eq!(r.status().as_u16(), 401);
}

#[tokio::test]
async fn honeychecker_down_fails_closed() {
    let dir = tempfile::tempdir().unwrap();
    // nothing listens on the honeyChecker address
    let closed = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let base = common::start_auth(&common::config(dir.path(), "light", &closed.to_string(), 300)).await;
    let client = reqwest::Client::new();
    let r = client
        .post(format!("{base}/register"))
        .json(&json!({ "username": "alex", "password": "A1B3", "scheme": "cop" }))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 503);
}

#[tokio::test]
async fn silent_honeychecker_denies_login() {
    let dir = tempfile::tempdir().unwrap();
    // answers SET, then stalls on CHECK
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
        let mut held = Vec::new();
        loop {
            let (s, _) = listener.accept().await.unwrap();
            let mut s = BufReader::new(s);
            let mut line = String::new();
            s.read_line(&mut line).await.unwrap();
            if line.starts_with("SET ") {
                s.get_mut().write_all(b"OK\n").await.unwrap();
            } else {
                held.push(s);
            }
        }
    });
    let base = common::start_auth(&common::config(dir.path(), "light", &addr.to_string(), 300)).await;
    let h = Harness {
        base,
        hc_addr: addr,
        hc: std::sync::Arc::new(
            hbat_services::honeychecker::HoneyCheckerService::open(&dir.path().join("unused")).unwrap(),
        ),
        dir,
        client: reqwest::Client::new(),
    };
    assert_eq!(register(&h, "alex", "A1B3", "cop", 5).await, 201);
    let t = std::time::Instant::now();
    assert_eq!(login(&h, "alex", "cop", "A1B3").await.1["result"], "denied");
    assert!(t.elapsed() >= Duration::from_millis(300));
}

#[tokio::test]
async fn storage_separation() {
    let h = harness("light").await;
    let users = [("alex", "2KZW", "s3pas"), ("kim", "A1B3", "cop")];
    for (u, p, s) in users {
        assert_eq!(register(&h, u, p, s, 5).await, 201);
    }
    let hw = honeyword(&h, "alex", "2KZW");
    login(&h, "alex", "s3pas", &hw).await;

    // auth side: sweetword records, block list, alarms; no index anywhere
    let passwords = std::fs::read_to_string(h.auth_dir().join(PASSWORD_FILE)).unwrap();
    for line in passwords.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 4, "{line}");
        assert_eq!(fields[2].parse::<usize>().unwrap(), fields[3].split('|').count());
    }
    let index_log = std::fs::read_to_string(h.hc_dir().join(INDEX_FILE)).unwrap();
    for file in [PASSWORD_FILE, BLOCK_FILE, ALARM_FILE] {
        let text = std::fs::read_to_string(h.auth_dir().join(file)).unwrap();
        for record in index_log.lines() {
            assert!(!text.contains(record), "{file} holds the index record {record:?}");
        }
    }
    // honeyChecker side: only user<TAB>index and time<TAB>user lines
    for line in index_log.lines() {
        let (u, t) = line.split_once('\t').unwrap();
        assert!(users.iter().any(|x| x.0 == u));
        t.parse::<usize>().unwrap();
    }
    let all_sweetwords: Vec<String> = users.iter().flat_map(|(u, _, _)| h.stored_sweetwords(u)).collect();
    for entry in std::fs::read_dir(h.hc_dir()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        for w in &all_sweetwords {
            assert!(!text.contains(w.as_str()), "honeyChecker file holds sweetword {w}");
        }
    }
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[tokio::test]
async fn payloads_carry_no_secrets() {
    let h = harness("light").await;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let chc = Chc::new(ChcParams::default()).unwrap();
    let pas = Pas::new(PasParams::default()).unwrap();
    let chc_pw = chc.encode_sweetword(&chc.random_secret(&mut rng));
    let pas_pw = pas.encode_sweetword(&pas.random_secret(&mut rng));
    let accounts = [
        ("a", "2KZW".to_string(), "s3pas", 6),
        ("b", chc_pw, "chc", 3),
        ("c", pas_pw, "pas", 4),
        ("d", "A1B3".to_string(), "cop", 5),
    ];
    let expected = [
        set(&["grid", "round", "session_id"]),
        set(&["icons", "round", "session_id"]),
        set(&["table1", "table2", "response_options", "round", "session_id"]),
        set(&["cells", "session_id"]),
    ];
    for ((user, pw, scheme, k), want) in accounts.iter().zip(expected) {
        assert_eq!(register(&h, user, pw, scheme, *k).await, 201, "{scheme}");
        let (status, start) = h.post("/session", json!({ "username": user })).await;
        assert_eq!(status, 200);
        assert_eq!(keys(&start), set(&["session_id", "scheme", "round", "rounds", "challenge"]));
        assert_eq!(keys(&start["challenge"]), want, "{scheme}");
        let text = start.to_string();
        for w in h.stored_sweetwords(user) {
            assert!(!text.contains(&format!("\"{w}\"")), "{scheme} payload names a sweetword");
        }
        for banned in ["designated", "assigned", "sweetword", "index", "response_cells", "response_digits"] {
            assert!(!text.contains(banned), "{scheme} payload mentions {banned}");
        }
    }
}

#[tokio::test]
async fn concurrent_honeyword_logins_each_alarm_once() {
    let h = std::sync::Arc::new(harness("light").await);
    assert_eq!(register(&h, "alex", "A1B3", "cop", 5).await, 201);
    let hw = honeyword(&h, "alex", "A1B3");
    let mut starts = Vec::new();
    for _ in 0..100 {
        let (status, body) = h.post("/session", json!({ "username": "alex" })).await;
        assert_eq!(status, 200);
        starts.push(body);
    }
    let tasks: Vec<_> = starts
        .into_iter()
        .map(|start| {
            let h = h.clone();
            let hw = hw.clone();
            tokio::spawn(async move {
                let id = start["session_id"].as_str().unwrap();
                let r = common::answer("cop", &start["challenge"], 1, &hw);
                h.post(&format!("/session/{id}/response"), json!({ "response": r })).await
            })
        })
        .collect();
    for t in tasks {
        let (status, body) = t.await.unwrap();
        assert_eq!((status, body["result"].as_str()), (200, Some("denied")));
    }
    assert_eq!(h.alarms().await.len(), 100);
    assert_eq!(h.hc.alarm_count().unwrap(), 100);
    let log = std::fs::read_to_string(h.auth_dir().join(ALARM_FILE)).unwrap();
    assert_eq!(log.lines().count(), 100);
}

#[tokio::test]
async fn duplicate_submissions_race_for_one_round() {
    let h = std::sync::Arc::new(harness("light").await);
    assert_eq!(register(&h, "alex", "A1B3", "cop", 5).await, 201);
    let (_, start) = h.post("/session", json!({ "username": "alex" })).await;
    let id = start["session_id"].as_str().unwrap().to_string();
    let r = common::answer("cop", &start["challenge"], 1, "A1B3");
    let tasks: Vec<_> = (0..20)
        .map(|_| {
            let (h, id, r) = (h.clone(), id.clone(), r.clone());
            tokio::spawn(async move { h.post(&format!("/session/{id}/response"), json!({ "response": r })).await })
        })
        .collect();
    let mut finished = 0;
    for t in tasks {
        let (status, body) = t.await.unwrap();
        if status == 200 {
            assert_eq!(body["result"], "accepted");
            finished += 1;
        } else {
            assert_eq!(status, 404);
        }
    }
    assert_eq!(finished, 1);
}
