//! The honeyChecker process: a TCP line server over the `(username, t)` store.
//! Its files hold indices and alarm times, never a sweetword.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use hbat_core::honeychecker::{CheckOutcome, HoneyChecker, HoneyIndexRecord};
use hbat_core::SweetIndex;
use tokio::io::{AsyncBufReadExt, AsyncReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};

use crate::error::{Result, ServiceError};
use crate::persist::{append_line, open_append, read_or_empty, unix_time};
use crate::protocol::{Reply, Request, MAX_LINE};

pub const INDEX_FILE: &str = "index.log";
pub const ALARM_FILE: &str = "alarms.log";

struct Inner {
    checker: HoneyChecker,
    index_log: File,
    alarm_log: File,
}

/// Every request runs under one lock, so the store and its log never disagree.
pub struct HoneyCheckerService {
    inner: Mutex<Inner>,
    data_dir: PathBuf,
}

impl HoneyCheckerService {
    pub fn open(data_dir: &Path) -> Result<Self> {
        let index_path = data_dir.join(INDEX_FILE);
        let checker = HoneyChecker::parse_store(&read_or_empty(&index_path)?)?;
        let inner = Inner {
            checker,
            index_log: open_append(&index_path)?,
            alarm_log: open_append(&data_dir.join(ALARM_FILE))?,
        };
        Ok(Self { inner: Mutex::new(inner), data_dir: data_dir.to_path_buf() })
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    pub fn handle(&self, request: &Request) -> Result<Reply> {
        let mut inner = self.inner.lock().unwrap();
        match request {
            Request::Set { username, index } => {
                // re-registration overwrites; the log keeps the last line per user
                let record = HoneyIndexRecord { username: username.clone(), index: *index };
                append_line(&mut inner.index_log, &record.to_line())?;
                inner.checker.set(username, *index);
                Ok(Reply::Ok)
            }
            Request::Check { username, index } => match inner.checker.check(username, *index) {
                Ok(CheckOutcome::Ok) => Ok(Reply::Ok),
                Ok(CheckOutcome::Alarm) => {
                    append_line(&mut inner.alarm_log, &format!("{}\t{username}", unix_time()))?;
                    Ok(Reply::Alarm)
                }
                Err(_) => Ok(Reply::NoUser),
            },
        }
    }

    /// Handles one raw protocol line.
    pub fn handle_line(&self, line: &str) -> Reply {
        match line.parse::<Request>() {
            Ok(req) => self.handle(&req).unwrap_or(Reply::BadRequest),
            Err(_) => Reply::BadRequest,
        }
    }

    pub fn alarm_count(&self) -> Result<usize> {
        Ok(read_or_empty(&self.data_dir.join(ALARM_FILE))?.lines().count())
    }
}

async fn connection(stream: TcpStream, service: Arc<HoneyCheckerService>) -> std::io::Result<()> {
    let (read, mut write) = stream.into_split();
    let mut reader = BufReader::new(read);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = (&mut reader).take(MAX_LINE as u64 + 2).read_until(b'\n', &mut buf).await?;
        if n == 0 {
            return Ok(());
        }
        let complete = buf.ends_with(b"\n");
        let reply = match std::str::from_utf8(&buf) {
            Ok(line) if complete => {
                let service = service.clone();
                let line = line.trim_end_matches('\n').to_string();
                tokio::task::spawn_blocking(move || service.handle_line(&line)).await.unwrap_or(Reply::BadRequest)
            }
            _ => Reply::BadRequest,
        };
        write.write_all(format!("{reply}\n").as_bytes()).await?;
        if !complete {
            // oversized or truncated line: answer once and drop the connection
            return Ok(());
        }
    }
}

pub async fn serve(listener: TcpListener, service: Arc<HoneyCheckerService>) -> Result<()> {
    loop {
        let (stream, _) = listener.accept().await?;
        let service = service.clone();
        tokio::spawn(async move {
            let _ = connection(stream, service).await;
        });
    }
}

/// Client side used by the auth server. One connection per request, with the
/// whole exchange bounded by `timeout`.
#[derive(Debug, Clone)]
pub struct HoneyCheckerClient {
    addr: String,
    timeout: Duration,
}

impl HoneyCheckerClient {
    pub fn new(addr: impl Into<String>, timeout: Duration) -> Self {
        Self { addr: addr.into(), timeout }
    }

    pub async fn send(&self, request: &Request) -> Result<Reply> {
        let exchange = async {
            let mut stream = TcpStream::connect(&self.addr).await?;
            stream.write_all(format!("{request}\n").as_bytes()).await?;
            let mut line = String::new();
            BufReader::new(&mut stream).read_line(&mut line).await?;
            line.parse::<Reply>()
        };
        match tokio::time::timeout(self.timeout, exchange).await {
            Ok(reply) => reply,
            Err(_) => Err(ServiceError::Timeout(self.timeout.as_millis() as u64)),
        }
    }

    pub async fn set(&self, username: &str, index: SweetIndex) -> Result<Reply> {
        self.send(&Request::Set { username: username.to_string(), index }).await
    }

    pub async fn check(&self, username: &str, index: SweetIndex) -> Result<Reply> {
        self.send(&Request::Check { username: username.to_string(), index }).await
    }
}
