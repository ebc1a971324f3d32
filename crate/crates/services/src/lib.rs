//! The two networked halves of a honeyword deployment: an auth server that
//! keeps sweetword lists and runs login sessions, and a honeyChecker that
//! keeps only the index of each user's real password.

pub mod auth;
pub mod config;
pub mod engine;
pub mod error;
pub mod honeychecker;
pub mod persist;
pub mod protocol;

pub use config::Config;
pub use error::{Result, ServiceError};

use std::sync::Arc;

use tokio::net::TcpListener;

/// Binds the honeyChecker and reports the bound address before serving.
pub async fn run_honeychecker(config: &Config, on_bound: impl FnOnce(std::net::SocketAddr)) -> Result<()> {
    let service = Arc::new(honeychecker::HoneyCheckerService::open(&config.honeychecker.data_dir)?);
    let listener = TcpListener::bind((config.honeychecker.listen.as_str(), config.honeychecker.port)).await?;
    on_bound(listener.local_addr()?);
    honeychecker::serve(listener, service).await
}

pub async fn run_auth(config: &Config, on_bound: impl FnOnce(std::net::SocketAddr)) -> Result<()> {
    let state = auth::AuthState::open(config)?;
    let listener = TcpListener::bind((config.auth.listen.as_str(), config.auth.port)).await?;
    on_bound(listener.local_addr()?);
    auth::serve(listener, state).await
}
