use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hbat_services::config::Config;

use crate::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Server {
    Auth,
    Honeychecker,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(value_enum)]
    server: Server,
    /// TOML config; HBAT_AUTH_PORT, HBAT_HONEYCHECKER_PORT and HBAT_HONEYCHECKER_ADDR override it.
    #[arg(long)]
    config: PathBuf,
}

fn announce(addr: std::net::SocketAddr) {
    println!("listening on {addr}");
    let _ = std::io::stdout().flush();
}

pub fn run(a: ServeArgs) -> CliResult<()> {
    let config = Config::load(&a.config)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        match a.server {
            Server::Auth => hbat_services::run_auth(&config, announce).await,
            Server::Honeychecker => hbat_services::run_honeychecker(&config, announce).await,
        }
    })?;
    Ok(())
}
