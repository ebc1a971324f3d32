use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hbat_core::honeychecker::BlockPolicy;
use hbat_core::SchemeTag;
use serde::Deserialize;

use crate::error::{Result, ServiceError};

pub const AUTH_PORT_ENV: &str = "HBAT_AUTH_PORT";
pub const HONEYCHECKER_PORT_ENV: &str = "HBAT_HONEYCHECKER_PORT";
pub const HONEYCHECKER_ADDR_ENV: &str = "HBAT_HONEYCHECKER_ADDR";

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub policy: BlockPolicy,
    #[serde(default)]
    pub auth: AuthConfig,
    #[serde(default)]
    pub honeychecker: HoneyCheckerConfig,
    #[serde(default)]
    pub defaults: Defaults,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AuthConfig {
    pub listen: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub admin_token: String,
    /// `host:port` of the honeyChecker; derived from `[honeychecker]` when absent.
    pub honeychecker_addr: Option<String>,
    pub timeout_ms: u64,
}

impl Default for AuthConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1".into(),
            port: 8080,
            data_dir: "hbat-data/auth".into(),
            admin_token: "change-me".into(),
            honeychecker_addr: None,
            timeout_ms: 2000,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HoneyCheckerConfig {
    pub listen: String,
    pub port: u16,
    pub data_dir: PathBuf,
}

impl Default for HoneyCheckerConfig {
    fn default() -> Self {
        Self { listen: "127.0.0.1".into(), port: 7070, data_dir: "hbat-data/honeychecker".into() }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Defaults {
    pub scheme: String,
    /// Per-scheme k used when a registration omits it.
    pub k: BTreeMap<String, usize>,
}

impl Default for Defaults {
    fn default() -> Self {
        let k =
            [("s3pas", 6), ("chc", 3), ("pas", 4), ("cop", 5)].into_iter().map(|(s, k)| (s.to_string(), k)).collect();
        Self { scheme: "s3pas".into(), k }
    }
}

impl Defaults {
    pub fn scheme(&self) -> Result<SchemeTag> {
        Ok(self.scheme.parse()?)
    }

    pub fn k_for(&self, scheme: SchemeTag) -> usize {
        self.k.get(scheme.as_str()).copied().unwrap_or(match scheme {
            SchemeTag::S3pas => 6,
            SchemeTag::Chc => 3,
            SchemeTag::Pas => 4,
            SchemeTag::Cop => 5,
        })
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            policy: BlockPolicy::Light,
            auth: AuthConfig::default(),
            honeychecker: HoneyCheckerConfig::default(),
            defaults: Defaults::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        config.defaults.scheme()?;
        for name in config.defaults.k.keys() {
            name.parse::<SchemeTag>()?;
        }
        Ok(config)
    }

    /// Reads `path` and applies the environment overrides.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::parse(&text)?;
        config.apply_env(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        let port = |name: &str, v: String| {
            v.parse::<u16>().map_err(|_| ServiceError::Config(format!("{name}={v:?} is not a port")))
        };
        if let Some(v) = var(AUTH_PORT_ENV) {
            self.auth.port = port(AUTH_PORT_ENV, v)?;
        }
        if let Some(v) = var(HONEYCHECKER_PORT_ENV) {
            self.honeychecker.port = port(HONEYCHECKER_PORT_ENV, v)?;
        }
        if let Some(v) = var(HONEYCHECKER_ADDR_ENV) {
            self.auth.honeychecker_addr = Some(v);
        }
        Ok(())
    }

    pub fn honeychecker_addr(&self) -> String {
        self.auth
            .honeychecker_addr
            .clone()
            .unwrap_or_else(|| format!("{}:{}", self.honeychecker.listen, self.honeychecker.port))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
policy = "strict"

[auth]
port = 9000
data_dir = "/tmp/a"
admin_token = "s3cret"

[honeychecker]
port = 9001
data_dir = "/tmp/h"

[defaults]
scheme = "cop"
k = { cop = 4 }
"#;

    #[test]
    fn parses_sample() {
        let c = Config::parse(SAMPLE).unwrap();
        assert_eq!(c.policy, BlockPolicy::Strict);
        assert_eq!(c.auth.port, 9000);
        assert_eq!(c.auth.timeout_ms, 2000);
        assert_eq!(c.honeychecker_addr(), "127.0.0.1:9001");
        assert_eq!(c.defaults.scheme().unwrap(), SchemeTag::Cop);
        assert_eq!(c.defaults.k_for(SchemeTag::Cop), 4);
        assert_eq!(c.defaults.k_for(SchemeTag::Pas), 4);
    }

    #[test]
    fn env_overrides_ports() {
        let mut c = Config::parse(SAMPLE).unwrap();
        c.apply_env(|k| match k {
            AUTH_PORT_ENV => Some("1234".into()),
            HONEYCHECKER_PORT_ENV => Some("4321".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!((c.auth.port, c.honeychecker.port), (1234, 4321));
        assert_eq!(c.honeychecker_addr(), "127.0.0.1:4321");
        assert!(c.apply_env(|k| (k == AUTH_PORT_ENV).then(|| "http".into())).is_err());
    }

    #[test]
    fn rejects_unknown_scheme_and_keys() {
        assert!(Config::parse("[defaults]\nscheme = \"pin\"\n").is_err());
        assert!(Config::parse("[auth]\nprot = 1\n").is_err());
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }
}
