//! The honeyChecker holds only `(username, t)` pairs. It never sees a
//! sweetword; the auth side only ever sends it an index to compare.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{HbatError, Result};
use crate::framework::SweetIndex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoneyIndexRecord {
    pub username: String,
    pub index: SweetIndex,
}

impl HoneyIndexRecord {
    /// `username<TAB>t`
    pub fn to_line(&self) -> String {
        format!("{}\t{}", self.username, self.index.0)
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let line = line.trim_end_matches(['\r', '\n']);
        let (username, t) =
            line.split_once('\t').ok_or_else(|| HbatError::Malformed(format!("expected username<TAB>t: {line:?}")))?;
        let t: usize = t.parse().map_err(|_| HbatError::Malformed(format!("bad index {t:?}")))?;
        if t == 0 || username.is_empty() {
            return Err(HbatError::Malformed(format!("bad record {line:?}")));
        }
        Ok(Self { username: username.to_string(), index: SweetIndex(t) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckOutcome {
    Ok,
    Alarm,
}

/// In-memory index store. A single lock serializes every check and set.
#[derive(Debug, Default)]
pub struct HoneyChecker {
    records: Mutex<BTreeMap<String, SweetIndex>>,
}

impl HoneyChecker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = HoneyIndexRecord>) -> Self {
        let map = records.into_iter().map(|r| (r.username, r.index)).collect();
        Self { records: Mutex::new(map) }
    }

    /// Loads `username<TAB>t` lines; a later line for the same user wins.
    pub fn parse_store(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(HoneyIndexRecord::parse_line)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_records(records))
    }

    /// Sets (or overwrites) the index for `username`. Returns the previous index.
    pub fn set(&self, username: &str, index: SweetIndex) -> Option<SweetIndex> {
        self.records.lock().unwrap().insert(username.to_string(), index)
    }

    pub fn check(&self, username: &str, submitted: SweetIndex) -> Result<CheckOutcome> {
        let records = self.records.lock().unwrap();
        let stored = records.get(username).ok_or_else(|| HbatError::NoRecord(username.to_string()))?;
        Ok(if *stored == submitted { CheckOutcome::Ok } else { CheckOutcome::Alarm })
    }

    pub fn records(&self) -> Vec<HoneyIndexRecord> {
        self.records.lock().unwrap().iter().map(|(u, t)| HoneyIndexRecord { username: u.clone(), index: *t }).collect()
    }

    pub fn serialize_store(&self) -> String {
        self.records().iter().map(|r| r.to_line() + "\n").collect()
    }
}

/// What happens to accounts when the honeyChecker raises an alarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockPolicy {
    /// Block only the account the alarm was raised for.
    #[default]
    Light,
    /// Freeze every account.
    Strict,
}

impl fmt::Display for BlockPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockPolicy::Light => "light",
            BlockPolicy::Strict => "strict",
        })
    }
}

impl FromStr for BlockPolicy {
    type Err = HbatError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "light" => Ok(BlockPolicy::Light),
            "strict" => Ok(BlockPolicy::Strict),
            other => Err(HbatError::InvalidParameters(format!("unknown block policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BlockEffect {
    None,
    Blocked(String),
    FrozeAll,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockState {
    pub blocked: BTreeSet<String>,
    pub all_frozen: bool,
}

impl BlockState {
    pub fn is_blocked(&self, username: &str) -> bool {
        self.all_frozen || self.blocked.contains(username)
    }

    /// Serialized as one blocked username per line, or a single `*` when frozen.
    pub fn to_text(&self) -> String {
        if self.all_frozen {
            return "*\n".to_string();
        }
        self.blocked.iter().map(|u| format!("{u}\n")).collect()
    }

    pub fn from_text(text: &str) -> Self {
        let mut state = BlockState::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line == "*" {
                state.all_frozen = true;
            } else {
                state.blocked.insert(line.to_string());
            }
        }
        state
    }
}

/// Applies `policy` for an alarm on `username`; `None` means no alarm was raised.
pub fn apply_block_policy(policy: BlockPolicy, alarm_for: Option<&str>, state: &mut BlockState) -> BlockEffect {
    let Some(username) = alarm_for else {
        return BlockEffect::None;
    };
    match policy {
        BlockPolicy::Light => {
            state.blocked.insert(username.to_string());
            BlockEffect::Blocked(username.to_string())
        }
        BlockPolicy::Strict => {
            state.all_frozen = true;
            BlockEffect::FrozeAll
        }
    }
}
