//! The honeyChecker wire format: one UTF-8 request per line, one reply per line.
//!
//! ```text
//! SET <username> <t>     -> OK
//! CHECK <username> <j>   -> OK | ALARM | ERR NOUSER
//! anything else          -> ERR BADREQ
//! ```

use std::fmt;
use std::str::FromStr;

use hbat_core::SweetIndex;

use crate::error::ServiceError;

pub const MAX_LINE: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    Set { username: String, index: SweetIndex },
    Check { username: String, index: SweetIndex },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reply {
    Ok,
    Alarm,
    NoUser,
    BadRequest,
}

/// Usernames travel as single protocol tokens.
pub fn valid_username(u: &str) -> bool {
    !u.is_empty() && u.len() <= 64 && u.chars().all(|c| c.is_ascii_alphanumeric() || "._@-".contains(c))
}

impl FromStr for Request {
    type Err = ServiceError;

    fn from_str(line: &str) -> Result<Self, ServiceError> {
        let bad = || ServiceError::Protocol(format!("bad request {line:?}"));
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.len() > MAX_LINE {
            return Err(bad());
        }
        let parts: Vec<&str> = line.split(' ').collect();
        let [verb, username, index] = parts.as_slice() else {
            return Err(bad());
        };
        if !valid_username(username) || !index.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let index = match index.parse::<usize>() {
            Ok(i) if i >= 1 => SweetIndex(i),
            _ => return Err(bad()),
        };
        let username = username.to_string();
        match *verb {
            "SET" => Ok(Request::Set { username, index }),
            "CHECK" => Ok(Request::Check { username, index }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Request::Set { username, index } => write!(f, "SET {username} {}", index.0),
            Request::Check { username, index } => write!(f, "CHECK {username} {}", index.0),
        }
    }
}

impl fmt::Display for Reply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reply::Ok => "OK",
            Reply::Alarm => "ALARM",
            Reply::NoUser => "ERR NOUSER",
            Reply::BadRequest => "ERR BADREQ",
        })
    }
}

impl FromStr for Reply {
    type Err = ServiceError;

    fn from_str(line: &str) -> Result<Self, ServiceError> {
        match line.trim_end_matches(['\r', '\n']) {
            "OK" => Ok(Reply::Ok),
            "ALARM" => Ok(Reply::Alarm),
            "ERR NOUSER" => Ok(Reply::NoUser),
            "ERR BADREQ" => Ok(Reply::BadRequest),
            other => Err(ServiceError::Protocol(format!("unexpected reply {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_requests() {
        assert_eq!(
            "SET alex 4".parse::<Request>().unwrap(),
            Request::Set { username: "alex".into(), index: SweetIndex(4) }
        );
        assert_eq!(
            "CHECK alex 2\r".parse::<Request>().unwrap(),
            Request::Check { username: "alex".into(), index: SweetIndex(2) }
        );
    }

    #[test]
    fn rejects_malformed() {
        for line in [
            "",
            "SET",
            "SET alex",
            "SET alex 0",
            "SET alex -1",
            "SET alex +3",
            "set alex 1",
            "SET  alex 1",
            "CHECK alex 1 2",
            "SET al ex 1",
            "SET alex 99999999999999999999999",
        ] {
            assert!(line.parse::<Request>().is_err(), "{line:?}");
        }
    }

    #[test]
    fn round_trips() {
        let r = Request::Check { username: "u_1".into(), index: SweetIndex(3) };
        assert_eq!(r.to_string().parse::<Request>().unwrap(), r);
        for reply in [Reply::Ok, Reply::Alarm, Reply::NoUser, Reply::BadRequest] {
            assert_eq!(reply.to_string().parse::<Reply>().unwrap(), reply);
        }
    }
}
