//! Runtime dispatch over the four schemes. Accounts carry their scheme tag,
//! so the server keeps one engine per scheme and a tagged challenge per session.

use hbat_core::chc::{Chc, ChcChallenge, ChcParams};
use hbat_core::cop::{Cop, CopChallenge, CopParams};
use hbat_core::framework::{decode_list, encode_list, identify_sweetword, PasswordRecord, Transcript};
use hbat_core::honeygen::generate_sweetwords;
use hbat_core::pas::{Pas, PasChallenge, PasParams};
use hbat_core::s3pas::{S3pas, S3pasChallenge, S3pasParams};
use hbat_core::{Result, Scheme, SchemeTag, SweetIndex, Verdict};
use rand::Rng;
use serde_json::Value;

pub struct Engines {
    pub s3pas: S3pas,
    pub chc: Chc,
    pub pas: Pas,
    pub cop: Cop,
}

/// A challenge pinned to a session. Never serialized to clients.
pub enum LiveChallenge {
    S3pas(S3pasChallenge),
    Chc(ChcChallenge),
    Pas(PasChallenge),
    Cop(CopChallenge),
}

fn enroll<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    username: &str,
    password: &str,
    k: usize,
    rng: &mut R,
) -> Result<(PasswordRecord, SweetIndex)> {
    let pw = scheme.decode_sweetword(password)?;
    let g = generate_sweetwords(scheme, &pw, k, rng)?;
    Ok((encode_list(scheme, username, &g.list), g.index))
}

fn judge<S: Scheme>(
    scheme: &S,
    challenge: &S::Challenge,
    record: &PasswordRecord,
    responses: &[String],
) -> Result<Verdict> {
    let list = decode_list(scheme, record)?;
    let decoded = responses.iter().map(|r| scheme.decode_response(r)).collect::<Result<Vec<_>>>()?;
    identify_sweetword(scheme, challenge, &list, &Transcript::new(scheme.tag(), decoded))
}

fn start<S: Scheme, R: Rng + ?Sized>(scheme: &S, record: &PasswordRecord, rng: &mut R) -> Result<S::Challenge> {
    scheme.generate_challenge(&decode_list(scheme, record)?, rng)
}

fn to_value<T: serde::Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("payloads serialize")
}

impl Default for Engines {
    fn default() -> Self {
        Self {
            s3pas: S3pas::new(S3pasParams::default()).expect("default S3PAS parameters"),
            chc: Chc::new(ChcParams::default()).expect("default CHC parameters"),
            pas: Pas::new(PasParams::default()).expect("default PAS parameters"),
            cop: Cop::new(CopParams::default()).expect("default COP parameters"),
        }
    }
}

impl Engines {
    pub fn rounds(&self, tag: SchemeTag) -> usize {
        match tag {
            SchemeTag::S3pas => self.s3pas.rounds(),
            SchemeTag::Chc => self.chc.rounds(),
            SchemeTag::Pas => self.pas.rounds(),
            SchemeTag::Cop => self.cop.rounds(),
        }
    }

    /// Generates the sweetword list. The index goes to the honeyChecker only.
    pub fn enroll<R: Rng + ?Sized>(
        &self,
        tag: SchemeTag,
        username: &str,
        password: &str,
        k: usize,
        rng: &mut R,
    ) -> Result<(PasswordRecord, SweetIndex)> {
        match tag {
            SchemeTag::S3pas => enroll(&self.s3pas, username, password, k, rng),
            SchemeTag::Chc => enroll(&self.chc, username, password, k, rng),
            SchemeTag::Pas => enroll(&self.pas, username, password, k, rng),
            SchemeTag::Cop => enroll(&self.cop, username, password, k, rng),
        }
    }

    pub fn start<R: Rng + ?Sized>(&self, record: &PasswordRecord, rng: &mut R) -> Result<LiveChallenge> {
        Ok(match record.scheme {
            SchemeTag::S3pas => LiveChallenge::S3pas(start(&self.s3pas, record, rng)?),
            SchemeTag::Chc => LiveChallenge::Chc(start(&self.chc, record, rng)?),
            SchemeTag::Pas => LiveChallenge::Pas(start(&self.pas, record, rng)?),
            SchemeTag::Cop => LiveChallenge::Cop(start(&self.cop, record, rng)?),
        })
    }

    /// The client-facing view of one round.
    pub fn payload(&self, challenge: &LiveChallenge, round: usize, session_id: &str) -> Value {
        match challenge {
            LiveChallenge::S3pas(c) => to_value(self.s3pas.payload(c, round, session_id)),
            LiveChallenge::Chc(c) => to_value(self.chc.payload(c, round, session_id)),
            LiveChallenge::Pas(c) => to_value(self.pas.payload(c, round, session_id)),
            LiveChallenge::Cop(c) => to_value(self.cop.payload(c, session_id)),
        }
    }

    /// Checks that `response` is well formed for the scheme; its value is only judged at the end.
    pub fn check_response(&self, tag: SchemeTag, response: &str) -> Result<()> {
        match tag {
            SchemeTag::S3pas => self.s3pas.decode_response(response).map(drop),
            SchemeTag::Chc => self.chc.decode_response(response).map(drop),
            SchemeTag::Pas => self.pas.decode_response(response).map(drop),
            SchemeTag::Cop => self.cop.decode_response(response).map(drop),
        }
    }

    pub fn judge(&self, challenge: &LiveChallenge, record: &PasswordRecord, responses: &[String]) -> Result<Verdict> {
        match challenge {
            LiveChallenge::S3pas(c) => judge(&self.s3pas, c, record, responses),
            LiveChallenge::Chc(c) => judge(&self.chc, c, record, responses),
            LiveChallenge::Pas(c) => judge(&self.pas, c, record, responses),
            LiveChallenge::Cop(c) => judge(&self.cop, c, record, responses),
        }
    }
}
