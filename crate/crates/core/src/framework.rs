//! The scheme-independent part of honeyword-based authentication: sweetword
//! lists, the per-round candidate intersection that names the sweetword a
//! session was performed against, and the password-file record format.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HbatError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeTag {
    S3pas,
    Chc,
    Pas,
    Cop,
}

impl SchemeTag {
    pub const ALL: [SchemeTag; 4] = [SchemeTag::S3pas, SchemeTag::Chc, SchemeTag::Pas, SchemeTag::Cop];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeTag::S3pas => "s3pas",
            SchemeTag::Chc => "chc",
            SchemeTag::Pas => "pas",
            SchemeTag::Cop => "cop",
        }
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeTag {
    type Err = HbatError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s3pas" => Ok(SchemeTag::S3pas),
            "chc" => Ok(SchemeTag::Chc),
            "pas" => Ok(SchemeTag::Pas),
            "cop" => Ok(SchemeTag::Cop),
            _ => Err(HbatError::UnknownScheme(s.to_string())),
        }
    }
}

/// Position of a sweetword in its list, counted from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SweetIndex(pub usize);

impl SweetIndex {
    pub fn from_zero_based(i: usize) -> Self {
        SweetIndex(i + 1)
    }

    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for SweetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A broken per-scheme constraint found while validating a sweetword set.
/// Entry numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    Duplicate {
        a: usize,
        b: usize,
    },
    /// Round-`round` PPIs of two entries are the same.
    IdenticalPpi {
        round: usize,
        a: usize,
        b: usize,
    },
    /// Round-`round` PPIs of two entries share a character, so their PRS can never be disjoint there.
    SharedPpi {
        round: usize,
        a: usize,
        b: usize,
    },
    OverlappingIcons {
        a: usize,
        b: usize,
    },
    RepeatedPredicate {
        a: usize,
        b: usize,
    },
    SharedCharacter {
        a: usize,
        b: usize,
        ch: char,
    },
    Malformed {
        entry: usize,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Duplicate { a, b } => write!(f, "entries {a} and {b} are identical"),
            Violation::IdenticalPpi { round, a, b } => {
                write!(f, "round {round}: entries {a} and {b} have the same PPI")
            }
            Violation::SharedPpi { round, a, b } => {
                write!(f, "round {round}: PPIs of entries {a} and {b} overlap")
            }
            Violation::OverlappingIcons { a, b } => write!(f, "icon sets {a} and {b} overlap"),
            Violation::RepeatedPredicate { a, b } => {
                write!(f, "entries {a} and {b} repeat a predicate")
            }
            Violation::SharedCharacter { a, b, ch } => {
                write!(f, "entries {a} and {b} share character {ch:?}")
            }
            Violation::Malformed { entry, reason } => write!(f, "entry {entry}: {reason}"),
        }
    }
}

/// The k stored entries for one account. The list itself never records which
/// entry is the original password.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweetwordList<T> {
    scheme: SchemeTag,
    entries: Vec<T>,
}

impl<T: PartialEq> SweetwordList<T> {
    /// Checks `2 <= k <= max_k` and pairwise distinctness.
    pub fn new(scheme: SchemeTag, entries: Vec<T>, max_k: usize) -> Result<Self> {
        let k = entries.len();
        if k < 2 || k > max_k {
            return Err(HbatError::KOutOfRange { scheme, k, min: 2, max: max_k });
        }
        for i in 0..k {
            for j in i + 1..k {
                if entries[i] == entries[j] {
                    return Err(HbatError::DuplicateSweetword(i + 1, j + 1));
                }
            }
        }
        Ok(Self { scheme, entries })
    }
}

impl<T> SweetwordList<T> {
    pub fn scheme(&self) -> SchemeTag {
        self.scheme
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn get(&self, index: SweetIndex) -> Option<&T> {
        index.0.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn iter_indexed(&self) -> impl Iterator<Item = (SweetIndex, &T)> {
        self.entries.iter().enumerate().map(|(i, e)| (SweetIndex::from_zero_based(i), e))
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }
}

/// A challenge-response scheme modified to carry k sweetwords.
///
/// Rounds are numbered from 1. `accepts` is the scheme's g_F membership test:
/// is `response` in the partial response set of `sweetword` for that round.
pub trait Scheme: Sync {
    type Sweetword: Clone + PartialEq + fmt::Debug + Send + Sync;
    type Challenge: Send + Sync;
    type Response: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn tag(&self) -> SchemeTag;

    fn rounds(&self) -> usize;

    /// Number of distinct response elements (upper bound on k).
    fn response_element_count(&self) -> usize;

    fn validate_secret(&self, secret: &Self::Sweetword) -> Result<()>;

    fn validate_sweetwords(&self, entries: &[Self::Sweetword]) -> Vec<Violation>;

    /// Constraint the honeyword generator enforces; may be stricter than
    /// [`Scheme::validate_sweetwords`].
    fn generation_violations(&self, entries: &[Self::Sweetword]) -> Vec<Violation> {
        self.validate_sweetwords(entries)
    }

    /// One syntax-preserving perturbation of `original`.
    fn honeyword<R: Rng + ?Sized>(&self, original: &Self::Sweetword, rng: &mut R) -> Self::Sweetword;

    /// A uniformly drawn valid secret, for simulations.
    fn random_secret<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Sweetword;

    fn generate_challenge<R: Rng + ?Sized>(
        &self,
        list: &SweetwordList<Self::Sweetword>,
        rng: &mut R,
    ) -> Result<Self::Challenge>;

    fn designated_round(&self, challenge: &Self::Challenge) -> usize;

    fn accepts(
        &self,
        challenge: &Self::Challenge,
        round: usize,
        sweetword: &Self::Sweetword,
        response: &Self::Response,
    ) -> bool;

    /// A response a user holding `sweetword` could give, drawn uniformly from its PRS.
    fn respond<R: Rng + ?Sized>(
        &self,
        challenge: &Self::Challenge,
        round: usize,
        sweetword: &Self::Sweetword,
        rng: &mut R,
    ) -> Self::Response;

    /// Every response element a user can submit in `round`.
    fn response_space(&self, challenge: &Self::Challenge, round: usize) -> Vec<Self::Response>;

    fn encode_sweetword(&self, sweetword: &Self::Sweetword) -> String;

    fn decode_sweetword(&self, encoded: &str) -> Result<Self::Sweetword>;

    fn encode_response(&self, response: &Self::Response) -> String;

    fn decode_response(&self, encoded: &str) -> Result<Self::Response>;

    /// Exhaustive check that every response element of the designated round
    /// lies in at most one sweetword's PRS.
    fn designated_round_separates(&self, challenge: &Self::Challenge, list: &SweetwordList<Self::Sweetword>) -> bool {
        let round = self.designated_round(challenge);
        self.response_space(challenge, round)
            .iter()
            .all(|resp| list.entries().iter().filter(|sw| self.accepts(challenge, round, sw, resp)).count() <= 1)
    }
}

/// Submitted responses of one login attempt, one per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript<R> {
    pub scheme: SchemeTag,
    pub responses: Vec<R>,
}

impl<R> Transcript<R> {
    pub fn new(scheme: SchemeTag, responses: Vec<R>) -> Self {
        Self { scheme, responses }
    }
}

/// Per-round sets of 1-based sweetword indices whose PRS held that round's response.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateIndexSets {
    pub rounds: Vec<BTreeSet<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Identified(SweetIndex),
    Reject,
}

impl Verdict {
    pub fn index(&self) -> Option<SweetIndex> {
        match self {
            Verdict::Identified(i) => Some(*i),
            Verdict::Reject => None,
        }
    }
}

pub fn candidate_sets<S: Scheme>(
    scheme: &S,
    challenge: &S::Challenge,
    list: &SweetwordList<S::Sweetword>,
    responses: &[S::Response],
) -> CandidateIndexSets {
    let rounds = responses
        .iter()
        .enumerate()
        .map(|(r, resp)| {
            list.iter_indexed()
                .filter(|(_, sw)| scheme.accepts(challenge, r + 1, sw, resp))
                .map(|(idx, _)| idx.0)
                .collect()
        })
        .collect();
    CandidateIndexSets { rounds }
}

/// Intersects the per-round candidate sets. An empty intersection rejects;
/// more than one survivor means the challenge was not separating.
pub fn intersect_candidates(sets: &CandidateIndexSets) -> Result<Verdict> {
    let mut iter = sets.rounds.iter();
    let Some(first) = iter.next() else {
        return Ok(Verdict::Reject);
    };
    let common = iter.fold(first.clone(), |acc, s| acc.intersection(s).copied().collect());
    match common.len() {
        0 => Ok(Verdict::Reject),
        1 => Ok(Verdict::Identified(SweetIndex(*common.iter().next().unwrap()))),
        _ => Err(HbatError::AmbiguousIdentification(common.into_iter().collect())),
    }
}

/// Names the sweetword a complete transcript was produced against.
pub fn identify_sweetword<S: Scheme>(
    scheme: &S,
    challenge: &S::Challenge,
    list: &SweetwordList<S::Sweetword>,
    transcript: &Transcript<S::Response>,
) -> Result<Verdict> {
    let expected = scheme.rounds();
    if transcript.responses.len() != expected {
        return Err(HbatError::IncompleteTranscript { expected, got: transcript.responses.len() });
    }
    intersect_candidates(&candidate_sets(scheme, challenge, list, &transcript.responses))
}

/// Simulates a user holding `sweetword` through every round.
pub fn simulate_login<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    challenge: &S::Challenge,
    sweetword: &S::Sweetword,
    rng: &mut R,
) -> Transcript<S::Response> {
    let responses = (1..=scheme.rounds()).map(|round| scheme.respond(challenge, round, sweetword, rng)).collect();
    Transcript::new(scheme.tag(), responses)
}

/// One line of the password file:
/// `username<TAB>scheme<TAB>k<TAB>sweetword_1|...|sweetword_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PasswordRecord {
    pub username: String,
    pub scheme: SchemeTag,
    pub sweetwords: Vec<String>,
}

impl PasswordRecord {
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.username, self.scheme, self.sweetwords.len(), self.sweetwords.join("|"))
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split('\t').collect();
        let [username, scheme, k, words] = fields.as_slice() else {
            return Err(HbatError::Malformed(format!("expected 4 tab-separated fields: {line:?}")));
        };
        let scheme: SchemeTag = scheme.parse()?;
        let k: usize = k.parse().map_err(|_| HbatError::Malformed(format!("bad k {k:?}")))?;
        let sweetwords: Vec<String> = words.split('|').map(str::to_string).collect();
        if sweetwords.len() != k {
            return Err(HbatError::Malformed(format!("k = {k} but {} sweetwords listed", sweetwords.len())));
        }
        if username.is_empty() {
            return Err(HbatError::Malformed("empty username".into()));
        }
        Ok(Self { username: username.to_string(), scheme, sweetwords })
    }
}

pub fn encode_list<S: Scheme>(scheme: &S, username: &str, list: &SweetwordList<S::Sweetword>) -> PasswordRecord {
    PasswordRecord {
        username: username.to_string(),
        scheme: scheme.tag(),
        sweetwords: list.entries().iter().map(|sw| scheme.encode_sweetword(sw)).collect(),
    }
}

pub fn decode_list<S: Scheme>(scheme: &S, record: &PasswordRecord) -> Result<SweetwordList<S::Sweetword>> {
    if record.scheme != scheme.tag() {
        return Err(HbatError::Malformed(format!("record is for {} but decoded as {}", record.scheme, scheme.tag())));
    }
    let entries = record.sweetwords.iter().map(|s| scheme.decode_sweetword(s)).collect::<Result<Vec<_>>>()?;
    SweetwordList::new(scheme.tag(), entries, scheme.response_element_count())
}
