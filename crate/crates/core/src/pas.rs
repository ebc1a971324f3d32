//! Modified PAS. The secret is two predicates, each a block index of a 5×5
//! table plus a letter. Every round shows two tables of 25 blocks with 13
//! letters each; the four yes/no answers (pred1 in table 1, pred1 in table 2,
//! pred2 in table 1, pred2 in table 2) select one of P, Q, R, S. In one round
//! every sweetword is forced onto a different response element.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{HbatError, Result};
use crate::framework::{Scheme, SchemeTag, SweetwordList, Violation};
use crate::honeygen;
use crate::stats::binomial;

pub const BLOCKS: usize = 25;
pub const LETTERS_PER_BLOCK: u32 = 13;
pub const RESPONSES: [char; 4] = ['P', 'Q', 'R', 'S'];

/// Response element per answer sequence, indexed by the four answers read as
/// bits, first answer most significant. Each element owns four sequences.
pub const RESPONSE_TABLE: [char; 16] = ['P', 'Q', 'R', 'S', 'Q', 'S', 'P', 'R', 'S', 'R', 'Q', 'P', 'R', 'P', 'S', 'Q'];

pub type AnswerSequence = [bool; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub row: u8,
    pub col: u8,
    pub letter: char,
}

impl Predicate {
    pub fn new(row: u8, col: u8, letter: char) -> Result<Self> {
        if !(1..=5).contains(&row) || !(1..=5).contains(&col) || !letter.is_ascii_uppercase() {
            return Err(HbatError::InvalidSecret {
                scheme: SchemeTag::Pas,
                reason: format!("bad predicate {row}{col}{letter}"),
            });
        }
        Ok(Self { row, col, letter })
    }

    pub fn block(&self) -> usize {
        (self.row as usize - 1) * 5 + self.col as usize - 1
    }

    fn letter_bit(&self) -> u32 {
        1 << (self.letter as u8 - b'A')
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.row, self.col, self.letter)
    }
}

impl FromStr for Predicate {
    type Err = HbatError;

    /// `23E`: row 2, column 3, letter E.
    fn from_str(s: &str) -> Result<Self> {
        let b = s.as_bytes();
        if b.len() != 3 || !b[0].is_ascii_digit() || !b[1].is_ascii_digit() {
            return Err(HbatError::Malformed(format!("bad predicate {s:?}")));
        }
        Predicate::new(b[0] - b'0', b[1] - b'0', b[2] as char)
    }
}

pub type PredicatePair = [Predicate; 2];

/// Two challenge tables; each block is a 26-bit letter mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PasTables {
    pub tables: [[u32; BLOCKS]; 2],
}

impl PasTables {
    pub fn contains(&self, table: usize, pred: &Predicate) -> bool {
        self.tables[table][pred.block()] & pred.letter_bit() != 0
    }

    pub fn block_letters(&self, table: usize, block: usize) -> String {
        (0..26u8).filter(|i| self.tables[table][block] & (1 << i) != 0).map(|i| (b'A' + i) as char).collect()
    }

    /// Every block holds exactly 13 letters.
    pub fn well_formed(&self) -> bool {
        self.tables.iter().flatten().all(|m| m.count_ones() == LETTERS_PER_BLOCK && m >> 26 == 0)
    }
}

pub fn answer_sequence(pair: &PredicatePair, tables: &PasTables) -> AnswerSequence {
    let [p1, p2] = pair;
    [tables.contains(0, p1), tables.contains(1, p1), tables.contains(0, p2), tables.contains(1, p2)]
}

fn seq_index(seq: &AnswerSequence) -> usize {
    seq.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

pub fn response_for(seq: &AnswerSequence) -> char {
    RESPONSE_TABLE[seq_index(seq)]
}

/// The four answer sequences that map to `element`.
pub fn sequences_for(element: char) -> Vec<AnswerSequence> {
    (0..16)
        .filter(|&i| RESPONSE_TABLE[i] == element)
        .map(|i| [i & 8 != 0, i & 4 != 0, i & 2 != 0, i & 1 != 0])
        .collect()
}

fn random_block<R: Rng + ?Sized>(rng: &mut R, required: u32, forbidden: u32) -> u32 {
    let free: Vec<u32> = (0..26).filter(|i| (required | forbidden) & (1 << i) == 0).collect();
    let need = LETTERS_PER_BLOCK - required.count_ones();
    free.choose_multiple(rng, need as usize).fold(required, |m, &i| m | 1 << i)
}

/// Random tables with no constraints.
pub fn random_tables<R: Rng + ?Sized>(rng: &mut R) -> PasTables {
    let mut tables = [[0u32; BLOCKS]; 2];
    for block in tables.iter_mut().flatten() {
        *block = random_block(rng, 0, 0);
    }
    PasTables { tables }
}

/// Tables in which each pair yields its given answer sequence. YES letters are
/// placed first, NO letters excluded, and the rest filled uniformly.
pub fn tables_for_sequences<R: Rng + ?Sized>(
    pairs: &[PredicatePair],
    sequences: &[AnswerSequence],
    rng: &mut R,
) -> Result<PasTables> {
    assert_eq!(pairs.len(), sequences.len());
    let mut required = [[0u32; BLOCKS]; 2];
    let mut forbidden = [[0u32; BLOCKS]; 2];
    for (pair, seq) in pairs.iter().zip(sequences) {
        for (slot, (pred, table)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let p = &pair[pred];
            let target = if seq[slot] { &mut required } else { &mut forbidden };
            target[table][p.block()] |= p.letter_bit();
        }
    }
    let mut tables = [[0u32; BLOCKS]; 2];
    for t in 0..2 {
        for b in 0..BLOCKS {
            let (req, forb) = (required[t][b], forbidden[t][b]);
            if req & forb != 0 || req.count_ones() > LETTERS_PER_BLOCK || 26 - forb.count_ones() < LETTERS_PER_BLOCK {
                return Err(HbatError::InvalidSweetwordSet(format!(
                    "conflicting predicates in table {} block {b}",
                    t + 1
                )));
            }
            tables[t][b] = random_block(rng, req, forb);
        }
    }
    Ok(PasTables { tables })
}

/// Chooses one random sequence per response element, gives each pair a
/// distinct element and builds tables satisfying all of them.
pub fn generate_designated_tables<R: Rng + ?Sized>(
    pairs: &[PredicatePair],
    rng: &mut R,
) -> Result<(PasTables, Vec<char>)> {
    if pairs.len() < 2 || pairs.len() > RESPONSES.len() {
        return Err(HbatError::KOutOfRange { scheme: SchemeTag::Pas, k: pairs.len(), min: 2, max: RESPONSES.len() });
    }
    let chosen: Vec<AnswerSequence> = RESPONSES.iter().map(|&e| *sequences_for(e).choose(rng).unwrap()).collect();
    let mut order: Vec<usize> = (0..RESPONSES.len()).collect();
    order.shuffle(rng);
    let sequences: Vec<AnswerSequence> = order[..pairs.len()].iter().map(|&e| chosen[e]).collect();
    let tables = tables_for_sequences(pairs, &sequences, rng)?;
    let assigned: Vec<char> = order[..pairs.len()].iter().map(|&e| RESPONSES[e]).collect();
    Ok((tables, assigned))
}

/// `C(m·h + c − 1, c)^p`.
pub fn pas_bruteforce_complexity(m: u64, h: u64, c: u64, p: u32) -> BigUint {
    binomial(m * h + c - 1, c).pow(p)
}

/// False-alarm figure quoted for the default parameters.
pub const PUBLISHED_TYPO_RATE: f64 = 3.0 / 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PasParams {
    pub rounds: usize,
    pub k: usize,
}

impl Default for PasParams {
    fn default() -> Self {
        Self { rounds: 5, k: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PasChallenge {
    pub rounds: Vec<PasTables>,
    pub designated_round: usize,
    /// Response element forced on each sweetword in the designated round.
    pub assigned: Vec<char>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PasBlock {
    pub row: u8,
    pub col: u8,
    pub letters: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PasPayload {
    pub table1: Vec<PasBlock>,
    pub table2: Vec<PasBlock>,
    pub response_options: Vec<String>,
    pub session_id: String,
    pub round: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Pas {
    params: PasParams,
}

impl Pas {
    pub fn new(params: PasParams) -> Result<Self> {
        if params.rounds == 0 {
            return Err(HbatError::InvalidParameters("at least one round".into()));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &PasParams {
        &self.params
    }

    pub fn payload(&self, challenge: &PasChallenge, round: usize, session_id: &str) -> PasPayload {
        let tables = &challenge.rounds[round - 1];
        let table = |t: usize| {
            (0..BLOCKS)
                .map(|b| PasBlock {
                    row: (b / 5 + 1) as u8,
                    col: (b % 5 + 1) as u8,
                    letters: tables.block_letters(t, b),
                })
                .collect()
        };
        PasPayload {
            table1: table(0),
            table2: table(1),
            response_options: RESPONSES.iter().map(|c| c.to_string()).collect(),
            session_id: session_id.to_string(),
            round,
        }
    }

    fn random_predicate<R: Rng + ?Sized>(rng: &mut R) -> Predicate {
        Predicate {
            row: rng.gen_range(1..=5),
            col: rng.gen_range(1..=5),
            letter: (b'A' + rng.gen_range(0..26)) as char,
        }
    }
}

impl Scheme for Pas {
    type Sweetword = PredicatePair;
    type Challenge = PasChallenge;
    type Response = char;

    fn tag(&self) -> SchemeTag {
        SchemeTag::Pas
    }

    fn rounds(&self) -> usize {
        self.params.rounds
    }

    fn response_element_count(&self) -> usize {
        RESPONSES.len()
    }

    fn validate_secret(&self, secret: &PredicatePair) -> Result<()> {
        for p in secret {
            Predicate::new(p.row, p.col, p.letter)?;
        }
        if secret[0] == secret[1] {
            return Err(HbatError::InvalidSecret { scheme: SchemeTag::Pas, reason: "predicates must differ".into() });
        }
        Ok(())
    }

    /// All 2k predicates must be pairwise distinct.
    fn validate_sweetwords(&self, entries: &[PredicatePair]) -> Vec<Violation> {
        let mut out: Vec<Violation> = entries
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                self.validate_secret(s).err().map(|e| Violation::Malformed { entry: i + 1, reason: e.to_string() })
            })
            .collect();
        if !out.is_empty() {
            return out;
        }
        out.extend(honeygen::duplicate_violations(entries));
        for a in 0..entries.len() {
            for b in a + 1..entries.len() {
                if entries[a] != entries[b] && entries[a].iter().any(|p| entries[b].contains(p)) {
                    out.push(Violation::RepeatedPredicate { a: a + 1, b: b + 1 });
                }
            }
        }
        out
    }

    /// Moves both the block index and the letter of each predicate.
    fn honeyword<R: Rng + ?Sized>(&self, original: &PredicatePair, rng: &mut R) -> PredicatePair {
        loop {
            let pair = original.map(|p| loop {
                let q = Self::random_predicate(rng);
                if q.block() != p.block() && q.letter != p.letter {
                    break q;
                }
            });
            if pair[0] != pair[1] {
                return pair;
            }
        }
    }

    fn random_secret<R: Rng + ?Sized>(&self, rng: &mut R) -> PredicatePair {
        loop {
            let pair = [Self::random_predicate(rng), Self::random_predicate(rng)];
            if pair[0] != pair[1] {
                return pair;
            }
        }
    }

    fn generate_challenge<R: Rng + ?Sized>(
        &self,
        list: &SweetwordList<PredicatePair>,
        rng: &mut R,
    ) -> Result<PasChallenge> {
        let designated_round = rng.gen_range(1..=self.params.rounds);
        let mut rounds = Vec::with_capacity(self.params.rounds);
        let mut assigned = Vec::new();
        for round in 1..=self.params.rounds {
            if round == designated_round {
                let (tables, a) = generate_designated_tables(list.entries(), rng)?;
                assigned = a;
                rounds.push(tables);
            } else {
                rounds.push(random_tables(rng));
            }
        }
        Ok(PasChallenge { rounds, designated_round, assigned })
    }

    fn designated_round(&self, challenge: &PasChallenge) -> usize {
        challenge.designated_round
    }

    fn accepts(&self, challenge: &PasChallenge, round: usize, sweetword: &PredicatePair, response: &char) -> bool {
        challenge.rounds.get(round - 1).is_some_and(|t| response_for(&answer_sequence(sweetword, t)) == *response)
    }

    fn respond<R: Rng + ?Sized>(
        &self,
        challenge: &PasChallenge,
        round: usize,
        sweetword: &PredicatePair,
        _rng: &mut R,
    ) -> char {
        response_for(&answer_sequence(sweetword, &challenge.rounds[round - 1]))
    }

    fn response_space(&self, _challenge: &PasChallenge, _round: usize) -> Vec<char> {
        RESPONSES.to_vec()
    }

    /// `23E,41P`
    fn encode_sweetword(&self, sweetword: &PredicatePair) -> String {
        format!("{},{}", sweetword[0], sweetword[1])
    }

    fn decode_sweetword(&self, encoded: &str) -> Result<PredicatePair> {
        let (a, b) = encoded
            .split_once(',')
            .ok_or_else(|| HbatError::Malformed(format!("expected two predicates: {encoded:?}")))?;
        let pair = [a.parse()?, b.parse()?];
        self.validate_secret(&pair)?;
        Ok(pair)
    }

    fn encode_response(&self, response: &char) -> String {
        response.to_string()
    }

    fn decode_response(&self, encoded: &str) -> Result<char> {
        match encoded {
            "P" => Ok('P'),
            "Q" => Ok('Q'),
            "R" => Ok('R'),
            "S" => Ok('S'),
            _ => Err(HbatError::Malformed(format!("response must be P, Q, R or S: {encoded:?}"))),
        }
    }
}
