//! Modified Count-On-Plane. Characters sit in a fixed row-major order on an
//! `a × b` plane and each carries a per-session digit. The user walks
//! `digit(first)` steps down its column, then the sum of the other digits
//! steps forward in reading order, and types the digit found there.
//!
//! Down one row is `+a` in the ordering, so the walk lands at
//! `first + a·v + h (mod n)`. A challenge gives every sweetword its own
//! response cell with its own digit by choosing `v = P_L / a` and splitting
//! `P_L mod a` over the remaining characters.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::Serialize;

use crate::error::{HbatError, Result};
use crate::framework::{Scheme, SchemeTag, SweetwordList, Violation};
use crate::honeygen::{self, class_preserving_substitute};
use crate::stats::binomial;

pub const COP_ALPHABET: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789*#@&";

#[derive(Debug, Clone, PartialEq)]
pub struct CopParams {
    pub alphabet: Vec<char>,
    /// Plane width `a`.
    pub columns: usize,
    /// Plane height `b`.
    pub rows: usize,
    pub secret_len: usize,
    pub k: usize,
    /// Ask for the response twice and only accept matching entries.
    pub double_entry: bool,
}

impl Default for CopParams {
    fn default() -> Self {
        Self {
            alphabet: COP_ALPHABET.chars().collect(),
            columns: 11,
            rows: 6,
            secret_len: 4,
            k: 5,
            double_entry: false,
        }
    }
}

impl CopParams {
    /// A small plane for exhaustive attack simulations.
    pub fn reduced(columns: usize, rows: usize, alphabet: &str, secret_len: usize) -> Self {
        Self { alphabet: alphabet.chars().collect(), columns, rows, secret_len, ..Self::default() }
    }

    pub fn cells(&self) -> usize {
        self.columns * self.rows
    }
}

#[derive(Debug, Clone)]
pub struct Cop {
    params: CopParams,
    index_of: HashMap<char, usize>,
}

/// Digits of one session plus the server-side plan that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopChallenge {
    /// Digit per character, in alphabet order.
    pub digits: Vec<u8>,
    /// Response cell of each sweetword.
    pub response_cells: Vec<usize>,
    pub response_digits: Vec<u8>,
    /// Per sweetword: quotient for the first character, remainder parts for the rest.
    pub assignments: Vec<(u8, Vec<u8>)>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CopCell {
    #[serde(rename = "char")]
    pub ch: char,
    pub digit: u8,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CopPayload {
    pub cells: Vec<CopCell>,
    pub session_id: String,
}

/// Digits a response may use.
pub const RESPONSE_DIGITS: usize = 10;

/// `n · C(n + ℓ − 2, ℓ − 1)`.
pub fn cop_bruteforce_complexity(n: u64, len: u64) -> BigUint {
    assert!(n >= 1 && len >= 1);
    BigUint::from(n) * binomial(n + len - 2, len - 1)
}

/// Every way to write `total` as `parts` ordered values in `0..=cap`.
pub fn compositions(total: u32, parts: usize, cap: u32) -> Vec<Vec<u8>> {
    fn rec(total: u32, parts: usize, cap: u32, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if parts == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for v in 0..=cap.min(total) {
            prefix.push(v as u8);
            rec(total - v, parts - 1, cap, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, cap, &mut Vec::new(), &mut out);
    out
}

/// Returns the digit when both entries agree.
pub fn confirm_double_entry(first: u8, second: u8) -> Option<u8> {
    (first == second).then_some(first)
}

impl Cop {
    pub fn new(params: CopParams) -> Result<Self> {
        let p = &params;
        if p.alphabet.len() != p.cells() {
            return Err(HbatError::InvalidParameters(format!(
                "alphabet has {} characters but the plane has {} cells",
                p.alphabet.len(),
                p.cells()
            )));
        }
        if p.secret_len < 2 {
            return Err(HbatError::InvalidParameters("secret length must be at least 2".into()));
        }
        // the quotient must be a digit and the remainder must split into digits
        if p.rows > RESPONSE_DIGITS || p.columns - 1 > 9 * (p.secret_len - 1) {
            return Err(HbatError::InvalidParameters("plane too large for digit walks".into()));
        }
        let index_of: HashMap<char, usize> = p.alphabet.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        if index_of.len() != p.alphabet.len() {
            return Err(HbatError::InvalidParameters("alphabet has repeated characters".into()));
        }
        Ok(Self { params, index_of })
    }

    pub fn params(&self) -> &CopParams {
        &self.params
    }

    pub fn index(&self, c: char) -> Result<usize> {
        self.index_of.get(&c).copied().ok_or(HbatError::UnknownCharacter(c))
    }

    fn indices(&self, s: &str) -> Result<Vec<usize>> {
        s.chars().map(|c| self.index(c)).collect()
    }

    /// Forward cyclic distance in the fixed ordering.
    pub fn circular_distance(&self, from: char, to: char) -> Result<usize> {
        let n = self.params.cells();
        Ok((self.index(to)? + n - self.index(from)?) % n)
    }

    /// Cell reached by the user's walk for `secret` under `digits`.
    pub fn landing_cell(&self, secret: &str, digits: &[u8]) -> Result<usize> {
        let idx = self.indices(secret)?;
        let n = self.params.cells();
        let v = digits[idx[0]] as usize;
        let h: usize = idx[1..].iter().map(|&i| digits[i] as usize).sum();
        Ok((idx[0] + v * self.params.columns + h) % n)
    }

    /// The same walk, one step at a time: down within the column, then
    /// forward in reading order.
    pub fn walk_stepwise(&self, secret: &str, digits: &[u8]) -> Result<usize> {
        let idx = self.indices(secret)?;
        let (a, b) = (self.params.columns, self.params.rows);
        let (mut row, mut col) = (idx[0] / a, idx[0] % a);
        for _ in 0..digits[idx[0]] {
            row = (row + 1) % b;
        }
        let steps: usize = idx[1..].iter().map(|&i| digits[i] as usize).sum();
        for _ in 0..steps {
            col += 1;
            if col == a {
                col = 0;
                row = (row + 1) % b;
            }
        }
        Ok(row * a + col)
    }

    pub fn legit_response(&self, secret: &str, digits: &[u8]) -> Result<u8> {
        Ok(digits[self.landing_cell(secret, digits)?])
    }

    /// Builds digits for given response cells and digits (one per sweetword).
    pub fn challenge_with_cells<R: Rng + ?Sized>(
        &self,
        list: &SweetwordList<String>,
        response_cells: &[usize],
        response_digits: &[u8],
        rng: &mut R,
    ) -> Result<CopChallenge> {
        let k = list.k();
        if response_cells.len() != k || response_digits.len() != k {
            return Err(HbatError::InvalidParameters("one response cell and digit per sweetword".into()));
        }
        let mut sorted = response_digits.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k || sorted.iter().any(|&d| d as usize >= RESPONSE_DIGITS) {
            return Err(HbatError::InvalidParameters("response digits must be distinct digits".into()));
        }
        let words: Vec<Vec<usize>> = list.entries().iter().map(|w| self.indices(w)).collect::<Result<_>>()?;
        if response_cells.iter().any(|c| words.iter().flatten().any(|w| w == c)) {
            return Err(HbatError::InvalidParameters("response cell is a sweetword character".into()));
        }
        let n = self.params.cells();
        let a = self.params.columns;
        let mut digits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..RESPONSE_DIGITS as u8)).collect();
        for (&cell, &d) in response_cells.iter().zip(response_digits) {
            digits[cell] = d;
        }
        let mut assignments = Vec::with_capacity(k);
        for (word, &cell) in words.iter().zip(response_cells) {
            let pl = (cell + n - word[0]) % n;
            let quotient = (pl / a) as u8;
            let parts = compositions((pl % a) as u32, word.len() - 1, 9);
            let split = parts.choose(rng).expect("remainder always splits into digits").clone();
            digits[word[0]] = quotient;
            for (&c, &d) in word[1..].iter().zip(&split) {
                digits[c] = d;
            }
            assignments.push((quotient, split));
        }
        let challenge = CopChallenge {
            digits,
            response_cells: response_cells.to_vec(),
            response_digits: response_digits.to_vec(),
            assignments,
        };
        for (w, &cell) in list.entries().iter().zip(response_cells) {
            assert_eq!(self.landing_cell(w, &challenge.digits)?, cell, "walk identity broken for {w}");
        }
        Ok(challenge)
    }

    /// Index of the sweetword owning `digit`, if any.
    pub fn verify(&self, challenge: &CopChallenge, digit: u8) -> Option<usize> {
        challenge.response_digits.iter().position(|&d| d == digit).map(|i| i + 1)
    }

    /// Fraction of response digits some sweetword owns.
    pub fn covered_digit_ratio(k: usize) -> f64 {
        k as f64 / RESPONSE_DIGITS as f64
    }

    pub fn payload(&self, challenge: &CopChallenge, session_id: &str) -> CopPayload {
        let a = self.params.columns;
        let cells = self
            .params
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, &ch)| CopCell { ch, digit: challenge.digits[i], x: i % a, y: i / a })
            .collect();
        CopPayload { cells, session_id: session_id.to_string() }
    }
}

impl Scheme for Cop {
    type Sweetword = String;
    type Challenge = CopChallenge;
    type Response = u8;

    fn tag(&self) -> SchemeTag {
        SchemeTag::Cop
    }

    fn rounds(&self) -> usize {
        1
    }

    fn response_element_count(&self) -> usize {
        RESPONSE_DIGITS
    }

    fn validate_secret(&self, secret: &String) -> Result<()> {
        let invalid = |reason: String| HbatError::InvalidSecret { scheme: SchemeTag::Cop, reason };
        let idx = self.indices(secret).map_err(|e| invalid(e.to_string()))?;
        if idx.len() != self.params.secret_len {
            return Err(invalid(format!("secret must have {} characters", self.params.secret_len)));
        }
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != idx.len() {
            return Err(invalid("characters must be distinct".into()));
        }
        Ok(())
    }

    /// Sweetwords may not share any character.
    fn validate_sweetwords(&self, entries: &[String]) -> Vec<Violation> {
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
                if entries[a] == entries[b] {
                    continue;
                }
                if let Some(ch) = entries[a].chars().find(|c| entries[b].contains(*c)) {
                    out.push(Violation::SharedCharacter { a: a + 1, b: b + 1, ch });
                }
            }
        }
        if entries.len() * (self.params.secret_len + 1) > self.params.cells() {
            out.push(Violation::Malformed { entry: entries.len(), reason: "not enough free response cells".into() });
        }
        out
    }

    fn honeyword<R: Rng + ?Sized>(&self, original: &String, rng: &mut R) -> String {
        let chars: Vec<char> = original.chars().collect();
        class_preserving_substitute(&chars, &self.params.alphabet, rng).into_iter().collect()
    }

    /// Distinct characters with at most two of each letter case and one digit,
    /// so class-preserving honeywords stay character-disjoint up to k = 10.
    /// Reduced alphabets fall back to a uniform draw.
    fn random_secret<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        use crate::honeygen::CharClass::{self, *};
        const PATTERNS: [[CharClass; 4]; 3] =
            [[Upper, Upper, Lower, Digit], [Upper, Lower, Lower, Digit], [Upper, Upper, Lower, Lower]];
        let pool = |class| -> Vec<char> {
            self.params.alphabet.iter().copied().filter(|&c| CharClass::of(c) == class).collect()
        };
        if self.params.secret_len != 4 || [Upper, Lower, Digit].iter().any(|&c| pool(c).len() < RESPONSE_DIGITS) {
            return self.params.alphabet.choose_multiple(rng, self.params.secret_len).collect();
        }
        let mut pattern = *PATTERNS.choose(rng).unwrap();
        pattern.shuffle(rng);
        let mut out: Vec<char> = Vec::with_capacity(4);
        for class in pattern {
            let choices: Vec<char> = pool(class).into_iter().filter(|c| !out.contains(c)).collect();
            out.push(*choices.choose(rng).unwrap());
        }
        out.into_iter().collect()
    }

    fn generate_challenge<R: Rng + ?Sized>(&self, list: &SweetwordList<String>, rng: &mut R) -> Result<CopChallenge> {
        let k = list.k();
        let used: Vec<usize> = list.entries().iter().map(|w| self.indices(w)).collect::<Result<Vec<_>>>()?.concat();
        let free: Vec<usize> = (0..self.params.cells()).filter(|c| !used.contains(c)).collect();
        if free.len() < k {
            return Err(HbatError::InvalidSweetwordSet("not enough free response cells".into()));
        }
        let cells: Vec<usize> = free.choose_multiple(rng, k).copied().collect();
        let digits: Vec<u8> = index::sample(rng, RESPONSE_DIGITS, k).into_iter().map(|d| d as u8).collect();
        self.challenge_with_cells(list, &cells, &digits, rng)
    }

    fn designated_round(&self, _challenge: &CopChallenge) -> usize {
        1
    }

    fn accepts(&self, challenge: &CopChallenge, round: usize, sweetword: &String, response: &u8) -> bool {
        round == 1 && self.legit_response(sweetword, &challenge.digits).is_ok_and(|d| d == *response)
    }

    fn respond<R: Rng + ?Sized>(
        &self,
        challenge: &CopChallenge,
        _round: usize,
        sweetword: &String,
        _rng: &mut R,
    ) -> u8 {
        self.legit_response(sweetword, &challenge.digits).expect("sweetword on the plane")
    }

    fn response_space(&self, _challenge: &CopChallenge, _round: usize) -> Vec<u8> {
        (0..RESPONSE_DIGITS as u8).collect()
    }

    fn encode_sweetword(&self, sweetword: &String) -> String {
        sweetword.clone()
    }

    fn decode_sweetword(&self, encoded: &str) -> Result<String> {
        let s = encoded.to_string();
        self.validate_secret(&s)?;
        Ok(s)
    }

    fn encode_response(&self, response: &u8) -> String {
        response.to_string()
    }

    fn decode_response(&self, encoded: &str) -> Result<u8> {
        match encoded.parse::<u8>() {
            Ok(d) if (d as usize) < RESPONSE_DIGITS && encoded.len() == 1 => Ok(d),
            _ => Err(HbatError::Malformed(format!("response must be one digit: {encoded:?}"))),
        }
    }
}
