//! Modified S3PAS: the user's triangle scheme extended so that one randomly
//! chosen round places the k sweetword triangles on pairwise disjoint cells.
//!
//! The grid is a bijection of the alphabet onto `columns × rows` cells and stays
//! fixed for the whole session. In round `r` a sweetword's PPI is its three
//! cyclically consecutive characters starting at position `r`, and any
//! character on or inside their triangle is a valid response.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{HbatError, Result};
use crate::framework::{Scheme, SchemeTag, SweetwordList, Violation};
use crate::geometry::{GridPoint, Triangle};
use crate::honeygen::{self, class_preserving_substitute};
use crate::stats::derive_seed;

/// 26 upper, 26 lower, 10 digits and 18 symbols. `|`, `,` and whitespace are
/// left out so sweetwords embed in the password file unescaped.
pub const S3PAS_ALPHABET: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789!#$%&*+-/:;<=>?@_~";

#[derive(Debug, Clone, PartialEq)]
pub struct S3pasParams {
    pub columns: i32,
    pub rows: i32,
    pub alphabet: Vec<char>,
    /// Password length; also the number of rounds.
    pub password_len: usize,
    pub k: usize,
    pub max_iters: usize,
    /// Fresh designated rounds tried after a generation timeout.
    pub redraws: usize,
}

impl Default for S3pasParams {
    fn default() -> Self {
        Self {
            columns: 10,
            rows: 8,
            alphabet: S3PAS_ALPHABET.chars().collect(),
            password_len: 4,
            k: 6,
            max_iters: 100_000,
            redraws: 3,
        }
    }
}

impl S3pasParams {
    /// A small instance for exhaustive attack simulations.
    pub fn reduced(columns: i32, rows: i32, alphabet: &str) -> Self {
        Self { columns, rows, alphabet: alphabet.chars().collect(), ..Self::default() }
    }

    pub fn cells(&self) -> usize {
        (self.columns * self.rows) as usize
    }
}

#[derive(Debug, Clone)]
pub struct S3pas {
    params: S3pasParams,
    symbol_index: HashMap<char, usize>,
}

/// One session's grid. `designated_round` never leaves the server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct S3pasChallenge {
    /// Row-major, `columns × rows` characters.
    grid: Vec<char>,
    /// Alphabet index → cell index.
    cell_of: Vec<usize>,
    pub designated_round: usize,
    pub iterations: usize,
}

impl S3pasChallenge {
    pub fn grid(&self) -> &[char] {
        &self.grid
    }
}

/// Client view of an S3PAS challenge: the grid rows and the current round.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct S3pasPayload {
    pub grid: Vec<String>,
    pub round: usize,
    pub session_id: String,
}

/// Characters at cyclic positions `round, round+1, round+2` (1-based).
pub fn round_ppi(sweetword: &str, round: usize) -> [char; 3] {
    let chars: Vec<char> = sweetword.chars().collect();
    let n = chars.len();
    assert!(n >= 1 && round >= 1, "round_ppi needs a non-empty sweetword and round >= 1");
    let start = round - 1;
    [chars[start % n], chars[(start + 1) % n], chars[(start + 2) % n]]
}

impl S3pas {
    pub fn new(params: S3pasParams) -> Result<Self> {
        if params.alphabet.len() != params.cells() {
            return Err(HbatError::InvalidParameters(format!(
                "alphabet has {} characters but the grid has {} cells",
                params.alphabet.len(),
                params.cells()
            )));
        }
        if params.cells() > 128 {
            return Err(HbatError::InvalidParameters("grid larger than 128 cells".into()));
        }
        if params.password_len < 3 {
            return Err(HbatError::InvalidParameters("password length must be at least 3".into()));
        }
        let symbol_index: HashMap<char, usize> = params.alphabet.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        if symbol_index.len() != params.alphabet.len() {
            return Err(HbatError::InvalidParameters("alphabet has repeated characters".into()));
        }
        Ok(Self { params, symbol_index })
    }

    pub fn params(&self) -> &S3pasParams {
        &self.params
    }

    fn symbols(&self, sweetword: &str) -> Result<Vec<usize>> {
        sweetword.chars().map(|c| self.symbol_index.get(&c).copied().ok_or(HbatError::UnknownCharacter(c))).collect()
    }

    fn point(&self, cell: usize) -> GridPoint {
        GridPoint::from_index(cell, self.params.columns)
    }

    /// Builds a challenge from an explicit row-major grid (fixtures, replays).
    pub fn challenge_from_grid(&self, grid: Vec<char>, designated_round: usize) -> Result<S3pasChallenge> {
        if grid.len() != self.params.cells() {
            return Err(HbatError::InvalidParameters(format!("grid must have {} cells", self.params.cells())));
        }
        let mut cell_of = vec![usize::MAX; grid.len()];
        for (cell, c) in grid.iter().enumerate() {
            let s = *self.symbol_index.get(c).ok_or(HbatError::UnknownCharacter(*c))?;
            if cell_of[s] != usize::MAX {
                return Err(HbatError::InvalidParameters(format!("character {c:?} placed twice")));
            }
            cell_of[s] = cell;
        }
        Ok(S3pasChallenge { grid, cell_of, designated_round, iterations: 0 })
    }

    fn triangle(&self, challenge: &S3pasChallenge, ppi: [usize; 3]) -> Triangle {
        let [a, b, c] = ppi.map(|s| self.point(challenge.cell_of[s]));
        Triangle::new(a, b, c)
    }

    fn ppi_symbols(&self, symbols: &[usize], round: usize) -> [usize; 3] {
        let n = symbols.len();
        let start = round - 1;
        [symbols[start % n], symbols[(start + 1) % n], symbols[(start + 2) % n]]
    }

    /// The triangle's cells as a row-major mask.
    pub fn prs_mask(&self, challenge: &S3pasChallenge, ppi: [char; 3]) -> Result<u128> {
        let mut syms = [0usize; 3];
        for (slot, c) in syms.iter_mut().zip(ppi) {
            *slot = *self.symbol_index.get(&c).ok_or(HbatError::UnknownCharacter(c))?;
        }
        Ok(self.triangle(challenge, syms).cell_mask(self.params.columns, self.params.rows))
    }

    /// Characters inside or on the triangle spanned by the three PPI characters.
    pub fn prs(&self, challenge: &S3pasChallenge, ppi: [char; 3]) -> Result<BTreeSet<char>> {
        let mask = self.prs_mask(challenge, ppi)?;
        Ok(mask_cells(mask).map(|cell| challenge.grid[cell]).collect())
    }

    /// Resamples grid permutations until the `designated_round` triangles of
    /// all sweetwords are pairwise cell-disjoint.
    pub fn generate_for_round<R: Rng + ?Sized>(
        &self,
        list: &SweetwordList<String>,
        designated_round: usize,
        max_iters: usize,
        rng: &mut R,
    ) -> Result<S3pasChallenge> {
        let ppis: Vec<[usize; 3]> = list
            .entries()
            .iter()
            .map(|sw| self.symbols(sw).map(|s| self.ppi_symbols(&s, designated_round)))
            .collect::<Result<_>>()?;
        let (w, h) = (self.params.columns, self.params.rows);
        let n = self.params.cells();
        // Only the PPI symbols' cells decide separation, so each iteration
        // draws those alone; the rest of the permutation is filled in once.
        let mut placed: Vec<usize> = ppis.iter().flatten().copied().collect();
        placed.sort_unstable();
        placed.dedup();
        let slots: Vec<[usize; 3]> =
            ppis.iter().map(|ppi| ppi.map(|s| placed.binary_search(&s).expect("symbol placed"))).collect();
        for iteration in 1..=max_iters {
            let cells = index::sample(rng, n, placed.len());
            let mut union = 0u128;
            let separated = slots.iter().all(|slot| {
                let [a, b, c] = slot.map(|j| GridPoint::from_index(cells.index(j), w));
                let mask = Triangle::new(a, b, c).cell_mask(w, h);
                let clear = union & mask == 0;
                union |= mask;
                clear
            });
            if separated {
                let mut cell_of = vec![usize::MAX; n];
                for (slot, &s) in placed.iter().enumerate() {
                    cell_of[s] = cells.index(slot);
                }
                let mut free_cells: Vec<usize> = (0..n).filter(|c| !cells.iter().any(|x| x == *c)).collect();
                free_cells.shuffle(rng);
                let rest = (0..n).filter(|s| cell_of[*s] == usize::MAX).collect::<Vec<_>>();
                for (s, cell) in rest.into_iter().zip(free_cells) {
                    cell_of[s] = cell;
                }
                let mut grid = vec![' '; n];
                for (s, &cell) in cell_of.iter().enumerate() {
                    grid[cell] = self.params.alphabet[s];
                }
                return Ok(S3pasChallenge { grid, cell_of, designated_round, iterations: iteration });
            }
        }
        Err(HbatError::GenerationTimeout { iterations: max_iters })
    }

    /// Draws the designated round uniformly from the separable rounds and
    /// generates; on timeout redraws the round up to `params.redraws` more times.
    pub fn generate_with_limit<R: Rng + ?Sized>(
        &self,
        list: &SweetwordList<String>,
        max_iters: usize,
        rng: &mut R,
    ) -> Result<S3pasChallenge> {
        let rounds = self.separable_rounds(list.entries());
        if rounds.is_empty() {
            return Err(HbatError::InvalidSweetwordSet("no round can separate the sweetword triangles".into()));
        }
        let mut total = 0;
        for _ in 0..=self.params.redraws {
            let round = *rounds.choose(rng).unwrap();
            match self.generate_for_round(list, round, max_iters, rng) {
                Ok(mut ch) => {
                    ch.iterations += total;
                    return Ok(ch);
                }
                Err(HbatError::GenerationTimeout { iterations }) => total += iterations,
                Err(e) => return Err(e),
            }
        }
        Err(HbatError::GenerationTimeout { iterations: total })
    }

    pub fn payload(&self, challenge: &S3pasChallenge, round: usize, session_id: &str) -> S3pasPayload {
        let grid = challenge.grid.chunks(self.params.columns as usize).map(|row| row.iter().collect()).collect();
        S3pasPayload { grid, round, session_id: session_id.to_string() }
    }

    fn structural_violations(&self, entries: &[String]) -> Vec<Violation> {
        let malformed: Vec<Violation> = entries
            .iter()
            .enumerate()
            .filter_map(|(i, sw)| {
                self.validate_secret(sw).err().map(|e| Violation::Malformed { entry: i + 1, reason: e.to_string() })
            })
            .collect();
        if !malformed.is_empty() {
            return malformed;
        }
        honeygen::duplicate_violations(entries)
    }

    fn ppi_overlaps(&self, entries: &[String]) -> Vec<Violation> {
        let mut out = Vec::new();
        for round in 1..=self.params.password_len {
            let ppis: Vec<[char; 3]> = entries.iter().map(|sw| round_ppi(sw, round)).collect();
            for a in 0..ppis.len() {
                for b in a + 1..ppis.len() {
                    if ppis[a].iter().any(|c| ppis[b].contains(c)) {
                        out.push(Violation::SharedPpi { round, a: a + 1, b: b + 1 });
                    }
                }
            }
        }
        out
    }

    /// Rounds whose PPIs are pairwise character-disjoint. Only these can
    /// carry k disjoint triangles, since a triangle always covers its vertices.
    pub fn separable_rounds(&self, entries: &[String]) -> Vec<usize> {
        (1..=self.params.password_len)
            .filter(|&round| {
                let ppis: Vec<[char; 3]> = entries.iter().map(|sw| round_ppi(sw, round)).collect();
                (0..ppis.len()).all(|a| (a + 1..ppis.len()).all(|b| !ppis[a].iter().any(|c| ppis[b].contains(c))))
            })
            .collect()
    }

    /// Mean number of cells covered by the triangle of three distinct random
    /// characters on a random grid (TR).
    pub fn mean_triangle_cells<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> f64 {
        let (w, h) = (self.params.columns, self.params.rows);
        let cells: Vec<usize> = (0..self.params.cells()).collect();
        let total: u64 = (0..samples)
            .map(|_| {
                let pick: Vec<GridPoint> =
                    cells.choose_multiple(rng, 3).map(|&c| GridPoint::from_index(c, w)).collect();
                Triangle::new(pick[0], pick[1], pick[2]).cell_mask(w, h).count_ones() as u64
            })
            .sum();
        total as f64 / samples as f64
    }
}

fn mask_cells(mask: u128) -> impl Iterator<Item = usize> {
    (0..128).filter(move |i| mask & (1u128 << i) != 0)
}

impl Scheme for S3pas {
    type Sweetword = String;
    type Challenge = S3pasChallenge;
    type Response = char;

    fn tag(&self) -> SchemeTag {
        SchemeTag::S3pas
    }

    fn rounds(&self) -> usize {
        self.params.password_len
    }

    fn response_element_count(&self) -> usize {
        self.params.cells()
    }

    fn validate_secret(&self, secret: &String) -> Result<()> {
        let invalid = |reason: String| HbatError::InvalidSecret { scheme: SchemeTag::S3pas, reason };
        if secret.chars().count() != self.params.password_len {
            return Err(invalid(format!("password must have {} characters", self.params.password_len)));
        }
        self.symbols(secret).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    /// Entries must be distinct with distinct PPIs in every round, and at least
    /// one round must be separable. If none is, every overlap is reported.
    fn validate_sweetwords(&self, entries: &[String]) -> Vec<Violation> {
        let mut out = self.structural_violations(entries);
        if !out.is_empty() {
            return out;
        }
        for round in 1..=self.params.password_len {
            for a in 0..entries.len() {
                for b in a + 1..entries.len() {
                    if round_ppi(&entries[a], round) == round_ppi(&entries[b], round) {
                        out.push(Violation::IdenticalPpi { round, a: a + 1, b: b + 1 });
                    }
                }
            }
        }
        if self.separable_rounds(entries).is_empty() {
            out.extend(self.ppi_overlaps(entries));
        }
        out
    }

    /// Generated sets must be separable in every round, so the designated
    /// round can be drawn uniformly.
    fn generation_violations(&self, entries: &[String]) -> Vec<Violation> {
        let mut out = self.structural_violations(entries);
        if out.is_empty() {
            out.extend(self.ppi_overlaps(entries));
        }
        out
    }

    fn honeyword<R: Rng + ?Sized>(&self, original: &String, rng: &mut R) -> String {
        let chars: Vec<char> = original.chars().collect();
        class_preserving_substitute(&chars, &self.params.alphabet, rng).into_iter().collect()
    }

    /// Distinct characters following a class pattern with at most one digit and
    /// one symbol, which keeps class-preserving honeywords feasible up to k = 8.
    /// Falls back to a uniform draw when the alphabet lacks a class.
    fn random_secret<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        use crate::honeygen::CharClass::*;
        const PATTERNS: [[crate::honeygen::CharClass; 4]; 6] = [
            [Upper, Upper, Lower, Digit],
            [Upper, Lower, Lower, Digit],
            [Upper, Upper, Lower, Lower],
            [Upper, Lower, Lower, Symbol],
            [Upper, Upper, Digit, Symbol],
            [Lower, Lower, Upper, Symbol],
        ];
        let pool = |class| -> Vec<char> {
            self.params.alphabet.iter().copied().filter(|&c| crate::honeygen::CharClass::of(c) == class).collect()
        };
        let mut pattern = *PATTERNS.choose(rng).unwrap();
        pattern.shuffle(rng);
        if self.params.password_len != 4 || pattern.iter().any(|&c| pool(c).len() < 2) {
            return self.params.alphabet.choose_multiple(rng, self.params.password_len).collect();
        }
        let mut out: Vec<char> = Vec::with_capacity(4);
        for class in pattern {
            let choices: Vec<char> = pool(class).into_iter().filter(|c| !out.contains(c)).collect();
            out.push(*choices.choose(rng).unwrap());
        }
        out.into_iter().collect()
    }

    fn generate_challenge<R: Rng + ?Sized>(&self, list: &SweetwordList<String>, rng: &mut R) -> Result<S3pasChallenge> {
        self.generate_with_limit(list, self.params.max_iters, rng)
    }

    fn designated_round(&self, challenge: &S3pasChallenge) -> usize {
        challenge.designated_round
    }

    fn accepts(&self, challenge: &S3pasChallenge, round: usize, sweetword: &String, response: &char) -> bool {
        let (Ok(symbols), Some(&resp)) = (self.symbols(sweetword), self.symbol_index.get(response)) else {
            return false;
        };
        let tri = self.triangle(challenge, self.ppi_symbols(&symbols, round));
        tri.contains(self.point(challenge.cell_of[resp]))
    }

    fn respond<R: Rng + ?Sized>(
        &self,
        challenge: &S3pasChallenge,
        round: usize,
        sweetword: &String,
        rng: &mut R,
    ) -> char {
        let symbols = self.symbols(sweetword).expect("sweetword outside alphabet");
        let mask = self
            .triangle(challenge, self.ppi_symbols(&symbols, round))
            .cell_mask(self.params.columns, self.params.rows);
        let cells: Vec<usize> = mask_cells(mask).collect();
        challenge.grid[*cells.choose(rng).expect("a triangle always covers its vertices")]
    }

    fn response_space(&self, _challenge: &S3pasChallenge, _round: usize) -> Vec<char> {
        self.params.alphabet.clone()
    }

    fn encode_sweetword(&self, sweetword: &String) -> String {
        sweetword.clone()
    }

    fn decode_sweetword(&self, encoded: &str) -> Result<String> {
        let s = encoded.to_string();
        self.validate_secret(&s)?;
        Ok(s)
    }

    fn encode_response(&self, response: &char) -> String {
        response.to_string()
    }

    fn decode_response(&self, encoded: &str) -> Result<char> {
        let mut chars = encoded.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if self.symbol_index.contains_key(&c) => Ok(c),
            _ => Err(HbatError::Malformed(format!("not a grid character: {encoded:?}"))),
        }
    }
}

/// Mean area of a triangle whose six coordinates are drawn independently and
/// uniformly from `{1/n, ..., n/n}`, evaluated exactly.
///
/// The determinant `(f-g)(i-k) - (f-h)(i-j)` only depends on the coordinate
/// differences, so the six-fold sum collapses to a weighted sum over pairs of
/// difference pairs.
pub fn expected_triangle_area(n: u32) -> f64 {
    assert!(n >= 1);
    let n_i = n as i64;
    let span = (2 * n_i - 1) as usize;
    // counts[(d1 + n - 1) * span + (d2 + n - 1)] = #{(f, g, h) : f - g = d1, f - h = d2}
    let mut counts = vec![0u64; span * span];
    for f in 1..=n_i {
        for g in 1..=n_i {
            for h in 1..=n_i {
                let d1 = (f - g + n_i - 1) as usize;
                let d2 = (f - h + n_i - 1) as usize;
                counts[d1 * span + d2] += 1;
            }
        }
    }
    let nonzero: Vec<(i64, i64, u64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(idx, &c)| ((idx / span) as i64 - (n_i - 1), (idx % span) as i64 - (n_i - 1), c))
        .collect();
    // x pair (a, b) = (f-g, f-h); y pair (c, d) = (i-k, i-j); det = a*c - b*d
    let mut total: u128 = 0;
    for &(a, b, cx) in &nonzero {
        for &(c, d, cy) in &nonzero {
            total += (cx * cy) as u128 * (a * c - b * d).unsigned_abs() as u128;
        }
    }
    let n6 = (n as f64).powi(6);
    total as f64 / (2.0 * (n as f64).powi(2) * n6)
}

/// Probability that a uniformly wrong response lands in one honeyword's PRS in every round.
pub fn typo_false_alarm_prob(triangle_cells: f64, total_cells: f64, rounds: u32) -> f64 {
    (triangle_cells / total_cells).powi(rounds as i32)
}

/// One row of the challenge-generation benchmark, in the published column order.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GenStatsRow {
    pub k: usize,
    pub max_iterations: usize,
    pub min_iterations: usize,
    pub avg_iterations: f64,
    pub max_ms: f64,
    pub min_ms: f64,
    pub avg_ms: f64,
    #[serde(skip)]
    pub iterations: Vec<usize>,
}

pub const GEN_STATS_HEADER: &str = "value of k,no. of max iteration,no. of min iteration,avg iteration,max exec time (ms),min exec time (ms),avg exec time (ms)";

impl GenStatsRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.2},{:.3},{:.3},{:.3}",
            self.k,
            self.max_iterations,
            self.min_iterations,
            self.avg_iterations,
            self.max_ms,
            self.min_ms,
            self.avg_ms
        )
    }
}

pub fn gen_stats_csv(rows: &[GenStatsRow]) -> String {
    let mut out = String::from(GEN_STATS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

/// Runs the generation loop `runs` times per k with a fresh password, honeyword
/// set and designated round each run, recording iteration counts and wall time.
/// Run `i` of a given k is seeded from `(seed, k, i)` alone.
pub fn challenge_gen_stats(
    params: &S3pasParams,
    k_values: &[usize],
    runs: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Vec<GenStatsRow>> {
    if runs == 0 {
        return Err(HbatError::InvalidParameters("runs must be at least 1".into()));
    }
    let engine = S3pas::new(params.clone())?;
    k_values
        .iter()
        .map(|&k| {
            let mut iterations = Vec::with_capacity(runs);
            let mut times = Vec::with_capacity(runs);
            for run in 0..runs {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, k as u64), run as u64));
                let password = engine.random_secret(&mut rng);
                let generated = honeygen::generate_sweetwords(&engine, &password, k, &mut rng)?;
                let round = rng.gen_range(1..=params.password_len);
                let start = Instant::now();
                let ch = engine.generate_for_round(&generated.list, round, max_iters, &mut rng)?;
                times.push(start.elapsed().as_secs_f64() * 1e3);
                iterations.push(ch.iterations);
            }
            let fmax = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
            let fmin = |v: &[f64]| v.iter().copied().fold(f64::MAX, f64::min);
            Ok(GenStatsRow {
                k,
                max_iterations: *iterations.iter().max().unwrap(),
                min_iterations: *iterations.iter().min().unwrap(),
                avg_iterations: iterations.iter().sum::<usize>() as f64 / runs as f64,
                max_ms: fmax(&times),
                min_ms: fmin(&times),
                avg_ms: times.iter().sum::<f64>() / runs as f64,
                iterations,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{identify_sweetword, simulate_login, Transcript, Verdict};

    fn engine() -> S3pas {
        S3pas::new(S3pasParams::default()).unwrap()
    }

    fn worked_list() -> SweetwordList<String> {
        // the sixth sweetword is usually written with a script ell; the alphabet spells it 'l'
        let words = ["2KZW", "8IMN", "6ABS", "0XRJ", "3OVB", "rD1l"];
        SweetwordList::new(SchemeTag::S3pas, words.iter().map(|s| s.to_string()).collect(), 80).unwrap()
    }

    /// Row-major grid with the given characters pinned to cells, the rest filled in alphabet order.
    fn fixture_grid(pins: &[(char, i32, i32)]) -> Vec<char> {
        let mut grid = vec!['\0'; 80];
        for &(c, col, row) in pins {
            grid[(row * 10 + col) as usize] = c;
        }
        let pinned: Vec<char> = pins.iter().map(|p| p.0).collect();
        let mut rest = S3PAS_ALPHABET.chars().filter(|c| !pinned.contains(c));
        for slot in grid.iter_mut().filter(|c| **c == '\0') {
            *slot = rest.next().unwrap();
        }
        grid
    }

    #[test]
    fn alphabet_fills_the_grid() {
        let alphabet: BTreeSet<char> = S3PAS_ALPHABET.chars().collect();
        assert_eq!(alphabet.len(), 80);
        assert!(!alphabet.contains(&'|') && !alphabet.contains(&','));
    }

    #[test]
    fn cyclic_ppi() {
        assert_eq!(round_ppi("2KZW", 1), ['2', 'K', 'Z']);
        assert_eq!(round_ppi("2KZW", 2), ['K', 'Z', 'W']);
        assert_eq!(round_ppi("2KZW", 3), ['Z', 'W', '2']);
        assert_eq!(round_ppi("2KZW", 4), ['W', '2', 'K']);
        assert_eq!(round_ppi("rD1ℓ", 3), ['1', 'ℓ', 'r']);
    }

    #[test]
    fn worked_sweetwords_validate() {
        let e = engine();
        assert!(e.validate_sweetwords(worked_list().entries()).is_empty());
        // 6ABS and 3OVB share 'B', so only rounds 1 and 4 can separate
        assert_eq!(e.separable_rounds(worked_list().entries()), vec![1, 4]);
        assert!(!e.generation_violations(worked_list().entries()).is_empty());
        let third: Vec<String> = worked_list().entries().iter().map(|w| round_ppi(w, 3).iter().collect()).collect();
        assert_eq!(third, ["ZW2", "MN8", "BS6", "RJ0", "VB3", "1lr"]);
    }

    #[test]
    fn shared_prefix_violates_round_one() {
        let e = engine();
        let v = e.validate_sweetwords(&["2KZW".to_string(), "2KM5".to_string()]);
        assert!(v.contains(&Violation::SharedPpi { round: 1, a: 1, b: 2 }));
    }

    #[test]
    fn dash_inside_triangle_2kz() {
        let e = engine();
        let grid = fixture_grid(&[('2', 0, 0), ('K', 4, 0), ('Z', 0, 4), ('-', 1, 1), ('M', 9, 7)]);
        let ch = e.challenge_from_grid(grid, 1).unwrap();
        let prs = e.prs(&ch, ['2', 'K', 'Z']).unwrap();
        assert!(prs.contains(&'-'));
        assert!(!prs.contains(&'M'));
        assert_eq!(prs.len(), 15);
        assert!(e.accepts(&ch, 1, &"2KZW".to_string(), &'-'));
    }

    #[test]
    fn prs_matches_geometry_oracle() {
        let e = engine();
        let grid = fixture_grid(&[('A', 1, 6), ('B', 8, 1), ('C', 3, 3)]);
        let ch = e.challenge_from_grid(grid.clone(), 1).unwrap();
        let t = Triangle::new(GridPoint::new(1, 6), GridPoint::new(8, 1), GridPoint::new(3, 3));
        let expected: BTreeSet<char> =
            crate::geometry::cells_in_triangle(&t, 10, 8).into_iter().map(|p| grid[p.index(10)]).collect();
        assert_eq!(e.prs(&ch, ['A', 'B', 'C']).unwrap(), expected);
    }

    #[test]
    fn generated_challenge_separates_designated_round() {
        let e = engine();
        let list = worked_list();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let ch = e.generate_challenge(&list, &mut rng).unwrap();
            assert!(e.designated_round_separates(&ch, &list));
            let masks: Vec<u128> =
                list.entries().iter().map(|w| e.prs_mask(&ch, round_ppi(w, ch.designated_round)).unwrap()).collect();
            for i in 0..masks.len() {
                for j in i + 1..masks.len() {
                    assert_eq!(masks[i] & masks[j], 0);
                }
            }
            let mut sorted = ch.grid().to_vec();
            sorted.sort();
            let mut alphabet: Vec<char> = S3PAS_ALPHABET.chars().collect();
            alphabet.sort();
            assert_eq!(sorted, alphabet);
        }
    }

    #[test]
    fn k2_is_faster_than_k6() {
        let p = S3pasParams::default();
        let rows = challenge_gen_stats(&p, &[2, 6], 20, 5, 1_000_000).unwrap();
        assert!(rows[0].avg_iterations < rows[1].avg_iterations);
    }

    #[test]
    fn infeasible_k_times_out() {
        // 20 character-disjoint sweetwords use all 80 cells as vertices
        let e = engine();
        let alphabet: Vec<char> = S3PAS_ALPHABET.chars().collect();
        let words: Vec<String> = alphabet.chunks(4).map(|c| c.iter().collect()).collect();
        let list = SweetwordList::new(SchemeTag::S3pas, words, 80).unwrap();
        assert!(e.validate_sweetwords(list.entries()).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            e.generate_for_round(&list, 1, 2_000, &mut rng),
            Err(HbatError::GenerationTimeout { iterations: 2_000 })
        ));
        // honeygen refuses k = 40 outright
        let err = honeygen::generate_sweetwords(&e, &"2KZW".to_string(), 40, &mut rng).unwrap_err();
        assert!(matches!(err, HbatError::KTooLarge { .. }));
    }

    #[test]
    fn runs_zero_is_an_error() {
        assert!(challenge_gen_stats(&S3pasParams::default(), &[4], 0, 1, 10).is_err());
    }

    #[test]
    fn legit_and_honeyword_sessions() {
        let e = engine();
        let list = worked_list();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let ch = e.generate_challenge(&list, &mut rng).unwrap();
            for (idx, sw) in list.iter_indexed() {
                let tr = simulate_login(&e, &ch, sw, &mut rng);
                assert_eq!(identify_sweetword(&e, &ch, &list, &tr).unwrap(), Verdict::Identified(idx));
            }
        }
    }

    #[test]
    fn response_outside_every_triangle_rejects() {
        let e = engine();
        let list = worked_list();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = e.generate_challenge(&list, &mut rng).unwrap();
        let round = ch.designated_round;
        let outside = S3PAS_ALPHABET
            .chars()
            .find(|c| list.entries().iter().all(|w| !e.accepts(&ch, round, w, c)))
            .expect("six small triangles cannot cover 80 cells");
        let mut tr = simulate_login(&e, &ch, &list.entries()[0], &mut rng);
        tr.responses[round - 1] = outside;
        assert_eq!(identify_sweetword(&e, &ch, &list, &tr).unwrap(), Verdict::Reject);
        let short = Transcript::new(SchemeTag::S3pas, vec!['A']);
        assert!(identify_sweetword(&e, &ch, &list, &short).is_err());
    }

    #[test]
    fn expected_area_small_cases() {
        assert_eq!(expected_triangle_area(1), 0.0);
        for n in 2..=4i64 {
            let mut sum = 0i64;
            for f in 1..=n {
                for g in 1..=n {
                    for h in 1..=n {
                        for i in 1..=n {
                            for j in 1..=n {
                                for k in 1..=n {
                                    sum += ((f - g) * (i - k) - (f - h) * (i - j)).abs();
                                }
                            }
                        }
                    }
                }
            }
            let direct = sum as f64 / (2.0 * (n * n) as f64 * (n as f64).powi(6));
            assert!((expected_triangle_area(n as u32) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn typo_probability() {
        let p = typo_false_alarm_prob(3.0, 80.0, 4);
        assert!((p - 1.9775390625e-6).abs() < 1e-15);
        assert_eq!(typo_false_alarm_prob(80.0, 80.0, 4), 1.0);
        assert!((typo_false_alarm_prob(8.0, 80.0, 2) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn payload_has_eight_rows_of_ten() {
        let e = engine();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = e.generate_challenge(&worked_list(), &mut rng).unwrap();
        let p = e.payload(&ch, 1, "abc");
        assert_eq!(p.grid.len(), 8);
        assert!(p.grid.iter().all(|r| r.chars().count() == 10));
    }
}
