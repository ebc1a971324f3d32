//! Modified Convex-Hull-Click. A secret is a set of K pass icons out of N. Each
//! round shows M icons on a grid, including Kc of every sweetword's icons, and
//! the user clicks any displayed icon inside or on the convex hull of their
//! displayed pass icons. One round is generated so that no displayed icon lies
//! in two sweetword hulls.

use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::Serialize;

use crate::error::{HbatError, Result};
use crate::framework::{Scheme, SchemeTag, SweetwordList, Violation};
use crate::geometry::{ConvexHull, GridPoint};
use crate::honeygen;

pub type IconId = u16;

#[derive(Debug, Clone, PartialEq)]
pub struct ChcParams {
    /// Total icons (N).
    pub icons: usize,
    /// Icons displayed per round (M).
    pub displayed: usize,
    /// Pass icons per secret (K).
    pub pass_icons: usize,
    pub columns: i32,
    pub rows: i32,
    pub rounds: usize,
    pub k: usize,
    pub max_iters: usize,
}

impl Default for ChcParams {
    fn default() -> Self {
        Self { icons: 112, displayed: 70, pass_icons: 5, columns: 14, rows: 8, rounds: 4, k: 3, max_iters: 100_000 }
    }
}

impl ChcParams {
    pub fn cells(&self) -> usize {
        (self.columns * self.rows) as usize
    }
}

/// One round's placement of displayed icons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IconPlacement {
    /// Pass icons shown per sweetword this round.
    pub kc: usize,
    /// `(icon, cell)` for every displayed icon.
    pub icons: Vec<(IconId, GridPoint)>,
    position: Vec<Option<GridPoint>>,
}

impl IconPlacement {
    pub fn new(kc: usize, icons: Vec<(IconId, GridPoint)>, total_icons: usize) -> Result<Self> {
        let mut position = vec![None; total_icons];
        let mut cells = BTreeSet::new();
        for &(id, p) in &icons {
            let slot = position
                .get_mut(id as usize)
                .ok_or_else(|| HbatError::InvalidParameters(format!("icon {id} out of range")))?;
            if slot.is_some() || !cells.insert(p) {
                return Err(HbatError::InvalidParameters(format!("icon {id} or cell {p:?} placed twice")));
            }
            *slot = Some(p);
        }
        Ok(Self { kc, icons, position })
    }

    pub fn position(&self, icon: IconId) -> Option<GridPoint> {
        self.position.get(icon as usize).copied().flatten()
    }

    /// Hull of the displayed members of `set`, if any are displayed.
    pub fn hull(&self, set: &[IconId]) -> Option<ConvexHull> {
        let pts: Vec<GridPoint> = set.iter().filter_map(|&i| self.position(i)).collect();
        ConvexHull::from_points(&pts)
    }

    /// Displayed icons inside or on the hull of `set`'s displayed icons.
    pub fn icons_in_hull(&self, set: &[IconId]) -> Vec<IconId> {
        match self.hull(set) {
            Some(h) => self.icons.iter().filter(|(_, p)| h.contains(*p)).map(|(i, _)| *i).collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChcChallenge {
    pub rounds: Vec<IconPlacement>,
    pub designated_round: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct IconView {
    pub id: IconId,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ChcPayload {
    pub icons: Vec<IconView>,
    pub session_id: String,
    pub round: usize,
}

#[derive(Debug, Clone)]
pub struct Chc {
    params: ChcParams,
}

/// `true` iff the response icon is displayed and lies inside or on the hull
/// of `set`'s displayed icons.
pub fn hull_response_valid(placement: &IconPlacement, set: &[IconId], response: IconId) -> bool {
    match (placement.position(response), placement.hull(set)) {
        (Some(p), Some(h)) => h.contains(p),
        _ => false,
    }
}

/// Expected number of appearances of one icon in `r` basic CHC challenges.
pub fn expected_appearances(n: usize, m: usize, k: usize, r: usize, is_pass: bool) -> Result<f64> {
    if k <= 2 {
        return Err(HbatError::InvalidParameters("formula undefined for K <= 2".into()));
    }
    if n <= k {
        return Err(HbatError::InvalidParameters("need N > K".into()));
    }
    let (n, m, k, r) = (n as f64, m as f64, k as f64, r as f64);
    let tri = k * (k + 1.0) / 2.0;
    Ok(if is_pass { r / (k * (k - 2.0)) * (tri - 3.0) } else { r / (k - 2.0) / (n - k) * (m * (k - 2.0) - tri + 3.0) })
}

impl Chc {
    pub fn new(params: ChcParams) -> Result<Self> {
        let p = &params;
        if p.pass_icons < 3 || p.pass_icons > p.displayed || p.displayed > p.icons {
            return Err(HbatError::InvalidParameters("need 3 <= K <= M <= N".into()));
        }
        if p.displayed > p.cells() || p.cells() > 128 {
            return Err(HbatError::InvalidParameters("grid must hold M icons and at most 128 cells".into()));
        }
        if p.icons > IconId::MAX as usize {
            return Err(HbatError::InvalidParameters("too many icons".into()));
        }
        if p.rounds == 0 {
            return Err(HbatError::InvalidParameters("at least one round".into()));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &ChcParams {
        &self.params
    }

    fn check_sets(&self, sets: &[Vec<IconId>]) -> Result<()> {
        if sets.len() * self.params.pass_icons > self.params.displayed {
            return Err(HbatError::InvalidParameters(format!(
                "{} sweetwords of {} icons cannot all be displayed among {}",
                sets.len(),
                self.params.pass_icons,
                self.params.displayed
            )));
        }
        let v = self.validate_sweetwords(sets);
        if !v.is_empty() {
            return Err(HbatError::InvalidSweetwordSet(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")));
        }
        Ok(())
    }

    /// Picks Kc, the displayed pass icons of each set and the fillers (drawn
    /// from icons outside every set). Positions are assigned separately.
    fn pick_icons<R: Rng + ?Sized>(&self, sets: &[Vec<IconId>], rng: &mut R) -> (usize, Vec<IconId>) {
        let p = &self.params;
        let kc = rng.gen_range(3..=p.pass_icons);
        let mut shown: Vec<IconId> = Vec::with_capacity(p.displayed);
        for set in sets {
            shown.extend(set.choose_multiple(rng, kc).copied());
        }
        let sweet: BTreeSet<IconId> = sets.iter().flatten().copied().collect();
        let others: Vec<IconId> = (0..p.icons as IconId).filter(|i| !sweet.contains(i)).collect();
        let fillers = (p.displayed - shown.len()).min(others.len());
        shown.extend(others.choose_multiple(rng, fillers).copied());
        (kc, shown)
    }

    fn place(&self, kc: usize, shown: &[IconId], cells: &[usize]) -> IconPlacement {
        let icons =
            shown.iter().zip(cells).map(|(&i, &c)| (i, GridPoint::from_index(c, self.params.columns))).collect();
        IconPlacement::new(kc, icons, self.params.icons).expect("distinct icons on distinct cells")
    }

    /// One round. A designated round resamples positions until every displayed
    /// icon lies in at most one sweetword hull.
    pub fn generate_round<R: Rng + ?Sized>(
        &self,
        sets: &[Vec<IconId>],
        designated: bool,
        max_iters: usize,
        rng: &mut R,
    ) -> Result<(IconPlacement, usize)> {
        self.check_sets(sets)?;
        let (kc, shown) = self.pick_icons(sets, rng);
        let n_cells = self.params.cells();
        if !designated {
            let cells = index::sample(rng, n_cells, shown.len()).into_vec();
            return Ok((self.place(kc, &shown, &cells), 1));
        }
        let w = self.params.columns;
        let all_cells: Vec<GridPoint> = (0..n_cells).map(|c| GridPoint::from_index(c, w)).collect();
        for iteration in 1..=max_iters {
            let cells = index::sample(rng, n_cells, shown.len()).into_vec();
            let occupied: u128 = cells.iter().fold(0, |m, &c| m | 1u128 << c);
            // the first k*kc entries of `shown` are the sweetwords' pass icons, kc each
            let mut union = 0u128;
            let separated = (0..sets.len()).all(|s| {
                let pts: Vec<GridPoint> = cells[s * kc..(s + 1) * kc].iter().map(|&c| all_cells[c]).collect();
                let hull = ConvexHull::from_points(&pts).expect("kc >= 3");
                let mask = hull_mask(&hull, &all_cells) & occupied;
                let clear = union & mask == 0;
                union |= mask;
                clear
            });
            if separated {
                return Ok((self.place(kc, &shown, &cells), iteration));
            }
        }
        Err(HbatError::GenerationTimeout { iterations: max_iters })
    }

    pub fn payload(&self, challenge: &ChcChallenge, round: usize, session_id: &str) -> ChcPayload {
        let icons =
            challenge.rounds[round - 1].icons.iter().map(|&(id, p)| IconView { id, x: p.col, y: p.row }).collect();
        ChcPayload { icons, session_id: session_id.to_string(), round }
    }

    /// Appearance counts per icon over `r` non-designated rounds for the given
    /// sweet sets; with a single set this is basic CHC.
    pub fn probabilistic_attack_sim<R: Rng + ?Sized>(
        &self,
        sets: &[Vec<IconId>],
        r: usize,
        rng: &mut R,
    ) -> Result<Vec<u32>> {
        if r == 0 {
            return Err(HbatError::InvalidParameters("r must be at least 1".into()));
        }
        self.check_sets(sets)?;
        let mut counts = vec![0u32; self.params.icons];
        for _ in 0..r {
            let (_, shown) = self.pick_icons(sets, rng);
            for i in shown {
                counts[i as usize] += 1;
            }
        }
        Ok(counts)
    }
}

fn hull_mask(hull: &ConvexHull, cells: &[GridPoint]) -> u128 {
    cells.iter().enumerate().filter(|(_, &p)| hull.contains(p)).fold(0, |m, (i, _)| m | 1u128 << i)
}

impl Scheme for Chc {
    type Sweetword = Vec<IconId>;
    type Challenge = ChcChallenge;
    type Response = IconId;

    fn tag(&self) -> SchemeTag {
        SchemeTag::Chc
    }

    fn rounds(&self) -> usize {
        self.params.rounds
    }

    /// Disjoint icon sets that must all fit on one screen.
    fn response_element_count(&self) -> usize {
        (self.params.displayed / self.params.pass_icons).min(self.params.icons / self.params.pass_icons)
    }

    fn validate_secret(&self, secret: &Vec<IconId>) -> Result<()> {
        let invalid = |reason: String| HbatError::InvalidSecret { scheme: SchemeTag::Chc, reason };
        if secret.len() != self.params.pass_icons {
            return Err(invalid(format!("expected {} pass icons", self.params.pass_icons)));
        }
        if secret.iter().any(|&i| i as usize >= self.params.icons) {
            return Err(invalid("icon id out of range".into()));
        }
        if !secret.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("icons must be distinct and sorted".into()));
        }
        Ok(())
    }

    fn validate_sweetwords(&self, entries: &[Vec<IconId>]) -> Vec<Violation> {
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
                if entries[a] != entries[b] && entries[a].iter().any(|i| entries[b].contains(i)) {
                    out.push(Violation::OverlappingIcons { a: a + 1, b: b + 1 });
                }
            }
        }
        out
    }

    fn honeyword<R: Rng + ?Sized>(&self, _original: &Vec<IconId>, rng: &mut R) -> Vec<IconId> {
        self.random_secret(rng)
    }

    fn random_secret<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<IconId> {
        let mut s: Vec<IconId> =
            index::sample(rng, self.params.icons, self.params.pass_icons).into_iter().map(|i| i as IconId).collect();
        s.sort_unstable();
        s
    }

    fn generate_challenge<R: Rng + ?Sized>(
        &self,
        list: &SweetwordList<Vec<IconId>>,
        rng: &mut R,
    ) -> Result<ChcChallenge> {
        let designated_round = rng.gen_range(1..=self.params.rounds);
        let mut rounds = Vec::with_capacity(self.params.rounds);
        let mut iterations = 0;
        for round in 1..=self.params.rounds {
            let (placement, iters) =
                self.generate_round(list.entries(), round == designated_round, self.params.max_iters, rng)?;
            if round == designated_round {
                iterations = iters;
            }
            rounds.push(placement);
        }
        Ok(ChcChallenge { rounds, designated_round, iterations })
    }

    fn designated_round(&self, challenge: &ChcChallenge) -> usize {
        challenge.designated_round
    }

    fn accepts(&self, challenge: &ChcChallenge, round: usize, sweetword: &Vec<IconId>, response: &IconId) -> bool {
        challenge.rounds.get(round - 1).is_some_and(|pl| hull_response_valid(pl, sweetword, *response))
    }

    fn respond<R: Rng + ?Sized>(
        &self,
        challenge: &ChcChallenge,
        round: usize,
        sweetword: &Vec<IconId>,
        rng: &mut R,
    ) -> IconId {
        let inside = challenge.rounds[round - 1].icons_in_hull(sweetword);
        *inside.choose(rng).expect("every sweetword shows kc >= 3 icons")
    }

    fn response_space(&self, challenge: &ChcChallenge, round: usize) -> Vec<IconId> {
        challenge.rounds[round - 1].icons.iter().map(|(i, _)| *i).collect()
    }

    /// Icon ids joined by `-`, e.g. `3-17-42-88-101`.
    fn encode_sweetword(&self, sweetword: &Vec<IconId>) -> String {
        sweetword.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("-")
    }

    fn decode_sweetword(&self, encoded: &str) -> Result<Vec<IconId>> {
        let ids = encoded
            .split('-')
            .map(|s| s.parse::<IconId>().map_err(|_| HbatError::Malformed(format!("bad icon id {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        self.validate_secret(&ids)?;
        Ok(ids)
    }

    fn encode_response(&self, response: &IconId) -> String {
        response.to_string()
    }

    fn decode_response(&self, encoded: &str) -> Result<IconId> {
        match encoded.parse::<IconId>() {
            Ok(i) if (i as usize) < self.params.icons => Ok(i),
            _ => Err(HbatError::Malformed(format!("not an icon id: {encoded:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{identify_sweetword, simulate_login, Verdict};
    use crate::honeygen::generate_sweetwords;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn engine() -> Chc {
        Chc::new(ChcParams::default()).unwrap()
    }

    #[test]
    fn expectation_formula_values() {
        let pass = expected_appearances(112, 70, 5, 100, true).unwrap();
        let non = expected_appearances(112, 70, 5, 100, false).unwrap();
        assert!((pass - 80.0).abs() < 1e-9);
        assert!((non - 61.682_242_990_654_2).abs() < 1e-9);
        assert_eq!(expected_appearances(112, 70, 5, 0, true).unwrap(), 0.0);
        assert!(expected_appearances(112, 70, 2, 100, true).is_err());
    }

    #[test]
    fn vertex_response_is_valid_far_icon_is_not() {
        let icons = vec![
            (0, GridPoint::new(0, 0)),
            (1, GridPoint::new(4, 0)),
            (2, GridPoint::new(0, 4)),
            (3, GridPoint::new(1, 1)),
            (4, GridPoint::new(10, 7)),
        ];
        let pl = IconPlacement::new(3, icons, 112).unwrap();
        let set = [0, 1, 2, 50, 60];
        assert!(hull_response_valid(&pl, &set, 1));
        assert!(hull_response_valid(&pl, &set, 3));
        assert!(!hull_response_valid(&pl, &set, 4));
        // not displayed
        assert!(!hull_response_valid(&pl, &set, 77));
    }

    #[test]
    fn designated_round_hulls_are_disjoint() {
        let e = engine();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let pw = e.random_secret(&mut rng);
            let g = generate_sweetwords(&e, &pw, 3, &mut rng).unwrap();
            let ch = e.generate_challenge(&g.list, &mut rng).unwrap();
            assert!(e.designated_round_separates(&ch, &g.list));
            for pl in &ch.rounds {
                assert_eq!(pl.icons.len(), 70);
                for set in g.list.entries() {
                    assert_eq!(set.iter().filter(|&&i| pl.position(i).is_some()).count(), pl.kc);
                }
            }
        }
    }

    #[test]
    fn legit_and_honeyword_logins_identified() {
        let e = engine();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pw = e.random_secret(&mut rng);
        let g = generate_sweetwords(&e, &pw, 3, &mut rng).unwrap();
        let ch = e.generate_challenge(&g.list, &mut rng).unwrap();
        for (idx, sw) in g.list.iter_indexed() {
            let tr = simulate_login(&e, &ch, sw, &mut rng);
            assert_eq!(identify_sweetword(&e, &ch, &g.list, &tr).unwrap(), Verdict::Identified(idx));
        }
        assert_eq!(g.list.get(g.index), Some(&pw));
    }

    #[test]
    fn too_many_sets_for_screen() {
        let e = Chc::new(ChcParams { displayed: 14, ..ChcParams::default() }).unwrap();
        let sets: Vec<Vec<IconId>> = (0..3).map(|s| (s * 5..s * 5 + 5).collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(e.generate_round(&sets, true, 10, &mut rng), Err(HbatError::InvalidParameters(_))));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let e = engine();
        let v = e.validate_sweetwords(&[vec![1, 2, 3, 4, 5], vec![5, 6, 7, 8, 9]]);
        assert_eq!(v, vec![Violation::OverlappingIcons { a: 1, b: 2 }]);
    }

    #[test]
    fn single_round_counts_are_binary() {
        let e = engine();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let counts = e.probabilistic_attack_sim(&[vec![0, 1, 2, 3, 4]], 1, &mut rng).unwrap();
        assert!(counts.iter().all(|&c| c <= 1));
        assert_eq!(counts.iter().sum::<u32>(), 70);
    }

    #[test]
    fn encoding_round_trip() {
        let e = engine();
        let s = vec![3, 17, 42, 88, 101];
        assert_eq!(e.encode_sweetword(&s), "3-17-42-88-101");
        assert_eq!(e.decode_sweetword("3-17-42-88-101").unwrap(), s);
        assert!(e.decode_sweetword("3-17-42-88-200").is_err());
        assert!(e.decode_sweetword("17-3-42-88-101").is_err());
    }
}
