//! Adversary simulations. Every estimator runs independent trials seeded from
//! `(seed, trial)`, so results do not depend on the worker count.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{HbatError, Result};
use crate::framework::{identify_sweetword, Scheme, SweetIndex, SweetwordList, Transcript, Verdict};
use crate::honeygen::{generate_sweetwords, Generated};
use crate::s3pas::{round_ppi, S3pas, S3pasChallenge};
use crate::stats::{count_successes, map_trials, Estimate};

/// A fresh account and session: password, sweetword list and challenge.
pub struct Setup<S: Scheme> {
    pub password: S::Sweetword,
    pub generated: Generated<S::Sweetword>,
    pub challenge: S::Challenge,
}

pub fn setup<S: Scheme, R: Rng + ?Sized>(scheme: &S, k: usize, rng: &mut R) -> Result<Setup<S>> {
    let password = scheme.random_secret(rng);
    let generated = generate_sweetwords(scheme, &password, k, rng)?;
    let challenge = scheme.generate_challenge(&generated.list, rng)?;
    Ok(Setup { password, generated, challenge })
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(HbatError::InvalidParameters("trials must be at least 1".into()));
    }
    Ok(())
}

/// One recorded session: the challenge and the response of every round.
pub type Observation<S> = (<S as Scheme>::Challenge, Vec<<S as Scheme>::Response>);

/// Candidate-set size after each observed session. `trace[0]` is the full space.
pub fn bruteforce_observer<S: Scheme>(
    scheme: &S,
    candidates: Vec<S::Sweetword>,
    observations: &[Observation<S>],
) -> (Vec<usize>, Vec<S::Sweetword>) {
    let mut alive = candidates;
    let mut trace = vec![alive.len()];
    for (challenge, responses) in observations {
        alive.retain(|c| responses.iter().enumerate().all(|(r, resp)| scheme.accepts(challenge, r + 1, c, resp)));
        trace.push(alive.len());
    }
    (trace, alive)
}

/// Every string of `len` characters over `alphabet`, repeats allowed.
pub fn all_strings(alphabet: &[char], len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..len {
        out = out.iter().flat_map(|p| alphabet.iter().map(move |c| format!("{p}{c}"))).collect();
    }
    out
}

/// Every string of `len` distinct characters over `alphabet`.
pub fn all_distinct_strings(alphabet: &[char], len: usize) -> Vec<String> {
    all_strings(alphabet, len).into_iter().filter(|s| s.chars().collect::<BTreeSet<_>>().len() == len).collect()
}

/// Records `sessions` legitimate logins of one account.
pub fn observe_sessions<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    list: &SweetwordList<S::Sweetword>,
    password: &S::Sweetword,
    sessions: usize,
    rng: &mut R,
) -> Result<Vec<Observation<S>>> {
    (0..sessions)
        .map(|_| {
            let ch = scheme.generate_challenge(list, rng)?;
            let resp = (1..=scheme.rounds()).map(|r| scheme.respond(&ch, r, password, rng)).collect();
            Ok((ch, resp))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomClickReport {
    /// A random response is in the password's PRS.
    pub password_only: Estimate,
    /// A random response is in some sweetword's PRS.
    pub any_sweetword: Estimate,
}

/// Per-round acceptance of a uniformly random response element.
pub fn random_click_attack<S: Scheme>(
    scheme: &S,
    k: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<RandomClickReport> {
    require_trials(trials)?;
    setup(scheme, k, &mut crate::stats::trial_rng(seed, u64::MAX))?;
    let outcome = |rng: &mut rand_chacha::ChaCha8Rng| -> (bool, bool) {
        let s = setup(scheme, k, rng).expect("setup succeeded for this k");
        let round = rng.gen_range(1..=scheme.rounds());
        let resp = scheme.response_space(&s.challenge, round).choose(rng).cloned().expect("non-empty response space");
        let own = scheme.accepts(&s.challenge, round, &s.password, &resp);
        let any = s.generated.list.entries().iter().any(|sw| scheme.accepts(&s.challenge, round, sw, &resp));
        (own, any)
    };
    let results = map_trials(trials, seed, workers, |rng, _| outcome(rng));
    let own = results.iter().filter(|r| r.0).count() as u64;
    let any = results.iter().filter(|r| r.1).count() as u64;
    Ok(RandomClickReport { password_only: Estimate::new(own, trials), any_sweetword: Estimate::new(any, trials) })
}

/// Where wrong responses are injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WrongResponseModel {
    /// Every round gets a uniformly drawn response outside the password's PRS.
    EveryRound,
    /// One uniformly chosen round gets a wrong response; the rest are correct.
    OneRound,
}

/// A response outside the password's PRS, or a correct one when none exists.
fn wrong_response<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    challenge: &S::Challenge,
    round: usize,
    password: &S::Sweetword,
    rng: &mut R,
) -> S::Response {
    let wrong: Vec<S::Response> = scheme
        .response_space(challenge, round)
        .into_iter()
        .filter(|r| !scheme.accepts(challenge, round, password, r))
        .collect();
    match wrong.choose(rng) {
        Some(r) => r.clone(),
        None => scheme.respond(challenge, round, password, rng),
    }
}

/// `true` when the transcript names a honeyword, i.e. the honeyChecker would alarm.
fn raises_alarm<S: Scheme>(scheme: &S, s: &Setup<S>, responses: Vec<S::Response>) -> bool {
    let tr = Transcript::new(scheme.tag(), responses);
    matches!(
        identify_sweetword(scheme, &s.challenge, &s.generated.list, &tr),
        Ok(Verdict::Identified(j)) if j != s.generated.index
    )
}

fn wrong_transcript_alarm<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    s: &Setup<S>,
    model: WrongResponseModel,
    rng: &mut R,
) -> bool {
    let bad_round = rng.gen_range(1..=scheme.rounds());
    let responses = (1..=scheme.rounds())
        .map(|r| match model {
            WrongResponseModel::EveryRound => wrong_response(scheme, &s.challenge, r, &s.password, rng),
            WrongResponseModel::OneRound if r == bad_round => wrong_response(scheme, &s.challenge, r, &s.password, rng),
            WrongResponseModel::OneRound => scheme.respond(&s.challenge, r, &s.password, rng),
        })
        .collect();
    raises_alarm(scheme, s, responses)
}

/// Alarm probability when an attacker who knows the password submits wrong
/// responses on purpose, hoping to hit a honeyword.
pub fn dos_attack_sim<S: Scheme>(
    scheme: &S,
    k: usize,
    model: WrongResponseModel,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Estimate> {
    require_trials(trials)?;
    setup(scheme, k, &mut crate::stats::trial_rng(seed, u64::MAX))?;
    let hits = count_successes(trials, seed, workers, |rng, _| {
        let s = setup(scheme, k, rng).expect("setup succeeded for this k");
        wrong_transcript_alarm(scheme, &s, model, rng)
    });
    Ok(Estimate::new(hits, trials))
}

/// Alarm probability for a single-response scheme: honeyword elements over wrong elements.
pub fn dos_analytic(k: usize, response_elements: usize) -> f64 {
    (k - 1) as f64 / (response_elements - 1) as f64
}

/// False-alarm rate of a legitimate user whose typos follow `model`.
pub fn typo_false_alarm_sim<S: Scheme>(
    scheme: &S,
    k: usize,
    model: WrongResponseModel,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Estimate> {
    // same mechanics as the DoS attacker; only the intent differs
    dos_attack_sim(scheme, k, model, trials, seed, workers)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S3pasTypoCheck {
    /// Fraction of sessions in which uniform responses hit one honeyword's PRS in every round.
    pub simulated: Estimate,
    /// Mean over the same sessions of the product of per-round `TR/T`.
    pub predicted: f64,
    /// `(mean TR / T)^rounds`.
    pub naive: f64,
}

/// Checks the product form of the typo formula on a (typically reduced) grid:
/// each round draws a response uniformly over all `T` cells, and a session
/// counts when every response falls in the first honeyword's PRS.
pub fn s3pas_typo_check(scheme: &S3pas, k: usize, trials: u64, seed: u64, workers: usize) -> Result<S3pasTypoCheck> {
    require_trials(trials)?;
    setup(scheme, k, &mut crate::stats::trial_rng(seed, u64::MAX))?;
    let t = scheme.params().cells() as f64;
    let rounds = scheme.rounds();
    // per trial: (all rounds hit, per-round TR/T of the honeyword)
    let results = map_trials(trials, seed, workers, |rng, _| {
        let s = setup(scheme, k, rng).expect("setup succeeded for this k");
        let hw = s.generated.list.entries().iter().find(|w| **w != s.password).expect("k >= 2").clone();
        let ratios: Vec<f64> = (1..=rounds)
            .map(|r| scheme.prs_mask(&s.challenge, round_ppi(&hw, r)).expect("valid PPI").count_ones() as f64 / t)
            .collect();
        let hit = (1..=rounds).all(|r| {
            let resp = *scheme.params().alphabet.choose(rng).unwrap();
            scheme.accepts(&s.challenge, r, &hw, &resp)
        });
        (hit, ratios)
    });
    let hits = results.iter().filter(|(h, _)| *h).count() as u64;
    let n = trials as f64;
    let predicted = results.iter().map(|(_, r)| r.iter().product::<f64>()).sum::<f64>() / n;
    let mean_ratio = results.iter().flat_map(|(_, r)| r.iter()).sum::<f64>() / (n * rounds as f64);
    Ok(S3pasTypoCheck { simulated: Estimate::new(hits, trials), predicted, naive: mean_ratio.powi(rounds as i32) })
}

/// Outcome counts of a login suite. A suite passes when both counters are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub trials: u64,
    /// Logins whose verdict or honeyChecker outcome was wrong.
    pub failures: u64,
    /// Challenges whose designated round let one response fit two sweetwords.
    pub overlapping_designated_rounds: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.overlapping_designated_rounds == 0
    }
}

fn login_suite<S: Scheme>(
    scheme: &S,
    k: usize,
    trials: u64,
    seed: u64,
    workers: usize,
    honeyword: bool,
) -> Result<SuiteReport> {
    require_trials(trials)?;
    setup(scheme, k, &mut crate::stats::trial_rng(seed, u64::MAX))?;
    let results = map_trials(trials, seed, workers, |rng, _| {
        let s = setup(scheme, k, rng).expect("setup succeeded for this k");
        let separated = scheme.designated_round_separates(&s.challenge, &s.generated.list);
        let t = s.generated.index;
        let target = if honeyword {
            let others: Vec<usize> = (1..=k).filter(|&j| j != t.0).collect();
            SweetIndex(*others.choose(rng).expect("k >= 2"))
        } else {
            t
        };
        let sweetword = s.generated.list.get(target).expect("index in range");
        let tr = crate::framework::simulate_login(scheme, &s.challenge, sweetword, rng);
        let checker = crate::honeychecker::HoneyChecker::new();
        checker.set("u", t);
        let expected =
            if honeyword { crate::honeychecker::CheckOutcome::Alarm } else { crate::honeychecker::CheckOutcome::Ok };
        let ok = match identify_sweetword(scheme, &s.challenge, &s.generated.list, &tr) {
            Ok(Verdict::Identified(j)) => j == target && checker.check("u", j).ok() == Some(expected),
            _ => false,
        };
        (ok, separated)
    });
    Ok(SuiteReport {
        trials,
        failures: results.iter().filter(|r| !r.0).count() as u64,
        overlapping_designated_rounds: results.iter().filter(|r| !r.1).count() as u64,
    })
}

/// Legitimate logins: each must be identified as index `t` and pass the honeyChecker.
pub fn soundness_suite<S: Scheme>(scheme: &S, k: usize, trials: u64, seed: u64, workers: usize) -> Result<SuiteReport> {
    login_suite(scheme, k, trials, seed, workers, false)
}

/// Logins with a uniformly chosen honeyword: each must be identified as that
/// honeyword and raise an alarm.
pub fn detection_suite<S: Scheme>(scheme: &S, k: usize, trials: u64, seed: u64, workers: usize) -> Result<SuiteReport> {
    login_suite(scheme, k, trials, seed, workers, true)
}

/// Candidates common to two independently generated lists.
pub fn msv_intersection<T: Clone + PartialEq>(a: &SweetwordList<T>, b: &SweetwordList<T>) -> Vec<T> {
    a.entries().iter().filter(|x| b.entries().contains(x)).cloned().collect()
}

/// Fraction of trials in which two independent lists for one password
/// intersect to exactly that password.
pub fn msv_sim<S: Scheme>(scheme: &S, k: usize, trials: u64, seed: u64, workers: usize) -> Result<Estimate> {
    require_trials(trials)?;
    let hits = count_successes(trials, seed, workers, |rng, _| {
        let pw = scheme.random_secret(rng);
        let a = generate_sweetwords(scheme, &pw, k, rng).expect("generation succeeded");
        let b = generate_sweetwords(scheme, &pw, k, rng).expect("generation succeeded");
        msv_intersection(&a.list, &b.list) == vec![pw]
    });
    Ok(Estimate::new(hits, trials))
}

/// How an attacker holding many sweetword lists picks the password.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distinguisher {
    RandomPick,
    /// Picks the entry whose encoded characters are most frequent across all lists.
    CharacterFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub distinguisher: Distinguisher,
    pub success: Estimate,
    pub baseline: f64,
    pub advantage: f64,
}

pub fn flatness_estimate<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    k: usize,
    accounts: usize,
    distinguisher: Distinguisher,
    rng: &mut R,
) -> Result<FlatnessReport> {
    if accounts < 100 {
        return Err(HbatError::InvalidParameters("flatness needs at least 100 accounts".into()));
    }
    if k < 2 {
        return Err(HbatError::InvalidParameters("k must be at least 2".into()));
    }
    let mut lists: Vec<(Vec<String>, SweetIndex)> = Vec::with_capacity(accounts);
    for _ in 0..accounts {
        let pw = scheme.random_secret(rng);
        let g = generate_sweetwords(scheme, &pw, k, rng)?;
        lists.push((g.list.entries().iter().map(|w| scheme.encode_sweetword(w)).collect(), g.index));
    }
    let mut freq: HashMap<char, u64> = HashMap::new();
    for c in lists.iter().flat_map(|(l, _)| l.iter()).flat_map(|w| w.chars()) {
        *freq.entry(c).or_default() += 1;
    }
    let score = |w: &String| -> u64 { w.chars().map(|c| freq[&c]).sum() };
    let mut hits = 0u64;
    for (list, index) in &lists {
        let pick = match distinguisher {
            Distinguisher::RandomPick => rng.gen_range(0..list.len()),
            Distinguisher::CharacterFrequency => {
                let best = list.iter().map(score).max().unwrap();
                let tied: Vec<usize> = (0..list.len()).filter(|&i| score(&list[i]) == best).collect();
                *tied.choose(rng).unwrap()
            }
        };
        hits += (pick == index.zero_based()) as u64;
    }
    let success = Estimate::new(hits, accounts as u64);
    let baseline = 1.0 / k as f64;
    Ok(FlatnessReport { distinguisher, success, baseline, advantage: success.p - baseline })
}

/// The S3PAS candidate filter used by the brute-force observer, exposed for oracles.
pub fn s3pas_consistent(scheme: &S3pas, challenge: &S3pasChallenge, candidate: &str, responses: &[char]) -> bool {
    let c = candidate.to_string();
    responses.iter().enumerate().all(|(r, resp)| scheme.accepts(challenge, r + 1, &c, resp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cop::{Cop, CopParams};
    use crate::s3pas::S3pasParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_sessions_keeps_everything() {
        let e = S3pas::new(S3pasParams::reduced(4, 3, "ABCDEFGHIJKL")).unwrap();
        let cands = all_strings(&e.params().alphabet, 4);
        assert_eq!(cands.len(), 20_736);
        let (trace, _) = bruteforce_observer(&e, cands, &[]);
        assert_eq!(trace, vec![20_736]);
    }

    #[test]
    fn cop_single_observation_prunes_other_digits() {
        let e = Cop::new(CopParams::reduced(4, 3, "ABCDEFGHIJKL", 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_sweetwords(&e, &"AB".to_string(), 2, &mut rng).unwrap();
        let pw = "AB".to_string();
        let obs = observe_sessions(&e, &g.list, &pw, 1, &mut rng).unwrap();
        let cands = all_distinct_strings(&e.params().alphabet, 2);
        let (trace, alive) = bruteforce_observer(&e, cands.clone(), &obs);
        assert!(alive.contains(&pw));
        let digit = obs[0].1[0];
        let expected = cands.iter().filter(|c| e.legit_response(c, &obs[0].0.digits).unwrap() == digit).count();
        assert_eq!(trace[1], expected);
    }

    #[test]
    fn cop_dos_matches_count() {
        let e = Cop::new(CopParams::default()).unwrap();
        let est = dos_attack_sim(&e, 5, WrongResponseModel::EveryRound, 20_000, 1, 4).unwrap();
        assert!(est.within_sigma(dos_analytic(5, 10), 3.0), "{est:?}");
    }

    #[test]
    fn full_coverage_always_alarms() {
        let e = Cop::new(CopParams::default()).unwrap();
        let est = dos_attack_sim(&e, 10, WrongResponseModel::EveryRound, 300, 2, 2).unwrap();
        assert_eq!(est.p, 1.0);
    }

    #[test]
    fn trials_zero_is_error() {
        let e = Cop::new(CopParams::default()).unwrap();
        assert!(random_click_attack(&e, 5, 0, 1, 1).is_err());
    }

    #[test]
    fn msv_list_cases() {
        let a = SweetwordList::new(crate::SchemeTag::Cop, vec!["A1B3".to_string(), "QJw9".into()], 10).unwrap();
        let b = SweetwordList::new(crate::SchemeTag::Cop, vec!["2XTD".to_string(), "A1B3".into()], 10).unwrap();
        assert_eq!(msv_intersection(&a, &a), a.entries().to_vec());
        assert_eq!(msv_intersection(&a, &b), vec!["A1B3".to_string()]);
    }

    #[test]
    fn flatness_needs_accounts() {
        let e = Cop::new(CopParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(flatness_estimate(&e, 5, 10, Distinguisher::RandomPick, &mut rng).is_err());
        assert!(flatness_estimate(&e, 1, 100, Distinguisher::RandomPick, &mut rng).is_err());
    }
}
