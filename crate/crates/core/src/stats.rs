//! Small statistics helpers shared by the simulations.

use num_bigint::BigUint;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// SplitMix64 finalizer over `seed + stream`; gives each trial an independent seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, trial))
}

/// Runs `trials` independent trials on `workers` threads and returns their
/// results in trial order. Trial `i` always sees the rng seeded from
/// `(seed, i)`, so the output does not depend on the worker count.
pub fn map_trials<T, F>(trials: u64, seed: u64, workers: usize, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let run = || {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, i);
                trial(&mut rng, i)
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

pub fn count_successes<F>(trials: u64, seed: u64, workers: usize, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng, u64) -> bool + Sync,
{
    map_trials(trials, seed, workers, trial).into_iter().filter(|&b| b).count() as u64
}

/// Sums a per-trial value in trial order.
pub fn sum_trials<F>(trials: u64, seed: u64, workers: usize, trial: F) -> f64
where
    F: Fn(&mut ChaCha8Rng, u64) -> f64 + Sync,
{
    map_trials(trials, seed, workers, trial).iter().sum()
}

/// A Bernoulli proportion with its normal-approximation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub p: f64,
    pub std_err: f64,
    pub ci95: (f64, f64),
}

impl Estimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        assert!(trials > 0);
        let p = successes as f64 / trials as f64;
        let std_err = (p * (1.0 - p) / trials as f64).sqrt();
        Self { successes, trials, p, std_err, ci95: ((p - 1.96 * std_err).max(0.0), (p + 1.96 * std_err).min(1.0)) }
    }

    /// `|p - expected| <= n_sigma * sigma`, with sigma taken at the expected value.
    pub fn within_sigma(&self, expected: f64, n_sigma: f64) -> bool {
        let sigma = (expected * (1.0 - expected) / self.trials as f64).sqrt();
        (self.p - expected).abs() <= n_sigma * sigma.max(f64::EPSILON)
    }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ties share the average rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankCorrelation {
    pub rho: f64,
    /// One-sided p-value for rho > 0: exact permutation test up to
    /// `EXACT_SPEARMAN_MAX` points, t approximation beyond.
    pub p_value: f64,
}

pub const EXACT_SPEARMAN_MAX: usize = 8;

fn permutations(items: &mut Vec<f64>, k: usize, visit: &mut impl FnMut(&[f64])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Spearman rank correlation with a one-sided test for positive association.
pub fn spearman(x: &[f64], y: &[f64]) -> RankCorrelation {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 3);
    let (rx, ry) = (ranks(x), ranks(y));
    let rho = pearson(&rx, &ry);
    let p_value = if x.len() <= EXACT_SPEARMAN_MAX {
        let (mut at_least, mut total) = (0u64, 0u64);
        permutations(&mut ry.clone(), 0, &mut |perm| {
            total += 1;
            at_least += (pearson(&rx, perm) >= rho - 1e-12) as u64;
        });
        at_least as f64 / total as f64
    } else if rho >= 1.0 {
        0.0
    } else {
        let df = x.len() as f64 - 2.0;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
        1.0 - dist.cdf(t)
    };
    RankCorrelation { rho, p_value }
}

/// Pearson chi-square goodness-of-fit p-value against a uniform distribution over the bins.
pub fn chi_square_uniform_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("valid chi-square");
    1.0 - dist.cdf(stat)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)).sqrt()
}
