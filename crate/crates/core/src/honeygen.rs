//! Honeyword generation under the per-scheme distinctness constraints.
//!
//! Realism comes from per-position character-class-preserving substitution:
//! each position of the original is replaced by a uniformly drawn character of
//! the same class (digit, upper, lower, symbol). Candidates are accepted one at
//! a time by rejection against the scheme's set validator.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{HbatError, Result};
use crate::framework::{Scheme, SweetIndex, SweetwordList, Violation};

pub const DEFAULT_RETRY_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharClass {
    Upper,
    Lower,
    Digit,
    Symbol,
}

impl CharClass {
    pub fn of(c: char) -> Self {
        if c.is_ascii_uppercase() {
            CharClass::Upper
        } else if c.is_lowercase() {
            CharClass::Lower
        } else if c.is_ascii_digit() {
            CharClass::Digit
        } else {
            CharClass::Symbol
        }
    }
}

/// Replaces every character of `original` with a random alphabet character of the same class.
/// Characters whose class has no member in `alphabet` are drawn from the whole alphabet.
pub fn class_preserving_substitute<R: Rng + ?Sized>(original: &[char], alphabet: &[char], rng: &mut R) -> Vec<char> {
    original
        .iter()
        .map(|&c| {
            let class = CharClass::of(c);
            let pool: Vec<char> = alphabet.iter().copied().filter(|&a| CharClass::of(a) == class).collect();
            if pool.is_empty() {
                *alphabet.choose(rng).expect("empty alphabet")
            } else {
                *pool.choose(rng).unwrap()
            }
        })
        .collect()
}

/// A generated sweetword list and the position of the original password.
/// The index belongs to the honeyChecker and must not be stored with the list.
#[derive(Debug, Clone)]
pub struct Generated<T> {
    pub list: SweetwordList<T>,
    pub index: SweetIndex,
}

pub fn validate_sweetword_set<S: Scheme>(
    scheme: &S,
    list: &SweetwordList<S::Sweetword>,
) -> std::result::Result<(), Vec<Violation>> {
    let violations = scheme.validate_sweetwords(list.entries());
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Builds k sweetwords around `password`, the original placed uniformly at random.
pub fn generate_sweetwords<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    password: &S::Sweetword,
    k: usize,
    rng: &mut R,
) -> Result<Generated<S::Sweetword>> {
    generate_sweetwords_with_cap(scheme, password, k, rng, DEFAULT_RETRY_CAP)
}

pub fn generate_sweetwords_with_cap<S: Scheme, R: Rng + ?Sized>(
    scheme: &S,
    password: &S::Sweetword,
    k: usize,
    rng: &mut R,
    retry_cap: usize,
) -> Result<Generated<S::Sweetword>> {
    let max = scheme.response_element_count();
    if k < 2 || k > max {
        return Err(HbatError::KOutOfRange { scheme: scheme.tag(), k, min: 2, max });
    }
    scheme.validate_secret(password)?;

    let mut entries = vec![password.clone()];
    let mut attempts = 0;
    while entries.len() < k {
        attempts += 1;
        if attempts > retry_cap {
            return Err(HbatError::KTooLarge { attempts: retry_cap });
        }
        let candidate = scheme.honeyword(password, rng);
        entries.push(candidate);
        if !scheme.generation_violations(&entries).is_empty() {
            entries.pop();
        }
    }

    // entries[0] is the original; move it to a uniform position
    let t = rng.gen_range(0..k);
    entries.swap(0, t);
    let list = SweetwordList::new(scheme.tag(), entries, max)?;
    Ok(Generated { list, index: SweetIndex::from_zero_based(t) })
}

/// Pairwise duplicate check shared by the scheme validators.
pub(crate) fn duplicate_violations<T: PartialEq>(entries: &[T]) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            if entries[i] == entries[j] {
                out.push(Violation::Duplicate { a: i + 1, b: j + 1 });
            }
        }
    }
    out
}
