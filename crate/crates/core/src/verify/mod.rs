//! Exact checks of algebraic identities, with brute-force Clifford products
//! as the ground truth.

mod calculus;
mod combinatorics;
mod eq22;
mod laws;

pub use calculus::verify_calculus_identities;
pub use combinatorics::{
    i4_brute, i4_closed, i5_closed, i6_closed, i6_family, i6_pair, i6_sign, verify_i3_assembly, verify_i3_nonnegative,
    verify_i5, verify_i6_cases, verify_scalar_annihilation, HessianStub, I6Family, SignRules,
};
pub use eq22::{
    eq22_ladder, observed_orders, verify_eq22, verify_estimate, Eq22Ladder, Eq22Report, EstimateReport, EstimateRow,
};
pub use laws::{reduce_word, verify_core_laws};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Multivector, Scalar, MAX_N};

/// Largest `n` the exact suites accept.
pub const VERIFY_MAX_N: usize = 6;

/// Outcome of one identity suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub n: usize,
    pub trials: u64,
    pub passes: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    /// Printed sign rules checked against enumeration. Mismatches do not
    /// fail the report; the enumerated value is the reference.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub printed_rules: Vec<RuleCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.passes == self.trials && self.counterexample.is_none()
    }
}

/// A failing trial, reproducible from `(seed, trial)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    pub seed: u64,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blades: Vec<String>,
}

/// A printed sign rule checked against enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleCheck {
    pub rule: String,
    pub printed_exponent: String,
    pub corrected_exponent: String,
    pub checked: u64,
    pub mismatches: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mismatch: Option<String>,
}

impl RuleCheck {
    pub fn matches_enumeration(&self) -> bool {
        self.mismatches == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("n = {n} outside the supported range {min}..={max}")]
    UnsupportedN { n: usize, min: usize, max: usize },
}

pub(crate) fn check_range(n: usize, min: usize) -> Result<(), VerifyError> {
    if n < min || n > VERIFY_MAX_N.min(MAX_N) {
        Err(VerifyError::UnsupportedN {
            n,
            min,
            max: VERIFY_MAX_N,
        })
    } else {
        Ok(())
    }
}

/// Generator for trial `trial` under `seed`: one ChaCha stream per trial, so
/// trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random rational `p/q` with `p ∈ -9..=9`, `q ∈ 1..=9`.
pub fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    crate::algebra::rational(rng.random_range(-9..=9), rng.random_range(1..=9))
}

pub fn random_multivector<R: Rng>(n: usize, rng: &mut R) -> Multivector<BigRational> {
    Multivector::from_coeffs(n, (0..1 << n).map(|_| random_rational(rng)).collect()).expect("n in range")
}

/// Runs `trials` independent trials in parallel and merges them by index.
/// A trial returns `Err(detail)` on failure.
pub(crate) fn run_trials<F>(identity: &str, n: usize, trials: u64, seed: u64, f: F) -> IdentityReport
where
    F: Fn(&mut ChaCha8Rng) -> Result<(), Counterexample> + Sync,
{
    let outcomes: Vec<Result<(), Counterexample>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            f(&mut trial_rng(seed, t)).map_err(|mut c| {
                c.trial = t;
                c.seed = seed;
                c
            })
        })
        .collect();
    let passes = outcomes.iter().filter(|o| o.is_ok()).count() as u64;
    IdentityReport {
        identity: identity.to_string(),
        n,
        trials,
        passes,
        seed,
        counterexample: outcomes.into_iter().find_map(|o| o.err()),
        printed_rules: Vec::new(),
    }
}

/// Combines the sub-checks of one suite into a single report.
pub(crate) fn merge(identity: &str, n: usize, seed: u64, parts: Vec<IdentityReport>) -> IdentityReport {
    let mut out = IdentityReport {
        identity: identity.to_string(),
        n,
        trials: 0,
        passes: 0,
        seed,
        counterexample: None,
        printed_rules: Vec::new(),
    };
    for p in parts {
        out.trials += p.trials;
        out.passes += p.passes;
        if out.counterexample.is_none() {
            out.counterexample = p.counterexample.map(|mut c| {
                c.detail = format!("{}: {}", p.identity, c.detail);
                c
            });
        }
        out.printed_rules.extend(p.printed_rules);
    }
    out
}

pub(crate) fn failure<S: Scalar>(detail: String, values: &[&Multivector<S>]) -> Counterexample {
    Counterexample {
        trial: 0,
        seed: 0,
        detail,
        coefficients: values
            .iter()
            .map(|m| m.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "))
            .collect(),
        blades: Vec::new(),
    }
}

/// A single enumerated (non-random) check.
pub(crate) fn exhaustive<F>(identity: &str, n: usize, cases: u64, f: F) -> IdentityReport
where
    F: Fn(u64) -> Result<(), Counterexample> + Sync,
{
    let outcomes: Vec<Result<(), Counterexample>> = (0..cases).into_par_iter().map(|c| f(c).map_err(|mut e| {
        e.trial = c;
        e
    })).collect();
    IdentityReport {
        identity: identity.to_string(),
        n,
        trials: cases,
        passes: outcomes.iter().filter(|o| o.is_ok()).count() as u64,
        seed: 0,
        counterexample: outcomes.into_iter().find_map(|o| o.err()),
        printed_rules: Vec::new(),
    }
}
