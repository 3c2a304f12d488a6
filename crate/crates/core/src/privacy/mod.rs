//! Small-cell suppression, pseudonymisation and seeded noise.

mod pseudonym;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Dataset, Measure, Stratum, ValueKind};

pub use pseudonym::{pseudonymize, PseudonymMap};

#[derive(Debug, Error, PartialEq)]
pub enum PrivacyError {
    #[error("suppression and noise apply to counts only (got {0})")]
    NotCounts(ValueKind),
    #[error("suppression threshold must be at least 1")]
    Threshold,
    #[error("noise magnitude must be non-negative (got {0})")]
    NegativeNoise(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuppressionPolicy {
    pub threshold: u32,
    pub suppress_zero: bool,
}

impl Default for SuppressionPolicy {
    fn default() -> Self {
        Self { threshold: 5, suppress_zero: false }
    }
}

impl SuppressionPolicy {
    /// Whether a count of `m` must be hidden.
    pub fn hides(&self, m: f64) -> bool {
        (m > 0.0 && m < self.threshold as f64) || (m == 0.0 && self.suppress_zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuppressionEntry {
    pub stratum: Stratum,
    pub suppressed_cell_count: usize,
}

/// Per-stratum tallies of newly suppressed cells. Values are never recorded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuppressionLog {
    pub entries: Vec<SuppressionEntry>,
}

impl SuppressionLog {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.suppressed_cell_count).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("log serializes") + "\n"
    }
}

fn require_counts(d: &Dataset) -> Result<(), PrivacyError> {
    match d.indicator.value_kind {
        ValueKind::Count => Ok(()),
        k => Err(PrivacyError::NotCounts(k)),
    }
}

/// Replaces every count the policy hides with a suppressed marker.
pub fn suppress(d: &Dataset, p: &SuppressionPolicy) -> Result<(Dataset, SuppressionLog), PrivacyError> {
    require_counts(d)?;
    if p.threshold < 1 {
        return Err(PrivacyError::Threshold);
    }
    let mut tally: BTreeMap<Stratum, usize> = BTreeMap::new();
    let mut out = d.clone();
    for r in &mut out.records {
        if let Measure::Count(m) = r.value.measure {
            if p.hides(m) {
                r.value.measure = Measure::Suppressed;
                *tally.entry(r.key.stratum()).or_default() += 1;
            }
        }
    }
    let entries = tally
        .into_iter()
        .map(|(stratum, suppressed_cell_count)| SuppressionEntry { stratum, suppressed_cell_count })
        .collect();
    Ok((out.finish(), SuppressionLog { entries }))
}

/// Adds uniform integer noise in `[-magnitude, magnitude]` to every count, clamping at zero.
///
/// One draw is taken per record in canonical order, so the result depends
/// only on the dataset and the seed.
pub fn randomize(d: &Dataset, magnitude: i64, seed: u64) -> Result<Dataset, PrivacyError> {
    require_counts(d)?;
    if magnitude < 0 {
        return Err(PrivacyError::NegativeNoise(magnitude));
    }
    let mut out = d.canonical_sort();
    if magnitude == 0 {
        return Ok(out.finish());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in &mut out.records {
        let noise = rng.random_range(-magnitude..=magnitude);
        if let Measure::Count(m) = r.value.measure {
            r.value.measure = Measure::Count((m + noise as f64).max(0.0));
        }
    }
    Ok(out.finish())
}
