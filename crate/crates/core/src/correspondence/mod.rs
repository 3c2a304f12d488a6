//! Moving counts between boundary editions.
//!
//! Forward steps redistribute an earlier edition's counts over a later
//! edition's regions by ratio. Backward steps rebuild earlier-edition regions
//! from later-edition values, reusing the forward ratios: contributions into
//! shared regions below the discard threshold are dropped, anything larger
//! suppresses the region.
//!
//! Arithmetic is carried out on exact rationals and rounded once per output
//! value, so the result is the correctly rounded value of the exact sum.

mod engine;
mod route;
mod table;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BoundaryEdition, GeoLevel, ValueKind};

pub use engine::{
    apply_plan, backward, backward_exact, backward_with_denominator, forward, forward_exact,
    forward_with_denominator, Amount, Corresponded, Direction, ExactRecord, ExactStep, StepRecord,
};
pub use route::{plan_route, Step};
pub use table::{
    load_table, load_table_unchecked, parse_decimal, CorrespondenceEdge, CorrespondenceTable, TableMeta,
    LOAD_TOLERANCE, TABLE_HEADER,
};

#[derive(Debug, Error)]
pub enum CorrespondenceError {
    #[error("correspondence file header must be FROM_CODE,TO_CODE,RATIO, found {0:?}")]
    Header(String),
    #[error("correspondence file line {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("ratio {ratio} for {from}->{to} outside [0, 1]")]
    RatioOutOfRange { from: String, to: String, ratio: f64 },
    #[error("duplicate edge {from}->{to}")]
    DuplicateEdge { from: String, to: String },
    #[error("edge {from}->{to} does not belong to the table's editions or level")]
    EdgeOutsideTable { from: String, to: String },
    #[error("{}", fmt_sums(.0))]
    RatioSum(Vec<(String, String)>),
    #[error("table maps {0} onto itself")]
    SameEdition(BoundaryEdition),
    #[error("dataset edition {found} does not match table edition {expected}")]
    EditionMismatch { expected: BoundaryEdition, found: BoundaryEdition },
    #[error("dataset level {found} does not match table level {expected}")]
    LevelMismatch { expected: GeoLevel, found: GeoLevel },
    #[error("regions absent from correspondence table: {}", .0.join(", "))]
    Uncovered(Vec<String>),
    #[error("correspondence defined for counts only (got {0})")]
    CountsOnly(ValueKind),
    #[error("denominator dataset: {0}")]
    Denominator(String),
    #[error("discard threshold {0} must lie strictly between 0 and 1")]
    Threshold(f64),
    #[error("no correspondence route from {from} to {to}: missing table {from}->{to} (or {to}->{from})")]
    NoRoute { from: BoundaryEdition, to: BoundaryEdition },
    #[error("no table loaded for {from}->{to} at {level}")]
    MissingTable { from: BoundaryEdition, to: BoundaryEdition, level: GeoLevel },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_sums(v: &[(String, String)]) -> String {
    v.iter().map(|(c, s)| format!("ratios for {c} sum to {s}")).collect::<Vec<_>>().join("; ")
}

/// How a shared ratio exactly equal to the threshold is treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRule {
    #[default]
    SuppressAtThreshold,
    KeepAtThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondencePolicy {
    #[serde(default = "default_threshold")]
    pub discard_threshold: f64,
    #[serde(default)]
    pub boundary_rule: BoundaryRule,
    pub target_edition: BoundaryEdition,
}

fn default_threshold() -> f64 {
    0.1
}

impl CorrespondencePolicy {
    pub fn new(target_edition: BoundaryEdition) -> Self {
        Self { discard_threshold: default_threshold(), boundary_rule: BoundaryRule::default(), target_edition }
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        self.discard_threshold = t;
        self
    }

    pub fn with_boundary_rule(mut self, r: BoundaryRule) -> Self {
        self.boundary_rule = r;
        self
    }

    pub fn check(&self) -> Result<(), CorrespondenceError> {
        if self.discard_threshold > 0.0 && self.discard_threshold < 1.0 {
            Ok(())
        } else {
            Err(CorrespondenceError::Threshold(self.discard_threshold))
        }
    }

    /// Whether a shared contribution with this ratio forces suppression.
    pub fn suppresses(&self, ratio: f64) -> bool {
        match self.boundary_rule {
            BoundaryRule::SuppressAtThreshold => ratio >= self.discard_threshold,
            BoundaryRule::KeepAtThreshold => ratio > self.discard_threshold,
        }
    }
}
