//! Rule-based quality checks, uncertainty levels and the clean/check loop.

mod converge;
mod report;
mod rules;
mod uncertainty;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correspondence::{CorrespondenceTable, StepRecord};
use crate::model::{RecordKey, YearSpan};

pub use converge::{clean_until_pass, LoopOutcome, DEFAULT_ITERATION_CAP};
pub use report::{Finding, QaReport, Severity};
pub use rules::{registry, run_rules, QaRule};
pub use uncertainty::{assign_uncertainty, filter_high_uncertainty, level_for, RemovalLog, ASSIGNMENT_RULE};

#[derive(Debug, Error)]
pub enum QaError {
    #[error("record {0} has no provenance entry")]
    MissingProvenance(RecordKey),
    #[error("QA did not pass within {cap} iteration(s); last: {last}")]
    NonConvergence { cap: usize, last: String },
    #[error("QA still failing after {iterations} iteration(s) with no cleaning revision left; last: {last}")]
    Unresolved { iterations: usize, last: String },
    #[error("iteration cap must be at least 1")]
    ZeroCap,
}

/// Allowed filter tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vocabulary {
    pub age_groups: Vec<String>,
    pub sexes: Vec<String>,
}

/// Everything a rule may consult besides the dataset itself.
#[derive(Debug, Clone, Default)]
pub struct QaContext {
    /// Overrides the dataset's own declared coverage when set.
    pub coverage: Option<YearSpan>,
    /// Tables to echo-check for ratio sums.
    pub tables: Vec<CorrespondenceTable>,
    /// Correspondence steps whose totals are checked for conservation.
    pub conservation: Vec<StepRecord>,
    /// High-uncertainty removal performed before the check.
    pub removal: Option<RemovalLog>,
    /// Filter tokens that denote a total over the other values.
    pub marginal_tokens: Vec<String>,
    pub vocabulary: Option<Vocabulary>,
}

impl QaContext {
    pub fn new() -> Self {
        Self { marginal_tokens: vec!["ALL".into(), "P".into()], ..Self::default() }
    }
}
