//! Metadata documents, data dictionaries, data management plan scaffolds and
//! the hash-chained provenance log.

mod dictionary;
mod dmp;
mod metadata;
mod provenance;

use thiserror::Error;

pub use dictionary::{emit_dictionary, Audience, DictionaryEntry, ResearcherLinks};
pub use dmp::{scaffold_dmp, DmpTopic, DMP_TOPICS};
pub use metadata::{emit_metadata, iso_crosswalk_markdown, MetadataConfig, MetadataDoc, Mode, ISO19115_CROSSWALK};
pub use provenance::{EntryDraft, ProvenanceEntry, ProvenanceLog, GENESIS_DIGEST, LOG_FORMAT};

#[derive(Debug, Error, PartialEq)]
pub enum DocsError {
    #[error("dataset {0} has not passed QA; documentation is only produced for passing datasets")]
    NotPassed(String),
    #[error("QA report is for {report}, not {dataset}")]
    ReportMismatch { report: String, dataset: String },
    #[error("publishable metadata is missing: {}", .0.join(", "))]
    MissingFields(Vec<String>),
    #[error("provenance log tampered or forked at entry {index}: {reason}")]
    Tampered { index: usize, reason: String },
    #[error("provenance log unreadable at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}
