//! Source registry, schema mappings, and parsing of raw tables into the
//! standard record layout.

mod detect;
mod mapping;
mod parse;
mod registry;

use thiserror::Error;

pub use detect::{detect_characteristics, MappingDraft, Role, RoleGuess};
pub use mapping::{Binding, Layout, SchemaMapping};
pub use parse::{parse_raw, CellRef, ParseReport, Reject};
pub use registry::{AccessMode, SourceDescriptor, SourceRegistry};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("duplicate source {0:?}")]
    DuplicateSource(String),
    #[error("inverted collection window for {source_id:?}: {start} is after {end}")]
    InvertedWindow { source_id: String, start: String, end: String },
    #[error("input is not valid UTF-8 at byte offset {offset}")]
    Undecodable { offset: usize },
    #[error("input has no header row")]
    NoHeader,
    #[error("mapped column {0:?} not present in header")]
    MissingColumn(String),
    #[error("invalid schema mapping: {0}")]
    InvalidMapping(String),
    #[error("mixed {what} in one file: {values:?}")]
    Mixed { what: &'static str, values: Vec<String> },
    #[error("malformed table: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid JSON document: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_utf8(bytes: &[u8]) -> Result<&str, IngestError> {
    std::str::from_utf8(bytes).map_err(|e| IngestError::Undecodable { offset: e.valid_up_to() })
}
