//! Turns raw aggregated count tables into analysis-ready datasets.
//!
//! The stages run in a fixed order: [`ingest`] parses source tables into the
//! standard record layout, [`cleaning`] applies declared normalizations,
//! [`correspondence`] moves counts between boundary editions, [`privacy`]
//! suppresses small cells, [`qa`] checks the result and assigns uncertainty,
//! and [`docs`] writes metadata, dictionaries, plans and the provenance log.
//! [`pipeline`] wires them together behind a declarative config.

pub mod model;
pub mod digest;
pub mod ingest;
pub mod cleaning;
pub mod correspondence;
pub mod privacy;
pub mod qa;
pub mod docs;
pub mod pipeline;
pub mod demo;
