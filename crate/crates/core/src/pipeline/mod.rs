//! Declarative pipeline: config, stage functions and the output tree.
//!
//! Each stage reads the previous enabled stage's files from the output
//! directory and writes its own, so running stages one at a time produces
//! the same tree as a single [`run`].

mod config;
mod output;
mod stages;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    CleanStage, CorrespondStage, IndicatorConfig, MappingRef, PipelineConfig, PlainStage, PrivacyStage,
    ProjectConfig, SourceConfig, StageConfig, StageKind, TableConfig, STAGE_NAMES,
};
pub use output::OutputTree;
pub use stages::{paths, run_stage, write_dmp};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown stage {0:?} (known stages: ingest, clean, correspond, privacy, qa, docs)")]
    UnknownStage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("refusing to write outside the output directory: {}", .0.display())]
    OutsideOutput(PathBuf),
    #[error("no output directory: pass --out or set output_dir")]
    NoOutput,
    #[error("noise is enabled but no seed was given (set seed in the config or pass --seed)")]
    NoSeed,
    #[error("stage {stage} is not enabled in the config")]
    Disabled { stage: &'static str },
    #[error("stage {stage} needs {}; run the earlier stages first", .path.display())]
    MissingInput { stage: &'static str, path: PathBuf },
    #[error("{indicator}: {stage}: {message}")]
    Stage { indicator: String, stage: &'static str, message: String },
    #[error("QA failed for: {}", .0.join(", "))]
    QaFailed(Vec<String>),
    #[error("strict mode: QA reported {0} warning(s)")]
    Strict(usize),
    #[error(transparent)]
    Provenance(#[from] crate::docs::DocsError),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Io { path: path.to_path_buf(), message: e.to_string() }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    /// Treat QA warnings as failures.
    pub strict: bool,
    /// Round final counts with largest-remainder rounding.
    pub round_counts: bool,
}

/// What a completed stage or run produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub stages: Vec<StageKind>,
    /// QA warnings across all indicators.
    pub warnings: usize,
}

impl Summary {
    /// 0 on a clean success, 1 when warnings were reported.
    pub fn exit_code(&self) -> i32 {
        if self.warnings > 0 {
            1
        } else {
            0
        }
    }
}

pub const FAILED_MARKER: &str = "FAILED";

/// Resolves the output directory and opens the guarded tree.
pub fn output_tree(cfg: &PipelineConfig, opts: &RunOptions) -> Result<OutputTree, PipelineError> {
    let dir = match (&opts.out, &cfg.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.resolve(o),
        (None, None) => return Err(PipelineError::NoOutput),
    };
    OutputTree::create(&dir)
}

/// Runs the listed stages in order, leaving a FAILED marker if one fails.
pub fn execute(cfg: &PipelineConfig, stages: &[StageKind], opts: &RunOptions) -> Result<Summary, PipelineError> {
    let out = output_tree(cfg, opts)?;
    let result = with_pool(cfg, opts, || {
        let mut summary = Summary::default();
        for &k in stages {
            let s = run_stage(cfg, k, &out, opts)?;
            summary.stages.push(k);
            summary.warnings += s.warnings;
        }
        Ok(summary)
    });
    match &result {
        Ok(_) => out.remove(FAILED_MARKER)?,
        Err(e) => out.write(FAILED_MARKER, format!("{e}\n").as_bytes())?,
    }
    result
}

/// Every enabled stage, in order.
pub fn run(cfg: &PipelineConfig, opts: &RunOptions) -> Result<Summary, PipelineError> {
    execute(cfg, &cfg.enabled_stages(), opts)
}

fn with_pool<T: Send>(
    cfg: &PipelineConfig,
    opts: &RunOptions,
    f: impl FnOnce() -> Result<T, PipelineError> + Send,
) -> Result<T, PipelineError> {
    match opts.workers.or(cfg.workers) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?
            .install(f),
        None => f(),
    }
}
