use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::cleaning::CleaningRuleSet;
use crate::correspondence::{BoundaryRule, TableMeta};
use crate::docs::{MetadataConfig, Mode, ResearcherLinks};
use crate::ingest::{SchemaMapping, SourceDescriptor};
use crate::model::{BoundaryEdition, GeoLevel, NestDomain, YearSpan};
use crate::privacy::SuppressionPolicy;
use crate::qa::{Vocabulary, DEFAULT_ITERATION_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub name: String,
    pub temporal_coverage: YearSpan,
    pub target_edition: BoundaryEdition,
    pub target_level: GeoLevel,
    #[serde(default)]
    pub vocabulary: Option<Vocabulary>,
    #[serde(default = "default_marginals")]
    pub marginal_tokens: Vec<String>,
    #[serde(default)]
    pub metadata: MetadataConfig,
    #[serde(default = "default_mode")]
    pub metadata_mode: Mode,
    #[serde(default)]
    pub dmp_answers: BTreeMap<String, String>,
    /// RFC 3339 time stamped on provenance entries. Falls back to
    /// `SOURCE_DATE_EPOCH`, then to the Unix epoch.
    #[serde(default)]
    pub run_timestamp: Option<String>,
    #[serde(default = "default_actor")]
    pub actor: String,
}

fn default_marginals() -> Vec<String> {
    vec!["ALL".into(), "P".into()]
}

fn default_mode() -> Mode {
    Mode::Draft
}

fn default_actor() -> String {
    "ardkit".into()
}

/// A mapping given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MappingRef {
    Path(PathBuf),
    Inline(Box<SchemaMapping>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub descriptor: SourceDescriptor,
    pub mapping: MappingRef,
    /// Raw table file.
    pub table: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    pub id: String,
    pub name: String,
    pub nest_domain: NestDomain,
    pub source_id: String,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub links: ResearcherLinks,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub from: BoundaryEdition,
    pub to: BoundaryEdition,
    pub level: GeoLevel,
    pub path: PathBuf,
}

impl TableConfig {
    pub fn meta(&self) -> TableMeta {
        TableMeta::new(self.from, self.to, self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanStage {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Rule revisions tried in order until QA passes.
    #[serde(default)]
    pub revisions: Vec<CleaningRuleSet>,
    #[serde(default = "default_cap")]
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondStage {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_threshold")]
    pub discard_threshold: f64,
    #[serde(default)]
    pub boundary_rule: BoundaryRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyStage {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub suppression: SuppressionPolicy,
    /// Integer noise magnitude; 0 disables randomisation.
    #[serde(default)]
    pub noise: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlainStage {
    #[serde(default = "yes")]
    pub enabled: bool,
}

fn yes() -> bool {
    true
}

fn default_cap() -> usize {
    DEFAULT_ITERATION_CAP
}

fn default_threshold() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageConfig {
    Ingest(PlainStage),
    Clean(CleanStage),
    Correspond(CorrespondStage),
    Privacy(PrivacyStage),
    Qa(PlainStage),
    Docs(PlainStage),
}

/// Pipeline stages in their fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Ingest,
    Clean,
    Correspond,
    Privacy,
    Qa,
    Docs,
}

pub const STAGE_NAMES: [&str; 6] = ["ingest", "clean", "correspond", "privacy", "qa", "docs"];

impl StageKind {
    pub const ALL: [StageKind; 6] =
        [Self::Ingest, Self::Clean, Self::Correspond, Self::Privacy, Self::Qa, Self::Docs];

    pub fn name(self) -> &'static str {
        STAGE_NAMES[self as usize]
    }
}

impl StageConfig {
    pub fn kind(&self) -> StageKind {
        match self {
            Self::Ingest(_) => StageKind::Ingest,
            Self::Clean(_) => StageKind::Clean,
            Self::Correspond(_) => StageKind::Correspond,
            Self::Privacy(_) => StageKind::Privacy,
            Self::Qa(_) => StageKind::Qa,
            Self::Docs(_) => StageKind::Docs,
        }
    }

    pub fn enabled(&self) -> bool {
        match self {
            Self::Ingest(s) | Self::Qa(s) | Self::Docs(s) => s.enabled,
            Self::Clean(s) => s.enabled,
            Self::Correspond(s) => s.enabled,
            Self::Privacy(s) => s.enabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub project: ProjectConfig,
    pub sources: Vec<SourceConfig>,
    pub indicators: Vec<IndicatorConfig>,
    #[serde(default)]
    pub correspondence_tables: Vec<TableConfig>,
    pub stages: Vec<StageConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Directory relative paths are resolved against; set by the loader.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    /// Parses and validates a config; relative paths resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        if let Some(stages) = raw.get("stages").and_then(|s| s.as_array()) {
            for s in stages {
                match s.get("stage").and_then(|n| n.as_str()) {
                    Some(name) if STAGE_NAMES.contains(&name) => {}
                    Some(name) => return Err(PipelineError::UnknownStage(name.to_string())),
                    None => return Err(PipelineError::Config("stage entry without a \"stage\" name".into())),
                }
            }
        }
        let mut cfg: Self = serde_json::from_value(raw).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        let mut last: Option<StageKind> = None;
        for s in &self.stages {
            let k = s.kind();
            if let Some(prev) = last {
                if k <= prev {
                    return bad(format!(
                        "stage {} listed after {}; order is {}",
                        k.name(),
                        prev.name(),
                        STAGE_NAMES.join(" -> ")
                    ));
                }
            }
            last = Some(k);
        }
        let enabled: Vec<StageKind> = self.enabled_stages();
        if enabled.first() != Some(&StageKind::Ingest) {
            return bad("the ingest stage must be enabled".into());
        }
        if enabled.contains(&StageKind::Docs) && !enabled.contains(&StageKind::Qa) {
            return bad("the docs stage requires the qa stage".into());
        }
        if let Some(p) = self.privacy() {
            if p.noise < 0 {
                return bad(format!("noise magnitude must be non-negative (got {})", p.noise));
            }
        }
        if let Some(c) = self.clean() {
            if c.max_iterations == 0 {
                return bad("clean.max_iterations must be at least 1".into());
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for ind in &self.indicators {
            crate::model::check_token(&ind.id).map_err(|e| PipelineError::Config(format!("indicator id: {e}")))?;
            if ind.id.contains(['/', '\\']) || ind.id.starts_with('.') {
                return bad(format!("indicator id {:?} cannot be used as a directory name", ind.id));
            }
            if !ids.insert(&ind.id) {
                return bad(format!("duplicate indicator id {:?}", ind.id));
            }
            if !self.sources.iter().any(|s| s.descriptor.source_id == ind.source_id) {
                return bad(format!("indicator {} refers to unknown source {:?}", ind.id, ind.source_id));
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn enabled_stages(&self) -> Vec<StageKind> {
        self.stages.iter().filter(|s| s.enabled()).map(StageConfig::kind).collect()
    }

    pub fn is_enabled(&self, k: StageKind) -> bool {
        self.enabled_stages().contains(&k)
    }

    pub fn clean(&self) -> Option<&CleanStage> {
        self.stages.iter().find_map(|s| match s {
            StageConfig::Clean(c) => Some(c),
            _ => None,
        })
    }

    pub fn correspond(&self) -> Option<&CorrespondStage> {
        self.stages.iter().find_map(|s| match s {
            StageConfig::Correspond(c) => Some(c),
            _ => None,
        })
    }

    pub fn privacy(&self) -> Option<&PrivacyStage> {
        self.stages.iter().find_map(|s| match s {
            StageConfig::Privacy(c) => Some(c),
            _ => None,
        })
    }

    pub fn source(&self, id: &str) -> Option<&SourceConfig> {
        self.sources.iter().find(|s| s.descriptor.source_id == id)
    }

    pub fn mapping(&self, s: &SourceConfig) -> Result<SchemaMapping, PipelineError> {
        match &s.mapping {
            MappingRef::Inline(m) => Ok(m.as_ref().clone()),
            MappingRef::Path(p) => {
                let path = self.resolve(p);
                let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
                SchemaMapping::from_json(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
            }
        }
    }
}
