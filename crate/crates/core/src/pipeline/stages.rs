use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat};
use rayon::prelude::*;

use super::{IndicatorConfig, OutputTree, PipelineConfig, PipelineError, RunOptions, StageKind, Summary};
use crate::cleaning::profile;
use crate::correspondence::{
    apply_plan, load_table, load_table_unchecked, plan_route, CorrespondenceError, CorrespondencePolicy,
    CorrespondenceTable, Step, StepRecord, TableMeta,
};
use crate::digest::sha256_hex;
use crate::docs::{
    emit_dictionary, emit_metadata, scaffold_dmp, Audience, DictionaryEntry, EntryDraft, ProvenanceLog,
};
use crate::ingest::{parse_raw, SourceRegistry};
use crate::model::{read_csv, round_counts, write_csv, Dataset, Indicator, Lineage, ValueKind};
use crate::privacy::{randomize, suppress};
use crate::qa::{
    assign_uncertainty, clean_until_pass, filter_high_uncertainty, run_rules, QaContext, QaReport, Severity,
};

/// Relative locations of every artifact in the output tree.
pub mod paths {
    use std::path::PathBuf;

    use crate::pipeline::StageKind;

    pub const PROVENANCE: &str = "provenance.jsonl";
    pub const REGISTRY: &str = "registry.json";
    pub const DICTIONARY: &str = "dictionary.md";
    pub const DICTIONARY_RESEARCHER: &str = "dictionary_researcher.md";
    pub const DMP: &str = "dmp.md";
    pub const INDICATORS: &str = "indicators";

    pub fn indicator_dir(id: &str) -> PathBuf {
        PathBuf::from(INDICATORS).join(id)
    }

    fn stage_file(id: &str, name: &str) -> PathBuf {
        indicator_dir(id).join("stages").join(name)
    }

    /// Data file written by a data stage; `None` for qa and docs.
    pub fn stage_csv(id: &str, kind: StageKind) -> Option<PathBuf> {
        let name = match kind {
            StageKind::Ingest => "01_ingest.csv",
            StageKind::Clean => "02_clean.csv",
            StageKind::Correspond => "03_correspond.csv",
            StageKind::Privacy => "04_privacy.csv",
            StageKind::Qa | StageKind::Docs => return None,
        };
        Some(stage_file(id, name))
    }

    pub fn ingest_report(id: &str) -> PathBuf {
        stage_file(id, "01_ingest_report.json")
    }

    pub fn clean_log(id: &str) -> PathBuf {
        stage_file(id, "02_clean_log.jsonl")
    }

    pub fn clean_qa(id: &str) -> PathBuf {
        stage_file(id, "02_clean_qa.json")
    }

    pub fn clean_profile(id: &str) -> PathBuf {
        stage_file(id, "02_profile.json")
    }

    pub fn lineage(id: &str) -> PathBuf {
        stage_file(id, "03_lineage.json")
    }

    pub fn steps(id: &str) -> PathBuf {
        stage_file(id, "03_steps.json")
    }

    pub fn suppression_log(id: &str) -> PathBuf {
        stage_file(id, "04_suppression.json")
    }

    pub fn final_csv(id: &str) -> PathBuf {
        indicator_dir(id).join(format!("{id}.csv"))
    }

    pub fn qa_report_json(id: &str) -> PathBuf {
        indicator_dir(id).join("qa_report.json")
    }

    pub fn qa_report_txt(id: &str) -> PathBuf {
        indicator_dir(id).join("qa_report.txt")
    }

    pub fn removal_log(id: &str) -> PathBuf {
        indicator_dir(id).join("removal_log.json")
    }

    pub fn metadata_json(id: &str) -> PathBuf {
        indicator_dir(id).join("metadata.json")
    }

    pub fn metadata_md(id: &str) -> PathBuf {
        indicator_dir(id).join("metadata.md")
    }
}

/// Everything one indicator's stage produced, written only once all succeed.
#[derive(Default)]
struct Work {
    files: Vec<(PathBuf, Vec<u8>)>,
    inputs: BTreeMap<String, String>,
    decision: String,
    warnings: usize,
    qa_failed: bool,
    entry: Option<DictionaryEntry>,
}

impl Work {
    fn file(&mut self, rel: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((rel, bytes.into()));
    }

    fn input(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.inputs.insert(name.into(), sha256_hex(bytes));
    }
}

fn key(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

fn fail(ind: &IndicatorConfig, stage: StageKind, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage { indicator: ind.id.clone(), stage: stage.name(), message: e.to_string() }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

/// Time stamped on provenance entries: the configured value, then
/// `SOURCE_DATE_EPOCH`, then the Unix epoch, so reruns are reproducible.
pub(crate) fn run_timestamp(cfg: &PipelineConfig) -> Result<String, PipelineError> {
    if let Some(t) = &cfg.project.run_timestamp {
        DateTime::parse_from_rfc3339(t)
            .map_err(|e| PipelineError::Config(format!("run_timestamp {t:?}: {e}")))?;
        return Ok(t.clone());
    }
    let secs = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse::<i64>().ok()).unwrap_or(0);
    DateTime::from_timestamp(secs, 0)
        .map(|d| d.to_rfc3339_opts(SecondsFormat::Secs, true))
        .ok_or_else(|| PipelineError::Config(format!("SOURCE_DATE_EPOCH {secs} out of range")))
}

fn indicator(cfg: &PipelineConfig, ind: &IndicatorConfig) -> Result<Indicator, PipelineError> {
    let src = cfg.source(&ind.source_id).expect("validated source");
    let mapping = cfg.mapping(src)?;
    Ok(Indicator::new(&ind.id, &ind.name, ind.nest_domain, mapping.value_kind, &ind.source_id))
}

/// Reads a canonical dataset file from the tree, recording its digest.
fn load(
    cfg: &PipelineConfig,
    out: &OutputTree,
    ind: &IndicatorConfig,
    stage: StageKind,
    rel: &Path,
    w: &mut Work,
) -> Result<Dataset, PipelineError> {
    if !out.exists(rel) {
        return Err(PipelineError::MissingInput { stage: stage.name(), path: rel.to_path_buf() });
    }
    let bytes = out.read(rel)?;
    w.input(key(rel), &bytes);
    let d = read_csv(&bytes, indicator(cfg, ind)?).map_err(|e| fail(ind, stage, e))?;
    Ok(d.with_coverage(Some(cfg.project.temporal_coverage)))
}

fn read_json<T: serde::de::DeserializeOwned>(
    out: &OutputTree,
    ind: &IndicatorConfig,
    stage: StageKind,
    rel: &Path,
    w: &mut Work,
) -> Result<T, PipelineError> {
    if !out.exists(rel) {
        return Err(PipelineError::MissingInput { stage: stage.name(), path: rel.to_path_buf() });
    }
    let bytes = out.read(rel)?;
    w.input(key(rel), &bytes);
    serde_json::from_slice(&bytes).map_err(|e| fail(ind, stage, format!("{}: {e}", rel.display())))
}

/// Data file written by the last enabled data stage before `kind`.
fn previous_csv(cfg: &PipelineConfig, id: &str, kind: StageKind) -> PathBuf {
    [StageKind::Ingest, StageKind::Clean, StageKind::Correspond, StageKind::Privacy]
        .into_iter()
        .rev()
        .find(|k| *k < kind && cfg.is_enabled(*k))
        .and_then(|k| paths::stage_csv(id, k))
        .expect("ingest is always enabled")
}

fn base_context(cfg: &PipelineConfig) -> QaContext {
    QaContext {
        coverage: Some(cfg.project.temporal_coverage),
        marginal_tokens: cfg.project.marginal_tokens.clone(),
        vocabulary: cfg.project.vocabulary.clone(),
        ..QaContext::default()
    }
}

/// Loads the configured table for `meta`, checked or unchecked, recording its digest.
fn table(
    cfg: &PipelineConfig,
    ind: &IndicatorConfig,
    stage: StageKind,
    meta: TableMeta,
    checked: bool,
    w: &mut Work,
) -> Result<CorrespondenceTable, PipelineError> {
    let tc = cfg.correspondence_tables.iter().find(|t| t.meta() == meta).ok_or_else(|| {
        fail(ind, stage, CorrespondenceError::MissingTable { from: meta.from_edition, to: meta.to_edition, level: meta.level })
    })?;
    let path = cfg.resolve(&tc.path);
    let bytes = std::fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
    w.input(key(&tc.path), &bytes);
    let t = if checked { load_table(&bytes, meta) } else { load_table_unchecked(&bytes, meta) };
    t.map_err(|e| fail(ind, stage, format!("{}: {e}", tc.path.display())))
}

fn ingest(cfg: &PipelineConfig, ind: &IndicatorConfig) -> Result<Work, PipelineError> {
    let mut w = Work::default();
    let src = cfg.source(&ind.source_id).expect("validated source");
    let mapping = cfg.mapping(src)?;
    let raw_path = cfg.resolve(&src.table);
    let raw = std::fs::read(&raw_path).map_err(|e| PipelineError::io(&raw_path, e))?;
    w.input(key(&src.table), &raw);
    w.input(format!("mapping:{}", src.descriptor.source_id), pretty(&mapping).as_bytes());
    let (d, report) = parse_raw(&raw, &mapping, &indicator(cfg, ind)?).map_err(|e| fail(ind, StageKind::Ingest, e))?;
    w.decision = format!(
        "parsed {} into {} record(s) at {} {}; {} cell(s) rejected",
        key(&src.table),
        d.len(),
        d.level,
        d.edition,
        report.rejects.len()
    );
    w.file(paths::stage_csv(&ind.id, StageKind::Ingest).expect("data stage"), write_csv(&d));
    w.file(paths::ingest_report(&ind.id), report.to_json());
    Ok(w)
}

fn clean(cfg: &PipelineConfig, out: &OutputTree, ind: &IndicatorConfig) -> Result<Work, PipelineError> {
    let mut w = Work::default();
    let k = StageKind::Clean;
    let d = load(cfg, out, ind, k, &previous_csv(cfg, &ind.id, k), &mut w)?;
    let c = cfg.clean().expect("clean enabled");
    let outcome = clean_until_pass(&d, &c.revisions, &base_context(cfg), c.max_iterations).map_err(|e| fail(ind, k, e))?;
    w.decision = format!(
        "rule revision {} of {} passed QA; {} change(s) logged; {} -> {} record(s)",
        outcome.iterations,
        c.revisions.len().max(1),
        outcome.log.entries.len(),
        d.len(),
        outcome.dataset.len()
    );
    w.file(paths::clean_profile(&ind.id), pretty(&profile(&d)));
    w.file(paths::stage_csv(&ind.id, k).expect("data stage"), write_csv(&outcome.dataset));
    w.file(paths::clean_log(&ind.id), outcome.log.to_jsonl());
    w.file(paths::clean_qa(&ind.id), outcome.report.to_json());
    Ok(w)
}

fn describe_route(plan: &[Step]) -> String {
    plan.iter()
        .map(|s| {
            let t = s.table();
            let dir = if matches!(s, Step::Forward(_)) { "forward" } else { "backward" };
            format!("{dir} via {}->{} {}", t.from_edition, t.to_edition, t.level)
        })
        .collect::<Vec<_>>()
        .join(", then ")
}

fn correspond(cfg: &PipelineConfig, out: &OutputTree, ind: &IndicatorConfig) -> Result<Work, PipelineError> {
    let mut w = Work::default();
    let k = StageKind::Correspond;
    let d = load(cfg, out, ind, k, &previous_csv(cfg, &ind.id, k), &mut w)?;
    let target = cfg.project.target_edition;
    if d.level != cfg.project.target_level {
        return Err(fail(
            ind,
            k,
            format!(
                "dataset is at {} but the project targets {}; levels are not converted",
                d.level, cfg.project.target_level
            ),
        ));
    }
    let metas: Vec<TableMeta> = cfg.correspondence_tables.iter().map(|t| t.meta()).collect();
    let plan = plan_route(d.edition, target, d.level, &metas).map_err(|e| fail(ind, k, e))?;
    let (result, lineage, steps) = if plan.is_empty() {
        w.decision = format!("already at {target}; no correspondence applied");
        (d.clone(), Lineage::untouched(&d), Vec::new())
    } else {
        if d.indicator.value_kind != ValueKind::Count {
            return Err(fail(ind, k, CorrespondenceError::CountsOnly(d.indicator.value_kind)));
        }
        let c = cfg.correspond().expect("correspond enabled");
        let policy = CorrespondencePolicy::new(target)
            .with_threshold(c.discard_threshold)
            .with_boundary_rule(c.boundary_rule);
        policy.check().map_err(|e| fail(ind, k, e))?;
        let tables = plan
            .iter()
            .map(|s| table(cfg, ind, k, s.table(), true, &mut w))
            .collect::<Result<Vec<_>, _>>()?;
        let r = apply_plan(&d, &plan, &tables, &policy).map_err(|e| fail(ind, k, e))?;
        w.decision = format!(
            "{}; discard threshold {} ({:?}); {} -> {} record(s)",
            describe_route(&plan),
            policy.discard_threshold,
            policy.boundary_rule,
            d.len(),
            r.dataset.len()
        );
        (r.dataset, r.lineage, r.steps)
    };
    w.file(paths::stage_csv(&ind.id, k).expect("data stage"), write_csv(&result));
    w.file(paths::lineage(&ind.id), pretty(&lineage));
    w.file(paths::steps(&ind.id), pretty(&steps));
    Ok(w)
}

/// Per-indicator noise seed, so indicators do not share a stream.
fn indicator_seed(seed: u64, id: &str) -> u64 {
    let h = sha256_hex(format!("{seed}:{id}"));
    u64::from_str_radix(&h[..16], 16).expect("hex digest")
}

fn privacy(cfg: &PipelineConfig, out: &OutputTree, ind: &IndicatorConfig, seed: Option<u64>) -> Result<Work, PipelineError> {
    let mut w = Work::default();
    let k = StageKind::Privacy;
    let d = load(cfg, out, ind, k, &previous_csv(cfg, &ind.id, k), &mut w)?;
    let p = cfg.privacy().expect("privacy enabled");
    let csv = paths::stage_csv(&ind.id, k).expect("data stage");
    if d.indicator.value_kind != ValueKind::Count {
        w.decision = format!("{} values are not counts; passed through unchanged", d.indicator.value_kind);
        w.file(csv, write_csv(&d));
        w.file(paths::suppression_log(&ind.id), crate::privacy::SuppressionLog::default().to_json());
        return Ok(w);
    }
    let noisy = if p.noise > 0 {
        let seed = seed.ok_or(PipelineError::NoSeed)?;
        randomize(&d, p.noise, indicator_seed(seed, &ind.id)).map_err(|e| fail(ind, k, e))?
    } else {
        d
    };
    let (s, log) = suppress(&noisy, &p.suppression).map_err(|e| fail(ind, k, e))?;
    w.decision = format!(
        "noise magnitude {}; suppressed {} cell(s) below {}{}",
        p.noise,
        log.total(),
        p.suppression.threshold,
        if p.suppression.suppress_zero { " including zeros" } else { "" }
    );
    w.file(csv, write_csv(&s));
    w.file(paths::suppression_log(&ind.id), log.to_json());
    Ok(w)
}

fn qa(cfg: &PipelineConfig, out: &OutputTree, ind: &IndicatorConfig, opts: &RunOptions) -> Result<Work, PipelineError> {
    let mut w = Work::default();
    let k = StageKind::Qa;
    let d = load(cfg, out, ind, k, &previous_csv(cfg, &ind.id, k), &mut w)?;
    let (lineage, steps): (Lineage, Vec<StepRecord>) = if cfg.is_enabled(StageKind::Correspond) {
        (
            read_json(out, ind, k, &paths::lineage(&ind.id), &mut w)?,
            read_json(out, ind, k, &paths::steps(&ind.id), &mut w)?,
        )
    } else {
        (Lineage::untouched(&d), Vec::new())
    };
    let assigned = assign_uncertainty(&d, &lineage).map_err(|e| fail(ind, k, e))?;
    let (mut kept, removal) = filter_high_uncertainty(&assigned);
    kept.indicator.correspondence_applied = !steps.is_empty();
    let kept = kept.finish();
    let mut ctx = base_context(cfg);
    let mut tables = Vec::new();
    for s in &steps {
        if !tables.iter().any(|t: &CorrespondenceTable| t.meta() == s.table) {
            tables.push(table(cfg, ind, k, s.table, false, &mut w)?);
        }
    }
    ctx.tables = tables;
    ctx.conservation = steps;
    ctx.removal = Some(removal.clone());
    let report = run_rules(&kept, &ctx);
    w.warnings = report.count(Severity::Warning);
    w.qa_failed = !report.pass;
    w.decision = format!(
        "assigned uncertainty; removed {} high-uncertainty record(s); QA {} with {} error(s), {} warning(s){}",
        removal.removed.len(),
        if report.pass { "passed" } else { "failed" },
        report.count(Severity::Error),
        w.warnings,
        if opts.round_counts { "; counts rounded on emission" } else { "" }
    );
    let emitted = if opts.round_counts { round_counts(&kept) } else { kept };
    w.file(paths::final_csv(&ind.id), write_csv(&emitted));
    w.file(paths::qa_report_json(&ind.id), report.to_json());
    w.file(paths::qa_report_txt(&ind.id), report.to_text());
    w.file(paths::removal_log(&ind.id), removal.to_json());
    Ok(w)
}

fn docs(cfg: &PipelineConfig, out: &OutputTree, ind: &IndicatorConfig) -> Result<Work, PipelineError> {
    let mut w = Work::default();
    let k = StageKind::Docs;
    let mut d = load(cfg, out, ind, k, &paths::final_csv(&ind.id), &mut w)?;
    let report: QaReport = read_json(out, ind, k, &paths::qa_report_json(&ind.id), &mut w)?;
    let steps_rel = paths::steps(&ind.id);
    if cfg.is_enabled(StageKind::Correspond) {
        let steps: Vec<StepRecord> = read_json(out, ind, k, &steps_rel, &mut w)?;
        d.indicator.correspondence_applied = !steps.is_empty();
    }
    let d = d.finish();
    let p = &cfg.project;
    let doc = emit_metadata(&d, &report, &p.name, &p.metadata, p.metadata_mode).map_err(|e| fail(ind, k, e))?;
    let src = cfg.source(&ind.source_id).expect("validated source");
    let data_source = format!("{} ({})", src.descriptor.name, src.descriptor.custodian);
    w.entry = Some(DictionaryEntry::from_indicator(&d.indicator, &ind.definition, &data_source, ind.links.clone()));
    w.decision = format!(
        "metadata emitted ({}); uncertainty present: {}",
        if doc.draft { "draft" } else { "complete" },
        d.indicator.max_uncertainty.label()
    );
    w.file(paths::metadata_json(&ind.id), doc.to_json());
    w.file(paths::metadata_md(&ind.id), doc.to_markdown());
    Ok(w)
}

/// Writes the data management plan scaffold from the project's answers.
pub fn write_dmp(cfg: &PipelineConfig, out: &OutputTree) -> Result<(), PipelineError> {
    out.write(paths::DMP, scaffold_dmp(&cfg.project.name, &cfg.project.dmp_answers).as_bytes())
}

fn load_provenance(out: &OutputTree, stage: StageKind) -> Result<ProvenanceLog, PipelineError> {
    if !out.exists(paths::PROVENANCE) {
        return Err(PipelineError::MissingInput { stage: stage.name(), path: PathBuf::from(paths::PROVENANCE) });
    }
    let text = String::from_utf8_lossy(&out.read(paths::PROVENANCE)?).into_owned();
    Ok(ProvenanceLog::from_jsonl(&text)?)
}

fn digests(files: &[(PathBuf, Vec<u8>)]) -> BTreeMap<String, String> {
    files.iter().map(|(p, b)| (key(p), sha256_hex(b))).collect()
}

/// Runs one stage for every indicator and appends its provenance entries.
///
/// Indicators are processed in parallel; nothing is written until all of
/// them succeed, and writes and log entries follow indicator order.
pub fn run_stage(
    cfg: &PipelineConfig,
    kind: StageKind,
    out: &OutputTree,
    opts: &RunOptions,
) -> Result<Summary, PipelineError> {
    if !cfg.is_enabled(kind) {
        return Err(PipelineError::Disabled { stage: kind.name() });
    }
    let timestamp = run_timestamp(cfg)?;
    let seed = opts.seed.or(cfg.seed);
    if kind == StageKind::Privacy && cfg.privacy().is_some_and(|p| p.noise > 0) && seed.is_none() {
        return Err(PipelineError::NoSeed);
    }
    let mut log = if kind == StageKind::Ingest { ProvenanceLog::new() } else { load_provenance(out, kind)? };

    let mut registry = SourceRegistry::new();
    if kind == StageKind::Ingest {
        for s in &cfg.sources {
            registry.register(s.descriptor.clone()).map_err(|e| PipelineError::Config(e.to_string()))?;
        }
    }

    let works: Vec<Result<Work, PipelineError>> = cfg
        .indicators
        .par_iter()
        .map(|ind| match kind {
            StageKind::Ingest => ingest(cfg, ind),
            StageKind::Clean => clean(cfg, out, ind),
            StageKind::Correspond => correspond(cfg, out, ind),
            StageKind::Privacy => privacy(cfg, out, ind, seed),
            StageKind::Qa => qa(cfg, out, ind, opts),
            StageKind::Docs => docs(cfg, out, ind),
        })
        .collect();
    let works = works.into_iter().collect::<Result<Vec<_>, _>>()?;

    let draft = |decision: String, inputs, outputs| EntryDraft {
        timestamp: timestamp.clone(),
        actor: cfg.project.actor.clone(),
        stage: kind.name().to_string(),
        decision_text: decision,
        input_digests: inputs,
        output_digests: outputs,
    };
    let version = env!("CARGO_PKG_VERSION");

    if kind == StageKind::Ingest {
        for rel in [paths::INDICATORS, paths::REGISTRY, paths::DICTIONARY, paths::DICTIONARY_RESEARCHER, paths::DMP] {
            out.remove(rel)?;
        }
        let files = vec![(PathBuf::from(paths::REGISTRY), registry.to_json().into_bytes())];
        out.write(paths::REGISTRY, &files[0].1)?;
        log.record(draft(format!("registered {} source(s)", registry.len()), BTreeMap::new(), digests(&files)), version);
    }

    let mut summary = Summary { stages: vec![kind], warnings: 0 };
    let mut failed = Vec::new();
    let mut entries = Vec::new();
    for (ind, w) in cfg.indicators.iter().zip(works) {
        for (rel, bytes) in &w.files {
            out.write(rel, bytes)?;
        }
        log.record(draft(format!("{}: {}", ind.id, w.decision), w.inputs, digests(&w.files)), version);
        summary.warnings += w.warnings;
        if w.qa_failed {
            failed.push(ind.id.clone());
        }
        entries.extend(w.entry);
    }

    if kind == StageKind::Docs {
        let files = vec![
            (PathBuf::from(paths::DICTIONARY), emit_dictionary(&entries, Audience::Published).into_bytes()),
            (PathBuf::from(paths::DICTIONARY_RESEARCHER), emit_dictionary(&entries, Audience::Researcher).into_bytes()),
            (
                PathBuf::from(paths::DMP),
                scaffold_dmp(&cfg.project.name, &cfg.project.dmp_answers).into_bytes(),
            ),
        ];
        for (rel, bytes) in &files {
            out.write(rel, bytes)?;
        }
        log.record(
            draft(format!("data dictionaries for {} indicator(s); DMP scaffold", entries.len()), BTreeMap::new(), digests(&files)),
            version,
        );
    }

    out.write(paths::PROVENANCE, log.to_jsonl().as_bytes())?;
    if !failed.is_empty() {
        return Err(PipelineError::QaFailed(failed));
    }
    if kind == StageKind::Qa && opts.strict && summary.warnings > 0 {
        return Err(PipelineError::Strict(summary.warnings));
    }
    Ok(summary)
}
