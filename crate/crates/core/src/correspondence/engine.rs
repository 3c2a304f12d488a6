use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CorrespondenceError, CorrespondencePolicy, CorrespondenceTable, Step, TableMeta};
use crate::model::{
    BoundaryEdition, CellValue, Dataset, GeoLevel, Lineage, Measure, RecordKey, StandardRecord, Stratum,
    Touch, UncertaintyLevel, ValueKind,
};

/// Exact value of a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Amount {
    Value(BigRational),
    Suppressed,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRecord {
    pub key: RecordKey,
    pub amount: Amount,
    pub uncertainty: UncertaintyLevel,
}

impl ExactRecord {
    pub fn new(key: RecordKey, amount: Amount, uncertainty: UncertaintyLevel) -> Self {
        Self { key, amount, uncertainty }
    }
}

/// Output of one exact step.
#[derive(Debug, Clone, Default)]
pub struct ExactStep {
    /// Sorted by key.
    pub records: Vec<ExactRecord>,
    pub lineage: Lineage,
    /// Input keys each output was computed from.
    pub contributors: BTreeMap<RecordKey, Vec<RecordKey>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Summary of one applied step, kept for QA and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub direction: Direction,
    pub table: TableMeta,
    pub input_records: usize,
    pub output_records: usize,
    /// Direct sums of the count magnitudes on each side.
    pub input_total: f64,
    pub output_total: f64,
    /// Whether totals are expected to agree: a forward count step with no suppressed input.
    pub conservation_applicable: bool,
}

/// A corresponded dataset with its lineage and the steps that produced it.
#[derive(Debug, Clone)]
pub struct Corresponded {
    pub dataset: Dataset,
    pub lineage: Lineage,
    pub steps: Vec<StepRecord>,
}

type Group<'a> = BTreeMap<Stratum, BTreeMap<&'a str, &'a ExactRecord>>;

fn group(records: &[ExactRecord]) -> Group<'_> {
    let mut g: Group<'_> = BTreeMap::new();
    for r in records {
        g.entry(r.key.stratum()).or_default().insert(r.key.geography.code(), r);
    }
    g
}

fn check_codes(
    records: &[ExactRecord],
    edition: BoundaryEdition,
    level: GeoLevel,
    known: impl Fn(&str) -> bool,
) -> Result<(), CorrespondenceError> {
    let mut missing = BTreeSet::new();
    for r in records {
        let g = &r.key.geography;
        if g.edition() != edition {
            return Err(CorrespondenceError::EditionMismatch { expected: edition, found: g.edition() });
        }
        if g.level() != level {
            return Err(CorrespondenceError::LevelMismatch { expected: level, found: g.level() });
        }
        if !known(g.code()) {
            missing.insert(g.code().to_string());
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CorrespondenceError::Uncovered(missing.into_iter().collect()))
    }
}

struct Out {
    record: ExactRecord,
    touches: Vec<Touch>,
    contributors: Vec<RecordKey>,
}

fn assemble(per_stratum: Vec<Vec<Out>>) -> ExactStep {
    let mut step = ExactStep::default();
    for out in per_stratum.into_iter().flatten() {
        step.lineage.record(out.record.key.clone(), out.touches);
        step.contributors.insert(out.record.key.clone(), out.contributors);
        step.records.push(out.record);
    }
    step.records.sort_by(|a, b| a.key.cmp(&b.key));
    step
}

/// Redistributes `records` (at the table's source edition) over the target regions.
pub fn forward_exact(records: &[ExactRecord], t: &CorrespondenceTable) -> Result<ExactStep, CorrespondenceError> {
    check_codes(records, t.from_edition(), t.level(), |c| t.has_source(c))?;
    let groups: Vec<_> = group(records).into_iter().collect();
    let per_stratum = groups.par_iter().map(|(stratum, by_code)| forward_stratum(stratum, by_code, t)).collect();
    Ok(assemble(per_stratum))
}

#[derive(Default)]
struct Acc {
    sum: BigRational,
    any_value: bool,
    missing: Vec<String>,
    suppressed: Vec<String>,
    uncertainty: UncertaintyLevel,
    contributors: Vec<RecordKey>,
}

fn forward_stratum(
    stratum: &Stratum,
    by_code: &BTreeMap<&str, &ExactRecord>,
    t: &CorrespondenceTable,
) -> Vec<Out> {
    let mut targets: BTreeMap<&str, (Acc, &crate::model::RegionCode)> = BTreeMap::new();
    for (code, rec) in by_code {
        for e in t.edges_from(code) {
            if !e.exact_ratio().is_positive() {
                continue;
            }
            let (acc, _) = targets.entry(e.to.code()).or_insert_with(|| (Acc::default(), &e.to));
            acc.uncertainty = acc.uncertainty.max(rec.uncertainty);
            acc.contributors.push(rec.key.clone());
            match &rec.amount {
                Amount::Value(v) => {
                    acc.sum += e.exact_ratio() * v;
                    acc.any_value = true;
                }
                Amount::Suppressed => acc.suppressed.push(code.to_string()),
                Amount::Missing => acc.missing.push(code.to_string()),
            }
        }
    }
    let step = Touch::Redistributed { from: t.from_edition(), to: t.to_edition() };
    targets
        .into_iter()
        .map(|(_, (acc, region))| {
            let key = RecordKey::new(region.clone(), stratum.calendar_year, &stratum.age_group, &stratum.sex);
            let mut touches = vec![step.clone()];
            let mut uncertainty = acc.uncertainty;
            let amount = if !acc.suppressed.is_empty() {
                touches.push(Touch::SuppressedInput { sources: acc.suppressed });
                Amount::Suppressed
            } else if !acc.any_value {
                Amount::Missing
            } else {
                if !acc.missing.is_empty() {
                    touches.push(Touch::MissingZeroFilled { sources: acc.missing });
                    uncertainty = uncertainty.max(UncertaintyLevel::Medium);
                }
                Amount::Value(acc.sum)
            };
            Out { record: ExactRecord::new(key, amount, uncertainty), touches, contributors: acc.contributors }
        })
        .collect()
}

/// How a source region is rebuilt from the target edition.
enum Plan {
    Reconstruct { sole: Vec<String>, discards: Vec<(String, f64)> },
    Suppress(Vec<(String, f64)>),
    Unresolvable,
}

fn backward_plans(t: &CorrespondenceTable, p: &CorrespondencePolicy) -> BTreeMap<String, (Plan, Vec<String>)> {
    let feeders = |target: &str| t.edges_into(target).filter(|e| e.exact_ratio().is_positive()).count();
    let mut plans = BTreeMap::new();
    for source in t.sources() {
        let mut sole = Vec::new();
        let mut discards = Vec::new();
        let mut offending = Vec::new();
        let mut all_targets = Vec::new();
        for e in t.edges_from(source).filter(|e| e.exact_ratio().is_positive()) {
            let target = e.to.code().to_string();
            all_targets.push(target.clone());
            if feeders(&target) == 1 {
                sole.push(target);
            } else if p.suppresses(e.ratio) {
                offending.push((target, e.ratio));
            } else {
                discards.push((target, e.ratio));
            }
        }
        let plan = if !offending.is_empty() {
            Plan::Suppress(offending)
        } else if sole.is_empty() {
            Plan::Unresolvable
        } else {
            Plan::Reconstruct { sole, discards }
        };
        plans.insert(source.to_string(), (plan, all_targets));
    }
    plans
}

/// Rebuilds the table's source regions from `records` at the table's target edition.
pub fn backward_exact(
    records: &[ExactRecord],
    t: &CorrespondenceTable,
    p: &CorrespondencePolicy,
) -> Result<ExactStep, CorrespondenceError> {
    p.check()?;
    check_codes(records, t.to_edition(), t.level(), |c| t.has_target(c))?;
    let plans = backward_plans(t, p);
    let regions: BTreeMap<&str, &crate::model::RegionCode> =
        t.edges().iter().map(|e| (e.from.code(), &e.from)).collect();
    let groups: Vec<_> = group(records).into_iter().collect();
    let step = Touch::Reconstructed { from: t.to_edition(), to: t.from_edition() };
    let per_stratum = groups
        .par_iter()
        .map(|(stratum, by_code)| {
            let mut outs = Vec::new();
            for (source, (plan, all_targets)) in &plans {
                let key = RecordKey::new(
                    regions[source.as_str()].clone(),
                    stratum.calendar_year,
                    &stratum.age_group,
                    &stratum.sex,
                );
                let present: Vec<&ExactRecord> =
                    all_targets.iter().filter_map(|c| by_code.get(c.as_str()).copied()).collect();
                match plan {
                    Plan::Suppress(offending) => {
                        if present.is_empty() {
                            continue;
                        }
                        let touches = offending
                            .iter()
                            .map(|(target, ratio)| Touch::ThresholdSuppressed { target: target.clone(), ratio: *ratio })
                            .collect();
                        outs.push(suppressed_out(key, touches, &present));
                    }
                    Plan::Unresolvable => {
                        if present.is_empty() {
                            continue;
                        }
                        outs.push(suppressed_out(key, vec![Touch::Unresolvable], &present));
                    }
                    Plan::Reconstruct { sole, discards } => {
                        let inputs: Vec<(&str, &ExactRecord)> = sole
                            .iter()
                            .filter_map(|c| by_code.get(c.as_str()).map(|r| (c.as_str(), *r)))
                            .collect();
                        if inputs.is_empty() {
                            continue;
                        }
                        outs.push(reconstruct(key, &step, &inputs, discards));
                    }
                }
            }
            outs
        })
        .collect();
    Ok(assemble(per_stratum))
}

fn suppressed_out(key: RecordKey, touches: Vec<Touch>, present: &[&ExactRecord]) -> Out {
    Out {
        record: ExactRecord::new(key, Amount::Suppressed, UncertaintyLevel::High),
        touches,
        contributors: present.iter().map(|r| r.key.clone()).collect(),
    }
}

fn reconstruct(key: RecordKey, step: &Touch, inputs: &[(&str, &ExactRecord)], discards: &[(String, f64)]) -> Out {
    let mut sum = BigRational::zero();
    let (mut any_value, mut missing, mut suppressed) = (false, Vec::new(), Vec::new());
    let mut uncertainty = UncertaintyLevel::Low;
    for (code, r) in inputs {
        uncertainty = uncertainty.max(r.uncertainty);
        match &r.amount {
            Amount::Value(v) => {
                sum += v;
                any_value = true;
            }
            Amount::Suppressed => suppressed.push(code.to_string()),
            Amount::Missing => missing.push(code.to_string()),
        }
    }
    let mut touches = vec![step.clone()];
    if !discards.is_empty() {
        uncertainty = uncertainty.max(UncertaintyLevel::Medium);
        touches.extend(
            discards.iter().map(|(target, ratio)| Touch::SubThresholdDiscard { target: target.clone(), ratio: *ratio }),
        );
    }
    let amount = if !suppressed.is_empty() {
        touches.push(Touch::SuppressedInput { sources: suppressed });
        Amount::Suppressed
    } else if !any_value {
        Amount::Missing
    } else {
        if !missing.is_empty() {
            touches.push(Touch::MissingZeroFilled { sources: missing });
            uncertainty = uncertainty.max(UncertaintyLevel::Medium);
        }
        Amount::Value(sum)
    };
    Out {
        record: ExactRecord::new(key, amount, uncertainty),
        touches,
        contributors: inputs.iter().map(|(_, r)| r.key.clone()).collect(),
    }
}

// ---------------------------------------------------------------------------
// Dataset-level wrappers
// ---------------------------------------------------------------------------

fn to_exact(d: &Dataset) -> Result<Vec<ExactRecord>, CorrespondenceError> {
    d.records
        .iter()
        .map(|r| {
            let amount = match r.value.measure {
                Measure::Suppressed => Amount::Suppressed,
                Measure::Missing => Amount::Missing,
                m => {
                    let v = m.magnitude().expect("numeric measure");
                    Amount::Value(BigRational::from_float(v).ok_or_else(|| {
                        CorrespondenceError::Denominator(format!("non-finite value at {}", r.key))
                    })?)
                }
            };
            Ok(ExactRecord::new(r.key.clone(), amount, r.value.uncertainty))
        })
        .collect()
}

fn rounded(a: &Amount, kind: ValueKind) -> Measure {
    match a {
        Amount::Value(v) => Measure::numeric(kind, v.to_f64().unwrap_or(f64::NAN)).unwrap_or(Measure::Missing),
        Amount::Suppressed => Measure::Suppressed,
        Amount::Missing => Measure::Missing,
    }
}

fn emit(d: &Dataset, step: &ExactStep, edition: BoundaryEdition) -> Dataset {
    let kind = d.indicator.value_kind;
    let records = step
        .records
        .iter()
        .map(|r| StandardRecord::new(r.key.clone(), CellValue::new(rounded(&r.amount, kind), r.uncertainty)))
        .collect();
    let mut out = d.with_records(records);
    out.edition = edition;
    out.indicator.correspondence_applied = true;
    out.finish()
}

fn require_counts(d: &Dataset, t: &CorrespondenceTable) -> Result<(), CorrespondenceError> {
    if d.indicator.value_kind != ValueKind::Count {
        return Err(CorrespondenceError::CountsOnly(d.indicator.value_kind));
    }
    if d.level != t.level() {
        return Err(CorrespondenceError::LevelMismatch { expected: t.level(), found: d.level });
    }
    Ok(())
}

fn step_record(direction: Direction, t: &CorrespondenceTable, input: &Dataset, output: &Dataset) -> StepRecord {
    let suppressed_input = input.records.iter().any(|r| r.value.measure == Measure::Suppressed);
    StepRecord {
        direction,
        table: t.meta(),
        input_records: input.len(),
        output_records: output.len(),
        input_total: input.count_total(),
        output_total: output.count_total(),
        conservation_applicable: direction == Direction::Forward
            && input.indicator.value_kind == ValueKind::Count
            && !suppressed_input,
    }
}

/// Forward step on a count dataset.
pub fn forward(d: &Dataset, t: &CorrespondenceTable) -> Result<Corresponded, CorrespondenceError> {
    require_counts(d, t)?;
    if d.edition != t.from_edition() {
        return Err(CorrespondenceError::EditionMismatch { expected: t.from_edition(), found: d.edition });
    }
    let step = forward_exact(&to_exact(d)?, t)?;
    let dataset = emit(d, &step, t.to_edition());
    let record = step_record(Direction::Forward, t, d, &dataset);
    Ok(Corresponded { dataset, lineage: step.lineage, steps: vec![record] })
}

/// Backward step on a count dataset.
pub fn backward(
    d: &Dataset,
    t: &CorrespondenceTable,
    p: &CorrespondencePolicy,
) -> Result<Corresponded, CorrespondenceError> {
    require_counts(d, t)?;
    if d.edition != t.to_edition() {
        return Err(CorrespondenceError::EditionMismatch { expected: t.to_edition(), found: d.edition });
    }
    let step = backward_exact(&to_exact(d)?, t, p)?;
    let dataset = emit(d, &step, t.from_edition());
    let record = step_record(Direction::Backward, t, d, &dataset);
    Ok(Corresponded { dataset, lineage: step.lineage, steps: vec![record] })
}

/// Numerators implied by a rate dataset and its denominator counts.
fn numerators(
    d: &Dataset,
    denom: &Dataset,
    scale: f64,
) -> Result<(Vec<ExactRecord>, Vec<ExactRecord>), CorrespondenceError> {
    if !matches!(d.indicator.value_kind, ValueKind::Rate | ValueKind::Percentage) {
        return Err(CorrespondenceError::Denominator("reweighting applies to rates and percentages".into()));
    }
    if denom.indicator.value_kind != ValueKind::Count {
        return Err(CorrespondenceError::Denominator("denominator must hold counts".into()));
    }
    if denom.edition != d.edition || denom.level != d.level {
        return Err(CorrespondenceError::Denominator("denominator edition or level differs".into()));
    }
    let scale = BigRational::from_float(scale)
        .filter(|s| s.is_positive())
        .ok_or_else(|| CorrespondenceError::Denominator("scale must be positive".into()))?;
    let dens = to_exact(denom)?;
    let by_key: BTreeMap<&RecordKey, &ExactRecord> = dens.iter().map(|r| (&r.key, r)).collect();
    let nums = to_exact(d)?
        .into_iter()
        .map(|r| {
            let amount = match (&r.amount, by_key.get(&r.key).map(|x| &x.amount)) {
                (Amount::Suppressed, _) | (_, Some(Amount::Suppressed)) => Amount::Suppressed,
                (Amount::Value(v), Some(Amount::Value(n))) => Amount::Value(v * n / &scale),
                _ => Amount::Missing,
            };
            let u = by_key.get(&r.key).map_or(r.uncertainty, |x| x.uncertainty.max(r.uncertainty));
            ExactRecord::new(r.key, amount, u)
        })
        .collect();
    Ok((nums, dens))
}

fn rederive(
    d: &Dataset,
    nums: ExactStep,
    dens: ExactStep,
    scale: f64,
    edition: BoundaryEdition,
) -> (Dataset, Lineage) {
    let scale = BigRational::from_float(scale).expect("checked scale");
    let dens_by_key: BTreeMap<&RecordKey, &ExactRecord> = dens.records.iter().map(|r| (&r.key, r)).collect();
    let mut lineage = nums.lineage.clone();
    let records = nums
        .records
        .iter()
        .map(|n| {
            let den = dens_by_key.get(&n.key);
            let amount = match (&n.amount, den.map(|x| &x.amount)) {
                (Amount::Suppressed, _) | (_, Some(Amount::Suppressed)) => Amount::Suppressed,
                (Amount::Value(a), Some(Amount::Value(b))) if !b.is_zero() => Amount::Value(a / b * &scale),
                _ => Amount::Missing,
            };
            let u = den.map_or(n.uncertainty, |x| x.uncertainty.max(n.uncertainty));
            if let Some(t) = dens.lineage.get(&n.key) {
                lineage.record(n.key.clone(), t.to_vec());
            }
            ExactRecord::new(n.key.clone(), amount, u)
        })
        .collect();
    let step = ExactStep { records, lineage: Lineage::new(), contributors: BTreeMap::new() };
    (emit(d, &step, edition), lineage)
}

/// Forward step for a rate or percentage: numerator and denominator counts are
/// redistributed separately and the rate re-derived as `numerator / denominator * scale`.
pub fn forward_with_denominator(
    d: &Dataset,
    denom: &Dataset,
    t: &CorrespondenceTable,
    scale: f64,
) -> Result<Corresponded, CorrespondenceError> {
    if d.edition != t.from_edition() {
        return Err(CorrespondenceError::EditionMismatch { expected: t.from_edition(), found: d.edition });
    }
    let (nums, dens) = numerators(d, denom, scale)?;
    let (n, m) = (forward_exact(&nums, t)?, forward_exact(&dens, t)?);
    let (dataset, lineage) = rederive(d, n, m, scale, t.to_edition());
    let record = step_record(Direction::Forward, t, d, &dataset);
    Ok(Corresponded { dataset, lineage, steps: vec![record] })
}

/// Backward counterpart of [`forward_with_denominator`].
pub fn backward_with_denominator(
    d: &Dataset,
    denom: &Dataset,
    t: &CorrespondenceTable,
    p: &CorrespondencePolicy,
    scale: f64,
) -> Result<Corresponded, CorrespondenceError> {
    if d.edition != t.to_edition() {
        return Err(CorrespondenceError::EditionMismatch { expected: t.to_edition(), found: d.edition });
    }
    let (nums, dens) = numerators(d, denom, scale)?;
    let (n, m) = (backward_exact(&nums, t, p)?, backward_exact(&dens, t, p)?);
    let (dataset, lineage) = rederive(d, n, m, scale, t.from_edition());
    let record = step_record(Direction::Backward, t, d, &dataset);
    Ok(Corresponded { dataset, lineage, steps: vec![record] })
}

/// Runs every step of a route on a count dataset, composing lineage through
/// the intermediate editions.
pub fn apply_plan(
    d: &Dataset,
    plan: &[Step],
    tables: &[CorrespondenceTable],
    p: &CorrespondencePolicy,
) -> Result<Corresponded, CorrespondenceError> {
    if d.indicator.value_kind != ValueKind::Count {
        return Err(CorrespondenceError::CountsOnly(d.indicator.value_kind));
    }
    let mut current = d.clone();
    let mut exact = to_exact(d)?;
    let mut lineage = Lineage::untouched(d);
    let mut steps = Vec::new();
    for s in plan {
        let meta = s.table();
        let t = tables.iter().find(|t| t.meta() == meta).ok_or(CorrespondenceError::MissingTable {
            from: meta.from_edition,
            to: meta.to_edition,
            level: meta.level,
        })?;
        require_counts(&current, t)?;
        let (step, direction) = match s {
            Step::Forward(_) => (forward_exact(&exact, t)?, Direction::Forward),
            Step::Backward(_) => (backward_exact(&exact, t, p)?, Direction::Backward),
        };
        let mut composed = Lineage::new();
        for (key, touches) in step.lineage.iter() {
            let mut all = Vec::new();
            for c in step.contributors.get(key).into_iter().flatten() {
                all.extend(lineage.get(c).unwrap_or_default().iter().cloned());
            }
            all.extend(touches.iter().cloned());
            composed.record(key.clone(), all);
        }
        let next = emit(&current, &step, s.target_edition());
        steps.push(step_record(direction, t, &current, &next));
        current = next;
        exact = step.records;
        lineage = composed;
    }
    Ok(Corresponded { dataset: current, lineage, steps })
}
