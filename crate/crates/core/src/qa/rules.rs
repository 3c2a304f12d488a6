use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{Finding, QaContext, QaReport, Severity};
use crate::correspondence::LOAD_TOLERANCE;
use crate::model::{validate_dataset, Dataset, Measure, UncertaintyLevel, ValidationReport, ViolationKind};

/// Relative tolerance for the mass-conservation check.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QaRule {
    pub rule_id: &'static str,
    pub severity: Severity,
    pub description: &'static str,
}

struct Input<'a> {
    d: &'a Dataset,
    ctx: &'a QaContext,
    validation: ValidationReport,
}

type Check = fn(&Input<'_>) -> Vec<(String, String)>;

const RULES: [(QaRule, Check); 11] = [
    (
        QaRule {
            rule_id: "correspondence.ratio_sum",
            severity: Severity::Error,
            description: "ratios out of each source region of an attached correspondence table sum to 1",
        },
        ratio_sum,
    ),
    (
        QaRule {
            rule_id: "indicator.fully_removed",
            severity: Severity::Warning,
            description: "high-uncertainty removal left the indicator without records",
        },
        fully_removed,
    ),
    (
        QaRule {
            rule_id: "key.duplicate",
            severity: Severity::Error,
            description: "each (geography, year, age group, sex) key occurs once",
        },
        duplicate,
    ),
    (
        QaRule {
            rule_id: "mass.conservation",
            severity: Severity::Error,
            description: "forward correspondence preserves count totals within 1e-9 relative",
        },
        mass,
    ),
    (
        QaRule {
            rule_id: "percentage.range",
            severity: Severity::Error,
            description: "percentages lie in [0, 100]",
        },
        percentage,
    ),
    (
        QaRule {
            rule_id: "schema.conformance",
            severity: Severity::Error,
            description: "records match the dataset's edition, level, value kind and token vocabulary",
        },
        schema,
    ),
    (
        QaRule {
            rule_id: "suppression.recoverable",
            severity: Severity::Warning,
            description: "a suppressed cell can be recovered by subtraction from a published marginal",
        },
        recoverable,
    ),
    (
        QaRule {
            rule_id: "temporal.coverage_gap",
            severity: Severity::Warning,
            description: "every year of the declared coverage has records",
        },
        coverage_gap,
    ),
    (
        QaRule {
            rule_id: "temporal.out_of_range",
            severity: Severity::Error,
            description: "every record's year lies inside the declared coverage",
        },
        out_of_range,
    ),
    (
        QaRule {
            rule_id: "uncertainty.high_retained",
            severity: Severity::Error,
            description: "no high-uncertainty record remains in the output",
        },
        high_retained,
    ),
    (
        QaRule {
            rule_id: "value.negative",
            severity: Severity::Error,
            description: "counts, rates and percentages are non-negative",
        },
        negative,
    ),
];

/// The built-in rules in the order their findings are reported.
pub fn registry() -> Vec<QaRule> {
    RULES.iter().map(|(r, _)| *r).collect()
}

/// Runs every built-in rule. The dataset is not modified.
pub fn run_rules(d: &Dataset, ctx: &QaContext) -> QaReport {
    let mut view = d.clone();
    if ctx.coverage.is_some() {
        view.temporal_coverage = ctx.coverage;
    }
    let input = Input { d: &view, ctx, validation: validate_dataset(&view) };
    let per_rule: Vec<Vec<Finding>> = RULES
        .par_iter()
        .map(|(rule, check)| {
            check(&input)
                .into_iter()
                .map(|(locator, message)| Finding {
                    rule_id: rule.rule_id.to_string(),
                    severity: rule.severity,
                    locator,
                    message,
                })
                .collect()
        })
        .collect();
    QaReport::new(d.indicator.id.clone(), per_rule.into_iter().flatten().collect())
}

fn violations(i: &Input<'_>, kinds: &[ViolationKind]) -> Vec<(String, String)> {
    i.validation
        .violations
        .iter()
        .filter(|v| kinds.contains(&v.kind))
        .map(|v| {
            let locator = match (&v.row, &v.key) {
                (Some(row), Some(key)) => format!("row {row} ({key})"),
                _ => "dataset".to_string(),
            };
            (locator, v.message.clone())
        })
        .collect()
}

fn schema(i: &Input<'_>) -> Vec<(String, String)> {
    let mut out = violations(
        i,
        &[
            ViolationKind::GeographyMismatch,
            ViolationKind::KindMismatch,
            ViolationKind::NonFiniteMagnitude,
            ViolationKind::InvalidToken,
            ViolationKind::StaleMaxUncertainty,
        ],
    );
    if let Some(vocab) = &i.ctx.vocabulary {
        for (row, r) in i.d.records.iter().enumerate() {
            if !vocab.age_groups.is_empty() && !vocab.age_groups.contains(&r.key.age_group) {
                out.push((format!("row {row} ({})", r.key), format!("age group {:?} not in vocabulary", r.key.age_group)));
            }
            if !vocab.sexes.is_empty() && !vocab.sexes.contains(&r.key.sex) {
                out.push((format!("row {row} ({})", r.key), format!("sex {:?} not in vocabulary", r.key.sex)));
            }
        }
    }
    out
}

fn duplicate(i: &Input<'_>) -> Vec<(String, String)> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for v in i.validation.of_kind(ViolationKind::DuplicateKey) {
        if let (Some(row), Some(key)) = (v.row, &v.key) {
            groups.entry(key.to_string()).or_default().push(row);
        }
    }
    groups
        .into_iter()
        .map(|(key, rows)| (key.clone(), format!("duplicate key {key} at rows {rows:?}")))
        .collect()
}

fn negative(i: &Input<'_>) -> Vec<(String, String)> {
    violations(i, &[ViolationKind::NegativeMagnitude])
}

fn percentage(i: &Input<'_>) -> Vec<(String, String)> {
    violations(i, &[ViolationKind::PercentageOutOfRange])
}

fn out_of_range(i: &Input<'_>) -> Vec<(String, String)> {
    violations(i, &[ViolationKind::YearOutOfCoverage])
}

fn coverage_gap(i: &Input<'_>) -> Vec<(String, String)> {
    let Some(span) = i.d.temporal_coverage else { return Vec::new() };
    if i.d.is_empty() {
        return Vec::new();
    }
    let present: BTreeSet<i32> = i.d.records.iter().map(|r| r.key.calendar_year).collect();
    span.years()
        .filter(|y| !present.contains(y))
        .map(|y| ("dataset".to_string(), format!("temporal coverage gap: {y}")))
        .collect()
}

fn recoverable(i: &Input<'_>) -> Vec<(String, String)> {
    let marginal = |t: &str| i.ctx.marginal_tokens.iter().any(|m| m == t);
    let mut hits: BTreeMap<usize, String> = BTreeMap::new();
    // Sex varies within (region, year, age); age varies within (region, year, sex).
    for sex_varies in [true, false] {
        let mut groups: BTreeMap<(String, i32, String), Vec<usize>> = BTreeMap::new();
        for (row, r) in i.d.records.iter().enumerate() {
            let fixed = if sex_varies { &r.key.age_group } else { &r.key.sex };
            groups
                .entry((r.key.geography.code().to_string(), r.key.calendar_year, fixed.clone()))
                .or_default()
                .push(row);
        }
        for rows in groups.values() {
            let token = |row: usize| {
                let k = &i.d.records[row].key;
                if sex_varies { k.sex.as_str() } else { k.age_group.as_str() }
            };
            let total = rows
                .iter()
                .find(|&&row| marginal(token(row)) && i.d.records[row].value.magnitude().is_some());
            let Some(&total) = total else { continue };
            let parts: Vec<usize> = rows.iter().copied().filter(|&row| !marginal(token(row))).collect();
            let hidden: Vec<usize> = parts
                .iter()
                .copied()
                .filter(|&row| i.d.records[row].value.measure == Measure::Suppressed)
                .collect();
            let known = parts.iter().all(|&row| {
                i.d.records[row].value.measure == Measure::Suppressed || i.d.records[row].value.magnitude().is_some()
            });
            if hidden.len() == 1 && known {
                let what = if sex_varies { "sex" } else { "age group" };
                hits.entry(hidden[0]).or_insert_with(|| {
                    format!(
                        "suppressed cell recoverable from the {what} total {:?} by subtraction",
                        token(total)
                    )
                });
            }
        }
    }
    hits.into_iter().map(|(row, msg)| (format!("row {row} ({})", i.d.records[row].key), msg)).collect()
}

fn ratio_sum(i: &Input<'_>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for t in &i.ctx.tables {
        let m = t.meta();
        for (code, sum) in t.ratio_sum_offenders(LOAD_TOLERANCE) {
            out.push((
                format!("table {}->{} {} source {code}", m.from_edition, m.to_edition, m.level),
                format!("ratios for {code} sum to {sum}"),
            ));
        }
    }
    out
}

fn mass(i: &Input<'_>) -> Vec<(String, String)> {
    i.ctx
        .conservation
        .iter()
        .filter(|s| s.conservation_applicable)
        .filter(|s| (s.output_total - s.input_total).abs() > MASS_TOLERANCE * s.input_total.abs())
        .map(|s| {
            (
                format!("step {}->{}", s.table.from_edition, s.table.to_edition),
                format!(
                    "mass conservation violated: input total {}, output total {}",
                    s.input_total, s.output_total
                ),
            )
        })
        .collect()
}

fn fully_removed(i: &Input<'_>) -> Vec<(String, String)> {
    match &i.ctx.removal {
        Some(log) if i.d.is_empty() && !log.removed.is_empty() => vec![(
            "dataset".to_string(),
            format!("indicator fully removed: all {} record(s) had high uncertainty", log.removed.len()),
        )],
        _ => Vec::new(),
    }
}

fn high_retained(i: &Input<'_>) -> Vec<(String, String)> {
    i.d.records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.value.uncertainty == UncertaintyLevel::High)
        .map(|(row, r)| (format!("row {row} ({})", r.key), "high-uncertainty record retained".to_string()))
        .collect()
}
