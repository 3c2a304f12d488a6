use std::collections::BTreeMap;

use serde::Serialize;

use super::{check_token, Dataset, RecordKey, ValueKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateKey,
    PercentageOutOfRange,
    NegativeMagnitude,
    NonFiniteMagnitude,
    KindMismatch,
    GeographyMismatch,
    YearOutOfCoverage,
    InvalidToken,
    StaleMaxUncertainty,
}

impl ViolationKind {
    pub fn describe(self) -> &'static str {
        match self {
            Self::DuplicateKey => "duplicate key",
            Self::PercentageOutOfRange => "percentage out of range",
            Self::NegativeMagnitude => "negative magnitude",
            Self::NonFiniteMagnitude => "non-finite magnitude",
            Self::KindMismatch => "value kind does not match indicator",
            Self::GeographyMismatch => "geography does not match dataset edition/level",
            Self::YearOutOfCoverage => "year outside temporal coverage",
            Self::InvalidToken => "invalid filter token",
            Self::StaleMaxUncertainty => "indicator max uncertainty is stale",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Index into `Dataset::records`; `None` for dataset-level violations.
    pub row: Option<usize>,
    pub kind: ViolationKind,
    pub key: Option<RecordKey>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn of_kind(&self, kind: ViolationKind) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.kind == kind)
    }
}

/// Checks every dataset invariant. Violations are returned as data.
pub fn validate_dataset(d: &Dataset) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |row: usize, kind: ViolationKind, key: &RecordKey, detail: String| {
        let message = if detail.is_empty() {
            kind.describe().to_string()
        } else {
            format!("{}: {detail}", kind.describe())
        };
        out.push(Violation { row: Some(row), kind, key: Some(key.clone()), message });
    };

    let mut by_key: BTreeMap<&RecordKey, Vec<usize>> = BTreeMap::new();
    for (i, r) in d.records.iter().enumerate() {
        by_key.entry(&r.key).or_default().push(i);
        let key = &r.key;

        if key.geography.edition() != d.edition || key.geography.level() != d.level {
            push(
                i,
                ViolationKind::GeographyMismatch,
                key,
                format!(
                    "{} {} in a {} {} dataset",
                    key.geography.level(),
                    key.geography.edition(),
                    d.level,
                    d.edition
                ),
            );
        }
        for tok in [&key.age_group, &key.sex] {
            if let Err(e) = check_token(tok) {
                push(i, ViolationKind::InvalidToken, key, e.to_string());
            }
        }
        if let Some(span) = d.temporal_coverage {
            if !span.contains(key.calendar_year) {
                push(
                    i,
                    ViolationKind::YearOutOfCoverage,
                    key,
                    format!("{} not in {span}", key.calendar_year),
                );
            }
        }

        let kind = r.value.kind();
        if kind.is_numeric() && kind != d.indicator.value_kind {
            push(
                i,
                ViolationKind::KindMismatch,
                key,
                format!("{kind} cell in a {} indicator", d.indicator.value_kind),
            );
        }
        if let Some(m) = r.value.magnitude() {
            if !m.is_finite() {
                push(i, ViolationKind::NonFiniteMagnitude, key, m.to_string());
            } else if m < 0.0 {
                push(i, ViolationKind::NegativeMagnitude, key, m.to_string());
            } else if kind == ValueKind::Percentage && m > 100.0 {
                push(i, ViolationKind::PercentageOutOfRange, key, m.to_string());
            }
        }
    }

    for (key, rows) in by_key {
        if rows.len() > 1 {
            for &row in &rows {
                push(
                    row,
                    ViolationKind::DuplicateKey,
                    key,
                    format!("{key} at rows {rows:?}"),
                );
            }
        }
    }

    if d.indicator.max_uncertainty != d.max_uncertainty() {
        out.push(Violation {
            row: None,
            kind: ViolationKind::StaleMaxUncertainty,
            key: None,
            message: format!(
                "{}: recorded {}, records reach {}",
                ViolationKind::StaleMaxUncertainty.describe(),
                d.indicator.max_uncertainty.as_u8(),
                d.max_uncertainty().as_u8()
            ),
        });
    }

    out.sort_by(|a, b| a.row.cmp(&b.row).then_with(|| a.kind.cmp(&b.kind)));
    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use proptest::prelude::*;

    fn ds(kind: ValueKind, rows: &[(&str, i32, f64)]) -> Dataset {
        let records = rows
            .iter()
            .map(|&(code, year, v)| {
                let g = RegionCode::new(code, GeoLevel::Sa3, BoundaryEdition::Asgs2016).unwrap();
                StandardRecord::new(
                    RecordKey::new(g, year, "0-4", "F"),
                    CellValue::new(Measure::numeric(kind, v).unwrap(), UncertaintyLevel::Low),
                )
            })
            .collect();
        Dataset::new(
            Indicator::new("i", "I", NestDomain::Learning, kind, "s"),
            BoundaryEdition::Asgs2016,
            GeoLevel::Sa3,
            records,
        )
    }

    #[test]
    fn empty_dataset_is_ok() {
        assert!(validate_dataset(&ds(ValueKind::Count, &[])).is_ok());
    }

    #[test]
    fn duplicate_key_flagged_at_both_rows() {
        let d = ds(ValueKind::Count, &[("A", 2016, 1.0), ("B", 2016, 2.0), ("A", 2016, 3.0)]);
        let rep = validate_dataset(&d);
        let rows: Vec<_> = rep.of_kind(ViolationKind::DuplicateKey).map(|v| v.row).collect();
        assert_eq!(rows, vec![Some(0), Some(2)]);
        assert!(rep.violations[0].message.starts_with("duplicate key"));
    }

    #[test]
    fn percentage_above_hundred() {
        let d = ds(ValueKind::Percentage, &[("A", 2016, 120.0)]);
        let rep = validate_dataset(&d);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].kind, ViolationKind::PercentageOutOfRange);
        assert!(rep.violations[0].message.starts_with("percentage out of range"));
    }

    #[test]
    fn coverage_and_kind_checks() {
        let mut d = ds(ValueKind::Count, &[("A", 2015, 1.0)]).with_coverage(Some(YearSpan::new(2016, 2018)));
        d.records[0].value = CellValue::new(Measure::Rate(1.0), UncertaintyLevel::Low);
        let kinds: Vec<_> = validate_dataset(&d).violations.iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::KindMismatch, ViolationKind::YearOutOfCoverage]);
    }

    #[test]
    fn stale_max_uncertainty_reported() {
        let mut d = ds(ValueKind::Count, &[("A", 2016, 1.0)]);
        d.records[0].value.uncertainty = UncertaintyLevel::Medium;
        let rep = validate_dataset(&d);
        assert_eq!(rep.violations[0].kind, ViolationKind::StaleMaxUncertainty);
        assert!(validate_dataset(&d.finish()).is_ok());
    }

    fn violation_signature(rep: &ValidationReport) -> Vec<(ViolationKind, Option<RecordKey>)> {
        let mut v: Vec<_> = rep.violations.iter().map(|v| (v.kind, v.key.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        v
    }

    proptest! {
        #[test]
        fn sorting_never_masks_violations(
            rows in proptest::collection::vec((0u8..6, 2014i32..2020, -5.0f64..150.0), 0..30)
        ) {
            let owned: Vec<(String, i32, f64)> =
                rows.iter().map(|&(c, y, v)| (format!("R{c}"), y, v)).collect();
            let borrowed: Vec<(&str, i32, f64)> =
                owned.iter().map(|(c, y, v)| (c.as_str(), *y, *v)).collect();
            let d = ds(ValueKind::Percentage, &borrowed).with_coverage(Some(YearSpan::new(2015, 2018)));
            let sorted = d.canonical_sort();
            prop_assert_eq!(
                violation_signature(&validate_dataset(&d)),
                violation_signature(&validate_dataset(&sorted))
            );
            prop_assert_eq!(sorted.canonical_sort(), sorted.clone());
        }
    }
}
