//! Declared, replayable cleaning of a parsed dataset.
//!
//! Only mechanical repairs are available: whitespace, code case, two-digit
//! years, missing-row policy and duplicate resolution. Every change lands in a
//! [`CleaningLog`] that can be replayed against the input to reproduce the
//! output exactly.

mod log;
mod profile;
mod rules;

use std::collections::BTreeMap;

use thiserror::Error;

pub use log::{CleaningLog, Field, LogEntry};
pub use profile::{profile, Profile};
pub use rules::{CleaningRuleSet, DedupePolicy, MissingPolicy, YearPattern};

use crate::model::{
    format_magnitude, validate_dataset, CellValue, Dataset, Measure, RecordKey, StandardRecord,
    ValueKind, Violation,
};

#[derive(Debug, Error)]
pub enum CleaningError {
    #[error("duplicate keys present with dedupe_policy=error: {}", list_keys(.0))]
    Duplicates(Vec<RecordKey>),
    #[error("cannot sum duplicates of {key}: {reason}")]
    Unsummable { key: RecordKey, reason: String },
    #[error("cleaned dataset still has {} violation(s); first: {}", .0.len(), .0[0].message)]
    Unresolved(Vec<Violation>),
    #[error("cleaning log cannot be replayed: {0}")]
    Replay(String),
    #[error("invalid year pattern {0:?} (expected e.g. \"YY->2000+YY\")")]
    YearPattern(String),
}

fn list_keys(keys: &[RecordKey]) -> String {
    keys.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

pub(crate) fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub(crate) fn value_text(v: &CellValue) -> String {
    match v.measure {
        Measure::Suppressed => "S".into(),
        Measure::Missing => String::new(),
        Measure::Count(m) | Measure::Rate(m) | Measure::Percentage(m) => format_magnitude(m),
    }
}

/// Applies the rule set to `d` and returns the cleaned dataset with its log.
pub fn clean(d: &Dataset, rules: &CleaningRuleSet) -> Result<(Dataset, CleaningLog), CleaningError> {
    let mut log = CleaningLog::default();
    let mut rows: Vec<Option<StandardRecord>> = d.records.iter().cloned().map(Some).collect();

    for (i, slot) in rows.iter_mut().enumerate() {
        let rec = slot.as_mut().expect("all rows present");
        normalize_record(i, rec, rules, &mut log);
    }

    if rules.missing_policy == MissingPolicy::DropRow {
        for (i, slot) in rows.iter_mut().enumerate() {
            if matches!(slot, Some(r) if r.value.measure == Measure::Missing) {
                let r = slot.take().expect("checked");
                log.push(LogEntry::removal(i, &r, "missing_drop", "missing value row dropped"));
            }
        }
    }

    let mut groups: BTreeMap<RecordKey, Vec<usize>> = BTreeMap::new();
    for (i, slot) in rows.iter().enumerate() {
        if let Some(r) = slot {
            groups.entry(r.key.clone()).or_default().push(i);
        }
    }
    let duplicates: Vec<(RecordKey, Vec<usize>)> =
        groups.into_iter().filter(|(_, idx)| idx.len() > 1).collect();

    match rules.dedupe_policy {
        DedupePolicy::Error if !duplicates.is_empty() => {
            return Err(CleaningError::Duplicates(duplicates.into_iter().map(|(k, _)| k).collect()));
        }
        DedupePolicy::Error => {}
        DedupePolicy::KeepFirst => {
            for (_, idx) in &duplicates {
                for &i in &idx[1..] {
                    let r = rows[i].take().expect("grouped rows exist");
                    log.push(LogEntry::removal(i, &r, "dedupe_keep_first", "replicated entry removed"));
                }
            }
        }
        DedupePolicy::Sum => {
            for (key, idx) in &duplicates {
                let merged = sum_group(key, idx.iter().map(|&i| rows[i].as_ref().expect("present")))?;
                let first = idx[0];
                let kept = rows[first].as_mut().expect("present");
                if value_text(&kept.value) != value_text(&merged) {
                    log.push(LogEntry::change(
                        first,
                        Field::Value,
                        value_text(&kept.value),
                        value_text(&merged),
                        "dedupe_sum",
                    ));
                }
                if kept.value.uncertainty != merged.uncertainty {
                    log.push(LogEntry::change(
                        first,
                        Field::Uncertainty,
                        kept.value.uncertainty.as_u8().to_string(),
                        merged.uncertainty.as_u8().to_string(),
                        "dedupe_sum",
                    ));
                }
                kept.value = merged;
                for &i in &idx[1..] {
                    let r = rows[i].take().expect("present");
                    log.push(LogEntry::removal(i, &r, "dedupe_sum", "replicated entry merged by sum"));
                }
            }
        }
    }

    let out = d.with_records(rows.into_iter().flatten().collect()).finish();
    let report = validate_dataset(&out);
    if !report.is_ok() {
        return Err(CleaningError::Unresolved(report.violations));
    }
    Ok((out, log))
}

fn normalize_record(i: usize, rec: &mut StandardRecord, rules: &CleaningRuleSet, log: &mut CleaningLog) {
    let mut code = rec.key.geography.code().to_string();
    let original = code.clone();
    if rules.whitespace_normalization {
        let ws = normalize_whitespace(&code);
        if ws != code {
            log.push(LogEntry::change(i, Field::Geography, code.clone(), ws.clone(), "whitespace_normalization"));
            code = ws;
        }
    }
    if rules.code_case_fold {
        let folded = code.to_uppercase();
        if folded != code {
            log.push(LogEntry::change(i, Field::Geography, code.clone(), folded.clone(), "code_case_fold"));
            code = folded;
        }
    }
    if code != original {
        rec.key.geography = rec.key.geography.with_code(code).expect("normalized code stays valid");
    }

    if rules.whitespace_normalization {
        for (field, tok) in [(Field::AgeGroup, &mut rec.key.age_group), (Field::Sex, &mut rec.key.sex)] {
            let ws = normalize_whitespace(tok);
            if ws != *tok && !ws.is_empty() {
                log.push(LogEntry::change(i, field, tok.clone(), ws.clone(), "whitespace_normalization"));
                *tok = ws;
            }
        }
    }

    if let Some(year) = rules.coerce_year(rec.key.calendar_year) {
        log.push(LogEntry::change(
            i,
            Field::CalendarYear,
            rec.key.calendar_year.to_string(),
            year.to_string(),
            "year_coercion",
        ));
        rec.key.calendar_year = year;
    }
}

fn sum_group<'a>(
    key: &RecordKey,
    members: impl Iterator<Item = &'a StandardRecord>,
) -> Result<CellValue, CleaningError> {
    let mut total = 0.0;
    let mut any_count = false;
    let mut uncertainty = Default::default();
    for r in members {
        uncertainty = std::cmp::max(uncertainty, r.value.uncertainty);
        match r.value.measure {
            Measure::Count(v) => {
                total += v;
                any_count = true;
            }
            Measure::Missing => {}
            Measure::Suppressed => {
                return Err(CleaningError::Unsummable {
                    key: key.clone(),
                    reason: "a suppressed cell has no magnitude to add".into(),
                })
            }
            Measure::Rate(_) | Measure::Percentage(_) => {
                return Err(CleaningError::Unsummable {
                    key: key.clone(),
                    reason: format!("summing is defined for {} cells only", ValueKind::Count),
                })
            }
        }
    }
    let measure = if any_count { Measure::Count(total) } else { Measure::Missing };
    Ok(CellValue::new(measure, uncertainty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use proptest::prelude::*;

    fn rec(code: &str, year: i32, sex: &str, m: Measure) -> StandardRecord {
        let g = RegionCode::new(code, GeoLevel::Sa2, BoundaryEdition::Asgs2016).unwrap();
        StandardRecord::new(RecordKey::new(g, year, "0-4", sex), CellValue::new(m, UncertaintyLevel::Low))
    }

    fn ds(records: Vec<StandardRecord>) -> Dataset {
        Dataset::new(
            Indicator::new("i", "I", NestDomain::Healthy, ValueKind::Count, "s"),
            BoundaryEdition::Asgs2016,
            GeoLevel::Sa2,
            records,
        )
    }

    fn rules(policy: DedupePolicy) -> CleaningRuleSet {
        CleaningRuleSet { dedupe_policy: policy, ..Default::default() }
    }

    #[test]
    fn keep_first_removes_replicated_entry() {
        let d = ds(vec![rec("A", 2016, "F", Measure::Count(3.0)), rec("A", 2016, "F", Measure::Count(3.0))]);
        let (out, log) = clean(&d, &rules(DedupePolicy::KeepFirst)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(log.entries.len(), 1);
        assert_eq!(log.entries[0].message.as_deref(), Some("replicated entry removed"));
    }

    #[test]
    fn default_policy_fails_on_duplicates() {
        let d = ds(vec![
            rec("A", 2016, "F", Measure::Count(3.0)),
            rec("A", 2016, "F", Measure::Count(4.0)),
            rec("B", 2016, "F", Measure::Count(1.0)),
            rec("B", 2016, "F", Measure::Count(1.0)),
        ]);
        match clean(&d, &CleaningRuleSet::default()) {
            Err(CleaningError::Duplicates(keys)) => assert_eq!(keys.len(), 2),
            other => panic!("expected duplicates error, got {other:?}"),
        }
    }

    #[test]
    fn whitespace_normalization_trims_codes() {
        let d = ds(vec![rec(" 10102 ", 2016, "F", Measure::Count(3.0))]);
        let r = CleaningRuleSet { whitespace_normalization: true, ..Default::default() };
        let (out, log) = clean(&d, &r).unwrap();
        assert_eq!(out.records[0].key.geography.code(), "10102");
        assert_eq!(log.entries[0].field, Field::Geography);
        assert_eq!(log.entries[0].rule_id, "whitespace_normalization");
    }

    #[test]
    fn two_digit_years_are_coerced() {
        // Hand-mapped fixture years under YY->2000+YY.
        let table = [(16, 2016), (6, 2006), (99, 2099), (0, 2000), (2016, 2016), (100, 100)];
        let r = CleaningRuleSet {
            year_format_coercions: vec!["YY->2000+YY".parse().unwrap()],
            ..Default::default()
        };
        for (raw, expected) in table {
            let d = ds(vec![rec("A", raw, "F", Measure::Count(1.0))]);
            let (out, _) = clean(&d, &r).unwrap();
            assert_eq!(out.records[0].key.calendar_year, expected, "raw year {raw}");
        }
    }

    #[test]
    fn sum_policy_merges_counts_and_refuses_suppressed() {
        let d = ds(vec![
            rec("A", 2016, "F", Measure::Count(3.0)),
            rec("A", 2016, "F", Measure::Missing),
            rec("A", 2016, "F", Measure::Count(4.0)),
        ]);
        let (out, _) = clean(&d, &rules(DedupePolicy::Sum)).unwrap();
        assert_eq!(out.records[0].value.measure, Measure::Count(7.0));

        let d = ds(vec![rec("A", 2016, "F", Measure::Count(3.0)), rec("A", 2016, "F", Measure::Suppressed)]);
        assert!(matches!(clean(&d, &rules(DedupePolicy::Sum)), Err(CleaningError::Unsummable { .. })));
    }

    #[test]
    fn drop_row_policy_removes_missing() {
        let d = ds(vec![rec("A", 2016, "F", Measure::Missing), rec("B", 2016, "F", Measure::Count(1.0))]);
        let r = CleaningRuleSet { missing_policy: MissingPolicy::DropRow, ..Default::default() };
        let (out, log) = clean(&d, &r).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(log.entries[0].field, Field::Record);
    }

    #[test]
    fn unresolvable_violations_are_reported() {
        let d = ds(vec![rec("A", 2016, "F", Measure::Count(-1.0))]);
        assert!(matches!(clean(&d, &CleaningRuleSet::default()), Err(CleaningError::Unresolved(_))));
    }

    fn arb_dataset() -> impl Strategy<Value = Dataset> {
        let code = prop_oneof![Just("a1"), Just(" a1"), Just("A1 "), Just("b2"), Just("B2")];
        let year = prop_oneof![Just(16), Just(2016), Just(17), Just(2017)];
        let sex = prop_oneof![Just("F"), Just(" F"), Just("M")];
        let m = prop_oneof![
            (0u32..50).prop_map(|v| Measure::Count(v as f64)),
            Just(Measure::Missing),
        ];
        proptest::collection::vec((code, year, sex, m), 0..20)
            .prop_map(|rows| ds(rows.into_iter().map(|(c, y, s, m)| rec(c, y, s, m)).collect()))
    }

    fn all_rules(policy: DedupePolicy) -> CleaningRuleSet {
        CleaningRuleSet {
            dedupe_policy: policy,
            whitespace_normalization: true,
            code_case_fold: true,
            year_format_coercions: vec![YearPattern::new(2000)],
            missing_policy: MissingPolicy::KeepAsMissing,
        }
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(d in arb_dataset(), keep in any::<bool>()) {
            let r = all_rules(if keep { DedupePolicy::KeepFirst } else { DedupePolicy::Sum });
            let (once, _) = clean(&d, &r).unwrap();
            let (twice, log2) = clean(&once, &r).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(log2.entries.is_empty());
        }

        #[test]
        fn sum_conserves_count_mass(d in arb_dataset()) {
            let (out, _) = clean(&d, &all_rules(DedupePolicy::Sum)).unwrap();
            prop_assert_eq!(out.count_total(), d.count_total());
        }

        #[test]
        fn log_replay_reproduces_output(d in arb_dataset(), keep in any::<bool>()) {
            let r = all_rules(if keep { DedupePolicy::KeepFirst } else { DedupePolicy::Sum });
            let (out, log) = clean(&d, &r).unwrap();
            let text = log.to_jsonl();
            let parsed = CleaningLog::from_jsonl(&text).unwrap();
            prop_assert_eq!(parsed.replay(&d).unwrap(), out);
        }
    }
}
