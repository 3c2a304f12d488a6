use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{validate_dataset, Dataset, Measure, RecordKey, ViolationKind};

/// Read-only pre-clean diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub records: usize,
    pub missing: usize,
    pub suppressed: usize,
    /// Keys that occur more than once.
    pub duplicate_groups: usize,
    /// Records beyond the first in each duplicate group.
    pub duplicate_rows: usize,
    pub out_of_range: usize,
    pub regions: usize,
    pub years: Vec<i32>,
    pub age_groups: Vec<String>,
    pub sexes: Vec<String>,
}

pub fn profile(d: &Dataset) -> Profile {
    let mut keys: BTreeMap<&RecordKey, usize> = BTreeMap::new();
    let mut regions = BTreeSet::new();
    let mut years = BTreeSet::new();
    let mut ages = BTreeSet::new();
    let mut sexes = BTreeSet::new();
    let (mut missing, mut suppressed) = (0, 0);
    for r in &d.records {
        *keys.entry(&r.key).or_default() += 1;
        regions.insert(r.key.geography.code());
        years.insert(r.key.calendar_year);
        ages.insert(r.key.age_group.clone());
        sexes.insert(r.key.sex.clone());
        match r.value.measure {
            Measure::Missing => missing += 1,
            Measure::Suppressed => suppressed += 1,
            _ => {}
        }
    }
    let duplicate_groups = keys.values().filter(|&&n| n > 1).count();
    let duplicate_rows = keys.values().filter(|&&n| n > 1).map(|n| n - 1).sum();
    let out_of_range = validate_dataset(d)
        .violations
        .iter()
        .filter(|v| {
            matches!(
                v.kind,
                ViolationKind::NegativeMagnitude
                    | ViolationKind::PercentageOutOfRange
                    | ViolationKind::NonFiniteMagnitude
                    | ViolationKind::YearOutOfCoverage
            )
        })
        .count();

    Profile {
        records: d.len(),
        missing,
        suppressed,
        duplicate_groups,
        duplicate_rows,
        out_of_range,
        regions: regions.len(),
        years: years.into_iter().collect(),
        age_groups: ages.into_iter().collect(),
        sexes: sexes.into_iter().collect(),
    }
}
