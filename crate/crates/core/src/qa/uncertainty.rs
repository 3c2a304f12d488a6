use serde::{Deserialize, Serialize};

use super::QaError;
use crate::model::{Dataset, Lineage, RecordKey, Touch, UncertaintyLevel};

/// The assignment rule in words, for dictionaries and metadata.
pub const ASSIGNMENT_RULE: &str = "0 (low): no approximation was applied to the value. \
1 (medium): correspondence discarded only contributions below the discard threshold, \
or missing inputs were counted as zero. \
2 (high): backward correspondence suppressed the region or its redistribution was unresolvable; \
these records are removed before release.";

/// Level implied by the operations that touched a record.
pub fn level_for(touches: &[Touch]) -> UncertaintyLevel {
    let high = touches.iter().any(|t| matches!(t, Touch::ThresholdSuppressed { .. } | Touch::Unresolvable));
    let medium = touches
        .iter()
        .any(|t| matches!(t, Touch::SubThresholdDiscard { .. } | Touch::MissingZeroFilled { .. }));
    if high {
        UncertaintyLevel::High
    } else if medium {
        UncertaintyLevel::Medium
    } else {
        UncertaintyLevel::Low
    }
}

/// Raises each record's level to what its lineage implies. Levels never drop.
pub fn assign_uncertainty(d: &Dataset, lineage: &Lineage) -> Result<Dataset, QaError> {
    let mut out = d.clone();
    for r in &mut out.records {
        let touches = lineage.get(&r.key).ok_or_else(|| QaError::MissingProvenance(r.key.clone()))?;
        r.value.uncertainty = r.value.uncertainty.max(level_for(touches));
    }
    Ok(out.finish())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalLog {
    pub indicator_id: String,
    pub removed: Vec<RecordKey>,
}

impl RemovalLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("log serializes") + "\n"
    }
}

/// Drops every High record; Low and Medium stay.
pub fn filter_high_uncertainty(d: &Dataset) -> (Dataset, RemovalLog) {
    let (removed, kept): (Vec<_>, Vec<_>) =
        d.records.iter().cloned().partition(|r| r.value.uncertainty == UncertaintyLevel::High);
    let log = RemovalLog { indicator_id: d.indicator.id.clone(), removed: removed.into_iter().map(|r| r.key).collect() };
    (d.with_records(kept).finish(), log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn ds(levels: &[UncertaintyLevel]) -> Dataset {
        let records = levels
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let g = RegionCode::new(format!("R{i}"), GeoLevel::Sa3, BoundaryEdition::Asgs2016).unwrap();
                StandardRecord::new(RecordKey::new(g, 2016, "ALL", "P"), CellValue::count(i as f64).with_uncertainty(*u))
            })
            .collect();
        Dataset::new(
            Indicator::new("i", "I", NestDomain::Healthy, ValueKind::Count, "s"),
            BoundaryEdition::Asgs2016,
            GeoLevel::Sa3,
            records,
        )
        .finish()
    }

    #[test]
    fn levels_follow_touches() {
        use BoundaryEdition::*;
        assert_eq!(level_for(&[]), UncertaintyLevel::Low);
        assert_eq!(level_for(&[Touch::Redistributed { from: Asgs2011, to: Asgs2016 }]), UncertaintyLevel::Low);
        assert_eq!(
            level_for(&[Touch::SubThresholdDiscard { target: "D".into(), ratio: 0.05 }]),
            UncertaintyLevel::Medium
        );
        assert_eq!(level_for(&[Touch::MissingZeroFilled { sources: vec!["A".into()] }]), UncertaintyLevel::Medium);
        assert_eq!(
            level_for(&[Touch::ThresholdSuppressed { target: "D".into(), ratio: 0.5 }]),
            UncertaintyLevel::High
        );
        assert_eq!(level_for(&[Touch::Unresolvable]), UncertaintyLevel::High);
    }

    #[test]
    fn missing_provenance_is_fatal() {
        let d = ds(&[UncertaintyLevel::Low]);
        assert!(matches!(assign_uncertainty(&d, &Lineage::new()), Err(QaError::MissingProvenance(_))));
        assert_eq!(assign_uncertainty(&d, &Lineage::untouched(&d)).unwrap(), d);
    }

    #[test]
    fn filter_semantics() {
        use UncertaintyLevel::*;
        let all_low = ds(&[Low; 4]);
        let (out, log) = filter_high_uncertainty(&all_low);
        assert_eq!(out, all_low);
        assert!(log.removed.is_empty());

        let mixed = ds(&[Low, High, Medium, Low, Low, High, Low, Medium, Low, Low]);
        let (out, log) = filter_high_uncertainty(&mixed);
        assert_eq!((out.len(), log.removed.len()), (8, 2));
        assert_eq!(out.indicator.max_uncertainty, Medium);

        let (out, log) = filter_high_uncertainty(&ds(&[High; 3]));
        assert!(out.is_empty());
        assert_eq!(log.removed.len(), 3);
    }
}
