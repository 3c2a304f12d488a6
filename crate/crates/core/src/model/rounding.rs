use std::collections::BTreeMap;

use super::{Dataset, Measure, Stratum};

/// Rounds count cells to integers, stratum by stratum, so that each
/// stratum's total equals its rounded fractional total (largest remainder).
///
/// Ties on the remainder go to the record that sorts first.
pub fn round_counts(d: &Dataset) -> Dataset {
    let d = d.canonical_sort();
    let mut groups: BTreeMap<Stratum, Vec<usize>> = BTreeMap::new();
    for (i, r) in d.records.iter().enumerate() {
        if let Measure::Count(_) = r.value.measure {
            groups.entry(r.key.stratum()).or_default().push(i);
        }
    }

    let mut records = d.records.clone();
    for idx in groups.values() {
        let values: Vec<f64> = idx
            .iter()
            .map(|&i| d.records[i].value.magnitude().unwrap_or(0.0))
            .collect();
        let total: f64 = values.iter().sum();
        let floors: Vec<f64> = values.iter().map(|v| v.floor()).collect();
        let floor_total: f64 = floors.iter().sum();
        let mut units = (total.round() - floor_total).max(0.0) as usize;

        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = values[a] - floors[a];
            let rb = values[b] - floors[b];
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut rounded = floors.clone();
        for &j in &order {
            if units == 0 {
                break;
            }
            if values[j] > floors[j] {
                rounded[j] += 1.0;
                units -= 1;
            }
        }
        for (k, &i) in idx.iter().enumerate() {
            records[i].value.measure = Measure::Count(rounded[k]);
        }
    }
    d.with_records(records).finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use proptest::prelude::*;

    fn ds(values: &[f64]) -> Dataset {
        let records = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let g = RegionCode::new(format!("R{i:02}"), GeoLevel::Sa2, BoundaryEdition::Asgs2016).unwrap();
                StandardRecord::new(RecordKey::new(g, 2016, "ALL", "P"), CellValue::count(v))
            })
            .collect();
        Dataset::new(
            Indicator::new("i", "I", NestDomain::Healthy, ValueKind::Count, "s"),
            BoundaryEdition::Asgs2016,
            GeoLevel::Sa2,
            records,
        )
    }

    fn mags(d: &Dataset) -> Vec<f64> {
        d.records.iter().map(|r| r.value.magnitude().unwrap()).collect()
    }

    #[test]
    fn largest_remainder_keeps_total() {
        // 33.3 + 33.3 + 33.4 = 100
        let out = round_counts(&ds(&[33.3, 33.3, 33.4]));
        assert_eq!(mags(&out), vec![33.0, 33.0, 34.0]);
        // Split of 7 by 0.5/0.5 -> 3.5 + 3.5; tie goes to first record.
        let out = round_counts(&ds(&[3.5, 3.5]));
        assert_eq!(mags(&out), vec![4.0, 3.0]);
    }

    proptest! {
        #[test]
        fn totals_preserved(values in proptest::collection::vec(0.0f64..1000.0, 1..30)) {
            let d = ds(&values);
            let out = round_counts(&d);
            let before: f64 = values.iter().sum();
            let after: f64 = mags(&out).iter().sum();
            prop_assert_eq!(after, before.round());
            for (o, v) in mags(&out).iter().zip(mags(&d.canonical_sort())) {
                prop_assert!(o.fract() == 0.0);
                prop_assert!((o - v).abs() < 1.0);
            }
        }
    }
}
