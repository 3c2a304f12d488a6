mod common;

use std::collections::BTreeMap;

use ardkit::correspondence::{
    backward, backward_exact, forward, forward_exact, Amount, CorrespondencePolicy, CorrespondenceTable, ExactRecord,
};
use ardkit::model::{Dataset, Measure, Touch, UncertaintyLevel};
use common::*;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

/// Dense incidence matrix times value vector, per stratum, in plain doubles.
fn oracle(t: &CorrespondenceTable, d: &Dataset) -> BTreeMap<(String, String), f64> {
    let sources: Vec<&str> = t.sources().collect();
    let targets: Vec<&str> = t.targets().collect();
    let mut m = vec![vec![0.0; sources.len()]; targets.len()];
    for e in t.edges() {
        let i = targets.iter().position(|c| *c == e.to.code()).unwrap();
        let j = sources.iter().position(|c| *c == e.from.code()).unwrap();
        m[i][j] = e.ratio;
    }
    let mut strata: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &d.records {
        let v = strata.entry(r.key.stratum().to_string()).or_insert_with(|| vec![0.0; sources.len()]);
        let j = sources.iter().position(|c| *c == r.key.geography.code()).unwrap();
        v[j] = r.value.magnitude().unwrap();
    }
    let mut out = BTreeMap::new();
    for (s, v) in strata {
        for (i, row) in m.iter().enumerate() {
            if row.iter().any(|x| *x > 0.0) {
                out.insert((targets[i].to_string(), s.clone()), row.iter().zip(&v).map(|(a, b)| a * b).sum());
            }
        }
    }
    out
}

fn exact_records(d: &Dataset) -> Vec<ExactRecord> {
    d.records
        .iter()
        .map(|r| {
            let v = BigRational::from_float(r.value.magnitude().unwrap()).unwrap();
            ExactRecord::new(r.key.clone(), Amount::Value(v), r.value.uncertainty)
        })
        .collect()
}

fn exact_total(rs: &[ExactRecord]) -> BigRational {
    rs.iter()
        .map(|r| match &r.amount {
            Amount::Value(v) => v.clone(),
            _ => BigRational::zero(),
        })
        .sum()
}

/// Which of the three allowed states a backward output is in.
fn state(touches: &[Touch], m: Measure) -> u8 {
    let discards = touches.iter().any(|t| matches!(t, Touch::SubThresholdDiscard { .. }));
    match (m, discards) {
        (Measure::Suppressed, _) => 2,
        (_, true) => 1,
        _ => 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_matches_dense_oracle(seed in any::<u64>()) {
        let t = random_table(seed);
        let d = random_counts(seed, &t);
        let out = forward(&d, &t).unwrap();
        let expect = oracle(&t, &d);
        prop_assert_eq!(out.dataset.len(), expect.len());
        for r in &out.dataset.records {
            let want = expect[&(r.key.geography.code().to_string(), r.key.stratum().to_string())];
            let got = r.value.magnitude().unwrap();
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{} vs {}", got, want);
        }
    }

    #[test]
    fn forward_conserves_mass(seed in any::<u64>()) {
        let t = random_table(seed);
        let d = random_counts(seed, &t);
        let out = forward(&d, &t).unwrap();
        let (a, b) = (d.count_total(), out.dataset.count_total());
        prop_assert!((a - b).abs() <= 1e-9 * a.abs());
        let ex = exact_records(&d);
        prop_assert_eq!(exact_total(&forward_exact(&ex, &t).unwrap().records), exact_total(&ex));
    }

    #[test]
    fn split_round_trip_is_identity(seed in any::<u64>()) {
        let t = random_split_table(seed);
        let d = random_counts(seed, &t);
        let p = CorrespondencePolicy::new(FROM);
        let ex = exact_records(&d);
        let back = backward_exact(&forward_exact(&ex, &t).unwrap().records, &t, &p).unwrap();
        prop_assert_eq!(&back.records, &ex);
        let float = backward(&forward(&d, &t).unwrap().dataset, &t, &p).unwrap().dataset;
        prop_assert_eq!(float.len(), d.len());
        for (a, b) in float.records.iter().zip(&d.records) {
            prop_assert_eq!(&a.key, &b.key);
            let (x, y) = (a.value.magnitude().unwrap(), b.value.magnitude().unwrap());
            prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs(), "{} vs {}", x, y);
        }
    }

    #[test]
    fn backward_states_and_monotone_suppression(seed in any::<u64>(), lo in 0.01f64..0.5, gap in 0.0f64..0.49) {
        let t = random_table(seed);
        let later = forward(&random_counts(seed, &t), &t).unwrap().dataset;
        let high = CorrespondencePolicy::new(FROM).with_threshold(lo + gap);
        let low = CorrespondencePolicy::new(FROM).with_threshold(lo);
        let at_high = backward(&later, &t, &high).unwrap();
        let at_low = backward(&later, &t, &low).unwrap();
        for r in &at_high.dataset.records {
            let touches = at_high.lineage.get(&r.key).unwrap();
            let s = state(touches, r.value.measure);
            let expect_u = [UncertaintyLevel::Low, UncertaintyLevel::Medium, UncertaintyLevel::High][s as usize];
            prop_assert_eq!(r.value.uncertainty, expect_u);
            if s == 0 {
                let only_step = touches.iter().all(|t| matches!(t, Touch::Reconstructed { .. }));
                prop_assert!(only_step);
            }
        }
        for r in at_high.dataset.records.iter().filter(|r| r.value.measure == Measure::Suppressed) {
            let twin = at_low.dataset.records.iter().find(|x| x.key == r.key).unwrap();
            prop_assert_eq!(twin.value.measure, Measure::Suppressed);
        }
    }
}
