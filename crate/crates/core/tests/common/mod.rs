//! Random fixtures shared by the integration tests.
#![allow(dead_code)]

use ardkit::correspondence::{CorrespondenceEdge, CorrespondenceTable, TableMeta};
use ardkit::model::{
    BoundaryEdition, CellValue, Dataset, GeoLevel, Indicator, Measure, NestDomain, RecordKey, RegionCode,
    StandardRecord, UncertaintyLevel, ValueKind,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FROM: BoundaryEdition = BoundaryEdition::Asgs2011;
pub const TO: BoundaryEdition = BoundaryEdition::Asgs2016;
pub const LEVEL: GeoLevel = GeoLevel::Sa2;

pub fn meta() -> TableMeta {
    TableMeta::new(FROM, TO, LEVEL)
}

pub fn region(code: &str, edition: BoundaryEdition) -> RegionCode {
    RegionCode::new(code, LEVEL, edition).unwrap()
}

fn edge(from: &str, to: &str, per_mille: u32) -> CorrespondenceEdge {
    let text = format!("{}.{:03}", per_mille / 1000, per_mille % 1000);
    CorrespondenceEdge::from_text(region(from, FROM), region(to, TO), &text).unwrap()
}

/// Splits 1000 into `k` positive parts.
fn partition(rng: &mut ChaCha8Rng, k: usize) -> Vec<u32> {
    let mut cuts: Vec<u32> = (1..1000).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<u32> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    cuts.push(1000);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let p = c - prev;
            prev = c;
            p
        })
        .collect()
}

/// A valid table over at most 50 regions in total, ratios in thousandths.
pub fn random_table(seed: u64) -> CorrespondenceTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = rng.random_range(1..=25usize);
    let targets = rng.random_range(1..=25usize);
    let mut edges = Vec::new();
    for s in 0..sources {
        let k = rng.random_range(1..=targets.min(4));
        let mut picks: Vec<usize> = (0..targets).collect();
        picks.shuffle(&mut rng);
        for (t, w) in picks.into_iter().take(k).zip(partition(&mut rng, k)) {
            edges.push(edge(&format!("S{s:02}"), &format!("T{t:02}"), w));
        }
    }
    CorrespondenceTable::new(meta(), edges).unwrap()
}

/// A table where every target has exactly one source.
pub fn random_split_table(seed: u64) -> CorrespondenceTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = rng.random_range(1..=12usize);
    let mut edges = Vec::new();
    let mut next = 0;
    for s in 0..sources {
        let k = rng.random_range(1..=3usize);
        for w in partition(&mut rng, k) {
            edges.push(edge(&format!("S{s:02}"), &format!("T{next:02}"), w));
            next += 1;
        }
    }
    CorrespondenceTable::new(meta(), edges).unwrap()
}

pub fn indicator(kind: ValueKind) -> Indicator {
    Indicator::new("ind", "Indicator", NestDomain::Healthy, kind, "src")
}

/// Integer counts for every source region over a few strata.
pub fn random_counts(seed: u64, t: &CorrespondenceTable) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut records = Vec::new();
    for code in t.sources() {
        for year in [2011, 2012] {
            for sex in ["F", "M"] {
                let v = rng.random_range(0..10_000u32) as f64;
                let key = RecordKey::new(region(code, FROM), year, "ALL", sex);
                records.push(StandardRecord::new(key, CellValue::new(Measure::Count(v), UncertaintyLevel::Low)));
            }
        }
    }
    Dataset::new(indicator(ValueKind::Count), FROM, LEVEL, records).finish()
}

pub mod qa {
    use ardkit::correspondence::{
        forward, load_table, load_table_unchecked, CorrespondenceTable, StepRecord, TableMeta,
    };
    use ardkit::model::{
        BoundaryEdition, CellValue, Dataset, GeoLevel, Indicator, Measure, NestDomain, RecordKey, RegionCode,
        StandardRecord, UncertaintyLevel, ValueKind, YearSpan,
    };
    use ardkit::qa::{QaContext, RemovalLog, Severity, Vocabulary};

    const E11: BoundaryEdition = BoundaryEdition::Asgs2011;
    const E16: BoundaryEdition = BoundaryEdition::Asgs2016;

    fn table() -> CorrespondenceTable {
        load_table(
            b"FROM_CODE,TO_CODE,RATIO\n101,201,0.5\n101,202,0.5\n102,202,0.25\n102,203,0.75\n",
            TableMeta::new(E11, E16, GeoLevel::Sa3),
        )
        .unwrap()
    }

    /// A forward-corresponded count dataset with `P` totals over `F` and `M`.
    pub fn clean() -> (Dataset, QaContext) {
        let mut records = Vec::new();
        for (code, f, m) in [("101", 40.0, 60.0), ("102", 80.0, 120.0)] {
            for year in [2016, 2017] {
                for (sex, v) in [("F", f), ("M", m), ("P", f + m)] {
                    let g = RegionCode::new(code, GeoLevel::Sa3, E11).unwrap();
                    records.push(StandardRecord::new(RecordKey::new(g, year, "ALL", sex), CellValue::count(v)));
                }
            }
        }
        let ind = Indicator::new("births", "Births", NestDomain::Healthy, ValueKind::Count, "src");
        let input = Dataset::new(ind, E11, GeoLevel::Sa3, records)
            .with_coverage(Some(YearSpan::new(2016, 2017)))
            .finish();
        let t = table();
        let out = forward(&input, &t).unwrap();
        let mut ctx = QaContext::new();
        ctx.tables = vec![t];
        ctx.conservation = out.steps.clone();
        ctx.vocabulary =
            Some(Vocabulary { age_groups: vec!["ALL".into()], sexes: vec!["F".into(), "M".into(), "P".into()] });
        (out.dataset, ctx)
    }

    /// Clean fixture with every value replaced by a percentage.
    pub fn clean_percentages() -> (Dataset, QaContext) {
        let (mut d, ctx) = clean();
        d.indicator.value_kind = ValueKind::Percentage;
        for r in &mut d.records {
            r.value.measure = Measure::Percentage(r.value.magnitude().unwrap() / 4.0);
        }
        (d.finish(), ctx)
    }

    pub struct Fault {
        pub rule_id: &'static str,
        pub severity: Severity,
        pub dataset: Dataset,
        pub ctx: QaContext,
    }

    fn fault(rule_id: &'static str, severity: Severity, dataset: Dataset, ctx: QaContext) -> Fault {
        Fault { rule_id, severity, dataset, ctx }
    }

    /// One fixture per built-in rule, each with exactly one seeded violation.
    pub fn faults() -> Vec<Fault> {
        let mut out = Vec::new();

        let (mut d, ctx) = clean();
        d.records[0].key.age_group = "0-4".into();
        out.push(fault("schema.conformance", Severity::Error, d.finish(), ctx));

        let (mut d, ctx) = clean();
        let first = d.records[0].clone();
        d.records.push(first);
        out.push(fault("key.duplicate", Severity::Error, d.finish(), ctx));

        let (mut d, ctx) = clean();
        d.records[1].value.measure = Measure::Count(-1.0);
        out.push(fault("value.negative", Severity::Error, d.finish(), ctx));

        let (mut d, ctx) = clean_percentages();
        d.records[2].value.measure = Measure::Percentage(150.0);
        out.push(fault("percentage.range", Severity::Error, d.finish(), ctx));

        let (mut d, ctx) = clean();
        d.records[0].key.calendar_year = 2019;
        out.push(fault("temporal.out_of_range", Severity::Error, d.finish(), ctx));

        let (d, mut ctx) = clean();
        ctx.coverage = Some(YearSpan::new(2015, 2017));
        out.push(fault("temporal.coverage_gap", Severity::Warning, d, ctx));

        let (mut d, ctx) = clean();
        let i = d.records.iter().position(|r| r.key.sex == "F").unwrap();
        d.records[i].value.measure = Measure::Suppressed;
        out.push(fault("suppression.recoverable", Severity::Warning, d.finish(), ctx));

        let (d, mut ctx) = clean();
        ctx.tables.push(
            load_table_unchecked(
                b"FROM_CODE,TO_CODE,RATIO\n101,201,0.5\n101,202,0.4\n",
                TableMeta::new(E11, E16, GeoLevel::Sa3),
            )
            .unwrap(),
        );
        out.push(fault("correspondence.ratio_sum", Severity::Error, d, ctx));

        let (d, mut ctx) = clean();
        let s: &mut StepRecord = &mut ctx.conservation[0];
        s.output_total *= 1.01;
        out.push(fault("mass.conservation", Severity::Error, d, ctx));

        let (d, mut ctx) = clean();
        ctx.removal = Some(RemovalLog {
            indicator_id: d.indicator.id.clone(),
            removed: d.records.iter().map(|r| r.key.clone()).collect(),
        });
        out.push(fault("indicator.fully_removed", Severity::Warning, d.with_records(Vec::new()).finish(), ctx));

        let (mut d, ctx) = clean();
        d.records[3].value.uncertainty = UncertaintyLevel::High;
        out.push(fault("uncertainty.high_retained", Severity::Error, d.finish(), ctx));

        out
    }
}
