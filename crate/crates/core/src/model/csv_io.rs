//! Canonical dataset serialization.
//!
//! One header row, then one row per record:
//! `<LEVEL>CODE_<YY>,CALENDAR_YEAR,AGE_GROUP,SEX,VALUE,UNCERTAINTY`.
//! Suppressed cells render as `S`, missing cells as an empty field.

use super::{
    BoundaryEdition, CellValue, Dataset, GeoLevel, Indicator, Measure, ModelError, RecordKey,
    RegionCode, StandardRecord, UncertaintyLevel,
};

/// Fixed columns following the geography column.
pub const CSV_COLUMNS: [&str; 5] = ["CALENDAR_YEAR", "AGE_GROUP", "SEX", "VALUE", "UNCERTAINTY"];

const SUPPRESSED_TOKEN: &str = "S";

pub fn geography_column(level: GeoLevel, edition: BoundaryEdition) -> String {
    format!("{}CODE_{}", level.label(), edition.short_year())
}

/// Inverse of [`geography_column`]: `SA3CODE_16` gives `(SA3, 2016)`.
pub fn parse_geography_column(name: &str) -> Option<(GeoLevel, BoundaryEdition)> {
    let name = name.trim().to_ascii_uppercase();
    let (prefix, yy) = name.rsplit_once("CODE_")?;
    if yy.len() != 2 || !yy.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let level: GeoLevel = prefix.parse().ok()?;
    let edition = BoundaryEdition::ALL.into_iter().find(|e| e.short_year() == yy)?;
    Some((level, edition))
}

/// Shortest text that parses back to the same `f64`.
pub fn format_magnitude(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn value_token(value: &CellValue) -> String {
    match value.measure {
        Measure::Suppressed => SUPPRESSED_TOKEN.to_string(),
        Measure::Missing => String::new(),
        Measure::Count(v) | Measure::Rate(v) | Measure::Percentage(v) => format_magnitude(v),
    }
}

pub fn write_csv(d: &Dataset) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let geo = geography_column(d.level, d.edition);
    let mut header = vec![geo.as_str()];
    header.extend(CSV_COLUMNS);
    w.write_record(&header).expect("in-memory write");
    for r in &d.records {
        let year = r.key.calendar_year.to_string();
        let value = value_token(&r.value);
        let unc = r.value.uncertainty.as_u8().to_string();
        w.write_record([
            r.key.geography.code(),
            year.as_str(),
            r.key.age_group.as_str(),
            r.key.sex.as_str(),
            value.as_str(),
            unc.as_str(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a canonical dataset file. Numeric cells take the indicator's kind.
pub fn read_csv(bytes: &[u8], indicator: Indicator) -> Result<Dataset, ModelError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rdr
        .headers()
        .map_err(|e| ModelError::Malformed { line: 1, reason: e.to_string() })?
        .clone();
    if header.len() != 6 {
        return Err(ModelError::Malformed {
            line: 1,
            reason: format!("expected 6 columns, found {}", header.len()),
        });
    }
    let (level, edition) = parse_geography_column(&header[0]).ok_or_else(|| ModelError::Malformed {
        line: 1,
        reason: format!("unrecognised geography column {:?}", &header[0]),
    })?;
    for (i, expected) in CSV_COLUMNS.iter().enumerate() {
        if &header[i + 1] != *expected {
            return Err(ModelError::Malformed {
                line: 1,
                reason: format!("column {} should be {expected}, found {:?}", i + 2, &header[i + 1]),
            });
        }
    }

    let kind = indicator.value_kind;
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |reason: String| ModelError::Malformed { line, reason };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let geography = RegionCode::new(&row[0], level, edition).map_err(|e| bad(e.to_string()))?;
        let year: i32 = row[1].parse().map_err(|_| bad(format!("bad year {:?}", &row[1])))?;
        let unc: u8 = row[5].parse().map_err(|_| bad(format!("bad uncertainty {:?}", &row[5])))?;
        let uncertainty = UncertaintyLevel::from_u8(unc).map_err(|e| bad(e.to_string()))?;
        let measure = match &row[4] {
            "" => Measure::Missing,
            SUPPRESSED_TOKEN => Measure::Suppressed,
            tok => {
                let v: f64 = tok.parse().map_err(|_| bad(format!("bad value {tok:?}")))?;
                Measure::numeric(kind, v)
                    .ok_or_else(|| bad(format!("indicator kind {kind} carries no magnitude")))?
            }
        };
        records.push(StandardRecord::new(
            RecordKey::new(geography, year, &row[2], &row[3]),
            CellValue::new(measure, uncertainty),
        ));
    }
    let mut d = Dataset::new(indicator, edition, level, records);
    d.indicator.max_uncertainty = d.max_uncertainty();
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NestDomain, ValueKind};
    use proptest::prelude::*;

    fn indicator(kind: ValueKind) -> Indicator {
        Indicator::new("ind", "Indicator", NestDomain::Healthy, kind, "src")
    }

    #[test]
    fn geography_column_matches_table_layout() {
        assert_eq!(geography_column(GeoLevel::Sa3, BoundaryEdition::Asgs2016), "SA3CODE_16");
        assert_eq!(
            parse_geography_column("SA3CODE_16"),
            Some((GeoLevel::Sa3, BoundaryEdition::Asgs2016))
        );
        assert_eq!(
            parse_geography_column("lgacode_06"),
            Some((GeoLevel::Lga, BoundaryEdition::Asgs2006))
        );
        assert_eq!(parse_geography_column("SA3CODE_17"), None);
        assert_eq!(parse_geography_column("REGION"), None);
    }

    #[test]
    fn header_and_special_tokens() {
        let code = RegionCode::new("10102", GeoLevel::Sa3, BoundaryEdition::Asgs2016).unwrap();
        let recs = vec![
            StandardRecord::new(RecordKey::new(code.clone(), 2016, "0-4", "F"), CellValue::count(12.0)),
            StandardRecord::new(RecordKey::new(code.clone(), 2016, "0-4", "M"), CellValue::suppressed()),
            StandardRecord::new(
                RecordKey::new(code, 2017, "0-4", "F"),
                CellValue::missing().with_uncertainty(UncertaintyLevel::Medium),
            ),
        ];
        let d = Dataset::new(indicator(ValueKind::Count), BoundaryEdition::Asgs2016, GeoLevel::Sa3, recs);
        let text = String::from_utf8(write_csv(&d)).unwrap();
        assert_eq!(
            text,
            "SA3CODE_16,CALENDAR_YEAR,AGE_GROUP,SEX,VALUE,UNCERTAINTY\n\
             10102,2016,0-4,F,12,0\n\
             10102,2016,0-4,M,S,0\n\
             10102,2017,0-4,F,,1\n"
        );
        let back = read_csv(text.as_bytes(), indicator(ValueKind::Count)).unwrap();
        assert_eq!(back.records, d.records);
    }

    #[test]
    fn rejects_foreign_headers() {
        let err = read_csv(b"REGION,YEAR\n", indicator(ValueKind::Count)).unwrap_err();
        assert!(matches!(err, ModelError::Malformed { line: 1, .. }));
    }

    fn arb_cell() -> impl Strategy<Value = CellValue> {
        let unc = prop_oneof![
            Just(UncertaintyLevel::Low),
            Just(UncertaintyLevel::Medium),
            Just(UncertaintyLevel::High)
        ];
        let measure = prop_oneof![
            (0.0f64..1e9).prop_map(Measure::Count),
            (0u32..10_000).prop_map(|v| Measure::Count(v as f64)),
            Just(Measure::Suppressed),
            Just(Measure::Missing),
        ];
        (measure, unc).prop_map(|(m, u)| CellValue::new(m, u))
    }

    proptest! {
        #[test]
        fn cell_values_round_trip(cells in proptest::collection::vec(arb_cell(), 0..40)) {
            let records: Vec<_> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let code = RegionCode::new(format!("R{i}"), GeoLevel::Sa2, BoundaryEdition::Asgs2021).unwrap();
                    StandardRecord::new(RecordKey::new(code, 2020, "ALL", "P"), *c)
                })
                .collect();
            let d = Dataset::new(indicator(ValueKind::Count), BoundaryEdition::Asgs2021, GeoLevel::Sa2, records);
            let back = read_csv(&write_csv(&d), indicator(ValueKind::Count)).unwrap();
            prop_assert_eq!(back.records.len(), d.records.len());
            for (a, b) in back.records.iter().zip(&d.records) {
                prop_assert_eq!(a.value.kind(), b.value.kind());
                prop_assert_eq!(a.value.uncertainty, b.value.uncertainty);
                prop_assert_eq!(
                    a.value.magnitude().map(f64::to_bits),
                    b.value.magnitude().map(f64::to_bits)
                );
            }
        }
    }
}
