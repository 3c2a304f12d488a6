use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::mapping::{Resolved, ResolvedMapping};
use super::{check_utf8, IngestError, SchemaMapping};
use crate::digest::sha256_hex;
use crate::model::{
    BoundaryEdition, CellValue, Dataset, GeoLevel, Indicator, Measure, RecordKey, RegionCode,
    StandardRecord, UncertaintyLevel, ValueKind,
};

/// One logical cell that could not be mapped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line number in the input (the header is line 1).
    pub row: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    pub reason: String,
}

/// The input cell an emitted record came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRef {
    pub record: usize,
    pub row: u64,
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    /// Logical cells in the input: data rows times value cells per row.
    pub rows_in: usize,
    pub records_out: usize,
    pub rejects: Vec<Reject>,
    pub lineage_digest: String,
    pub lineage: Vec<CellRef>,
}

impl ParseReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn pick<'a>(row: &'a csv::StringRecord, r: &'a Resolved<String>) -> &'a str {
    match r {
        Resolved::Column(i) => row.get(*i).unwrap_or(""),
        Resolved::Fixed(v) => v.as_str(),
    }
}

fn parse_value(raw: &str, kind: ValueKind, missing: &[String]) -> Result<Measure, String> {
    if missing.iter().any(|m| m == raw || m.trim() == raw.trim()) {
        return Ok(Measure::Missing);
    }
    let t = raw.trim();
    if t.is_empty() {
        return Err("empty value not declared as a missing token".into());
    }
    let v: f64 = t.parse().map_err(|_| format!("value {raw:?} is not a number"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("value {raw:?} is not a non-negative number"));
    }
    match kind {
        ValueKind::Count if v.fract() != 0.0 => Err(format!("count {raw:?} is not an integer")),
        ValueKind::Percentage if v > 100.0 => Err(format!("percentage {raw:?} exceeds 100")),
        _ => Ok(Measure::numeric(kind, v).expect("numeric kind")),
    }
}

/// Parses a raw delimited table into a canonical dataset.
///
/// Rows that cannot be mapped are listed in the report; mixing geography
/// levels or editions within one file is fatal.
pub fn parse_raw(
    bytes: &[u8],
    mapping: &SchemaMapping,
    indicator: &Indicator,
) -> Result<(Dataset, ParseReport), IngestError> {
    let text = check_utf8(bytes)?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .flexible(true)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(|h| h.trim().is_empty()) {
        return Err(IngestError::NoHeader);
    }
    let rm = mapping.resolve(&header)?;
    let mut indicator = indicator.clone();
    indicator.value_kind = mapping.value_kind;

    let mut rows_in = 0usize;
    let mut rejects = Vec::new();
    let mut emitted: Vec<(StandardRecord, u64, String)> = Vec::new();
    let mut levels = BTreeSet::new();
    let mut editions = BTreeSet::new();

    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        rows_in += rm.cells.len();
        let reject_all = |rejects: &mut Vec<Reject>, reason: String| {
            for (_, name, _) in &rm.cells {
                rejects.push(Reject { row: line, column: Some(name.clone()), reason: reason.clone() });
            }
        };
        if row.len() != header.len() {
            reject_all(
                &mut rejects,
                format!("expected {} fields, found {}", header.len(), row.len()),
            );
            continue;
        }
        let key_parts = match row_key_parts(&row, &rm) {
            Ok(parts) => parts,
            Err(reason) => {
                reject_all(&mut rejects, reason);
                continue;
            }
        };
        levels.insert(key_parts.level.label());
        editions.insert(key_parts.edition.year());

        for (col, name, fixed_year) in &rm.cells {
            let year = match fixed_year.or(key_parts.year) {
                Some(y) => y,
                None => {
                    rejects.push(Reject {
                        row: line,
                        column: Some(name.clone()),
                        reason: "no calendar year".into(),
                    });
                    continue;
                }
            };
            match parse_value(row.get(*col).unwrap_or(""), mapping.value_kind, &mapping.missing_tokens) {
                Ok(measure) => {
                    let key = RecordKey::new(
                        key_parts.geography.clone(),
                        year,
                        key_parts.age_group.clone(),
                        key_parts.sex.clone(),
                    );
                    let rec = StandardRecord::new(key, CellValue::new(measure, UncertaintyLevel::Low));
                    emitted.push((rec, line, name.clone()));
                }
                Err(reason) => {
                    rejects.push(Reject { row: line, column: Some(name.clone()), reason })
                }
            }
        }
    }

    if levels.len() > 1 {
        return Err(IngestError::Mixed {
            what: "geography levels",
            values: levels.into_iter().map(String::from).collect(),
        });
    }
    if editions.len() > 1 {
        return Err(IngestError::Mixed {
            what: "boundary editions",
            values: editions.into_iter().map(|y| y.to_string()).collect(),
        });
    }

    // Level and edition of an empty file fall back to the mapping's constants.
    let level = match (&rm.level, levels.iter().next()) {
        (_, Some(l)) => l.parse::<GeoLevel>().expect("label parses"),
        (Resolved::Fixed(l), None) => *l,
        (Resolved::Column(_), None) => {
            return Err(IngestError::InvalidMapping("no rows to determine the geography level".into()))
        }
    };
    let edition = match (&rm.edition, editions.iter().next()) {
        (_, Some(y)) => BoundaryEdition::from_year(*y).expect("edition parses"),
        (Resolved::Fixed(e), None) => *e,
        (Resolved::Column(_), None) => {
            return Err(IngestError::InvalidMapping("no rows to determine the boundary edition".into()))
        }
    };

    emitted.sort_by(|a, b| {
        a.0.key
            .cmp(&b.0.key)
            .then_with(|| a.0.value.total_cmp(&b.0.value))
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    let lineage: Vec<CellRef> = emitted
        .iter()
        .enumerate()
        .map(|(i, (_, row, column))| CellRef { record: i, row: *row, column: column.clone() })
        .collect();
    let lineage_digest = sha256_hex(serde_json::to_vec(&lineage).expect("lineage serializes"));
    let records: Vec<StandardRecord> = emitted.into_iter().map(|(r, _, _)| r).collect();
    let dataset = Dataset::new(indicator, edition, level, records).finish();

    let report = ParseReport {
        rows_in,
        records_out: dataset.len(),
        rejects,
        lineage_digest,
        lineage,
    };
    Ok((dataset, report))
}

struct KeyParts {
    geography: RegionCode,
    level: GeoLevel,
    edition: BoundaryEdition,
    year: Option<i32>,
    age_group: String,
    sex: String,
}

fn row_key_parts(row: &csv::StringRecord, rm: &ResolvedMapping) -> Result<KeyParts, String> {
    let level = match &rm.level {
        Resolved::Column(i) => {
            let raw = row.get(*i).unwrap_or("");
            raw.parse::<GeoLevel>().map_err(|e| e.to_string())?
        }
        Resolved::Fixed(l) => *l,
    };
    let edition = match &rm.edition {
        Resolved::Column(i) => {
            let raw = row.get(*i).unwrap_or("");
            raw.parse::<BoundaryEdition>().map_err(|e| e.to_string())?
        }
        Resolved::Fixed(e) => *e,
    };
    let code = row.get(rm.geography).unwrap_or("");
    let geography = RegionCode::new(code, level, edition).map_err(|e| format!("geography: {e}"))?;
    let year = match &rm.year {
        Resolved::Column(i) => {
            let raw = row.get(*i).unwrap_or("");
            Some(raw.trim().parse::<i32>().map_err(|_| format!("calendar year {raw:?} is not an integer"))?)
        }
        Resolved::Fixed(y) => Some(*y),
    };
    let age_group = pick(row, &rm.age_group).to_string();
    let sex = pick(row, &rm.sex).to_string();
    if age_group.trim().is_empty() {
        return Err("empty age group".into());
    }
    if sex.trim().is_empty() {
        return Err("empty sex".into());
    }
    Ok(KeyParts { geography, level, edition, year, age_group, sex })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Binding, Layout};
    use crate::model::{write_csv, NestDomain};
    use proptest::prelude::*;

    fn indicator() -> Indicator {
        Indicator::new("births", "Births", NestDomain::Healthy, ValueKind::Count, "src")
    }

    fn long_mapping() -> SchemaMapping {
        SchemaMapping {
            geography: "SA3CODE_16".into(),
            level: None,
            edition: None,
            calendar_year: Some(Binding::Column("CALENDAR_YEAR".into())),
            age_group: Binding::Column("AGE_GROUP".into()),
            sex: Binding::Column("SEX".into()),
            value: Some("COUNT".into()),
            year_columns: vec![],
            value_kind: ValueKind::Count,
            missing_tokens: vec!["n.p.".into()],
            layout: Layout::Long,
            delimiter: ',',
        }
    }

    fn wide_mapping() -> SchemaMapping {
        SchemaMapping {
            calendar_year: None,
            value: None,
            year_columns: vec!["2016".into(), "2017".into()],
            layout: Layout::WideByYear,
            ..long_mapping()
        }
    }

    #[test]
    fn long_layout_maps_cleanly() {
        let raw = "SA3CODE_16,CALENDAR_YEAR,AGE_GROUP,SEX,COUNT\n\
                   10102,2016,0-4,F,12\n\
                   10101,2016,0-4,F,7\n\
                   10103,2017,0-4,M,0\n";
        let (d, rep) = parse_raw(raw.as_bytes(), &long_mapping(), &indicator()).unwrap();
        assert_eq!(d.len(), 3);
        assert!(rep.rejects.is_empty());
        assert_eq!((rep.rows_in, rep.records_out), (3, 3));
        assert_eq!(d.level, GeoLevel::Sa3);
        assert_eq!(d.edition, BoundaryEdition::Asgs2016);
        let codes: Vec<_> = d.records.iter().map(|r| r.key.geography.code()).collect();
        assert_eq!(codes, ["10101", "10102", "10103"]);
    }

    #[test]
    fn wide_layout_unpivots_by_year() {
        // Hand-unpivoted: (A,2016)=1 (A,2017)=2 (B,2016)=3 (B,2017)=4.
        let raw = "SA3CODE_16,AGE_GROUP,SEX,2016,2017\nA,0-4,F,1,2\nB,0-4,F,3,4\n";
        let (d, rep) = parse_raw(raw.as_bytes(), &wide_mapping(), &indicator()).unwrap();
        let got: Vec<_> = d
            .records
            .iter()
            .map(|r| (r.key.geography.code().to_string(), r.key.calendar_year, r.value.magnitude().unwrap()))
            .collect();
        let expected = vec![
            ("A".to_string(), 2016, 1.0),
            ("A".to_string(), 2017, 2.0),
            ("B".to_string(), 2016, 3.0),
            ("B".to_string(), 2017, 4.0),
        ];
        assert_eq!(got, expected);
        assert_eq!(rep.rows_in, 4);
        assert_eq!(rep.lineage[1], CellRef { record: 1, row: 2, column: "2017".into() });
    }

    #[test]
    fn declared_missing_marker() {
        let raw = "SA3CODE_16,CALENDAR_YEAR,AGE_GROUP,SEX,COUNT\n10102,2016,0-4,F,n.p.\n";
        let (d, rep) = parse_raw(raw.as_bytes(), &long_mapping(), &indicator()).unwrap();
        assert_eq!(d.records[0].value.measure, Measure::Missing);
        assert!(rep.rejects.is_empty());
    }

    #[test]
    fn malformed_rows_are_reported_not_dropped() {
        let raw = "SA3CODE_16,CALENDAR_YEAR,AGE_GROUP,SEX,COUNT\n\
                   10102,2016,0-4,F,1.5\n\
                   10102,20x6,0-4,F,3\n\
                   10102,2016,0-4\n\
                   ,2016,0-4,F,3\n\
                   10102,2016,0-4,F,-2\n\
                   10102,2017,0-4,F,4\n";
        let (d, rep) = parse_raw(raw.as_bytes(), &long_mapping(), &indicator()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(rep.rejects.len(), 5);
        assert_eq!(rep.rows_in, rep.records_out + rep.rejects.len());
        let rows: Vec<_> = rep.rejects.iter().map(|r| r.row).collect();
        assert_eq!(rows, [2, 3, 4, 5, 6]);
        assert!(rep.rejects[0].reason.contains("not an integer"));
    }

    #[test]
    fn mixed_levels_are_fatal() {
        let mut m = long_mapping();
        m.geography = "CODE".into();
        m.level = Some(Binding::Column("LEVEL".into()));
        m.edition = Some(Binding::Constant("2016".into()));
        let raw = "CODE,LEVEL,CALENDAR_YEAR,AGE_GROUP,SEX,COUNT\n1,SA2,2016,0-4,F,1\n2,SA3,2016,0-4,F,1\n";
        let err = parse_raw(raw.as_bytes(), &m, &indicator()).unwrap_err();
        assert!(matches!(err, IngestError::Mixed { what: "geography levels", .. }));
    }

    #[test]
    fn missing_column_and_bad_bytes_are_fatal() {
        let raw = "SA3CODE_16,CALENDAR_YEAR,SEX,COUNT\n";
        assert!(matches!(
            parse_raw(raw.as_bytes(), &long_mapping(), &indicator()),
            Err(IngestError::MissingColumn(_))
        ));
        let bytes = b"SA3CODE_16,\xff\n";
        assert!(matches!(
            parse_raw(bytes, &long_mapping(), &indicator()),
            Err(IngestError::Undecodable { offset: 11 })
        ));
    }

    proptest! {
        #[test]
        fn conservation_and_determinism(
            rows in proptest::collection::vec(
                (0u8..5, prop_oneof![Just("1"), Just("7"), Just("n.p."), Just("x"), Just("2.5"), Just("")], 0u8..3),
                0..25)
        ) {
            let mut raw = String::from("SA3CODE_16,AGE_GROUP,SEX,2016,2017\n");
            for (code, value, shape) in &rows {
                match shape {
                    0 => raw.push_str(&format!("R{code},0-4,F,{value},{value}\n")),
                    1 => raw.push_str(&format!("R{code},5-9,M,1,{value}\n")),
                    _ => raw.push_str(&format!("R{code},5-9\n")),
                }
            }
            let (d1, r1) = parse_raw(raw.as_bytes(), &wide_mapping(), &indicator()).unwrap();
            let (d2, r2) = parse_raw(raw.as_bytes(), &wide_mapping(), &indicator()).unwrap();
            prop_assert_eq!(r1.rows_in, rows.len() * 2);
            prop_assert_eq!(r1.rows_in, r1.records_out + r1.rejects.len());
            prop_assert_eq!(write_csv(&d1), write_csv(&d2));
            prop_assert_eq!(&r1, &r2);
            // Every record points back at a cell carrying its value.
            let lines: Vec<&str> = raw.lines().collect();
            for (rec, cell) in d1.records.iter().zip(&r1.lineage) {
                let fields: Vec<&str> = lines[(cell.row - 1) as usize].split(',').collect();
                let col = if cell.column == "2016" { 3 } else { 4 };
                prop_assert_eq!(fields[0], rec.key.geography.code());
                match rec.value.measure {
                    Measure::Missing => prop_assert_eq!(fields[col], "n.p."),
                    Measure::Count(v) => prop_assert_eq!(fields[col].parse::<f64>().unwrap(), v),
                    _ => prop_assert!(false),
                }
            }
        }
    }
}
