use serde::{Deserialize, Serialize};

use super::{check_utf8, IngestError, Layout};
use crate::model::{parse_geography_column, BoundaryEdition, GeoLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Geography,
    CalendarYear,
    AgeGroup,
    Sex,
    Value,
    YearColumn,
}

/// A best-effort guess. Never acted on until copied into a confirmed mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleGuess {
    pub role: Role,
    pub column: String,
    pub status: String,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingDraft {
    pub delimiter: char,
    pub guesses: Vec<RoleGuess>,
    pub level: Option<GeoLevel>,
    pub edition: Option<BoundaryEdition>,
    pub layout: Option<Layout>,
}

impl MappingDraft {
    pub fn bound(&self, role: Role) -> impl Iterator<Item = &str> {
        self.guesses.iter().filter(move |g| g.role == role).map(|g| g.column.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }
}

const UNCONFIRMED: &str = "unconfirmed";
const DELIMITER_CANDIDATES: [char; 4] = [',', '\t', ';', '|'];

fn guess(role: Role, column: &str, evidence: impl Into<String>) -> RoleGuess {
    RoleGuess {
        role,
        column: column.to_string(),
        status: UNCONFIRMED.to_string(),
        evidence: evidence.into(),
    }
}

fn is_year_like(name: &str) -> bool {
    let t = name.trim();
    t.len() == 4 && t.parse::<u16>().is_ok_and(|y| (1900..=2100).contains(&y))
}

/// Guesses column roles from a table's header row.
pub fn detect_characteristics(bytes: &[u8]) -> Result<MappingDraft, IngestError> {
    let text = check_utf8(bytes)?;
    let header_line = text.lines().next().filter(|l| !l.trim().is_empty()).ok_or(IngestError::NoHeader)?;
    let delimiter = DELIMITER_CANDIDATES
        .into_iter()
        .max_by_key(|d| (header_line.matches(*d).count(), *d == ','))
        .unwrap_or(',');
    let columns: Vec<&str> = header_line
        .split(delimiter)
        .map(|c| c.trim().trim_matches('"'))
        .collect();

    let mut guesses = Vec::new();
    let mut level = None;
    let mut edition = None;
    for col in &columns {
        let upper = col.to_ascii_uppercase();
        if let Some((l, e)) = parse_geography_column(col) {
            if level.is_none() {
                level = Some(l);
                edition = Some(e);
                guesses.push(guess(
                    Role::Geography,
                    col,
                    format!("name follows <LEVEL>CODE_<YY>: {l} {e}"),
                ));
            }
            continue;
        }
        let role = match upper.as_str() {
            "CALENDAR_YEAR" | "YEAR" | "TIME_PERIOD" => Some(Role::CalendarYear),
            "AGE" | "AGE_GROUP" | "AGEGROUP" => Some(Role::AgeGroup),
            "SEX" | "GENDER" => Some(Role::Sex),
            "VALUE" | "COUNT" | "OBS_VALUE" | "NUMBER" => Some(Role::Value),
            _ if is_year_like(col) => Some(Role::YearColumn),
            _ => None,
        };
        if let Some(role) = role {
            let evidence = if role == Role::YearColumn {
                "header is a calendar year".to_string()
            } else {
                format!("header name {upper}")
            };
            guesses.push(guess(role, col, evidence));
        }
    }

    let year_columns = guesses.iter().filter(|g| g.role == Role::YearColumn).count();
    let has_long_value = guesses.iter().any(|g| g.role == Role::Value);
    let layout = if year_columns >= 2 {
        Some(Layout::WideByYear)
    } else if has_long_value {
        Some(Layout::Long)
    } else {
        None
    };

    Ok(MappingDraft { delimiter, guesses, level, edition, layout })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geography_column_name_gives_level_and_edition() {
        let d = detect_characteristics(b"SA3CODE_16,CALENDAR_YEAR,AGE_GROUP,SEX,VALUE\n1,2,3,4,5\n").unwrap();
        assert_eq!(d.bound(Role::Geography).collect::<Vec<_>>(), ["SA3CODE_16"]);
        assert_eq!(d.level, Some(GeoLevel::Sa3));
        assert_eq!(d.edition, Some(BoundaryEdition::Asgs2016));
        assert_eq!(d.layout, Some(Layout::Long));
        assert!(d.guesses.iter().all(|g| g.status == "unconfirmed"));
    }

    #[test]
    fn unrecognised_header_leaves_everything_unbound() {
        let d = detect_characteristics(b"foo,bar,baz\n").unwrap();
        assert!(d.is_empty());
        assert_eq!((d.level, d.edition, d.layout), (None, None, None));
    }

    #[test]
    fn two_year_columns_mean_wide_layout() {
        let d = detect_characteristics(b"SA2CODE_21;SEX;2016;2017\n").unwrap();
        assert_eq!(d.delimiter, ';');
        assert_eq!(d.layout, Some(Layout::WideByYear));
        assert_eq!(d.bound(Role::YearColumn).collect::<Vec<_>>(), ["2016", "2017"]);
    }

    #[test]
    fn undecodable_reports_offset() {
        let err = detect_characteristics(b"AB\xc3(").unwrap_err();
        assert!(matches!(err, IngestError::Undecodable { offset: 2 }));
        assert!(matches!(detect_characteristics(b""), Err(IngestError::NoHeader)));
    }
}
