use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::model::{parse_geography_column, BoundaryEdition, GeoLevel, ValueKind};

/// A role is either read from a column or fixed for the whole file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Column(String),
    Constant(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One row per cell with a single value column.
    #[default]
    Long,
    /// One column per calendar year; each row unpivots into one cell per year column.
    WideByYear,
}

/// Declarative binding of raw columns to standard record roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaMapping {
    /// Column holding region codes.
    pub geography: String,
    /// Geography level; inferred from a `<LEVEL>CODE_<YY>` geography column when absent.
    #[serde(default)]
    pub level: Option<Binding>,
    /// Boundary edition; inferred like `level` when absent.
    #[serde(default)]
    pub edition: Option<Binding>,
    /// Required in long layout, absent in wide layout.
    #[serde(default)]
    pub calendar_year: Option<Binding>,
    pub age_group: Binding,
    pub sex: Binding,
    /// Value column (long layout only).
    #[serde(default)]
    pub value: Option<String>,
    /// Year columns (wide layout only). Headers must parse as years.
    #[serde(default)]
    pub year_columns: Vec<String>,
    pub value_kind: ValueKind,
    #[serde(default)]
    pub missing_tokens: Vec<String>,
    #[serde(default)]
    pub layout: Layout,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

/// Column positions resolved against a concrete header.
#[derive(Debug, Clone)]
pub(crate) enum Resolved<T> {
    Column(usize),
    Fixed(T),
}

#[derive(Debug, Clone)]
pub(crate) struct ResolvedMapping {
    pub geography: usize,
    pub level: Resolved<GeoLevel>,
    pub edition: Resolved<BoundaryEdition>,
    pub year: Resolved<i32>,
    pub age_group: Resolved<String>,
    pub sex: Resolved<String>,
    /// `(column index, column name, fixed year)`; the year is `None` in long layout.
    pub cells: Vec<(usize, String, Option<i32>)>,
}

impl SchemaMapping {
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        Ok(serde_json::from_str(text)?)
    }

    pub(crate) fn resolve(&self, header: &[String]) -> Result<ResolvedMapping, IngestError> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim() == name.trim())
                .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
        };
        if !self.delimiter.is_ascii() {
            return Err(IngestError::InvalidMapping("delimiter must be an ASCII character".into()));
        }
        if !self.value_kind.is_numeric() {
            return Err(IngestError::InvalidMapping(format!(
                "value_kind must be count, rate or percentage, not {}",
                self.value_kind
            )));
        }

        let geography = find(&self.geography)?;
        let inferred = parse_geography_column(&self.geography);

        let level = match &self.level {
            Some(Binding::Column(c)) => Resolved::Column(find(c)?),
            Some(Binding::Constant(v)) => Resolved::Fixed(
                v.parse().map_err(|e: crate::model::ModelError| IngestError::InvalidMapping(e.to_string()))?,
            ),
            None => Resolved::Fixed(inferred.map(|(l, _)| l).ok_or_else(|| {
                IngestError::InvalidMapping(format!(
                    "no level binding and {:?} does not name one",
                    self.geography
                ))
            })?),
        };
        let edition = match &self.edition {
            Some(Binding::Column(c)) => Resolved::Column(find(c)?),
            Some(Binding::Constant(v)) => Resolved::Fixed(
                v.parse().map_err(|e: crate::model::ModelError| IngestError::InvalidMapping(e.to_string()))?,
            ),
            None => Resolved::Fixed(inferred.map(|(_, e)| e).ok_or_else(|| {
                IngestError::InvalidMapping(format!(
                    "no edition binding and {:?} does not name one",
                    self.geography
                ))
            })?),
        };
        let text_binding = |b: &Binding| -> Result<Resolved<String>, IngestError> {
            match b {
                Binding::Column(c) => Ok(Resolved::Column(find(c)?)),
                Binding::Constant(v) => Ok(Resolved::Fixed(v.clone())),
            }
        };
        let age_group = text_binding(&self.age_group)?;
        let sex = text_binding(&self.sex)?;

        let (year, cells) = match self.layout {
            Layout::Long => {
                if !self.year_columns.is_empty() {
                    return Err(IngestError::InvalidMapping(
                        "year_columns are only valid in wide_by_year layout".into(),
                    ));
                }
                let value = self.value.as_ref().ok_or_else(|| {
                    IngestError::InvalidMapping("long layout needs exactly one value column".into())
                })?;
                let year = match &self.calendar_year {
                    Some(Binding::Column(c)) => Resolved::Column(find(c)?),
                    Some(Binding::Constant(v)) => Resolved::Fixed(v.trim().parse().map_err(|_| {
                        IngestError::InvalidMapping(format!("constant year {v:?} is not an integer"))
                    })?),
                    None => {
                        return Err(IngestError::InvalidMapping(
                            "long layout needs a calendar_year binding".into(),
                        ))
                    }
                };
                (year, vec![(find(value)?, value.clone(), None)])
            }
            Layout::WideByYear => {
                if self.value.is_some() || self.calendar_year.is_some() {
                    return Err(IngestError::InvalidMapping(
                        "wide_by_year layout takes year_columns instead of value/calendar_year".into(),
                    ));
                }
                if self.year_columns.is_empty() {
                    return Err(IngestError::InvalidMapping(
                        "wide_by_year layout needs at least one year column".into(),
                    ));
                }
                let mut cells = Vec::new();
                for c in &self.year_columns {
                    let y: i32 = c.trim().parse().map_err(|_| {
                        IngestError::InvalidMapping(format!("year column {c:?} is not a year"))
                    })?;
                    cells.push((find(c)?, c.clone(), Some(y)));
                }
                (Resolved::Fixed(0), cells)
            }
        };

        Ok(ResolvedMapping { geography, level, edition, year, age_group, sex, cells })
    }
}
