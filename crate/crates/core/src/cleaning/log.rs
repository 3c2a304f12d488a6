use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{value_text, CleaningError};
use crate::model::{CellValue, Dataset, Measure, StandardRecord, UncertaintyLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Geography,
    CalendarYear,
    AgeGroup,
    Sex,
    Value,
    Uncertainty,
    /// The whole record was removed.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    /// Index of the record in the cleaning input.
    pub row: usize,
    pub field: Field,
    pub before: String,
    pub after: String,
    pub rule_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl LogEntry {
    pub(crate) fn change(row: usize, field: Field, before: String, after: String, rule: &str) -> Self {
        Self { row, field, before, after, rule_id: rule.to_string(), message: None }
    }

    pub(crate) fn removal(row: usize, rec: &StandardRecord, rule: &str, message: &str) -> Self {
        Self {
            row,
            field: Field::Record,
            before: format!("{}={}", rec.key, value_text(&rec.value)),
            after: String::new(),
            rule_id: rule.to_string(),
            message: Some(message.to_string()),
        }
    }
}

/// Ordered record of every change cleaning made.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleaningLog {
    pub entries: Vec<LogEntry>,
}

impl CleaningLog {
    pub(crate) fn push(&mut self, e: LogEntry) {
        self.entries.push(e);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// JSON lines, one change per line.
    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("log entry serializes") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }

    /// Re-applies the logged changes to the cleaning input.
    pub fn replay(&self, input: &Dataset) -> Result<Dataset, CleaningError> {
        let mut rows = input.records.clone();
        let mut removed = BTreeSet::new();
        let kind = input.indicator.value_kind;
        for e in &self.entries {
            let rec = rows
                .get_mut(e.row)
                .ok_or_else(|| CleaningError::Replay(format!("row {} out of range", e.row)))?;
            let bad = |what: &str| CleaningError::Replay(format!("row {}: bad {what} {:?}", e.row, e.after));
            match e.field {
                Field::Geography => {
                    rec.key.geography = rec.key.geography.with_code(&e.after).map_err(|_| bad("code"))?
                }
                Field::CalendarYear => rec.key.calendar_year = e.after.parse().map_err(|_| bad("year"))?,
                Field::AgeGroup => rec.key.age_group = e.after.clone(),
                Field::Sex => rec.key.sex = e.after.clone(),
                Field::Value => {
                    let measure = match e.after.as_str() {
                        "S" => Measure::Suppressed,
                        "" => Measure::Missing,
                        t => Measure::numeric(kind, t.parse().map_err(|_| bad("value"))?)
                            .ok_or_else(|| bad("value"))?,
                    };
                    rec.value = CellValue::new(measure, rec.value.uncertainty);
                }
                Field::Uncertainty => {
                    let u: u8 = e.after.parse().map_err(|_| bad("uncertainty"))?;
                    rec.value.uncertainty = UncertaintyLevel::from_u8(u).map_err(|_| bad("uncertainty"))?;
                }
                Field::Record => {
                    removed.insert(e.row);
                }
            }
        }
        let kept = rows
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, r)| r)
            .collect();
        Ok(input.with_records(kept).finish())
    }
}
