use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CleaningError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupePolicy {
    #[default]
    Error,
    KeepFirst,
    Sum,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    KeepAsMissing,
    DropRow,
}

/// Two-digit year coercion: `YY->2000+YY` maps 16 to 2016.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearPattern {
    base: i32,
}

impl YearPattern {
    pub fn new(base: i32) -> Self {
        Self { base }
    }

    pub fn apply(&self, year: i32) -> Option<i32> {
        (0..=99).contains(&year).then(|| self.base + year)
    }
}

impl fmt::Display for YearPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "YY->{}+YY", self.base)
    }
}

impl FromStr for YearPattern {
    type Err = CleaningError;
    fn from_str(s: &str) -> Result<Self, CleaningError> {
        let err = || CleaningError::YearPattern(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let rest = compact.strip_prefix("YY").ok_or_else(err)?;
        let rest = rest
            .strip_prefix("->")
            .or_else(|| rest.strip_prefix('\u{2192}'))
            .ok_or_else(err)?;
        let base = rest.strip_suffix("+YY").ok_or_else(err)?;
        let base: i32 = base.parse().map_err(|_| err())?;
        if base % 100 != 0 {
            return Err(err());
        }
        Ok(Self { base })
    }
}

impl Serialize for YearPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleaningRuleSet {
    pub dedupe_policy: DedupePolicy,
    pub whitespace_normalization: bool,
    pub code_case_fold: bool,
    pub year_format_coercions: Vec<YearPattern>,
    pub missing_policy: MissingPolicy,
}

impl CleaningRuleSet {
    /// First coercion that applies to `year`, if any changes it.
    pub fn coerce_year(&self, year: i32) -> Option<i32> {
        self.year_format_coercions
            .iter()
            .find_map(|p| p.apply(year))
            .filter(|y| *y != year)
    }
}
