//! Domain types shared by every pipeline stage.
//!
//! A [`Dataset`] is one indicator's worth of [`StandardRecord`]s, all keyed on
//! the same boundary edition and geography level. Records are plain values;
//! stages never mutate a dataset in place, they build a new one and finish it
//! with [`Dataset::finish`] so ordering and the indicator's uncertainty summary
//! stay canonical.

mod csv_io;
mod lineage;
mod rounding;
mod validate;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{
    format_magnitude, geography_column, parse_geography_column, read_csv, write_csv, CSV_COLUMNS,
};
pub use lineage::{Lineage, LineageEntry, Touch};
pub use rounding::round_counts;
pub use validate::{validate_dataset, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("unsupported boundary edition {0} (expected 2006, 2011, 2016 or 2021)")]
    UnknownEdition(String),
    #[error("unknown geography level {0:?}")]
    UnknownLevel(String),
    #[error("invalid token {token:?}: {reason}")]
    InvalidToken { token: String, reason: &'static str },
    #[error("invalid cell value: {0}")]
    InvalidValue(String),
    #[error("unknown value kind {0:?}")]
    UnknownKind(String),
    #[error("unknown domain tag {0:?}")]
    UnknownDomain(String),
    #[error("malformed dataset file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Characters that may never appear inside a code or filter token.
pub const DELIMITERS: &[char] = &[',', ';', '|', '\t', '"', '\r', '\n'];

pub(crate) fn check_token(token: &str) -> Result<(), ModelError> {
    if token.is_empty() {
        return Err(ModelError::InvalidToken { token: token.into(), reason: "empty" });
    }
    if token.contains(DELIMITERS) {
        return Err(ModelError::InvalidToken {
            token: token.into(),
            reason: "contains a delimiter character",
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Boundary editions and geography levels
// ---------------------------------------------------------------------------

/// A release of the statistical geography standard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum BoundaryEdition {
    Asgs2006,
    Asgs2011,
    Asgs2016,
    Asgs2021,
}

impl BoundaryEdition {
    pub const ALL: [BoundaryEdition; 4] = [
        BoundaryEdition::Asgs2006,
        BoundaryEdition::Asgs2011,
        BoundaryEdition::Asgs2016,
        BoundaryEdition::Asgs2021,
    ];

    pub fn year(self) -> u16 {
        match self {
            BoundaryEdition::Asgs2006 => 2006,
            BoundaryEdition::Asgs2011 => 2011,
            BoundaryEdition::Asgs2016 => 2016,
            BoundaryEdition::Asgs2021 => 2021,
        }
    }

    pub fn from_year(year: u16) -> Result<Self, ModelError> {
        Self::ALL
            .into_iter()
            .find(|e| e.year() == year)
            .ok_or_else(|| ModelError::UnknownEdition(year.to_string()))
    }

    /// Two-digit suffix used in geography column names (`16` for 2016).
    pub fn short_year(self) -> String {
        format!("{:02}", self.year() % 100)
    }
}

impl From<BoundaryEdition> for u16 {
    fn from(e: BoundaryEdition) -> u16 {
        e.year()
    }
}

impl TryFrom<u16> for BoundaryEdition {
    type Error = ModelError;
    fn try_from(y: u16) -> Result<Self, ModelError> {
        Self::from_year(y)
    }
}

impl fmt::Display for BoundaryEdition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ASGS{}", self.year())
    }
}

impl FromStr for BoundaryEdition {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, ModelError> {
        let t = s.trim();
        let digits = t.strip_prefix("ASGS").unwrap_or(t);
        digits
            .parse::<u16>()
            .map_err(|_| ModelError::UnknownEdition(s.into()))
            .and_then(Self::from_year)
    }
}

/// Geography level. The statistical areas nest from mesh blocks up to the
/// whole country; LGA sits outside that chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeoLevel {
    #[serde(rename = "MB")]
    MeshBlock,
    #[serde(rename = "SA1")]
    Sa1,
    #[serde(rename = "SA2")]
    Sa2,
    #[serde(rename = "SA3")]
    Sa3,
    #[serde(rename = "SA4")]
    Sa4,
    #[serde(rename = "STE")]
    Ste,
    #[serde(rename = "AUS")]
    Aus,
    #[serde(rename = "LGA")]
    Lga,
}

impl GeoLevel {
    pub const ALL: [GeoLevel; 8] = [
        GeoLevel::MeshBlock,
        GeoLevel::Sa1,
        GeoLevel::Sa2,
        GeoLevel::Sa3,
        GeoLevel::Sa4,
        GeoLevel::Ste,
        GeoLevel::Aus,
        GeoLevel::Lga,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GeoLevel::MeshBlock => "MB",
            GeoLevel::Sa1 => "SA1",
            GeoLevel::Sa2 => "SA2",
            GeoLevel::Sa3 => "SA3",
            GeoLevel::Sa4 => "SA4",
            GeoLevel::Ste => "STE",
            GeoLevel::Aus => "AUS",
            GeoLevel::Lga => "LGA",
        }
    }

    /// Position in the containment chain; `None` for structures outside it.
    pub fn containment_rank(self) -> Option<u8> {
        match self {
            GeoLevel::MeshBlock => Some(0),
            GeoLevel::Sa1 => Some(1),
            GeoLevel::Sa2 => Some(2),
            GeoLevel::Sa3 => Some(3),
            GeoLevel::Sa4 => Some(4),
            GeoLevel::Ste => Some(5),
            GeoLevel::Aus => Some(6),
            GeoLevel::Lga => None,
        }
    }
}

impl PartialOrd for GeoLevel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            return Some(Ordering::Equal);
        }
        match (self.containment_rank(), other.containment_rank()) {
            (Some(a), Some(b)) => Some(a.cmp(&b)),
            _ => None,
        }
    }
}

impl fmt::Display for GeoLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GeoLevel {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, ModelError> {
        let t = s.trim().to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|l| l.label() == t)
            .ok_or_else(|| ModelError::UnknownLevel(s.into()))
    }
}

/// An edition-specific region code at one geography level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionCode {
    code: String,
    level: GeoLevel,
    edition: BoundaryEdition,
}

impl RegionCode {
    pub fn new(
        code: impl Into<String>,
        level: GeoLevel,
        edition: BoundaryEdition,
    ) -> Result<Self, ModelError> {
        let code = code.into();
        check_token(&code)?;
        if code.trim().is_empty() {
            return Err(ModelError::InvalidToken { token: code, reason: "blank" });
        }
        Ok(Self { code, level, edition })
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn level(&self) -> GeoLevel {
        self.level
    }

    pub fn edition(&self) -> BoundaryEdition {
        self.edition
    }

    pub fn with_code(&self, code: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(code, self.level, self.edition)
    }

    pub fn relabel(&self, edition: BoundaryEdition) -> Self {
        Self { code: self.code.clone(), level: self.level, edition }
    }
}

impl Ord for RegionCode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.code
            .cmp(&other.code)
            .then_with(|| self.level.label().cmp(other.level.label()))
            .then_with(|| self.edition.cmp(&other.edition))
    }
}

impl PartialOrd for RegionCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RegionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

/// Ordinal tag for how much approximation touched a value.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(try_from = "u8", into = "u8")]
pub enum UncertaintyLevel {
    #[default]
    Low = 0,
    Medium = 1,
    High = 2,
}

impl UncertaintyLevel {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Result<Self, ModelError> {
        match v {
            0 => Ok(Self::Low),
            1 => Ok(Self::Medium),
            2 => Ok(Self::High),
            _ => Err(ModelError::InvalidValue(format!("uncertainty level {v}"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Low => "low",
            Self::Medium => "medium",
            Self::High => "high",
        }
    }
}

impl From<UncertaintyLevel> for u8 {
    fn from(u: UncertaintyLevel) -> u8 {
        u.as_u8()
    }
}

impl TryFrom<u8> for UncertaintyLevel {
    type Error = ModelError;
    fn try_from(v: u8) -> Result<Self, ModelError> {
        Self::from_u8(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Count,
    Rate,
    Percentage,
    Suppressed,
    Missing,
}

impl ValueKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Count => "count",
            Self::Rate => "rate",
            Self::Percentage => "percentage",
            Self::Suppressed => "suppressed",
            Self::Missing => "missing",
        }
    }

    /// Kinds that carry a magnitude.
    pub fn is_numeric(self) -> bool {
        matches!(self, Self::Count | Self::Rate | Self::Percentage)
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ValueKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "count" => Ok(Self::Count),
            "rate" => Ok(Self::Rate),
            "percentage" => Ok(Self::Percentage),
            "suppressed" => Ok(Self::Suppressed),
            "missing" => Ok(Self::Missing),
            _ => Err(ModelError::UnknownKind(s.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Count(f64),
    Rate(f64),
    Percentage(f64),
    Suppressed,
    Missing,
}

impl Measure {
    pub fn kind(self) -> ValueKind {
        match self {
            Self::Count(_) => ValueKind::Count,
            Self::Rate(_) => ValueKind::Rate,
            Self::Percentage(_) => ValueKind::Percentage,
            Self::Suppressed => ValueKind::Suppressed,
            Self::Missing => ValueKind::Missing,
        }
    }

    pub fn magnitude(self) -> Option<f64> {
        match self {
            Self::Count(v) | Self::Rate(v) | Self::Percentage(v) => Some(v),
            Self::Suppressed | Self::Missing => None,
        }
    }

    /// Builds a numeric measure of the given kind without range checks.
    pub fn numeric(kind: ValueKind, magnitude: f64) -> Option<Self> {
        match kind {
            ValueKind::Count => Some(Self::Count(magnitude)),
            ValueKind::Rate => Some(Self::Rate(magnitude)),
            ValueKind::Percentage => Some(Self::Percentage(magnitude)),
            ValueKind::Suppressed | ValueKind::Missing => None,
        }
    }
}

/// A typed cell together with its uncertainty tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellValue {
    pub measure: Measure,
    pub uncertainty: UncertaintyLevel,
}

impl CellValue {
    pub fn new(measure: Measure, uncertainty: UncertaintyLevel) -> Self {
        Self { measure, uncertainty }
    }

    /// Range-checked constructor for numeric cells.
    pub fn checked(
        kind: ValueKind,
        magnitude: f64,
        uncertainty: UncertaintyLevel,
    ) -> Result<Self, ModelError> {
        if !magnitude.is_finite() || magnitude < 0.0 {
            return Err(ModelError::InvalidValue(format!(
                "{kind} magnitude {magnitude} must be a non-negative finite number"
            )));
        }
        if kind == ValueKind::Percentage && magnitude > 100.0 {
            return Err(ModelError::InvalidValue(format!("percentage {magnitude} exceeds 100")));
        }
        let measure = Measure::numeric(kind, magnitude)
            .ok_or_else(|| ModelError::InvalidValue(format!("{kind} cells carry no magnitude")))?;
        Ok(Self { measure, uncertainty })
    }

    pub fn count(v: f64) -> Self {
        Self::new(Measure::Count(v), UncertaintyLevel::Low)
    }

    pub fn suppressed() -> Self {
        Self::new(Measure::Suppressed, UncertaintyLevel::Low)
    }

    pub fn missing() -> Self {
        Self::new(Measure::Missing, UncertaintyLevel::Low)
    }

    pub fn with_uncertainty(self, uncertainty: UncertaintyLevel) -> Self {
        Self { uncertainty, ..self }
    }

    pub fn kind(&self) -> ValueKind {
        self.measure.kind()
    }

    pub fn magnitude(&self) -> Option<f64> {
        self.measure.magnitude()
    }

    /// Total order used to break ties between records sharing a key.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.kind()
            .cmp(&other.kind())
            .then_with(|| {
                let a = self.magnitude().unwrap_or(0.0);
                let b = other.magnitude().unwrap_or(0.0);
                a.total_cmp(&b)
            })
            .then_with(|| self.uncertainty.cmp(&other.uncertainty))
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// The filter part of a key: everything except the geography.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stratum {
    pub calendar_year: i32,
    pub age_group: String,
    pub sex: String,
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.calendar_year, self.age_group, self.sex)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecordKey {
    pub geography: RegionCode,
    pub calendar_year: i32,
    pub age_group: String,
    pub sex: String,
}

impl RecordKey {
    pub fn new(
        geography: RegionCode,
        calendar_year: i32,
        age_group: impl Into<String>,
        sex: impl Into<String>,
    ) -> Self {
        Self { geography, calendar_year, age_group: age_group.into(), sex: sex.into() }
    }

    pub fn stratum(&self) -> Stratum {
        Stratum {
            calendar_year: self.calendar_year,
            age_group: self.age_group.clone(),
            sex: self.sex.clone(),
        }
    }
}

impl Ord for RecordKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.geography
            .code()
            .cmp(other.geography.code())
            .then_with(|| self.calendar_year.cmp(&other.calendar_year))
            .then_with(|| self.age_group.cmp(&other.age_group))
            .then_with(|| self.sex.cmp(&other.sex))
            .then_with(|| self.geography.cmp(&other.geography))
    }
}

impl PartialOrd for RecordKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}", self.geography, self.calendar_year, self.age_group, self.sex)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardRecord {
    pub key: RecordKey,
    pub value: CellValue,
}

impl StandardRecord {
    pub fn new(key: RecordKey, value: CellValue) -> Self {
        Self { key, value }
    }
}

// ---------------------------------------------------------------------------
// Indicators and datasets
// ---------------------------------------------------------------------------

/// One of the six wellbeing domains an indicator is filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NestDomain {
    Healthy,
    MaterialBasics,
    ValuedLovedSafe,
    Learning,
    Participating,
    PositiveIdentityCulture,
}

impl NestDomain {
    pub fn label(self) -> &'static str {
        match self {
            Self::Healthy => "Healthy",
            Self::MaterialBasics => "Material basics",
            Self::ValuedLovedSafe => "Valued, loved and safe",
            Self::Learning => "Learning",
            Self::Participating => "Participating",
            Self::PositiveIdentityCulture => "Positive sense of identity and culture",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indicator {
    pub id: String,
    pub name: String,
    pub nest_domain: NestDomain,
    pub value_kind: ValueKind,
    pub source_id: String,
    #[serde(default)]
    pub correspondence_applied: bool,
    #[serde(default)]
    pub max_uncertainty: UncertaintyLevel,
}

impl Indicator {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        nest_domain: NestDomain,
        value_kind: ValueKind,
        source_id: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            nest_domain,
            value_kind,
            source_id: source_id.into(),
            correspondence_applied: false,
            max_uncertainty: UncertaintyLevel::Low,
        }
    }
}

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearSpan {
    pub start: i32,
    pub end: i32,
}

impl YearSpan {
    pub fn new(start: i32, end: i32) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl fmt::Display for YearSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}\u{2013}{}", self.start, self.end)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub indicator: Indicator,
    pub edition: BoundaryEdition,
    pub level: GeoLevel,
    /// Declared temporal coverage; `None` leaves years unconstrained.
    pub temporal_coverage: Option<YearSpan>,
    pub records: Vec<StandardRecord>,
}

impl Dataset {
    pub fn new(
        indicator: Indicator,
        edition: BoundaryEdition,
        level: GeoLevel,
        records: Vec<StandardRecord>,
    ) -> Self {
        Self { indicator, edition, level, temporal_coverage: None, records }
    }

    pub fn with_coverage(mut self, coverage: Option<YearSpan>) -> Self {
        self.temporal_coverage = coverage;
        self
    }

    /// Copy of this dataset with different records, otherwise unchanged.
    pub fn with_records(&self, records: Vec<StandardRecord>) -> Self {
        Self {
            indicator: self.indicator.clone(),
            edition: self.edition,
            level: self.level,
            temporal_coverage: self.temporal_coverage,
            records,
        }
    }

    /// Records sorted by key; ties broken on the value so the order is total.
    pub fn canonical_sort(&self) -> Self {
        let mut out = self.clone();
        out.sort_records();
        out
    }

    fn sort_records(&mut self) {
        self.records
            .sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.value.total_cmp(&b.value)));
    }

    /// Sorts records and refreshes the indicator's uncertainty summary.
    pub fn finish(mut self) -> Self {
        self.sort_records();
        self.indicator.max_uncertainty = self.max_uncertainty();
        self
    }

    pub fn max_uncertainty(&self) -> UncertaintyLevel {
        self.records.iter().map(|r| r.value.uncertainty).max().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sum of every count magnitude, ignoring suppressed and missing cells.
    pub fn count_total(&self) -> f64 {
        self.records
            .iter()
            .filter_map(|r| match r.value.measure {
                Measure::Count(v) => Some(v),
                _ => None,
            })
            .sum()
    }

    /// Smallest and largest calendar year present.
    pub fn year_extent(&self) -> Option<YearSpan> {
        let min = self.records.iter().map(|r| r.key.calendar_year).min()?;
        let max = self.records.iter().map(|r| r.key.calendar_year).max()?;
        Some(YearSpan::new(min, max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn editions_are_closed_and_ordered() {
        assert!(BoundaryEdition::from_year(2001).is_err());
        assert!(BoundaryEdition::Asgs2006 < BoundaryEdition::Asgs2011);
        assert!(BoundaryEdition::Asgs2016 < BoundaryEdition::Asgs2021);
        assert_eq!("ASGS2011".parse::<BoundaryEdition>().unwrap(), BoundaryEdition::Asgs2011);
        assert_eq!("2021".parse::<BoundaryEdition>().unwrap(), BoundaryEdition::Asgs2021);
        assert_eq!(BoundaryEdition::Asgs2006.short_year(), "06");
    }

    #[test]
    fn geo_levels_follow_containment_chain() {
        let chain = [
            GeoLevel::MeshBlock,
            GeoLevel::Sa1,
            GeoLevel::Sa2,
            GeoLevel::Sa3,
            GeoLevel::Sa4,
            GeoLevel::Ste,
            GeoLevel::Aus,
        ];
        for w in chain.windows(2) {
            assert!(w[0] < w[1], "{} < {}", w[0], w[1]);
        }
        for l in chain {
            assert_eq!(GeoLevel::Lga.partial_cmp(&l), None);
        }
        assert_eq!(GeoLevel::Lga.partial_cmp(&GeoLevel::Lga), Some(Ordering::Equal));
    }

    #[test]
    fn region_codes_reject_delimiters() {
        let ok = RegionCode::new("10102", GeoLevel::Sa3, BoundaryEdition::Asgs2016);
        assert!(ok.is_ok());
        for bad in ["", "  ", "10,2", "a\"b", "x\ny"] {
            assert!(RegionCode::new(bad, GeoLevel::Sa3, BoundaryEdition::Asgs2016).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn checked_values_enforce_ranges() {
        assert!(CellValue::checked(ValueKind::Percentage, 120.0, UncertaintyLevel::Low).is_err());
        assert!(CellValue::checked(ValueKind::Count, -1.0, UncertaintyLevel::Low).is_err());
        assert!(CellValue::checked(ValueKind::Suppressed, 1.0, UncertaintyLevel::Low).is_err());
        let v = CellValue::checked(ValueKind::Count, 2.5, UncertaintyLevel::Medium).unwrap();
        assert_eq!(v.magnitude(), Some(2.5));
    }

    #[test]
    fn year_span_renders_with_en_dash() {
        assert_eq!(YearSpan::new(2006, 2022).to_string(), "2006\u{2013}2022");
    }
}
