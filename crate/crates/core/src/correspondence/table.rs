use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::CorrespondenceError;
use crate::model::{BoundaryEdition, GeoLevel, RegionCode};

/// Tolerance applied to per-source ratio sums when loading a table.
pub const LOAD_TOLERANCE: f64 = 1e-6;

pub const TABLE_HEADER: [&str; 3] = ["FROM_CODE", "TO_CODE", "RATIO"];

/// Which editions and level a correspondence file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableMeta {
    pub from_edition: BoundaryEdition,
    pub to_edition: BoundaryEdition,
    pub level: GeoLevel,
}

impl TableMeta {
    pub fn new(from_edition: BoundaryEdition, to_edition: BoundaryEdition, level: GeoLevel) -> Self {
        Self { from_edition, to_edition, level }
    }
}

/// Parses decimal text (optionally with an exponent) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if neg {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let r = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceEdge {
    pub from: RegionCode,
    pub to: RegionCode,
    /// Ratio as a double, used for threshold comparisons and reporting.
    pub ratio: f64,
    exact: BigRational,
}

impl CorrespondenceEdge {
    /// Edge whose ratio is given as decimal text, kept exactly.
    pub fn from_text(from: RegionCode, to: RegionCode, ratio: &str) -> Option<Self> {
        let exact = parse_decimal(ratio)?;
        let ratio = exact.to_f64()?;
        Some(Self { from, to, ratio, exact })
    }

    /// Edge whose exact ratio is the binary value of `ratio`.
    pub fn from_f64(from: RegionCode, to: RegionCode, ratio: f64) -> Option<Self> {
        let exact = BigRational::from_float(ratio)?;
        Some(Self { from, to, ratio, exact })
    }

    pub fn exact_ratio(&self) -> &BigRational {
        &self.exact
    }
}

/// Validated, immutable weighted edges between two editions' regions.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceTable {
    meta: TableMeta,
    edges: Vec<CorrespondenceEdge>,
    by_source: BTreeMap<String, Vec<usize>>,
    by_target: BTreeMap<String, Vec<usize>>,
}

fn fmt_sum(v: f64) -> String {
    let s = format!("{v:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl CorrespondenceTable {
    /// Builds a table and enforces every invariant.
    pub fn new(meta: TableMeta, edges: Vec<CorrespondenceEdge>) -> Result<Self, CorrespondenceError> {
        let t = Self::build(meta, edges)?;
        let offenders = t.ratio_sum_offenders(LOAD_TOLERANCE);
        if !offenders.is_empty() {
            return Err(CorrespondenceError::RatioSum(
                offenders.into_iter().map(|(code, sum)| (code, fmt_sum(sum))).collect(),
            ));
        }
        Ok(t)
    }

    /// Builds a table without the ratio-sum check. Structural checks still apply.
    pub fn from_edges_unchecked(
        meta: TableMeta,
        edges: Vec<CorrespondenceEdge>,
    ) -> Result<Self, CorrespondenceError> {
        Self::build(meta, edges)
    }

    fn build(meta: TableMeta, mut edges: Vec<CorrespondenceEdge>) -> Result<Self, CorrespondenceError> {
        if meta.from_edition == meta.to_edition {
            return Err(CorrespondenceError::SameEdition(meta.from_edition));
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.from.edition() != meta.from_edition
                || e.to.edition() != meta.to_edition
                || e.from.level() != meta.level
                || e.to.level() != meta.level
            {
                return Err(CorrespondenceError::EdgeOutsideTable {
                    from: e.from.code().into(),
                    to: e.to.code().into(),
                });
            }
            if !(0.0..=1.0).contains(&e.ratio) || e.exact.is_negative() || e.exact > BigRational::one() {
                return Err(CorrespondenceError::RatioOutOfRange {
                    from: e.from.code().into(),
                    to: e.to.code().into(),
                    ratio: e.ratio,
                });
            }
            if !seen.insert((e.from.code().to_string(), e.to.code().to_string())) {
                return Err(CorrespondenceError::DuplicateEdge {
                    from: e.from.code().into(),
                    to: e.to.code().into(),
                });
            }
        }
        edges.sort_by(|a, b| a.from.code().cmp(b.from.code()).then_with(|| a.to.code().cmp(b.to.code())));
        let mut by_source: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut by_target: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            by_source.entry(e.from.code().to_string()).or_default().push(i);
            by_target.entry(e.to.code().to_string()).or_default().push(i);
        }
        Ok(Self { meta, edges, by_source, by_target })
    }

    pub fn meta(&self) -> TableMeta {
        self.meta
    }

    pub fn from_edition(&self) -> BoundaryEdition {
        self.meta.from_edition
    }

    pub fn to_edition(&self) -> BoundaryEdition {
        self.meta.to_edition
    }

    pub fn level(&self) -> GeoLevel {
        self.meta.level
    }

    pub fn edges(&self) -> &[CorrespondenceEdge] {
        &self.edges
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.by_source.keys().map(String::as_str)
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.by_target.keys().map(String::as_str)
    }

    pub fn has_source(&self, code: &str) -> bool {
        self.by_source.contains_key(code)
    }

    pub fn has_target(&self, code: &str) -> bool {
        self.by_target.contains_key(code)
    }

    pub fn edges_from(&self, code: &str) -> impl Iterator<Item = &CorrespondenceEdge> {
        self.by_source.get(code).into_iter().flatten().map(|&i| &self.edges[i])
    }

    pub fn edges_into(&self, code: &str) -> impl Iterator<Item = &CorrespondenceEdge> {
        self.by_target.get(code).into_iter().flatten().map(|&i| &self.edges[i])
    }

    /// Sources whose exact ratio sum deviates from 1 by more than `tolerance`.
    pub fn ratio_sum_offenders(&self, tolerance: f64) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (code, idx) in &self.by_source {
            let sum: BigRational = idx.iter().map(|&i| self.edges[i].exact.clone()).sum();
            let dev = (&sum - BigRational::one()).abs().to_f64().unwrap_or(f64::INFINITY);
            if dev > tolerance {
                out.push((code.clone(), sum.to_f64().unwrap_or(f64::NAN)));
            }
        }
        out
    }

    /// Canonical CSV rendering with the published header.
    pub fn to_csv(&self) -> String {
        let mut s = TABLE_HEADER.join(",");
        s.push('\n');
        for e in &self.edges {
            s.push_str(&format!("{},{},{}\n", e.from.code(), e.to.code(), e.ratio));
        }
        s
    }
}

/// Loads a `FROM_CODE,TO_CODE,RATIO` file.
pub fn load_table(bytes: &[u8], meta: TableMeta) -> Result<CorrespondenceTable, CorrespondenceError> {
    CorrespondenceTable::new(meta, read_edges(bytes, meta)?)
}

/// Loads a file with structural checks only; used to echo-check tables in QA.
pub fn load_table_unchecked(bytes: &[u8], meta: TableMeta) -> Result<CorrespondenceTable, CorrespondenceError> {
    CorrespondenceTable::from_edges_unchecked(meta, read_edges(bytes, meta)?)
}

fn read_edges(bytes: &[u8], meta: TableMeta) -> Result<Vec<CorrespondenceEdge>, CorrespondenceError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_ascii_uppercase()).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(fc), Some(tc), Some(rc)) = (col("FROM_CODE"), col("TO_CODE"), col("RATIO")) else {
        return Err(CorrespondenceError::Header(header.join(",")));
    };
    let mut edges = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let bad = |reason: String| CorrespondenceError::BadRow { line, reason };
        let from = RegionCode::new(row.get(fc).unwrap_or("").trim(), meta.level, meta.from_edition)
            .map_err(|e| bad(e.to_string()))?;
        let to = RegionCode::new(row.get(tc).unwrap_or("").trim(), meta.level, meta.to_edition)
            .map_err(|e| bad(e.to_string()))?;
        let text = row.get(rc).unwrap_or("");
        let edge = CorrespondenceEdge::from_text(from, to, text)
            .ok_or_else(|| bad(format!("ratio {text:?} is not a decimal number")))?;
        edges.push(edge);
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> TableMeta {
        TableMeta::new(BoundaryEdition::Asgs2016, BoundaryEdition::Asgs2021, GeoLevel::Sa2)
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("0.3").unwrap(), BigRational::new(3.into(), 10.into()));
        assert_eq!(parse_decimal("1").unwrap(), BigRational::one());
        assert_eq!(parse_decimal(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_decimal("25e-2").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_decimal("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        for bad in ["", ".", "abc", "1.2.3", "0x10"] {
            assert!(parse_decimal(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn valid_split_loads() {
        let t = load_table(b"FROM_CODE,TO_CODE,RATIO\nA,B,0.3\nA,C,0.7\n", meta()).unwrap();
        assert_eq!(t.edges().len(), 2);
        assert!(t.ratio_sum_offenders(0.0).is_empty());
    }

    #[test]
    fn bad_ratio_sum_names_the_source() {
        let err = load_table(b"FROM_CODE,TO_CODE,RATIO\nA,B,0.3\nA,C,0.6\n", meta()).unwrap_err();
        assert_eq!(err.to_string(), "ratios for A sum to 0.9");
    }

    #[test]
    fn identity_edge_is_valid() {
        let t = load_table(b"FROM_CODE,TO_CODE,RATIO\nA,A,1.0\n", meta()).unwrap();
        assert_eq!(t.edges()[0].ratio, 1.0);
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            load_table(b"FROM_CODE,TO_CODE,RATIO\nA,B,1.5\n", meta()),
            Err(CorrespondenceError::RatioOutOfRange { .. })
        ));
        assert!(matches!(
            load_table(b"FROM_CODE,TO_CODE,RATIO\nA,B,0.5\nA,B,0.5\n", meta()),
            Err(CorrespondenceError::DuplicateEdge { .. })
        ));
        assert!(matches!(load_table(b"FROM,TO,R\n", meta()), Err(CorrespondenceError::Header(_))));
        assert!(matches!(
            load_table(b"FROM_CODE,TO_CODE,RATIO\nA,B,x\n", meta()),
            Err(CorrespondenceError::BadRow { line: 2, .. })
        ));
        let same = TableMeta::new(BoundaryEdition::Asgs2016, BoundaryEdition::Asgs2016, GeoLevel::Sa2);
        assert!(matches!(
            load_table(b"FROM_CODE,TO_CODE,RATIO\nA,A,1\n", same),
            Err(CorrespondenceError::SameEdition(_))
        ));
    }

    #[test]
    fn tolerance_accepts_rounded_published_ratios() {
        let t = load_table(b"FROM_CODE,TO_CODE,RATIO\nA,B,0.3333333\nA,C,0.6666666\n", meta());
        assert!(t.is_ok());
        let unchecked =
            load_table_unchecked(b"FROM_CODE,TO_CODE,RATIO\nA,B,0.3\nA,C,0.6\n", meta()).unwrap();
        assert_eq!(unchecked.ratio_sum_offenders(LOAD_TOLERANCE).len(), 1);
    }
}
