use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BoundaryEdition, Dataset, RecordKey};

/// One approximation (or non-approximation) event that touched a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Touch {
    /// Value produced by ratio redistribution from an earlier edition.
    Redistributed { from: BoundaryEdition, to: BoundaryEdition },
    /// Value reconstructed exactly from sole-destination regions of a later edition.
    Reconstructed { from: BoundaryEdition, to: BoundaryEdition },
    /// Missing source cells were treated as zero mass.
    MissingZeroFilled { sources: Vec<String> },
    /// A contribution below the discard threshold was dropped.
    SubThresholdDiscard { target: String, ratio: f64 },
    /// A shared contribution at or above the discard threshold forced suppression.
    ThresholdSuppressed { target: String, ratio: f64 },
    /// A suppressed input cell tainted this value.
    SuppressedInput { sources: Vec<String> },
    /// No destination region could be attributed to this region alone.
    Unresolvable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageEntry {
    pub key: RecordKey,
    pub touches: Vec<Touch>,
}

/// Which operations touched each record of a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<LineageEntry>", into = "Vec<LineageEntry>")]
pub struct Lineage {
    entries: BTreeMap<RecordKey, Vec<Touch>>,
}

impl Lineage {
    pub fn new() -> Self {
        Self::default()
    }

    /// Lineage for a dataset no correspondence step has touched.
    pub fn untouched(d: &Dataset) -> Self {
        let mut l = Self::new();
        for r in &d.records {
            l.entries.entry(r.key.clone()).or_default();
        }
        l
    }

    pub fn record(&mut self, key: RecordKey, touches: impl IntoIterator<Item = Touch>) {
        let slot = self.entries.entry(key).or_default();
        for t in touches {
            if !slot.contains(&t) {
                slot.push(t);
            }
        }
    }

    pub fn get(&self, key: &RecordKey) -> Option<&[Touch]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RecordKey, &[Touch])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }
}

impl From<Vec<LineageEntry>> for Lineage {
    fn from(v: Vec<LineageEntry>) -> Self {
        let mut l = Lineage::new();
        for e in v {
            l.record(e.key, e.touches);
        }
        l
    }
}

impl From<Lineage> for Vec<LineageEntry> {
    fn from(l: Lineage) -> Self {
        l.entries.into_iter().map(|(key, touches)| LineageEntry { key, touches }).collect()
    }
}
