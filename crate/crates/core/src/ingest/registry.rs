use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMode {
    Public,
    Request,
    CustomDownload,
}

/// Where a source came from and when it was collected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDescriptor {
    pub source_id: String,
    pub name: String,
    pub custodian: String,
    pub access_mode: AccessMode,
    pub collection_start: NaiveDate,
    pub collection_end: NaiveDate,
    pub url_or_locator: String,
}

impl SourceDescriptor {
    pub fn check(&self) -> Result<(), IngestError> {
        if self.collection_start > self.collection_end {
            return Err(IngestError::InvertedWindow {
                source_id: self.source_id.clone(),
                start: self.collection_start.to_string(),
                end: self.collection_end.to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceRegistry {
    sources: BTreeMap<String, SourceDescriptor>,
}

impl SourceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, source: SourceDescriptor) -> Result<(), IngestError> {
        source.check()?;
        if self.sources.contains_key(&source.source_id) {
            return Err(IngestError::DuplicateSource(source.source_id));
        }
        self.sources.insert(source.source_id.clone(), source);
        Ok(())
    }

    pub fn get(&self, source_id: &str) -> Option<&SourceDescriptor> {
        self.sources.get(source_id)
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SourceDescriptor> {
        self.sources.values()
    }

    pub fn to_json(&self) -> String {
        let list: Vec<_> = self.sources.values().collect();
        let mut s = serde_json::to_string_pretty(&list).expect("registry serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let list: Vec<SourceDescriptor> = serde_json::from_str(text)?;
        let mut reg = Self::new();
        for s in list {
            reg.register(s)?;
        }
        Ok(reg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(id: &str, start: (i32, u32, u32), end: (i32, u32, u32)) -> SourceDescriptor {
        SourceDescriptor {
            source_id: id.into(),
            name: "Births".into(),
            custodian: "State health department".into(),
            access_mode: AccessMode::Request,
            collection_start: NaiveDate::from_ymd_opt(start.0, start.1, start.2).unwrap(),
            collection_end: NaiveDate::from_ymd_opt(end.0, end.1, end.2).unwrap(),
            url_or_locator: "request-2023-117".into(),
        }
    }

    #[test]
    fn register_and_reject_duplicates() {
        let mut reg = SourceRegistry::new();
        reg.register(desc("births", (2006, 1, 1), (2022, 12, 31))).unwrap();
        assert_eq!(reg.len(), 1);
        let err = reg.register(desc("births", (2006, 1, 1), (2022, 12, 31))).unwrap_err();
        assert!(err.to_string().contains("duplicate source"));
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn inverted_window_rejected() {
        let mut reg = SourceRegistry::new();
        let err = reg.register(desc("x", (2022, 1, 1), (2006, 1, 1))).unwrap_err();
        assert!(err.to_string().contains("inverted collection window"));
        assert!(reg.is_empty());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let mut reg = SourceRegistry::new();
        reg.register(desc("b", (2010, 1, 1), (2011, 1, 1))).unwrap();
        reg.register(desc("a", (2010, 1, 1), (2011, 1, 1))).unwrap();
        let text = reg.to_json();
        let back = SourceRegistry::from_json(&text).unwrap();
        assert_eq!(back, reg);
        assert_eq!(back.to_json(), text);
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = r#"[{"source_id":"a","name":"n","custodian":"c","access_mode":"public",
            "collection_start":"2010-01-01","collection_end":"2011-01-01","url_or_locator":"u","extra":1}]"#;
        assert!(SourceRegistry::from_json(bad).is_err());
    }
}
