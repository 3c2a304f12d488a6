use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;

const LENGTH: usize = 16;

/// Keyed identifier-to-pseudonym table. Keep it with the restricted inputs;
/// anyone holding it can link pseudonyms back to identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudonymMap {
    seed: String,
    entries: BTreeMap<String, String>,
    #[serde(skip)]
    used: BTreeSet<String>,
}

impl PseudonymMap {
    pub fn new(seed: impl Into<String>) -> Self {
        Self { seed: seed.into(), ..Self::default() }
    }

    pub fn seed(&self) -> &str {
        &self.seed
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, identifier: &str) -> Option<&str> {
        self.entries.get(identifier).map(String::as_str)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let mut m: Self = serde_json::from_str(text)?;
        m.used = m.entries.values().cloned().collect();
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes") + "\n"
    }

    fn assign(&mut self, identifier: &str) -> String {
        if let Some(p) = self.entries.get(identifier) {
            return p.clone();
        }
        let lower = identifier.to_lowercase();
        let mut counter = 0u64;
        let pseudonym = loop {
            let material = format!("{}\u{0}{}\u{0}{}", self.seed, counter, identifier);
            let candidate = sha256_hex(material.as_bytes())[..LENGTH].to_string();
            let leaks = !lower.is_empty() && candidate.contains(&lower);
            if !leaks && !self.used.contains(&candidate) {
                break candidate;
            }
            counter += 1;
        };
        self.used.insert(pseudonym.clone());
        self.entries.insert(identifier.to_string(), pseudonym.clone());
        pseudonym
    }
}

/// Replaces each identifier with its pseudonym, extending the map for new ones.
pub fn pseudonymize(column: &[String], map: &mut PseudonymMap) -> Vec<String> {
    column.iter().map(|id| map.assign(id)).collect()
}
