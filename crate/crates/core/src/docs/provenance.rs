use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DocsError;
use crate::digest::{sha256_hex, ALGORITHM};

pub const LOG_FORMAT: &str = "ardkit-provenance/1";
pub const GENESIS_DIGEST: &str = "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    format: String,
    digest_algorithm: String,
}

/// Content of an entry before it is sequenced and chained.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntryDraft {
    pub timestamp: String,
    pub actor: String,
    pub stage: String,
    pub decision_text: String,
    pub input_digests: BTreeMap<String, String>,
    pub output_digests: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceEntry {
    pub seq: u64,
    pub timestamp: String,
    pub actor: String,
    pub stage: String,
    pub decision_text: String,
    pub input_digests: BTreeMap<String, String>,
    pub output_digests: BTreeMap<String, String>,
    pub tool_version: String,
    pub prev_digest: String,
    pub digest: String,
}

impl ProvenanceEntry {
    /// Digest over every field except `digest`, in declaration order.
    pub fn compute_digest(&self) -> String {
        let body = serde_json::json!([
            self.seq,
            self.timestamp,
            self.actor,
            self.stage,
            self.decision_text,
            self.input_digests,
            self.output_digests,
            self.tool_version,
            self.prev_digest,
        ]);
        sha256_hex(body.to_string().as_bytes())
    }
}

/// Append-only, hash-chained decision log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProvenanceLog {
    entries: Vec<ProvenanceEntry>,
}

impl ProvenanceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ProvenanceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head_digest(&self) -> &str {
        self.entries.last().map_or(GENESIS_DIGEST, |e| e.digest.as_str())
    }

    /// Sequences, chains and appends a new entry.
    pub fn record(&mut self, draft: EntryDraft, tool_version: &str) -> &ProvenanceEntry {
        let mut e = ProvenanceEntry {
            seq: self.entries.len() as u64,
            timestamp: draft.timestamp,
            actor: draft.actor,
            stage: draft.stage,
            decision_text: draft.decision_text,
            input_digests: draft.input_digests,
            output_digests: draft.output_digests,
            tool_version: tool_version.to_string(),
            prev_digest: self.head_digest().to_string(),
            digest: String::new(),
        };
        e.digest = e.compute_digest();
        self.entries.push(e);
        self.entries.last().expect("just pushed")
    }

    /// Appends an already chained entry after checking it against the head.
    pub fn append(&mut self, e: ProvenanceEntry) -> Result<(), DocsError> {
        check_link(self.entries.len(), self.head_digest(), &e)?;
        self.entries.push(e);
        Ok(())
    }

    /// Checks sequence numbers, back-links and digests of every entry.
    pub fn verify_chain(&self) -> Result<(), DocsError> {
        let mut prev = GENESIS_DIGEST;
        for (i, e) in self.entries.iter().enumerate() {
            check_link(i, prev, e)?;
            prev = &e.digest;
        }
        Ok(())
    }

    /// JSON lines: a header naming the digest algorithm, then one entry per line.
    pub fn to_jsonl(&self) -> String {
        let header = Header { format: LOG_FORMAT.into(), digest_algorithm: ALGORITHM.into() };
        let mut s = serde_json::to_string(&header).expect("header serializes") + "\n";
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("entry serializes"));
            s.push('\n');
        }
        s
    }

    /// Parses and verifies a log written by [`Self::to_jsonl`].
    pub fn from_jsonl(text: &str) -> Result<Self, DocsError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let malformed = |line: usize, reason: String| DocsError::Malformed { line: line + 1, reason };
        let (n, first) = lines.next().ok_or_else(|| malformed(0, "missing header".into()))?;
        let header: Header = serde_json::from_str(first).map_err(|e| malformed(n, e.to_string()))?;
        if header.format != LOG_FORMAT || header.digest_algorithm != ALGORITHM {
            return Err(malformed(n, format!("unsupported header {first}")));
        }
        let mut log = Self::new();
        for (n, line) in lines {
            let e: ProvenanceEntry = serde_json::from_str(line).map_err(|e| malformed(n, e.to_string()))?;
            log.entries.push(e);
        }
        log.verify_chain()?;
        Ok(log)
    }
}

fn check_link(index: usize, prev: &str, e: &ProvenanceEntry) -> Result<(), DocsError> {
    let fail = |reason: &str| Err(DocsError::Tampered { index, reason: reason.to_string() });
    if e.seq != index as u64 {
        return fail("sequence number out of order");
    }
    if e.prev_digest != prev {
        return fail("previous-entry digest does not match");
    }
    if e.digest != e.compute_digest() {
        return fail("entry digest does not match its content");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draft(stage: &str) -> EntryDraft {
        EntryDraft {
            timestamp: "1970-01-01T00:00:00Z".into(),
            actor: "tester".into(),
            stage: stage.into(),
            decision_text: format!("ran {stage}"),
            input_digests: BTreeMap::from([("in.csv".into(), "ab".into())]),
            output_digests: BTreeMap::new(),
        }
    }

    fn log(n: usize) -> ProvenanceLog {
        let mut l = ProvenanceLog::new();
        for i in 0..n {
            l.record(draft(&format!("s{i}")), "0.1.0");
        }
        l
    }

    #[test]
    fn first_entry_chains_to_genesis() {
        let l = log(1);
        assert_eq!(l.len(), 1);
        assert_eq!(l.entries()[0].prev_digest, GENESIS_DIGEST);
        assert!(l.verify_chain().is_ok());
    }

    #[test]
    fn order_preserved_and_round_trips() {
        let l = log(2);
        assert_eq!(l.entries()[0].stage, "s0");
        assert_eq!(l.entries()[1].stage, "s1");
        let text = l.to_jsonl();
        assert!(text.lines().next().unwrap().contains("\"digest_algorithm\":\"sha256\""));
        assert_eq!(ProvenanceLog::from_jsonl(&text).unwrap(), l);
    }

    #[test]
    fn tampering_is_located() {
        let mut l = log(3);
        l.entries[1].decision_text = "edited".into();
        assert!(matches!(l.verify_chain(), Err(DocsError::Tampered { index: 1, .. })));
        let text = log(3).to_jsonl().replace("ran s1", "ran sX");
        let err = ProvenanceLog::from_jsonl(&text).unwrap_err();
        assert!(err.to_string().starts_with("provenance log tampered or forked at entry 1"));
    }

    #[test]
    fn append_rejects_forks() {
        let mut a = log(2);
        let mut fork = log(1);
        fork.record(draft("other"), "0.1.0");
        let stray = fork.entries()[1].clone();
        assert!(matches!(a.append(stray), Err(DocsError::Tampered { index: 2, .. })));
        let mut b = log(2);
        let mut c = log(2);
        let next = c.record(draft("s2"), "0.1.0").clone();
        b.append(next).unwrap();
        a.record(draft("s2"), "0.1.0");
        assert_eq!(a, b);
    }
}
