use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub severity: Severity,
    /// Where the problem is: a record key, a stratum, a table source, or the dataset.
    pub locator: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaReport {
    pub dataset_id: String,
    pub pass: bool,
    pub findings: Vec<Finding>,
}

impl QaReport {
    pub fn new(dataset_id: impl Into<String>, findings: Vec<Finding>) -> Self {
        let pass = !findings.iter().any(|f| f.severity == Severity::Error);
        Self { dataset_id: dataset_id.into(), pass, findings }
    }

    pub fn count(&self, severity: Severity) -> usize {
        self.findings.iter().filter(|f| f.severity == severity).count()
    }

    pub fn with_rule<'a>(&'a self, rule_id: &'a str) -> impl Iterator<Item = &'a Finding> {
        self.findings.iter().filter(move |f| f.rule_id == rule_id)
    }

    /// 0 when passing cleanly, 1 with warnings only, 2 with errors.
    pub fn exit_code(&self) -> i32 {
        if !self.pass {
            2
        } else if self.count(Severity::Warning) > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "QA report for {}: {} ({} error(s), {} warning(s), {} info)\n",
            self.dataset_id,
            if self.pass { "PASS" } else { "FAIL" },
            self.count(Severity::Error),
            self.count(Severity::Warning),
            self.count(Severity::Info),
        );
        for f in &self.findings {
            s.push_str(&format!("[{}] {} at {}: {}\n", f.severity, f.rule_id, f.locator, f.message));
        }
        s
    }
}
