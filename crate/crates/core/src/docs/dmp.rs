use std::collections::BTreeMap;

pub struct DmpTopic {
    pub id: &'static str,
    pub title: &'static str,
    pub prompts: &'static [&'static str],
}

pub const DMP_TOPICS: [DmpTopic; 14] = [
    DmpTopic {
        id: "discovery",
        title: "Data discovery",
        prompts: &["Which kinds of data does the project need, and from where?"],
    },
    DmpTopic {
        id: "description",
        title: "Data description",
        prompts: &["What do the datasets contain: units, populations, geographic and temporal granularity?"],
    },
    DmpTopic {
        id: "collection",
        title: "Data collection",
        prompts: &[
            "Who obtains the data, and through which channel or request process?",
            "When does collection start and finish?",
            "Which characteristics are the incoming files expected to have?",
        ],
    },
    DmpTopic {
        id: "organisation",
        title: "Data organisation",
        prompts: &["How are received files named, catalogued and checked on arrival?"],
    },
    DmpTopic {
        id: "preservation",
        title: "Data preservation",
        prompts: &["What happens to the data after the project ends, and who is responsible for it?"],
    },
    DmpTopic {
        id: "storage",
        title: "Data storage",
        prompts: &["Where are raw, intermediate and released files kept?", "How is that location backed up?"],
    },
    DmpTopic {
        id: "volume",
        title: "Data volume",
        prompts: &["How much data is expected, and does the storage plan accommodate it?"],
    },
    DmpTopic {
        id: "loss_procedures",
        title: "Data loss procedures",
        prompts: &["Which redundant copies exist?", "How is a lost or corrupted file restored?"],
    },
    DmpTopic {
        id: "privacy_confidentiality",
        title: "Privacy and confidentiality",
        prompts: &[
            "What could identify a person in the data?",
            "Which controls (aggregation, suppression, pseudonyms, noise) reduce that risk?",
        ],
    },
    DmpTopic {
        id: "ownership",
        title: "Data ownership",
        prompts: &["Which custodian owns each source, and what release approvals do they require?"],
    },
    DmpTopic {
        id: "quality_assurance",
        title: "Quality assurance",
        prompts: &["Which automated and manual checks run before release, and who signs them off?"],
    },
    DmpTopic {
        id: "documentation",
        title: "Documentation",
        prompts: &["Where is the decision log kept?", "Who records decisions, and which decisions must be recorded?"],
    },
    DmpTopic {
        id: "dissemination",
        title: "Dissemination",
        prompts: &["Will outputs be shared, through which channel, and under which licence and conditions?"],
    },
    DmpTopic {
        id: "metadata",
        title: "Metadata",
        prompts: &["Which metadata standard and profile are used, and where is the metadata published?"],
    },
];

const ETHICS_CHECKLIST: [&str; 6] = [
    "Ethics approval obtained or exemption recorded",
    "Custodian data-sharing agreements signed for every source",
    "Small-cell suppression threshold agreed with custodians",
    "Access to restricted inputs limited to named team members",
    "Retention period and disposal method for restricted inputs agreed",
    "Release review by custodians scheduled before publication",
];

/// Markdown plan with every topic, answered from `answers` (keyed by topic id) or marked OPEN.
pub fn scaffold_dmp(project: &str, answers: &BTreeMap<String, String>) -> String {
    let mut s = format!("# Data management plan: {project}\n");
    for t in &DMP_TOPICS {
        s.push_str(&format!("\n## {} (`{}`)\n\n", t.title, t.id));
        for p in t.prompts {
            s.push_str(&format!("- {p}\n"));
        }
        match answers.get(t.id).map(|a| a.trim()).filter(|a| !a.is_empty()) {
            Some(a) => s.push_str(&format!("\nStatus: ANSWERED\n\n{a}\n")),
            None => s.push_str("\nStatus: OPEN\n"),
        }
    }
    let unknown: Vec<&String> = answers.keys().filter(|k| !DMP_TOPICS.iter().any(|t| t.id == k.as_str())).collect();
    if !unknown.is_empty() {
        s.push_str("\n## Answers without a matching topic\n\n");
        for k in unknown {
            s.push_str(&format!("- `{k}`\n"));
        }
    }
    s.push_str("\n## Ethics and governance checklist\n\n");
    for item in ETHICS_CHECKLIST {
        s.push_str(&format!("- [ ] {item}\n"));
    }
    s
}
