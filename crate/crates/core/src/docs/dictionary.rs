use serde::{Deserialize, Serialize};

use crate::model::{Indicator, UncertaintyLevel, ValueKind};
use crate::qa::ASSIGNMENT_RULE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Audience {
    Published,
    Researcher,
}

/// Internal links that stay with the development team.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResearcherLinks {
    pub cleaning_code_link: String,
    pub data_file_links: Vec<String>,
    pub project_doc_links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub variable_name: String,
    pub definition: String,
    pub variable_type: ValueKind,
    pub data_source: String,
    pub temporal_correspondence_applied: bool,
    pub uncertainty_present: UncertaintyLevel,
    pub researcher_only: ResearcherLinks,
}

impl DictionaryEntry {
    pub fn from_indicator(ind: &Indicator, definition: &str, data_source: &str, links: ResearcherLinks) -> Self {
        Self {
            variable_name: ind.id.clone(),
            definition: definition.to_string(),
            variable_type: ind.value_kind,
            data_source: data_source.to_string(),
            temporal_correspondence_applied: ind.correspondence_applied,
            uncertainty_present: ind.max_uncertainty,
            researcher_only: links,
        }
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

/// Markdown dictionary; the researcher audience adds each entry's links.
pub fn emit_dictionary(entries: &[DictionaryEntry], audience: Audience) -> String {
    let title = match audience {
        Audience::Published => "Data dictionary",
        Audience::Researcher => "Data dictionary (researcher edition, not for publication)",
    };
    let mut s = format!("# {title}\n\n## Uncertainty levels\n\n{ASSIGNMENT_RULE}\n");
    for e in entries {
        s.push_str(&format!("\n## {}\n\n", e.variable_name));
        s.push_str("| Element | Value |\n|---|---|\n");
        s.push_str(&format!("| Variable name | {} |\n", e.variable_name));
        s.push_str(&format!("| Definition | {} |\n", e.definition.replace('|', "\\|")));
        s.push_str(&format!("| Variable type | {} |\n", e.variable_type));
        s.push_str(&format!("| Data source | {} |\n", e.data_source));
        s.push_str(&format!(
            "| Temporal correspondence applied | {} |\n",
            if e.temporal_correspondence_applied { "yes" } else { "no" }
        ));
        s.push_str(&format!(
            "| Uncertainty present | {} ({}) |\n",
            e.uncertainty_present.as_u8(),
            e.uncertainty_present.label()
        ));
        if audience == Audience::Researcher {
            let l = &e.researcher_only;
            s.push_str("\nLinks:\n\n");
            s.push_str(&format!("- Cleaning code: {}\n", if l.cleaning_code_link.is_empty() { "none" } else { &l.cleaning_code_link }));
            s.push_str(&format!("- Data files: {}\n", list(&l.data_file_links)));
            s.push_str(&format!("- Project documentation: {}\n", list(&l.project_doc_links)));
        }
    }
    s
}
