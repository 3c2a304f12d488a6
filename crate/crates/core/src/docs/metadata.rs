use serde::{Deserialize, Serialize};

use super::DocsError;
use crate::model::Dataset;
use crate::qa::QaReport;

/// Manually supplied metadata fields.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetadataConfig {
    /// Defaults to the indicator name.
    pub title: Option<String>,
    /// DOI or other persistent id. Defaults to a local id built from the project and indicator.
    pub identifier: Option<String>,
    pub metadata_reference: Option<String>,
    pub access_rights: Option<String>,
    pub licence: Option<String>,
    pub fields_of_research: Option<String>,
    pub socio_economic_objectives: Option<String>,
    pub legal_ethical_requirements: Option<String>,
    pub standard_vocabulary_note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Draft,
    Publishable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Findable {
    pub title: String,
    pub identifier: String,
    pub metadata_reference: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accessible {
    pub legal_ethical_requirements: String,
    pub access_rights: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interoperable {
    pub standard_vocabulary_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reusable {
    pub licence: String,
    pub geographical_coverage: String,
    pub temporal_coverage: String,
    pub fields_of_research: String,
    pub socio_economic_objectives: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataDoc {
    pub indicator_id: String,
    /// True when any field is empty.
    pub draft: bool,
    pub variable_type: String,
    pub findable: Findable,
    pub accessible: Accessible,
    pub interoperable: Interoperable,
    pub reusable: Reusable,
}

/// Metadata field to ISO 19115-1 element.
pub const ISO19115_CROSSWALK: [(&str, &str); 11] = [
    ("findable.title", "MD_Metadata.identificationInfo > MD_DataIdentification.citation > CI_Citation.title"),
    ("findable.identifier", "MD_Metadata.identificationInfo > MD_DataIdentification.citation > CI_Citation.identifier > MD_Identifier.code"),
    ("findable.metadata_reference", "MD_Metadata.metadataStandard > CI_Citation.title"),
    ("accessible.legal_ethical_requirements", "MD_DataIdentification.resourceConstraints > MD_LegalConstraints.otherConstraints"),
    ("accessible.access_rights", "MD_DataIdentification.resourceConstraints > MD_LegalConstraints.accessConstraints"),
    ("interoperable.standard_vocabulary_note", "MD_DataIdentification.descriptiveKeywords > MD_Keywords.thesaurusName"),
    ("reusable.licence", "MD_DataIdentification.resourceConstraints > MD_LegalConstraints.useConstraints"),
    ("reusable.geographical_coverage", "MD_DataIdentification.extent > EX_Extent.geographicElement > EX_GeographicDescription"),
    ("reusable.temporal_coverage", "MD_DataIdentification.extent > EX_Extent.temporalElement > EX_TemporalExtent.extent"),
    ("reusable.fields_of_research", "MD_DataIdentification.topicCategory; MD_Keywords (discipline)"),
    ("reusable.socio_economic_objectives", "MD_DataIdentification.purpose"),
];

pub fn iso_crosswalk_markdown() -> String {
    let mut s = String::from(
        "# ISO 19115 crosswalk\n\nField names of `metadata.json` mapped to the ISO 19115-1 elements that carry the same content.\n\n| Metadata field | ISO 19115-1 element |\n|---|---|\n",
    );
    for (field, iso) in ISO19115_CROSSWALK {
        s.push_str(&format!("| `{field}` | {iso} |\n"));
    }
    s
}

fn text(v: &Option<String>) -> String {
    v.as_deref().map(str::trim).unwrap_or("").to_string()
}

/// Builds the metadata document for a dataset that passed QA.
pub fn emit_metadata(
    d: &Dataset,
    report: &QaReport,
    project: &str,
    cfg: &MetadataConfig,
    mode: Mode,
) -> Result<MetadataDoc, DocsError> {
    if report.dataset_id != d.indicator.id {
        return Err(DocsError::ReportMismatch { report: report.dataset_id.clone(), dataset: d.indicator.id.clone() });
    }
    if !report.pass {
        return Err(DocsError::NotPassed(d.indicator.id.clone()));
    }
    let title = cfg.title.clone().unwrap_or_else(|| d.indicator.name.clone());
    let identifier = cfg.identifier.clone().unwrap_or_else(|| format!("local:{project}/{}", d.indicator.id));
    let temporal = d.year_extent().map(|s| s.to_string()).unwrap_or_default();
    let mut doc = MetadataDoc {
        indicator_id: d.indicator.id.clone(),
        draft: false,
        variable_type: d.indicator.value_kind.to_string(),
        findable: Findable { title: title.trim().into(), identifier: identifier.trim().into(), metadata_reference: text(&cfg.metadata_reference) },
        accessible: Accessible {
            legal_ethical_requirements: text(&cfg.legal_ethical_requirements),
            access_rights: text(&cfg.access_rights),
        },
        interoperable: Interoperable { standard_vocabulary_note: text(&cfg.standard_vocabulary_note) },
        reusable: Reusable {
            licence: text(&cfg.licence),
            geographical_coverage: format!("{} ({}), Australia", d.level, d.edition),
            temporal_coverage: temporal,
            fields_of_research: text(&cfg.fields_of_research),
            socio_economic_objectives: text(&cfg.socio_economic_objectives),
        },
    };
    let missing = doc.missing_fields();
    if mode == Mode::Publishable && !missing.is_empty() {
        return Err(DocsError::MissingFields(missing));
    }
    doc.draft = !missing.is_empty();
    Ok(doc)
}

impl MetadataDoc {
    fn fields(&self) -> [(&'static str, &str); 11] {
        [
            ("findable.title", &self.findable.title),
            ("findable.identifier", &self.findable.identifier),
            ("findable.metadata_reference", &self.findable.metadata_reference),
            ("accessible.legal_ethical_requirements", &self.accessible.legal_ethical_requirements),
            ("accessible.access_rights", &self.accessible.access_rights),
            ("interoperable.standard_vocabulary_note", &self.interoperable.standard_vocabulary_note),
            ("reusable.licence", &self.reusable.licence),
            ("reusable.geographical_coverage", &self.reusable.geographical_coverage),
            ("reusable.temporal_coverage", &self.reusable.temporal_coverage),
            ("reusable.fields_of_research", &self.reusable.fields_of_research),
            ("reusable.socio_economic_objectives", &self.reusable.socio_economic_objectives),
        ]
    }

    /// Dotted names of the empty fields.
    pub fn missing_fields(&self) -> Vec<String> {
        self.fields().iter().filter(|(_, v)| v.is_empty()).map(|(k, _)| k.to_string()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes") + "\n"
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("# {}\n\n", self.findable.title);
        if self.draft {
            s.push_str("**DRAFT**: some fields are not filled in yet.\n\n");
        }
        s.push_str(&format!("Indicator `{}`, variable type: {}.\n", self.indicator_id, self.variable_type));
        let mut group = "";
        for (name, value) in self.fields() {
            let (g, field) = name.split_once('.').expect("dotted field name");
            if g != group {
                group = g;
                let mut heading = g.to_string();
                heading[..1].make_ascii_uppercase();
                s.push_str(&format!("\n## {heading}\n\n"));
            }
            let shown = if value.is_empty() { "_not provided_" } else { value };
            s.push_str(&format!("- **{}**: {shown}\n", field.replace('_', " ")));
        }
        s
    }
}
