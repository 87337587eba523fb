use std::fmt;

use serde::{Deserialize, Serialize};

/// Canonical parsed PubMed citation.
///
/// Field names follow the MEDLINE display tags they come from: `title` (TI),
/// `abstract_text` (AB), `other_terms` (OT), `mesh_descriptors` (MH),
/// `substance_names` (NM), `registry_numbers` (RN) and `legacy_gene_symbols`
/// (GS).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PubMedRecord {
    pub pmid: u64,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub other_terms: Vec<String>,
    #[serde(default)]
    pub mesh_descriptors: Vec<String>,
    #[serde(default)]
    pub substance_names: Vec<String>,
    #[serde(default)]
    pub registry_numbers: Vec<String>,
    #[serde(default)]
    pub legacy_gene_symbols: Vec<String>,
    #[serde(default)]
    pub pub_year: Option<i32>,
    #[serde(default)]
    pub journal: Option<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    /// `YYYYMMDD` of the citation's DateRevised, 0 when absent.
    #[serde(default)]
    pub revision: u32,
}

pub const MIN_YEAR: i32 = 1800;
pub const MAX_YEAR: i32 = 2100;

impl PubMedRecord {
    pub fn new(pmid: u64) -> Self {
        PubMedRecord {
            pmid,
            ..Default::default()
        }
    }

    /// Title and abstract joined by a single space, the text submitted for
    /// semantic disambiguation.
    pub fn title_and_abstract(&self) -> String {
        join_nonempty([self.title.trim(), self.abstract_text.trim()])
    }

    /// Every free-text field in TI, AB, OT order with its label.
    pub fn text_fields(&self) -> impl Iterator<Item = (SourceField, &str)> {
        std::iter::once((SourceField::Title, self.title.as_str()))
            .chain(std::iter::once((
                SourceField::Abstract,
                self.abstract_text.as_str(),
            )))
            .chain(
                self.other_terms
                    .iter()
                    .map(|t| (SourceField::OtherTerm, t.as_str())),
            )
    }

    /// Checks the record-level invariants, returning the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.pmid == 0 {
            return Err("pmid must be positive".into());
        }
        for (label, list) in [
            ("mesh_descriptors", &self.mesh_descriptors),
            ("substance_names", &self.substance_names),
            ("registry_numbers", &self.registry_numbers),
        ] {
            let mut seen = std::collections::HashSet::new();
            for v in list {
                if v.trim().is_empty() {
                    return Err(format!("{label} contains an empty value"));
                }
                if !seen.insert(v.as_str()) {
                    return Err(format!("{label} contains duplicate {v:?}"));
                }
            }
        }
        if let Some(y) = self.pub_year {
            if !(MIN_YEAR..=MAX_YEAR).contains(&y) {
                return Err(format!("pub_year {y} outside [{MIN_YEAR}, {MAX_YEAR}]"));
            }
        }
        Ok(())
    }
}

pub(crate) fn join_nonempty<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for p in parts.into_iter().filter(|p| !p.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(p);
    }
    out
}

/// One item of the ordered stream produced by the batch parser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecordEvent {
    Upsert { record: PubMedRecord },
    Delete { pmid: u64 },
}

impl RecordEvent {
    pub fn pmid(&self) -> u64 {
        match self {
            RecordEvent::Upsert { record } => record.pmid,
            RecordEvent::Delete { pmid } => *pmid,
        }
    }
}

/// MEDLINE field a match was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceField {
    #[serde(rename = "TI")]
    Title,
    #[serde(rename = "AB")]
    Abstract,
    #[serde(rename = "OT")]
    OtherTerm,
    #[serde(rename = "MH")]
    MeshHeading,
    #[serde(rename = "NM")]
    SubstanceName,
    #[serde(rename = "RN")]
    RegistryNumber,
}

impl SourceField {
    pub fn tag(self) -> &'static str {
        match self {
            SourceField::Title => "TI",
            SourceField::Abstract => "AB",
            SourceField::OtherTerm => "OT",
            SourceField::MeshHeading => "MH",
            SourceField::SubstanceName => "NM",
            SourceField::RegistryNumber => "RN",
        }
    }
}

impl fmt::Display for SourceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}
