//! Derivation of the `drugs` field.
//!
//! A drug token is attached to a record when any of three channels fires:
//! a synonym occurring as a whole phrase in TI, AB or an OT term; a MeSH
//! descriptor in MH or NM; a registry number in RN.

use std::collections::HashSet;
use std::sync::Arc;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use serde::{Deserialize, Serialize};

use crate::record::{PubMedRecord, SourceField};
use crate::text::NormalizedText;
use crate::vocab::DrugVocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DrugChannel {
    Text,
    Mesh,
    Registry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrugMatch {
    pub token: String,
    pub channel: DrugChannel,
    /// The matched synonym occurrence, descriptor UI or registry number.
    pub evidence: String,
    pub field: SourceField,
}

/// Drug matcher built once per vocabulary.
#[derive(Debug, Clone)]
pub struct DrugIndexer {
    vocab: Arc<DrugVocabulary>,
    patterns: Vec<String>,
    automaton: AhoCorasick,
}

impl DrugIndexer {
    pub fn new(vocab: Arc<DrugVocabulary>) -> Self {
        let mut patterns: Vec<String> = vocab.synonym_keys().map(str::to_string).collect();
        patterns.sort();
        let automaton = AhoCorasickBuilder::new()
            .match_kind(MatchKind::Standard)
            .build(&patterns)
            .expect("synonym automaton");
        DrugIndexer {
            vocab,
            patterns,
            automaton,
        }
    }

    pub fn vocabulary(&self) -> &DrugVocabulary {
        &self.vocab
    }

    /// All drug matches of `record`, one per (token, channel, field), in
    /// channel then field then position order.
    pub fn index(&self, record: &PubMedRecord) -> Vec<DrugMatch> {
        let mut out = Vec::new();
        let mut seen: HashSet<(String, DrugChannel, SourceField)> = HashSet::new();
        let mut push = |token: &str, channel, evidence: &str, field| {
            if seen.insert((token.to_string(), channel, field)) {
                out.push(DrugMatch {
                    token: token.to_string(),
                    channel,
                    evidence: evidence.to_string(),
                    field,
                });
            }
        };

        for (field, text) in record.text_fields() {
            if text.is_empty() {
                continue;
            }
            let norm = NormalizedText::new(text);
            for m in self.automaton.find_overlapping_iter(&norm.text) {
                if !norm.is_whole_phrase(m.start(), m.end()) {
                    continue;
                }
                let key = &self.patterns[m.pattern().as_usize()];
                if let Some(token) = self.vocab.token_for_normalized(key) {
                    let evidence = norm.source_slice(text, m.start(), m.end());
                    push(token, DrugChannel::Text, evidence, field);
                }
            }
        }

        for (field, list) in [
            (SourceField::MeshHeading, &record.mesh_descriptors),
            (SourceField::SubstanceName, &record.substance_names),
        ] {
            for ui in list {
                if let Some(token) = self.vocab.token_for_mesh(ui) {
                    push(token, DrugChannel::Mesh, ui, field);
                }
            }
        }

        for rn in &record.registry_numbers {
            if let Some(token) = self.vocab.token_for_registry(rn) {
                push(token, DrugChannel::Registry, rn, SourceField::RegistryNumber);
            }
        }
        out
    }
}

/// Distinct tokens of a match list, in first-seen order.
pub fn distinct_tokens(matches: &[DrugMatch]) -> Vec<String> {
    let mut seen = HashSet::new();
    matches
        .iter()
        .filter(|m| seen.insert(m.token.as_str()))
        .map(|m| m.token.clone())
        .collect()
}
