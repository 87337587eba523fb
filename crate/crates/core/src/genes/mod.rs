//! Derivation of the `genes` field.
//!
//! Two channels feed the field. MeSH descriptors in MH are mapped through the
//! vocabulary's descriptor table. Free text (TI, AB, OT) is scanned for exact,
//! case-sensitive symbol occurrences which are then gated by the symbol's
//! [`AmbiguityClass`]:
//!
//! 1. `UNAMBIGUOUS` occurrences are kept as-is (`DIRECT`).
//! 2. `CONTEXT_GATED` occurrences are kept when the record talks about
//!    genetics (`CONTEXT`).
//! 3. `SEMANTIC_GATED` occurrences additionally need a `true` verdict from a
//!    [`Disambiguator`] (`SEMANTIC`).
//!
//! Registry numbers are deliberately never consulted: one number can stand
//! for many genes.

pub mod oracle;

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead};
use std::sync::Arc;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use serde::{Deserialize, Serialize};

pub use oracle::{
    parse_verdict, render_prompt, CachedOracle, CompletionOracle, ConstantOracle,
    DisambiguationRequest, Disambiguator, DroppedCandidate, NullOracle, OracleError,
    RemoteOracleConfig, TableOracle, Verdict,
};

use crate::record::{PubMedRecord, SourceField};
use crate::text::{is_token_boundary, words};
use crate::vocab::{AmbiguityClass, GeneVocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GeneChannel {
    Mesh,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MatchTier {
    Direct,
    Context,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneMatch {
    pub symbol: String,
    pub channel: GeneChannel,
    /// Present for TEXT matches only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<MatchTier>,
    pub evidence: String,
    pub field: SourceField,
    /// Disambiguation verdict, present for SEMANTIC matches only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
}

/// Word list deciding whether a record "discusses genetics".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextLexicon {
    terms: HashSet<String>,
}

pub const DEFAULT_CONTEXT_TERMS: &[&str] = &[
    "gene", "genes", "genetic", "genetics", "genome", "genomic", "genomics", "mutation",
    "mutations", "mutant", "allele", "exon", "mrna", "oncogene",
];

impl Default for ContextLexicon {
    fn default() -> Self {
        Self::new(DEFAULT_CONTEXT_TERMS.iter().copied())
    }
}

impl ContextLexicon {
    pub fn new<'a>(terms: impl IntoIterator<Item = &'a str>) -> Self {
        ContextLexicon {
            terms: terms
                .into_iter()
                .map(|t| t.trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
        }
    }

    /// One term per line; blank lines and `#` comments are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> io::Result<Self> {
        let mut terms = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                terms.push(t.to_string());
            }
        }
        Ok(Self::new(terms.iter().map(String::as_str)))
    }

    /// True when any word of `text` is a lexicon term (case-insensitive).
    pub fn matches(&self, text: &str) -> bool {
        words(text).any(|w| self.terms.contains(&w.to_lowercase()))
    }

    pub fn record_matches(&self, record: &PubMedRecord) -> bool {
        record.text_fields().any(|(_, t)| self.matches(t))
    }
}

/// Genetics-context test over TI + AB + OT with the default lexicon.
pub fn has_genetic_context(record: &PubMedRecord) -> bool {
    ContextLexicon::default().record_matches(record)
}

/// Output of [`GeneIndexer::index`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneExtraction {
    pub matches: Vec<GeneMatch>,
    /// Semantic candidates lost to an oracle failure or an indeterminate reply.
    pub dropped: Vec<DroppedCandidate>,
    pub oracle_calls: usize,
}

impl GeneExtraction {
    pub fn symbols(&self) -> Vec<String> {
        distinct_symbols(&self.matches)
    }
}

pub fn distinct_symbols(matches: &[GeneMatch]) -> Vec<String> {
    let mut seen = HashSet::new();
    matches
        .iter()
        .filter(|m| seen.insert(m.symbol.as_str()))
        .map(|m| m.symbol.clone())
        .collect()
}

/// Gene matcher built once per vocabulary.
#[derive(Debug, Clone)]
pub struct GeneIndexer {
    vocab: Arc<GeneVocabulary>,
    symbols: Vec<String>,
    automaton: AhoCorasick,
    lexicon: ContextLexicon,
}

impl GeneIndexer {
    pub fn new(vocab: Arc<GeneVocabulary>) -> Self {
        Self::with_lexicon(vocab, ContextLexicon::default())
    }

    pub fn with_lexicon(vocab: Arc<GeneVocabulary>, lexicon: ContextLexicon) -> Self {
        let mut symbols: Vec<String> = vocab
            .entries()
            .iter()
            .map(|e| e.symbol.clone())
            .filter(|s| !s.is_empty())
            .collect();
        symbols.sort();
        symbols.dedup();
        let automaton = AhoCorasickBuilder::new()
            .match_kind(MatchKind::Standard)
            .build(&symbols)
            .expect("symbol automaton");
        GeneIndexer {
            vocab,
            symbols,
            automaton,
            lexicon,
        }
    }

    pub fn vocabulary(&self) -> &GeneVocabulary {
        &self.vocab
    }

    pub fn lexicon(&self) -> &ContextLexicon {
        &self.lexicon
    }

    /// Exact symbol occurrences in the free-text fields, one per
    /// (symbol, field), in field then position order.
    fn text_occurrences<'r>(&self, record: &'r PubMedRecord) -> Vec<(&str, SourceField, &'r str)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (field, text) in record.text_fields() {
            for m in self.automaton.find_overlapping_iter(text) {
                if !is_token_boundary(text, m.start(), m.end()) {
                    continue;
                }
                let symbol = self.symbols[m.pattern().as_usize()].as_str();
                if seen.insert((symbol, field)) {
                    out.push((symbol, field, &text[m.start()..m.end()]));
                }
            }
        }
        out
    }

    /// Runs both channels over `record`. The oracle is consulted at most once
    /// per semantic-gated symbol, and only when the symbol occurs in the text
    /// and the record has genetics context.
    pub fn index(&self, record: &PubMedRecord, oracle: &dyn Disambiguator) -> GeneExtraction {
        let mut result = GeneExtraction::default();
        let mut seen: HashSet<(String, GeneChannel, Option<MatchTier>, SourceField)> =
            HashSet::new();
        let mut push = |result: &mut GeneExtraction, m: GeneMatch| {
            if seen.insert((m.symbol.clone(), m.channel, m.tier, m.field)) {
                result.matches.push(m);
            }
        };

        for ui in &record.mesh_descriptors {
            if let Some(symbol) = self.vocab.symbol_for_mesh(ui) {
                push(
                    &mut result,
                    GeneMatch {
                        symbol: symbol.to_string(),
                        channel: GeneChannel::Mesh,
                        tier: None,
                        evidence: ui.clone(),
                        field: SourceField::MeshHeading,
                        verdict: None,
                    },
                );
            }
        }

        let mut context: Option<bool> = None;
        let mut semantic: HashMap<&str, bool> = HashMap::new();
        for (symbol, field, evidence) in self.text_occurrences(record) {
            let Some(entry) = self.vocab.get(symbol) else {
                continue;
            };
            let (tier, verdict) = match entry.ambiguity_class {
                AmbiguityClass::Unambiguous => (MatchTier::Direct, None),
                AmbiguityClass::ContextGated => {
                    if !*context.get_or_insert_with(|| self.lexicon.record_matches(record)) {
                        continue;
                    }
                    (MatchTier::Context, None)
                }
                AmbiguityClass::SemanticGated => {
                    if !*context.get_or_insert_with(|| self.lexicon.record_matches(record)) {
                        continue;
                    }
                    let accepted = *semantic.entry(symbol).or_insert_with(|| {
                        adjudicate(record, symbol, &entry.gene_name, oracle, &mut result)
                    });
                    if !accepted {
                        continue;
                    }
                    (MatchTier::Semantic, Some(true))
                }
            };
            push(
                &mut result,
                GeneMatch {
                    symbol: symbol.to_string(),
                    channel: GeneChannel::Text,
                    tier: Some(tier),
                    evidence: evidence.to_string(),
                    field,
                    verdict,
                },
            );
        }
        result
    }
}

fn adjudicate(
    record: &PubMedRecord,
    symbol: &str,
    gene_name: &str,
    oracle: &dyn Disambiguator,
    result: &mut GeneExtraction,
) -> bool {
    let drop = |reason: String, raw_reply: Option<String>| DroppedCandidate {
        pmid: record.pmid,
        symbol: symbol.to_string(),
        reason,
        raw_reply,
    };
    let request = match DisambiguationRequest::new(symbol, gene_name, record.title_and_abstract())
    {
        Ok(r) => r,
        Err(e) => {
            result.dropped.push(drop(e, None));
            return false;
        }
    };
    result.oracle_calls += 1;
    match oracle.verdict(&request) {
        Ok(Verdict::True) => true,
        Ok(Verdict::False) => false,
        Ok(Verdict::Indeterminate(raw)) => {
            tracing::debug!(pmid = record.pmid, symbol, "indeterminate oracle reply");
            result
                .dropped
                .push(drop("indeterminate verdict".to_string(), Some(raw)));
            false
        }
        Err(e) => {
            tracing::warn!(pmid = record.pmid, symbol, error = %e, "oracle failure");
            result.dropped.push(drop(e.to_string(), None));
            false
        }
    }
}
