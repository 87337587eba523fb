//! Drug and gene controlled vocabularies.
//!
//! Both vocabularies are read from UTF-8 TSV files with a fixed header.
//! Lines starting with `#` are comments. Multi-valued cells are
//! pipe-delimited.
//!
//! Loading is two-phase: rows are parsed (structural errors such as a wrong
//! column count fail immediately with the line number), then the entries are
//! checked by [`DrugVocabulary::validate`] / [`GeneVocabulary::validate`].
//! [`DrugVocabulary::load`] refuses a vocabulary whose report has errors;
//! [`DrugVocabulary::read_unchecked`] keeps it so that tooling can print the
//! full report.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_phrase;

pub const DRUG_HEADER: &str = "token\tpreferred_name\tsynonyms\tmesh_descriptor\tregistry_number";
pub const GENE_HEADER: &str = "symbol\tgene_name\tmesh_descriptors\tambiguity_class";
/// Gene header variant carrying registry numbers. The column is kept for
/// provenance only and never used for lookups.
pub const GENE_HEADER_WITH_RN: &str =
    "symbol\tgene_name\tmesh_descriptors\tambiguity_class\tregistry_numbers";

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("cannot read vocabulary: {0}")]
    Io(#[from] io::Error),
    #[error("line {row}: expected header {expected:?}, found {found:?}")]
    Header {
        row: usize,
        expected: &'static str,
        found: String,
    },
    #[error("vocabulary has no header line")]
    MissingHeader,
    #[error("line {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("vocabulary rejected: {}", .0.summary())]
    Rejected(ValidationReport),
}

impl VocabError {
    /// Short machine-readable code, used by the CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            VocabError::Io(_) => "io-error",
            VocabError::Header { .. } | VocabError::MissingHeader => "bad-header",
            VocabError::Malformed { .. } => "malformed-row",
            VocabError::Rejected(_) => "invalid-vocabulary",
        }
    }
}

// --- ambiguity classes ---------------------------------------------------

/// How a textual occurrence of a gene symbol is gated before indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AmbiguityClass {
    /// Indexed on sight (e.g. `DNMT3A`).
    Unambiguous,
    /// Indexed only when the record discusses genetics (e.g. `VHL`).
    ContextGated,
    /// Needs genetics context and a positive disambiguation verdict (e.g. `CAD`).
    SemanticGated,
}

impl AmbiguityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AmbiguityClass::Unambiguous => "UNAMBIGUOUS",
            AmbiguityClass::ContextGated => "CONTEXT_GATED",
            AmbiguityClass::SemanticGated => "SEMANTIC_GATED",
        }
    }
}

impl fmt::Display for AmbiguityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AmbiguityClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "UNAMBIGUOUS" => Ok(AmbiguityClass::Unambiguous),
            "CONTEXT_GATED" => Ok(AmbiguityClass::ContextGated),
            "SEMANTIC_GATED" => Ok(AmbiguityClass::SemanticGated),
            other => Err(format!("unknown ambiguity class {other:?}")),
        }
    }
}

/// Class used when the vocabulary leaves the column blank: short all-capital
/// symbols (four letters or fewer) collide with common acronyms.
pub fn default_ambiguity_class(symbol: &str) -> AmbiguityClass {
    let len = symbol.chars().count();
    if len > 0 && len <= 4 && symbol.chars().all(char::is_uppercase) {
        AmbiguityClass::ContextGated
    } else {
        AmbiguityClass::Unambiguous
    }
}

// --- validation ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub row: usize,
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_loadable(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, row: usize, rule: &str, message: String) {
        self.errors.push(ValidationIssue {
            row,
            rule: rule.to_string(),
            message,
        });
    }

    fn warn(&mut self, row: usize, rule: &str, message: String) {
        self.warnings.push(ValidationIssue {
            row,
            rule: rule.to_string(),
            message,
        });
    }

    fn summary(&self) -> String {
        match self.errors.first() {
            Some(e) if self.errors.len() == 1 => {
                format!("row {}: [{}] {}", e.row, e.rule, e.message)
            }
            Some(e) => format!(
                "row {}: [{}] {} (and {} more)",
                e.row,
                e.rule,
                e.message,
                self.errors.len() - 1
            ),
            None => "no errors".to_string(),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error   row {:>5}  {:<20} {}", e.row, e.rule, e.message)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning row {:>5}  {:<20} {}", w.row, w.rule, w.message)?;
        }
        write!(
            f,
            "{} error(s), {} warning(s)",
            self.errors.len(),
            self.warnings.len()
        )
    }
}

fn is_mesh_ui(s: &str) -> bool {
    s.len() > 1 && s.starts_with('D') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

// --- TSV plumbing --------------------------------------------------------

/// Data lines of a vocabulary file with their 1-based line numbers, after
/// the header has been checked.
fn data_lines<R: BufRead>(
    reader: R,
    headers: &[&'static str],
) -> Result<(Vec<(usize, String)>, &'static str), VocabError> {
    let mut header = None;
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line).to_string();
        let row = idx + 1;
        if line.starts_with('#') {
            continue;
        }
        match header {
            None => {
                if line.trim().is_empty() {
                    continue;
                }
                match headers.iter().find(|h| **h == line) {
                    Some(h) => header = Some(*h),
                    None => {
                        return Err(VocabError::Header {
                            row,
                            expected: headers[0],
                            found: line,
                        })
                    }
                }
            }
            Some(_) => {
                if !line.trim().is_empty() {
                    rows.push((row, line));
                }
            }
        }
    }
    let header = header.ok_or(VocabError::MissingHeader)?;
    Ok((rows, header))
}

fn split_cells(row: usize, line: &str, min: usize, max: usize) -> Result<Vec<&str>, VocabError> {
    let cells: Vec<&str> = line.split('\t').collect();
    if cells.len() < min || cells.len() > max {
        return Err(VocabError::Malformed {
            row,
            message: format!(
                "expected {} tab-separated columns, found {}",
                max,
                cells.len()
            ),
        });
    }
    Ok(cells)
}

fn split_multi(cell: &str) -> Vec<String> {
    if cell.trim().is_empty() {
        Vec::new()
    } else {
        cell.split('|').map(|s| s.trim().to_string()).collect()
    }
}

fn optional(cell: Option<&&str>) -> Option<String> {
    cell.map(|c| c.trim())
        .filter(|c| !c.is_empty())
        .map(str::to_string)
}

fn open(path: &Path) -> Result<BufReader<File>, VocabError> {
    Ok(BufReader::new(File::open(path)?))
}

// --- drugs ---------------------------------------------------------------

/// One drug: a canonical token plus its evidence channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrugEntry {
    pub token: String,
    pub preferred_name: String,
    pub synonyms: Vec<String>,
    pub mesh_descriptor: Option<String>,
    pub registry_number: Option<String>,
}

/// Immutable drug vocabulary with synonym, descriptor and registry-number
/// lookup maps.
#[derive(Debug, Clone, Default)]
pub struct DrugVocabulary {
    entries: Vec<DrugEntry>,
    rows: Vec<usize>,
    by_token: HashMap<String, usize>,
    by_synonym: HashMap<String, usize>,
    by_mesh: HashMap<String, usize>,
    by_registry: HashMap<String, usize>,
}

impl DrugVocabulary {
    /// Parses and validates a drug TSV stream.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let vocab = Self::read_unchecked(reader)?;
        let report = vocab.validate();
        if report.is_loadable() {
            Ok(vocab)
        } else {
            Err(VocabError::Rejected(report))
        }
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self, VocabError> {
        Self::load(open(path.as_ref())?)
    }

    /// Parses a drug TSV stream without rejecting invariant violations.
    /// Lookup maps resolve collisions first-row-wins.
    pub fn read_unchecked<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let (lines, _) = data_lines(reader, &[DRUG_HEADER])?;
        let mut entries = Vec::with_capacity(lines.len());
        let mut rows = Vec::with_capacity(lines.len());
        for (row, line) in &lines {
            let cells = split_cells(*row, line, 3, 5)?;
            entries.push(DrugEntry {
                token: cells[0].trim().to_string(),
                preferred_name: cells[1].trim().to_string(),
                synonyms: split_multi(cells[2]),
                mesh_descriptor: optional(cells.get(3)),
                registry_number: optional(cells.get(4)),
            });
            rows.push(*row);
        }
        Ok(Self::build(entries, rows))
    }

    pub fn read_unchecked_path(path: impl AsRef<Path>) -> Result<Self, VocabError> {
        Self::read_unchecked(open(path.as_ref())?)
    }

    /// Builds a validated vocabulary from in-memory entries. Rows in reports
    /// are 1-based entry positions.
    pub fn from_entries(entries: Vec<DrugEntry>) -> Result<Self, VocabError> {
        let vocab = Self::from_entries_unchecked(entries);
        let report = vocab.validate();
        if report.is_loadable() {
            Ok(vocab)
        } else {
            Err(VocabError::Rejected(report))
        }
    }

    pub fn from_entries_unchecked(entries: Vec<DrugEntry>) -> Self {
        let rows = (1..=entries.len()).collect();
        Self::build(entries, rows)
    }

    fn build(entries: Vec<DrugEntry>, rows: Vec<usize>) -> Self {
        let mut vocab = DrugVocabulary {
            rows,
            ..Default::default()
        };
        for (i, e) in entries.iter().enumerate() {
            vocab.by_token.entry(e.token.clone()).or_insert(i);
            for s in &e.synonyms {
                let key = normalize_phrase(s);
                if !key.is_empty() {
                    vocab.by_synonym.entry(key).or_insert(i);
                }
            }
            if let Some(m) = &e.mesh_descriptor {
                vocab.by_mesh.entry(m.clone()).or_insert(i);
            }
            if let Some(rn) = &e.registry_number {
                vocab.by_registry.entry(rn.clone()).or_insert(i);
            }
        }
        vocab.entries = entries;
        vocab
    }

    /// Lists every invariant violation. Never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut tokens: HashMap<&str, usize> = HashMap::new();
        let mut synonyms: HashMap<String, (&str, usize)> = HashMap::new();
        let mut mesh: HashMap<&str, &str> = HashMap::new();
        let mut registry: HashMap<&str, &str> = HashMap::new();

        for (e, &row) in self.entries.iter().zip(&self.rows) {
            let token = e.token.as_str();
            if token.is_empty()
                || token.chars().any(char::is_whitespace)
                || token.chars().any(char::is_uppercase)
            {
                report.error(
                    row,
                    "token-format",
                    format!("token {token:?} must be non-empty, lowercase and without whitespace"),
                );
            }
            match tokens.entry(token) {
                Entry::Occupied(first) => report.error(
                    row,
                    "unique-token",
                    format!("token {token:?} already defined on row {}", first.get()),
                ),
                Entry::Vacant(v) => {
                    v.insert(row);
                }
            }
            for s in &e.synonyms {
                if s.trim().is_empty() {
                    report.error(
                        row,
                        "synonym-nonempty",
                        format!("token {token:?} has an empty synonym"),
                    );
                    continue;
                }
                let key = normalize_phrase(s);
                if key.is_empty() {
                    report.warn(
                        row,
                        "synonym-unmatchable",
                        format!("synonym {s:?} has no alphanumeric characters"),
                    );
                    continue;
                }
                match synonyms.entry(key) {
                    Entry::Occupied(first) => {
                        let (other, other_row) = *first.get();
                        if other != token {
                            report.error(
                                row,
                                "synonym-collision",
                                format!(
                                    "synonym {s:?} maps to both {other:?} (row {other_row}) and {token:?}"
                                ),
                            );
                        }
                    }
                    Entry::Vacant(v) => {
                        v.insert((token, row));
                    }
                }
            }
            if let Some(m) = e.mesh_descriptor.as_deref() {
                if !is_mesh_ui(m) {
                    report.error(
                        row,
                        "mesh-format",
                        format!("{m:?} is not a MeSH descriptor UI (D followed by digits)"),
                    );
                } else if let Some(first) = mesh.get(m) {
                    if *first != token {
                        report.warn(
                            row,
                            "mesh-collision",
                            format!("descriptor {m} already maps to {first:?}; keeping {first:?}"),
                        );
                    }
                } else {
                    mesh.insert(m, token);
                }
            }
            if let Some(rn) = e.registry_number.as_deref() {
                if let Some(first) = registry.get(rn) {
                    if *first != token {
                        report.warn(
                            row,
                            "registry-collision",
                            format!("registry number {rn} already maps to {first:?}; keeping {first:?}"),
                        );
                    }
                } else {
                    registry.insert(rn, token);
                }
            }
        }
        report
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{DRUG_HEADER}")?;
        for e in &self.entries {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                e.token,
                e.preferred_name,
                e.synonyms.join("|"),
                e.mesh_descriptor.as_deref().unwrap_or(""),
                e.registry_number.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }

    pub fn entries(&self) -> &[DrugEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&DrugEntry> {
        self.by_token.get(token).map(|&i| &self.entries[i])
    }

    /// Case-insensitive synonym lookup (punctuation collapsed).
    pub fn token_for_synonym(&self, synonym: &str) -> Option<&str> {
        self.by_synonym
            .get(&normalize_phrase(synonym))
            .map(|&i| self.entries[i].token.as_str())
    }

    pub(crate) fn token_for_normalized(&self, key: &str) -> Option<&str> {
        self.by_synonym
            .get(key)
            .map(|&i| self.entries[i].token.as_str())
    }

    pub fn token_for_mesh(&self, descriptor: &str) -> Option<&str> {
        self.by_mesh
            .get(descriptor)
            .map(|&i| self.entries[i].token.as_str())
    }

    pub fn token_for_registry(&self, registry_number: &str) -> Option<&str> {
        self.by_registry
            .get(registry_number)
            .map(|&i| self.entries[i].token.as_str())
    }

    /// Normalised synonym keys, the patterns the text matcher is built from.
    pub(crate) fn synonym_keys(&self) -> impl Iterator<Item = &str> {
        self.by_synonym.keys().map(String::as_str)
    }

    /// Snapshot of the three lookup maps, keyed by normalised synonym,
    /// descriptor and registry number.
    pub fn lookup_maps(&self) -> DrugLookupMaps {
        let resolve = |m: &HashMap<String, usize>| {
            m.iter()
                .map(|(k, &i)| (k.clone(), self.entries[i].token.clone()))
                .collect()
        };
        DrugLookupMaps {
            synonym: resolve(&self.by_synonym),
            mesh: resolve(&self.by_mesh),
            registry: resolve(&self.by_registry),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrugLookupMaps {
    pub synonym: std::collections::BTreeMap<String, String>,
    pub mesh: std::collections::BTreeMap<String, String>,
    pub registry: std::collections::BTreeMap<String, String>,
}

// --- genes ---------------------------------------------------------------

/// One gene, keyed by its HGNC symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneEntry {
    pub symbol: String,
    pub gene_name: String,
    pub mesh_descriptors: Vec<String>,
    pub ambiguity_class: AmbiguityClass,
    /// Carried through from the optional column; never used for lookups.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub registry_numbers: Vec<String>,
}

impl GeneEntry {
    pub fn new(symbol: &str, gene_name: &str, ambiguity_class: AmbiguityClass) -> Self {
        GeneEntry {
            symbol: symbol.to_string(),
            gene_name: gene_name.to_string(),
            mesh_descriptors: Vec::new(),
            ambiguity_class,
            registry_numbers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GeneVocabulary {
    entries: Vec<GeneEntry>,
    rows: Vec<usize>,
    by_symbol: HashMap<String, usize>,
    by_mesh: HashMap<String, usize>,
}

impl GeneVocabulary {
    pub fn load<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let vocab = Self::read_unchecked(reader)?;
        let report = vocab.validate();
        if report.is_loadable() {
            Ok(vocab)
        } else {
            Err(VocabError::Rejected(report))
        }
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self, VocabError> {
        Self::load(open(path.as_ref())?)
    }

    pub fn read_unchecked<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let (lines, header) = data_lines(reader, &[GENE_HEADER, GENE_HEADER_WITH_RN])?;
        let max = if header == GENE_HEADER { 4 } else { 5 };
        let mut entries = Vec::with_capacity(lines.len());
        let mut rows = Vec::with_capacity(lines.len());
        for (row, line) in &lines {
            let cells = split_cells(*row, line, 3, max)?;
            let symbol = cells[0].trim().to_string();
            let class_cell = cells.get(3).map(|c| c.trim()).unwrap_or("");
            let ambiguity_class = if class_cell.is_empty() {
                default_ambiguity_class(&symbol)
            } else {
                class_cell
                    .parse()
                    .map_err(|message| VocabError::Malformed { row: *row, message })?
            };
            entries.push(GeneEntry {
                symbol,
                gene_name: cells[1].trim().to_string(),
                mesh_descriptors: split_multi(cells[2]),
                ambiguity_class,
                registry_numbers: cells.get(4).map(|c| split_multi(c)).unwrap_or_default(),
            });
            rows.push(*row);
        }
        Ok(Self::build(entries, rows))
    }

    pub fn read_unchecked_path(path: impl AsRef<Path>) -> Result<Self, VocabError> {
        Self::read_unchecked(open(path.as_ref())?)
    }

    pub fn from_entries(entries: Vec<GeneEntry>) -> Result<Self, VocabError> {
        let vocab = Self::from_entries_unchecked(entries);
        let report = vocab.validate();
        if report.is_loadable() {
            Ok(vocab)
        } else {
            Err(VocabError::Rejected(report))
        }
    }

    pub fn from_entries_unchecked(entries: Vec<GeneEntry>) -> Self {
        let rows = (1..=entries.len()).collect();
        Self::build(entries, rows)
    }

    fn build(entries: Vec<GeneEntry>, rows: Vec<usize>) -> Self {
        let mut vocab = GeneVocabulary {
            rows,
            ..Default::default()
        };
        for (i, e) in entries.iter().enumerate() {
            vocab.by_symbol.entry(e.symbol.clone()).or_insert(i);
            for m in &e.mesh_descriptors {
                vocab.by_mesh.entry(m.clone()).or_insert(i);
            }
        }
        vocab.entries = entries;
        vocab
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut symbols: HashMap<&str, usize> = HashMap::new();
        let mut mesh: HashMap<&str, &str> = HashMap::new();
        for (e, &row) in self.entries.iter().zip(&self.rows) {
            let symbol = e.symbol.as_str();
            if symbol.is_empty() || symbol.chars().any(char::is_whitespace) {
                report.error(
                    row,
                    "symbol-format",
                    format!("symbol {symbol:?} must be non-empty and without whitespace"),
                );
            }
            match symbols.entry(symbol) {
                Entry::Occupied(first) => report.error(
                    row,
                    "unique-symbol",
                    format!("symbol {symbol:?} already defined on row {}", first.get()),
                ),
                Entry::Vacant(v) => {
                    v.insert(row);
                }
            }
            if e.ambiguity_class == AmbiguityClass::SemanticGated && e.gene_name.trim().is_empty()
            {
                report.error(
                    row,
                    "gene-name-required",
                    format!("SEMANTIC_GATED symbol {symbol:?} needs a gene name for the prompt"),
                );
            }
            for m in &e.mesh_descriptors {
                if !is_mesh_ui(m) {
                    report.error(
                        row,
                        "mesh-format",
                        format!("{m:?} is not a MeSH descriptor UI (D followed by digits)"),
                    );
                } else if let Some(first) = mesh.get(m.as_str()) {
                    if *first != symbol {
                        report.warn(
                            row,
                            "mesh-collision",
                            format!("descriptor {m} already maps to {first}; keeping {first}"),
                        );
                    }
                } else {
                    mesh.insert(m, symbol);
                }
            }
        }
        report
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let with_rn = self.entries.iter().any(|e| !e.registry_numbers.is_empty());
        writeln!(
            out,
            "{}",
            if with_rn { GENE_HEADER_WITH_RN } else { GENE_HEADER }
        )?;
        for e in &self.entries {
            write!(
                out,
                "{}\t{}\t{}\t{}",
                e.symbol,
                e.gene_name,
                e.mesh_descriptors.join("|"),
                e.ambiguity_class
            )?;
            if with_rn {
                write!(out, "\t{}", e.registry_numbers.join("|"))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn entries(&self) -> &[GeneEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case-sensitive symbol lookup.
    pub fn get(&self, symbol: &str) -> Option<&GeneEntry> {
        self.by_symbol.get(symbol).map(|&i| &self.entries[i])
    }

    pub fn symbol_for_mesh(&self, descriptor: &str) -> Option<&str> {
        self.by_mesh
            .get(descriptor)
            .map(|&i| self.entries[i].symbol.as_str())
    }

    pub fn lookup_maps(&self) -> GeneLookupMaps {
        GeneLookupMaps {
            symbol: self
                .by_symbol
                .iter()
                .map(|(k, &i)| (k.clone(), self.entries[i].clone()))
                .collect(),
            mesh: self
                .by_mesh
                .iter()
                .map(|(k, &i)| (k.clone(), self.entries[i].symbol.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneLookupMaps {
    pub symbol: std::collections::BTreeMap<String, GeneEntry>,
    pub mesh: std::collections::BTreeMap<String, String>,
}
