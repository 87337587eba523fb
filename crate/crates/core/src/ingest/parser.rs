//! Streaming parser for gzip-compressed PubMed XML batches.
//!
//! The decompressed stream is split into top-level citation
//! (`<PubmedArticle>`) and `<DeleteCitation>` elements by a byte scanner, so
//! only one element is buffered at a time. Each element is then parsed on
//! its own with a strict XML reader: a malformed citation is reported on the
//! side channel and skipped without disturbing its neighbours.

use std::collections::HashSet;
use std::io::{self, Read};

use flate2::read::MultiGzDecoder;
use memchr::memmem;
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{PubMedRecord, RecordEvent, MAX_YEAR, MIN_YEAR};

/// Fatal batch-level failure; the rest of the batch is unusable.
#[derive(Debug, Error)]
pub enum BatchError {
    #[error("batch {batch}: cannot decompress: {source}")]
    Decompress {
        batch: String,
        #[source]
        source: io::Error,
    },
}

/// A citation (or delete section) skipped because it could not be parsed.
/// Serialised as one JSON line of the parse-error log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub batch: String,
    /// Byte offset of the element in the decompressed document.
    pub offset: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmid: Option<u64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatchItem {
    Event(RecordEvent),
    Skipped(ParseError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchStats {
    /// `<PubmedArticle>` elements seen, parsed or not.
    pub citations: usize,
    pub upserts: usize,
    pub deletes: usize,
    pub skipped_citations: usize,
    pub skipped_other: usize,
}

/// Parses a gzip-compressed batch. See [`BatchParser`].
pub fn parse_batch<R: Read>(batch: impl Into<String>, compressed: R) -> BatchParser<MultiGzDecoder<R>> {
    BatchParser::new(batch, MultiGzDecoder::new(compressed))
}

/// Parses an already decompressed batch document.
pub fn parse_xml<R: Read>(batch: impl Into<String>, xml: R) -> BatchParser<R> {
    BatchParser::new(batch, xml)
}

/// Iterator over the events of one batch: one upsert per citation in
/// document order, then one delete per PMID of the delete section. Skipped
/// elements are interleaved as [`BatchItem::Skipped`] at their position.
pub struct BatchParser<R> {
    batch: String,
    scanner: Scanner<R>,
    deletes: Vec<u64>,
    pending: std::vec::IntoIter<u64>,
    stats: BatchStats,
    state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Elements,
    Deletes,
    Done,
}

impl<R: Read> BatchParser<R> {
    fn new(batch: impl Into<String>, reader: R) -> Self {
        BatchParser {
            batch: batch.into(),
            scanner: Scanner::new(reader),
            deletes: Vec::new(),
            pending: Vec::new().into_iter(),
            stats: BatchStats::default(),
            state: State::Elements,
        }
    }

    pub fn batch(&self) -> &str {
        &self.batch
    }

    pub fn stats(&self) -> BatchStats {
        self.stats
    }

    fn skipped(&mut self, offset: u64, pmid: Option<u64>, message: String) -> BatchItem {
        BatchItem::Skipped(ParseError {
            batch: self.batch.clone(),
            offset,
            pmid,
            message,
        })
    }
}

impl<R: Read> Iterator for BatchParser<R> {
    type Item = Result<BatchItem, BatchError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.state {
                State::Done => return None,
                State::Deletes => match self.pending.next() {
                    Some(pmid) => {
                        self.stats.deletes += 1;
                        return Some(Ok(BatchItem::Event(RecordEvent::Delete { pmid })));
                    }
                    None => {
                        self.state = State::Done;
                        return None;
                    }
                },
                State::Elements => {}
            }
            let element = match self.scanner.next_element() {
                Ok(Some(e)) => e,
                Ok(None) => {
                    self.pending = std::mem::take(&mut self.deletes).into_iter();
                    self.state = State::Deletes;
                    continue;
                }
                Err(source) => {
                    self.state = State::Done;
                    return Some(Err(BatchError::Decompress {
                        batch: self.batch.clone(),
                        source,
                    }));
                }
            };
            match element {
                Element::Citation { offset, bytes } => {
                    self.stats.citations += 1;
                    match parse_citation(&bytes) {
                        Ok(record) => {
                            self.stats.upserts += 1;
                            return Some(Ok(BatchItem::Event(RecordEvent::Upsert { record })));
                        }
                        Err(message) => {
                            self.stats.skipped_citations += 1;
                            let pmid = sniff_pmid(&bytes);
                            return Some(Ok(self.skipped(offset, pmid, message)));
                        }
                    }
                }
                Element::Deletes { offset, bytes } => match parse_delete_section(&bytes) {
                    Ok(pmids) => self.deletes.extend(pmids),
                    Err(message) => {
                        self.stats.skipped_other += 1;
                        return Some(Ok(self.skipped(offset, None, message)));
                    }
                },
                Element::Truncated { offset, bytes } => {
                    self.stats.citations += 1;
                    self.stats.skipped_citations += 1;
                    let pmid = sniff_pmid(&bytes);
                    return Some(Ok(self.skipped(
                        offset,
                        pmid,
                        "document ends inside a citation".into(),
                    )));
                }
            }
        }
    }
}

// --- element scanner -----------------------------------------------------

const CITATION_OPEN: &[u8] = b"<PubmedArticle";
const CITATION_CLOSE: &[u8] = b"</PubmedArticle>";
const DELETE_OPEN: &[u8] = b"<DeleteCitation";
const DELETE_CLOSE: &[u8] = b"</DeleteCitation>";
const CHUNK: usize = 64 * 1024;

enum Element {
    Citation { offset: u64, bytes: Vec<u8> },
    Deletes { offset: u64, bytes: Vec<u8> },
    Truncated { offset: u64, bytes: Vec<u8> },
}

struct Scanner<R> {
    reader: R,
    buf: Vec<u8>,
    /// Stream offset of `buf[0]`.
    base: u64,
    eof: bool,
}

/// Position of the first `open` tag in `hay` whose name is not merely a
/// prefix of a longer name (`<PubmedArticleSet>`).
fn find_open(hay: &[u8], open: &[u8]) -> Option<usize> {
    let mut from = 0;
    while let Some(i) = memmem::find(&hay[from..], open) {
        let at = from + i;
        match hay.get(at + open.len()) {
            Some(b'>' | b' ' | b'\t' | b'\r' | b'\n' | b'/') => return Some(at),
            Some(_) => from = at + 1,
            // undecided until more input arrives
            None => return Some(at),
        }
    }
    None
}

impl<R: Read> Scanner<R> {
    fn new(reader: R) -> Self {
        Scanner {
            reader,
            buf: Vec::with_capacity(CHUNK),
            base: 0,
            eof: false,
        }
    }

    fn fill(&mut self) -> io::Result<bool> {
        if self.eof {
            return Ok(false);
        }
        let start = self.buf.len();
        self.buf.resize(start + CHUNK, 0);
        let n = loop {
            match self.reader.read(&mut self.buf[start..]) {
                Ok(n) => break n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => {
                    self.buf.truncate(start);
                    return Err(e);
                }
            }
        };
        self.buf.truncate(start + n);
        if n == 0 {
            self.eof = true;
        }
        Ok(n > 0)
    }

    fn consume(&mut self, n: usize) {
        self.buf.drain(..n);
        self.base += n as u64;
    }

    fn next_element(&mut self) -> io::Result<Option<Element>> {
        // locate the next opening tag
        let (at, close, is_citation) = loop {
            let citation = find_open(&self.buf, CITATION_OPEN);
            let delete = find_open(&self.buf, DELETE_OPEN);
            let found = match (citation, delete) {
                (Some(c), Some(d)) if d < c => Some((d, DELETE_CLOSE, false)),
                (Some(c), _) => Some((c, CITATION_CLOSE, true)),
                (None, Some(d)) => Some((d, DELETE_CLOSE, false)),
                (None, None) => None,
            };
            let open_len = if found.is_some_and(|f| f.2) {
                CITATION_OPEN.len()
            } else {
                DELETE_OPEN.len()
            };
            match found {
                Some(f) if f.0 + open_len < self.buf.len() || self.eof => break f,
                Some(_) => {
                    if !self.fill()? {
                        continue;
                    }
                }
                None => {
                    let keep = CITATION_OPEN.len().max(DELETE_OPEN.len());
                    let drop = self.buf.len().saturating_sub(keep);
                    self.consume(drop);
                    if !self.fill()? {
                        return Ok(None);
                    }
                }
            }
        };
        self.consume(at);
        let offset = self.base;

        // a self-closing delete section carries nothing
        if !is_citation {
            if let Some(gt) = memchr::memchr(b'>', &self.buf) {
                if gt > 0 && self.buf[gt - 1] == b'/' {
                    self.consume(gt + 1);
                    return Ok(Some(Element::Deletes {
                        offset,
                        bytes: Vec::new(),
                    }));
                }
            }
        }

        // locate the matching closing tag
        let mut searched = 0;
        loop {
            if let Some(i) = memmem::find(&self.buf[searched..], close) {
                let end = searched + i + close.len();
                let bytes = self.buf[..end].to_vec();
                self.consume(end);
                return Ok(Some(if is_citation {
                    Element::Citation { offset, bytes }
                } else {
                    Element::Deletes { offset, bytes }
                }));
            }
            searched = self.buf.len().saturating_sub(close.len());
            if !self.fill()? {
                let bytes = std::mem::take(&mut self.buf);
                self.base += bytes.len() as u64;
                return Ok(Some(if is_citation {
                    Element::Truncated { offset, bytes }
                } else {
                    Element::Deletes { offset, bytes }
                }));
            }
        }
    }
}

// --- element parsing ------------------------------------------------------

fn sniff_pmid(bytes: &[u8]) -> Option<u64> {
    let at = memmem::find(bytes, b"<PMID")?;
    let rest = &bytes[at..];
    let gt = memchr::memchr(b'>', rest)?;
    let digits: Vec<u8> = rest[gt + 1..]
        .iter()
        .copied()
        .take_while(u8::is_ascii_digit)
        .collect();
    std::str::from_utf8(&digits).ok()?.parse().ok().filter(|&p| p > 0)
}

/// The four places a publication year can be recorded, in precedence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct YearSources {
    /// `Journal/JournalIssue/PubDate/Year`
    pub journal_year: Option<String>,
    /// `Journal/JournalIssue/PubDate/MedlineDate`, e.g. `2012 Jan-Feb`
    pub medline_date: Option<String>,
    /// `Article/ArticleDate/Year` (electronic publication)
    pub article_date_year: Option<String>,
    /// `MedlineCitation/DateCompleted/Year`
    pub date_completed_year: Option<String>,
}

fn structured_year(s: &str) -> Option<i32> {
    s.trim()
        .parse::<i32>()
        .ok()
        .filter(|y| (MIN_YEAR..=MAX_YEAR).contains(y))
}

/// First run of exactly four digits that is a plausible year.
fn free_text_year(s: &str) -> Option<i32> {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 4 {
                if let Some(y) = structured_year(&s[start..i]) {
                    return Some(y);
                }
            }
        } else {
            i += 1;
        }
    }
    None
}

/// Publication year from the first usable location: journal issue year,
/// MedlineDate string, electronic article date, date completed.
pub fn extract_year(sources: &YearSources) -> Option<i32> {
    sources
        .journal_year
        .as_deref()
        .and_then(structured_year)
        .or_else(|| sources.medline_date.as_deref().and_then(free_text_year))
        .or_else(|| sources.article_date_year.as_deref().and_then(structured_year))
        .or_else(|| {
            sources
                .date_completed_year
                .as_deref()
                .and_then(structured_year)
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Pmid,
    Title,
    AbstractSection,
    Keyword,
    RegistryNumber,
    GeneSymbol,
    JournalTitle,
    JournalYear,
    MedlineDate,
    ArticleDateYear,
    CompletedYear,
    RevisedYear,
    RevisedMonth,
    RevisedDay,
    LastName,
    ForeName,
    Initials,
    CollectiveName,
}

fn ends_with(stack: &[String], suffix: &[&str]) -> bool {
    stack.len() >= suffix.len()
        && stack[stack.len() - suffix.len()..]
            .iter()
            .zip(suffix)
            .all(|(a, b)| a == b)
}

/// Capture target for the element on top of `stack`.
fn target_for(stack: &[String]) -> Option<Target> {
    let name = stack.last()?.as_str();
    let t = match name {
        "PMID" if ends_with(stack, &["PubmedArticle", "MedlineCitation", "PMID"]) => Target::Pmid,
        "ArticleTitle" if ends_with(stack, &["Article", "ArticleTitle"]) => Target::Title,
        "AbstractText" if ends_with(stack, &["Article", "Abstract", "AbstractText"]) => {
            Target::AbstractSection
        }
        "Keyword" if ends_with(stack, &["KeywordList", "Keyword"]) => Target::Keyword,
        "RegistryNumber" if ends_with(stack, &["Chemical", "RegistryNumber"]) => {
            Target::RegistryNumber
        }
        "GeneSymbol" if ends_with(stack, &["GeneSymbolList", "GeneSymbol"]) => Target::GeneSymbol,
        "Title" if ends_with(stack, &["Article", "Journal", "Title"]) => Target::JournalTitle,
        "Year" if ends_with(stack, &["Journal", "JournalIssue", "PubDate", "Year"]) => {
            Target::JournalYear
        }
        "MedlineDate" if ends_with(stack, &["JournalIssue", "PubDate", "MedlineDate"]) => {
            Target::MedlineDate
        }
        "Year" if ends_with(stack, &["Article", "ArticleDate", "Year"]) => Target::ArticleDateYear,
        "Year" if ends_with(stack, &["MedlineCitation", "DateCompleted", "Year"]) => {
            Target::CompletedYear
        }
        "Year" if ends_with(stack, &["MedlineCitation", "DateRevised", "Year"]) => {
            Target::RevisedYear
        }
        "Month" if ends_with(stack, &["MedlineCitation", "DateRevised", "Month"]) => {
            Target::RevisedMonth
        }
        "Day" if ends_with(stack, &["MedlineCitation", "DateRevised", "Day"]) => {
            Target::RevisedDay
        }
        "LastName" if ends_with(stack, &["AuthorList", "Author", "LastName"]) => Target::LastName,
        "ForeName" if ends_with(stack, &["AuthorList", "Author", "ForeName"]) => Target::ForeName,
        "Initials" if ends_with(stack, &["AuthorList", "Author", "Initials"]) => Target::Initials,
        "CollectiveName" if ends_with(stack, &["AuthorList", "Author", "CollectiveName"]) => {
            Target::CollectiveName
        }
        _ => return None,
    };
    Some(t)
}

#[derive(Default)]
struct AuthorParts {
    last: Option<String>,
    fore: Option<String>,
    initials: Option<String>,
    collective: Option<String>,
}

impl AuthorParts {
    fn display(self) -> Option<String> {
        if let Some(c) = self.collective.filter(|c| !c.is_empty()) {
            return Some(c);
        }
        let last = self.last.filter(|l| !l.is_empty())?;
        match self.fore.or(self.initials).filter(|f| !f.is_empty()) {
            Some(f) => Some(format!("{last} {f}")),
            None => Some(last),
        }
    }
}

#[derive(Default)]
struct CitationBuilder {
    pmid: Option<String>,
    title: Option<String>,
    abstract_sections: Vec<String>,
    keywords: Vec<String>,
    mesh: Vec<String>,
    substances: Vec<String>,
    registry: Vec<String>,
    gene_symbols: Vec<String>,
    journal: Option<String>,
    years: YearSources,
    revised: [Option<String>; 3],
    authors: Vec<String>,
    author: Option<AuthorParts>,
}

fn attribute(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, String> {
    match e.try_get_attribute(name).map_err(|err| err.to_string())? {
        Some(a) => Ok(Some(
            a.normalized_value(XmlVersion::Implicit1_0)
                .map_err(|err| err.to_string())?
                .trim()
                .to_string(),
        )),
        None => Ok(None),
    }
}

fn push_unique(list: &mut Vec<String>, value: String) {
    let value = value.trim().to_string();
    if !value.is_empty() && !list.contains(&value) {
        list.push(value);
    }
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl CitationBuilder {
    fn on_open(&mut self, stack: &[String], e: &BytesStart<'_>) -> Result<(), String> {
        match stack.last().map(String::as_str) {
            Some("DescriptorName") if ends_with(stack, &["MeshHeading", "DescriptorName"]) => {
                if let Some(ui) = attribute(e, "UI")? {
                    push_unique(&mut self.mesh, ui);
                }
            }
            Some("NameOfSubstance") if ends_with(stack, &["Chemical", "NameOfSubstance"]) => {
                if let Some(ui) = attribute(e, "UI")? {
                    push_unique(&mut self.substances, ui);
                }
            }
            Some("Author") if ends_with(stack, &["AuthorList", "Author"]) => {
                self.author = Some(AuthorParts::default());
            }
            _ => {}
        }
        Ok(())
    }

    fn on_close(&mut self, stack: &[String]) {
        if ends_with(stack, &["AuthorList", "Author"]) {
            if let Some(name) = self.author.take().and_then(AuthorParts::display) {
                self.authors.push(name);
            }
        }
    }

    fn on_text(&mut self, target: Target, text: String) {
        let text = collapse_ws(&text);
        fn author(b: &mut CitationBuilder) -> &mut AuthorParts {
            b.author.get_or_insert_with(AuthorParts::default)
        }
        match target {
            Target::Pmid => self.pmid = Some(text),
            Target::Title => self.title = Some(text),
            Target::AbstractSection => {
                if !text.is_empty() {
                    self.abstract_sections.push(text)
                }
            }
            Target::Keyword => {
                if !text.is_empty() {
                    self.keywords.push(text)
                }
            }
            // "0" is MEDLINE's placeholder for "no registry number"
            Target::RegistryNumber => {
                if text != "0" {
                    push_unique(&mut self.registry, text)
                }
            }
            Target::GeneSymbol => push_unique(&mut self.gene_symbols, text),
            Target::JournalTitle => self.journal = Some(text).filter(|t| !t.is_empty()),
            Target::JournalYear => self.years.journal_year = Some(text),
            Target::MedlineDate => self.years.medline_date = Some(text),
            Target::ArticleDateYear => {
                self.years.article_date_year.get_or_insert(text);
            }
            Target::CompletedYear => self.years.date_completed_year = Some(text),
            Target::RevisedYear => self.revised[0] = Some(text),
            Target::RevisedMonth => self.revised[1] = Some(text),
            Target::RevisedDay => self.revised[2] = Some(text),
            Target::LastName => author(self).last = Some(text),
            Target::ForeName => author(self).fore = Some(text),
            Target::Initials => author(self).initials = Some(text),
            Target::CollectiveName => author(self).collective = Some(text),
        }
    }

    fn finish(self) -> Result<PubMedRecord, String> {
        let raw = self.pmid.ok_or("citation has no PMID")?;
        let pmid: u64 = raw
            .parse()
            .map_err(|_| format!("PMID {raw:?} is not a positive integer"))?;
        if pmid == 0 {
            return Err("PMID must be positive".into());
        }
        let revision = match &self.revised {
            [Some(y), m, d] => {
                let num = |s: &Option<String>| s.as_deref().and_then(|v| v.parse::<u32>().ok());
                match (y.parse::<u32>().ok(), num(m), num(d)) {
                    (Some(y), m, d) => y * 10_000 + m.unwrap_or(0) * 100 + d.unwrap_or(0),
                    _ => 0,
                }
            }
            _ => 0,
        };
        Ok(PubMedRecord {
            pmid,
            title: self.title.unwrap_or_default(),
            abstract_text: self.abstract_sections.join(" "),
            other_terms: self.keywords,
            mesh_descriptors: self.mesh,
            substance_names: self.substances,
            registry_numbers: self.registry,
            legacy_gene_symbols: self.gene_symbols,
            pub_year: extract_year(&self.years),
            journal: self.journal,
            authors: self.authors,
            revision,
        })
    }
}

fn resolve_entity(name: &str) -> Result<char, String> {
    let ch = match name {
        "lt" => '<',
        "gt" => '>',
        "amp" => '&',
        "apos" => '\'',
        "quot" => '"',
        _ => {
            let num = name
                .strip_prefix('#')
                .ok_or_else(|| format!("undefined entity &{name};"))?;
            let code = match num.strip_prefix('x') {
                Some(hex) => u32::from_str_radix(hex, 16),
                None => num.parse::<u32>(),
            }
            .map_err(|_| format!("bad character reference &{name};"))?;
            char::from_u32(code).ok_or_else(|| format!("bad character reference &{name};"))?
        }
    };
    Ok(ch)
}

/// Parses one `<PubmedArticle>` element.
fn parse_citation(bytes: &[u8]) -> Result<PubMedRecord, String> {
    let mut reader = Reader::from_reader(bytes);
    let mut builder = CitationBuilder::default();
    let mut stack: Vec<String> = Vec::new();
    // (target, stack depth of the capturing element, accumulated text)
    let mut capture: Option<(Target, usize, String)> = None;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| format!("XML error at byte {}: {e}", reader.error_position()))?;
        match event {
            Event::Start(e) => {
                stack.push(e.name().as_ref().to_string());
                builder.on_open(&stack, &e)?;
                if capture.is_none() {
                    if let Some(t) = target_for(&stack) {
                        capture = Some((t, stack.len(), String::new()));
                    }
                }
            }
            Event::Empty(e) => {
                stack.push(e.name().as_ref().to_string());
                builder.on_open(&stack, &e)?;
                if capture.is_none() {
                    if let Some(t) = target_for(&stack) {
                        builder.on_text(t, String::new());
                    }
                }
                builder.on_close(&stack);
                stack.pop();
            }
            Event::End(_) => {
                if let Some((t, depth, _)) = &capture {
                    if *depth == stack.len() {
                        let t = *t;
                        let text = capture.take().map(|c| c.2).unwrap_or_default();
                        builder.on_text(t, text);
                    }
                }
                builder.on_close(&stack);
                stack.pop();
                if stack.is_empty() {
                    break;
                }
            }
            Event::Text(t) => {
                if let Some((_, _, buf)) = &mut capture {
                    buf.push_str(&t.xml10_content());
                }
            }
            Event::CData(t) => {
                if let Some((_, _, buf)) = &mut capture {
                    buf.push_str(&t.xml10_content());
                }
            }
            Event::GeneralRef(r) => {
                let ch = resolve_entity(&r)?;
                if let Some((_, _, buf)) = &mut capture {
                    buf.push(ch);
                }
            }
            Event::Eof => {
                if !stack.is_empty() {
                    return Err(format!("citation ends inside <{}>", stack.last().unwrap()));
                }
                break;
            }
            _ => {}
        }
    }
    builder.finish()
}

/// PMIDs listed in a `<DeleteCitation>` element.
fn parse_delete_section(bytes: &[u8]) -> Result<Vec<u64>, String> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = Reader::from_reader(bytes);
    let mut pmids = Vec::new();
    let mut seen = HashSet::new();
    let mut depth = 0usize;
    let mut in_pmid = false;
    let mut text = String::new();
    loop {
        match reader
            .read_event()
            .map_err(|e| format!("XML error at byte {}: {e}", reader.error_position()))?
        {
            Event::Start(e) => {
                depth += 1;
                in_pmid = depth == 2 && e.name().as_ref() == "PMID";
                text.clear();
            }
            Event::Text(t) if in_pmid => text.push_str(&t.xml10_content()),
            Event::End(_) => {
                if in_pmid {
                    let pmid: u64 = text
                        .trim()
                        .parse()
                        .map_err(|_| format!("delete PMID {:?} is not an integer", text.trim()))?;
                    if pmid > 0 && seen.insert(pmid) {
                        pmids.push(pmid);
                    }
                    in_pmid = false;
                }
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    break;
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(pmids)
}
