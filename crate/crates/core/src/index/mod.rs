//! Faceted index over enriched records.
//!
//! Records live in an in-memory forward map keyed by PMID, with inverted
//! postings for the four facets (drugs, genes, mesh, years) and for lower
//! cased title/abstract terms. Filters are OR within a facet and AND across
//! facets; facet counts are taken over the whole filtered set, the facet's
//! own filter included.
//!
//! Writers are serialised by an internal lock, and each query runs against
//! a consistent view, so a reader never sees half of an upsert.

mod snapshot;
mod store;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use snapshot::{Manifest, SegmentInfo, SnapshotError};
pub use store::IndexStore;

use crate::drugs::{distinct_tokens, DrugMatch};
use crate::genes::{distinct_symbols, GeneMatch};
use crate::record::PubMedRecord;
use crate::text::search_terms;

/// A record plus its derived fields and their provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichedRecord {
    #[serde(flatten)]
    pub record: PubMedRecord,
    #[serde(default)]
    pub drugs: Vec<String>,
    #[serde(default)]
    pub genes: Vec<String>,
    #[serde(default)]
    pub drug_matches: Vec<DrugMatch>,
    #[serde(default)]
    pub gene_matches: Vec<GeneMatch>,
}

impl EnrichedRecord {
    pub fn new(record: PubMedRecord, drug_matches: Vec<DrugMatch>, gene_matches: Vec<GeneMatch>) -> Self {
        EnrichedRecord {
            record,
            drugs: distinct_tokens(&drug_matches),
            genes: distinct_symbols(&gene_matches),
            drug_matches,
            gene_matches,
        }
    }

    pub fn pmid(&self) -> u64 {
        self.record.pmid
    }

    /// `drugs`/`genes` must be the distinct values of their match lists.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.record.check_invariants()?;
        if self.drugs != distinct_tokens(&self.drug_matches) {
            return Err(format!("pmid {}: drugs disagree with drug_matches", self.pmid()));
        }
        if self.genes != distinct_symbols(&self.gene_matches) {
            return Err(format!("pmid {}: genes disagree with gene_matches", self.pmid()));
        }
        Ok(())
    }

    /// Terms the full-text filter can match: title and abstract words.
    pub fn text_terms(&self) -> BTreeSet<String> {
        search_terms(&self.record.title)
            .chain(search_terms(&self.record.abstract_text))
            .collect()
    }

    fn summary(&self) -> Hit {
        Hit {
            pmid: self.pmid(),
            title: self.record.title.clone(),
            year: self.record.pub_year,
            drugs: self.drugs.clone(),
            genes: self.genes.clone(),
        }
    }
}

pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 500;
pub const DEFAULT_FACET_LIMIT: usize = 50;
pub const MAX_FACET_LIMIT: usize = 10_000;

/// Facet names as they appear in [`FacetResult::facets`].
pub const FACET_DRUGS: &str = "drugs";
pub const FACET_GENES: &str = "genes";
pub const FACET_MESH: &str = "mesh";
pub const FACET_YEARS: &str = "years";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FacetQuery {
    /// Words that must all occur in title or abstract (case-insensitive).
    pub text: Option<String>,
    pub drugs: Vec<String>,
    pub genes: Vec<String>,
    /// MeSH descriptor UIs.
    pub mesh: Vec<String>,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
    /// Zero-based.
    pub page: usize,
    pub page_size: usize,
    pub facet_limit: usize,
}

impl Default for FacetQuery {
    fn default() -> Self {
        FacetQuery {
            text: None,
            drugs: Vec::new(),
            genes: Vec::new(),
            mesh: Vec::new(),
            year_min: None,
            year_max: None,
            page: 0,
            page_size: DEFAULT_PAGE_SIZE,
            facet_limit: DEFAULT_FACET_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("page_size must be between 1 and {MAX_PAGE_SIZE}, got {0}")]
    PageSize(usize),
    #[error("facet_limit must be between 1 and {MAX_FACET_LIMIT}, got {0}")]
    FacetLimit(usize),
    #[error("year_min {0} is greater than year_max {1}")]
    YearRange(i32, i32),
}

impl FacetQuery {
    pub fn validate(&self) -> Result<(), QueryError> {
        if !(1..=MAX_PAGE_SIZE).contains(&self.page_size) {
            return Err(QueryError::PageSize(self.page_size));
        }
        if !(1..=MAX_FACET_LIMIT).contains(&self.facet_limit) {
            return Err(QueryError::FacetLimit(self.facet_limit));
        }
        if let (Some(lo), Some(hi)) = (self.year_min, self.year_max) {
            if lo > hi {
                return Err(QueryError::YearRange(lo, hi));
            }
        }
        Ok(())
    }

    /// Lower-cased query terms; empty when there is no text filter.
    pub fn terms(&self) -> Vec<String> {
        let mut terms: Vec<String> = self.text.as_deref().map(|t| search_terms(t).collect()).unwrap_or_default();
        terms.sort();
        terms.dedup();
        terms
    }

    /// Whether `record` passes every filter of the query.
    pub fn matches(&self, record: &EnrichedRecord) -> bool {
        let any_of = |wanted: &[String], have: &[String]| {
            wanted.is_empty() || wanted.iter().any(|w| have.contains(w))
        };
        if !any_of(&self.drugs, &record.drugs)
            || !any_of(&self.genes, &record.genes)
            || !any_of(&self.mesh, &record.record.mesh_descriptors)
        {
            return false;
        }
        if self.year_min.is_some() || self.year_max.is_some() {
            match record.record.pub_year {
                None => return false,
                Some(y) => {
                    if self.year_min.is_some_and(|lo| y < lo) || self.year_max.is_some_and(|hi| y > hi) {
                        return false;
                    }
                }
            }
        }
        let terms = self.terms();
        if !terms.is_empty() {
            let have = record.text_terms();
            return terms.iter().all(|t| have.contains(t));
        }
        true
    }
}

/// Result-list entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub pmid: u64,
    pub title: String,
    pub year: Option<i32>,
    pub drugs: Vec<String>,
    pub genes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetResult {
    pub total: usize,
    pub hits: Vec<Hit>,
    /// Facet name to `(value, count)` pairs, count descending then value
    /// ascending, truncated to the query's facet limit.
    pub facets: BTreeMap<String, Vec<(String, usize)>>,
}

impl FacetResult {
    pub fn facet(&self, name: &str) -> &[(String, usize)] {
        self.facets.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Hit ordering: year descending with undated records last, then PMID
/// descending.
pub fn recency_key(year: Option<i32>, pmid: u64) -> (Reverse<Option<i32>>, Reverse<u64>) {
    // None < Some, so reversing puts undated records last
    (Reverse(year), Reverse(pmid))
}

/// Sorts facet counts (count desc, value asc) and keeps the first `limit`.
pub fn rank_facet(counts: HashMap<String, usize>, limit: usize) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(limit);
    v
}

type Postings = HashMap<String, BTreeSet<u64>>;

#[derive(Debug, Default)]
struct State {
    records: BTreeMap<u64, Arc<EnrichedRecord>>,
    drugs: Postings,
    genes: Postings,
    mesh: Postings,
    years: BTreeMap<i32, BTreeSet<u64>>,
    terms: Postings,
    watermark: Option<String>,
    /// Snapshot buckets touched since the last store commit.
    dirty: BTreeSet<u64>,
    /// Manifest digest of the stored snapshot `dirty` is relative to.
    base: Option<String>,
}

fn add_postings<'a>(p: &mut Postings, values: impl IntoIterator<Item = &'a String>, pmid: u64) {
    for v in values {
        p.entry(v.clone()).or_default().insert(pmid);
    }
}

fn remove_postings<'a>(p: &mut Postings, values: impl IntoIterator<Item = &'a String>, pmid: u64) {
    for v in values {
        if let Some(set) = p.get_mut(v) {
            set.remove(&pmid);
            if set.is_empty() {
                p.remove(v);
            }
        }
    }
}

impl State {
    fn insert(&mut self, rec: Arc<EnrichedRecord>) {
        let pmid = rec.pmid();
        self.remove(pmid);
        add_postings(&mut self.drugs, &rec.drugs, pmid);
        add_postings(&mut self.genes, &rec.genes, pmid);
        add_postings(&mut self.mesh, &rec.record.mesh_descriptors, pmid);
        add_postings(&mut self.terms, &rec.text_terms(), pmid);
        if let Some(y) = rec.record.pub_year {
            self.years.entry(y).or_default().insert(pmid);
        }
        self.dirty.insert(snapshot::bucket_of(pmid));
        self.records.insert(pmid, rec);
    }

    fn remove(&mut self, pmid: u64) -> bool {
        let Some(old) = self.records.remove(&pmid) else {
            return false;
        };
        remove_postings(&mut self.drugs, &old.drugs, pmid);
        remove_postings(&mut self.genes, &old.genes, pmid);
        remove_postings(&mut self.mesh, &old.record.mesh_descriptors, pmid);
        remove_postings(&mut self.terms, &old.text_terms(), pmid);
        if let Some(y) = old.record.pub_year {
            if let Some(set) = self.years.get_mut(&y) {
                set.remove(&pmid);
                if set.is_empty() {
                    self.years.remove(&y);
                }
            }
        }
        self.dirty.insert(snapshot::bucket_of(pmid));
        true
    }

    /// Union of the postings of `values`; `None` when the filter is inactive.
    fn any_of(p: &Postings, values: &[String]) -> Option<BTreeSet<u64>> {
        if values.is_empty() {
            return None;
        }
        let mut out = BTreeSet::new();
        for v in values {
            if let Some(set) = p.get(v) {
                out.extend(set.iter().copied());
            }
        }
        Some(out)
    }

    fn candidates(&self, q: &FacetQuery) -> Vec<u64> {
        let mut sets: Vec<BTreeSet<u64>> = Vec::new();
        sets.extend(Self::any_of(&self.drugs, &q.drugs));
        sets.extend(Self::any_of(&self.genes, &q.genes));
        sets.extend(Self::any_of(&self.mesh, &q.mesh));
        for t in q.terms() {
            sets.push(self.terms.get(&t).cloned().unwrap_or_default());
        }
        if q.year_min.is_some() || q.year_max.is_some() {
            let lo = q.year_min.unwrap_or(i32::MIN);
            let hi = q.year_max.unwrap_or(i32::MAX);
            let mut s = BTreeSet::new();
            if lo <= hi {
                for set in self.years.range(lo..=hi).map(|(_, s)| s) {
                    s.extend(set.iter().copied());
                }
            }
            sets.push(s);
        }
        if sets.is_empty() {
            return self.records.keys().copied().collect();
        }
        sets.sort_by_key(BTreeSet::len);
        let (first, rest) = sets.split_first().expect("nonempty");
        first
            .iter()
            .copied()
            .filter(|p| rest.iter().all(|s| s.contains(p)))
            .collect()
    }
}

/// The facet index. Cheap to share behind an `Arc`; all methods take
/// `&self`.
#[derive(Debug, Default)]
pub struct FacetIndex {
    state: RwLock<State>,
}

impl FacetIndex {
    pub fn new() -> Self {
        Self::default()
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Inserts `record`, replacing any stored version with the same PMID.
    pub fn upsert(&self, record: EnrichedRecord) {
        self.write().insert(Arc::new(record));
    }

    /// Removes a record; false when the PMID was unknown.
    pub fn delete(&self, pmid: u64) -> bool {
        self.write().remove(pmid)
    }

    pub fn get(&self, pmid: u64) -> Option<EnrichedRecord> {
        self.read().records.get(&pmid).map(|r| (**r).clone())
    }

    pub fn len(&self) -> usize {
        self.read().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Name of the last batch whose effects are included.
    pub fn watermark(&self) -> Option<String> {
        self.read().watermark.clone()
    }

    pub fn set_watermark(&self, watermark: Option<String>) {
        self.write().watermark = watermark;
    }

    /// All stored records in PMID order.
    pub fn records(&self) -> Vec<Arc<EnrichedRecord>> {
        self.read().records.values().cloned().collect()
    }

    pub fn search(&self, q: &FacetQuery) -> Result<FacetResult, QueryError> {
        q.validate()?;
        let state = self.read();
        let mut matched: Vec<&Arc<EnrichedRecord>> = state
            .candidates(q)
            .into_iter()
            .filter_map(|p| state.records.get(&p))
            .collect();

        let mut drugs: HashMap<String, usize> = HashMap::new();
        let mut genes: HashMap<String, usize> = HashMap::new();
        let mut mesh: HashMap<String, usize> = HashMap::new();
        let mut years: HashMap<String, usize> = HashMap::new();
        for r in &matched {
            for d in &r.drugs {
                *drugs.entry(d.clone()).or_default() += 1;
            }
            for g in &r.genes {
                *genes.entry(g.clone()).or_default() += 1;
            }
            // a descriptor listed twice still counts the record once
            let distinct: BTreeSet<&String> = r.record.mesh_descriptors.iter().collect();
            for m in distinct {
                *mesh.entry(m.clone()).or_default() += 1;
            }
            if let Some(y) = r.record.pub_year {
                *years.entry(y.to_string()).or_default() += 1;
            }
        }

        matched.sort_by_key(|r| recency_key(r.record.pub_year, r.pmid()));
        let total = matched.len();
        let hits = matched
            .iter()
            .skip(q.page.saturating_mul(q.page_size))
            .take(q.page_size)
            .map(|r| r.summary())
            .collect();

        let mut facets = BTreeMap::new();
        facets.insert(FACET_DRUGS.to_string(), rank_facet(drugs, q.facet_limit));
        facets.insert(FACET_GENES.to_string(), rank_facet(genes, q.facet_limit));
        facets.insert(FACET_MESH.to_string(), rank_facet(mesh, q.facet_limit));
        facets.insert(FACET_YEARS.to_string(), rank_facet(years, q.facet_limit));
        Ok(FacetResult { total, hits, facets })
    }

    /// SHA-256 over the canonical JSON of every record in PMID order.
    /// Equal digests mean equal stored content; the watermark is excluded.
    pub fn digest(&self) -> String {
        let state = self.read();
        let mut h = Sha256::new();
        for r in state.records.values() {
            h.update(serde_json::to_vec(&**r).expect("record serialises"));
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Builds an index from records (later duplicates win).
    pub fn from_records(records: impl IntoIterator<Item = EnrichedRecord>) -> Self {
        let idx = FacetIndex::new();
        {
            let mut s = idx.write();
            for r in records {
                s.insert(Arc::new(r));
            }
            s.dirty.clear();
        }
        idx
    }
}
