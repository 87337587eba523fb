//! Random enriched corpora and queries.

use std::collections::BTreeMap;

use medfacet_core::drugs::{DrugChannel, DrugMatch};
use medfacet_core::genes::{GeneChannel, GeneMatch};
use medfacet_core::index::{EnrichedRecord, FacetQuery};
use medfacet_core::record::{PubMedRecord, SourceField};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub const WORDS: &[&str] = &[
    "melanoma", "uveal", "tumor", "cells", "therapy", "mutation", "patients", "trial", "kinase",
    "pathway", "inhibitor", "expression", "survival", "model", "mouse", "clinical", "response",
    "resistance", "signaling", "protein", "Parkinson", "disease", "neurons", "dopamine",
];

/// A record whose derived fields are given directly; provenance entries
/// are synthesised so the record still satisfies its invariants.
pub fn tagged(
    pmid: u64,
    year: Option<i32>,
    drugs: &[String],
    genes: &[String],
    mesh: &[String],
    title: &str,
    abstract_text: &str,
) -> EnrichedRecord {
    let mut r = PubMedRecord::new(pmid);
    r.title = title.to_string();
    r.abstract_text = abstract_text.to_string();
    r.pub_year = year;
    r.mesh_descriptors = mesh.to_vec();
    let dm = drugs
        .iter()
        .map(|d| DrugMatch {
            token: d.clone(),
            channel: DrugChannel::Mesh,
            evidence: format!("synthetic:{d}"),
            field: SourceField::SubstanceName,
        })
        .collect();
    let gm = genes
        .iter()
        .map(|g| GeneMatch {
            symbol: g.clone(),
            channel: GeneChannel::Mesh,
            tier: None,
            evidence: format!("synthetic:{g}"),
            field: SourceField::MeshHeading,
            verdict: None,
        })
        .collect();
    EnrichedRecord::new(r, dm, gm)
}

#[derive(Debug, Clone)]
pub struct Pools {
    pub drugs: Vec<String>,
    pub genes: Vec<String>,
    pub mesh: Vec<String>,
    pub years: (i32, i32),
}

impl Pools {
    pub fn new(drugs: usize, genes: usize, mesh: usize) -> Self {
        Pools {
            drugs: (0..drugs).map(|i| format!("drug-{i:03}")).collect(),
            genes: (0..genes).map(|i| format!("GENE{i}")).collect(),
            mesh: (0..mesh).map(|i| format!("D{:06}", 1000 + i)).collect(),
            years: (1990, 2025),
        }
    }
}

fn pick_some<R: Rng>(rng: &mut R, pool: &[String], max: usize) -> Vec<String> {
    let n = rng.random_range(0..=max.min(pool.len()));
    let mut v: Vec<String> = pool.choose_multiple(rng, n).cloned().collect();
    v.shuffle(rng);
    v
}

fn sentence<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

pub fn random_record<R: Rng>(rng: &mut R, pmid: u64, pools: &Pools) -> EnrichedRecord {
    let year = if rng.random_bool(0.9) {
        Some(rng.random_range(pools.years.0..=pools.years.1))
    } else {
        None
    };
    let title = sentence(rng, 4);
    let abs = sentence(rng, 12);
    tagged(
        pmid,
        year,
        &pick_some(rng, &pools.drugs, 4),
        &pick_some(rng, &pools.genes, 3),
        &pick_some(rng, &pools.mesh, 3),
        &title,
        &abs,
    )
}

/// `n` records with distinct random PMIDs, sorted by PMID.
pub fn random_corpus<R: Rng>(rng: &mut R, n: usize, pools: &Pools) -> Vec<EnrichedRecord> {
    let mut by_pmid = BTreeMap::new();
    while by_pmid.len() < n {
        let pmid = rng.random_range(1..5_000_000u64);
        by_pmid.entry(pmid).or_insert_with(|| random_record(rng, pmid, pools));
    }
    by_pmid.into_values().collect()
}

fn filter_values<R: Rng>(rng: &mut R, pool: &[String]) -> Vec<String> {
    if rng.random_bool(0.5) {
        return Vec::new();
    }
    let mut v = pick_some(rng, pool, 3);
    if rng.random_bool(0.1) {
        v.push("absent-value".into());
    }
    v
}

pub fn random_query<R: Rng>(rng: &mut R, pools: &Pools) -> FacetQuery {
    let (lo, hi) = pools.years;
    let mut q = FacetQuery {
        drugs: filter_values(rng, &pools.drugs),
        genes: filter_values(rng, &pools.genes),
        mesh: filter_values(rng, &pools.mesh),
        page: rng.random_range(0..3),
        page_size: rng.random_range(1..=60),
        facet_limit: rng.random_range(1..=60),
        ..FacetQuery::default()
    };
    if rng.random_bool(0.3) {
        q.year_min = Some(rng.random_range(lo..=hi));
    }
    if rng.random_bool(0.3) {
        let base = q.year_min.unwrap_or(lo);
        q.year_max = Some(rng.random_range(base..=hi));
    }
    if rng.random_bool(0.3) {
        let n = rng.random_range(1..=2);
        let mut t = sentence(rng, n);
        if rng.random_bool(0.5) {
            t = t.to_uppercase();
        }
        q.text = Some(t);
    }
    q
}
