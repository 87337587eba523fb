//! Brute-force reference for faceted search: one linear scan per query,
//! written without any of the index's helpers.

use std::collections::{BTreeMap, BTreeSet};

use medfacet_core::index::{EnrichedRecord, FacetQuery, FacetResult, Hit};

fn words_lower(s: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut cur = String::new();
    for c in s.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.insert(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.insert(cur);
    }
    out
}

fn passes(r: &EnrichedRecord, q: &FacetQuery) -> bool {
    let facet_ok = |wanted: &Vec<String>, have: &Vec<String>| {
        if wanted.is_empty() {
            return true;
        }
        for w in wanted {
            for h in have {
                if w == h {
                    return true;
                }
            }
        }
        false
    };
    if !facet_ok(&q.drugs, &r.drugs) || !facet_ok(&q.genes, &r.genes) || !facet_ok(&q.mesh, &r.record.mesh_descriptors) {
        return false;
    }
    if q.year_min.is_some() || q.year_max.is_some() {
        let Some(y) = r.record.pub_year else {
            return false;
        };
        if let Some(lo) = q.year_min {
            if y < lo {
                return false;
            }
        }
        if let Some(hi) = q.year_max {
            if y > hi {
                return false;
            }
        }
    }
    if let Some(text) = &q.text {
        let want = words_lower(text);
        let mut have = words_lower(&r.record.title);
        have.extend(words_lower(&r.record.abstract_text));
        if !want.is_subset(&have) {
            return false;
        }
    }
    true
}

fn ranked(counts: BTreeMap<String, usize>, limit: usize) -> Vec<(String, usize)> {
    // BTreeMap iteration is value-ascending; a stable sort on count keeps it
    let mut v: Vec<(String, usize)> = counts.into_iter().collect();
    v.sort_by_key(|e| std::cmp::Reverse(e.1));
    v.into_iter().take(limit).collect()
}

/// The result `search` must return for `q` over `corpus` (one record per
/// PMID). Query validation is not modelled.
pub fn search(corpus: &[EnrichedRecord], q: &FacetQuery) -> FacetResult {
    let mut matched: Vec<&EnrichedRecord> = corpus.iter().filter(|r| passes(r, q)).collect();
    matched.sort_by(|a, b| {
        let ya = a.record.pub_year;
        let yb = b.record.pub_year;
        match (ya, yb) {
            (Some(x), Some(y)) if x != y => y.cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            _ => b.record.pmid.cmp(&a.record.pmid),
        }
    });

    let mut drugs = BTreeMap::new();
    let mut genes = BTreeMap::new();
    let mut mesh = BTreeMap::new();
    let mut years = BTreeMap::new();
    for r in &matched {
        for d in r.drugs.iter().collect::<BTreeSet<_>>() {
            *drugs.entry(d.clone()).or_insert(0) += 1;
        }
        for g in r.genes.iter().collect::<BTreeSet<_>>() {
            *genes.entry(g.clone()).or_insert(0) += 1;
        }
        for m in r.record.mesh_descriptors.iter().collect::<BTreeSet<_>>() {
            *mesh.entry(m.clone()).or_insert(0) += 1;
        }
        if let Some(y) = r.record.pub_year {
            *years.entry(format!("{y}")).or_insert(0) += 1;
        }
    }

    let hits = matched
        .iter()
        .skip(q.page * q.page_size)
        .take(q.page_size)
        .map(|r| Hit {
            pmid: r.record.pmid,
            title: r.record.title.clone(),
            year: r.record.pub_year,
            drugs: r.drugs.clone(),
            genes: r.genes.clone(),
        })
        .collect();

    let mut facets = BTreeMap::new();
    facets.insert("drugs".to_string(), ranked(drugs, q.facet_limit));
    facets.insert("genes".to_string(), ranked(genes, q.facet_limit));
    facets.insert("mesh".to_string(), ranked(mesh, q.facet_limit));
    facets.insert("years".to_string(), ranked(years, q.facet_limit));
    FacetResult {
        total: matched.len(),
        hits,
        facets,
    }
}

/// Hit set of `q` ignoring pagination.
pub fn matching_pmids(corpus: &[EnrichedRecord], q: &FacetQuery) -> BTreeSet<u64> {
    corpus.iter().filter(|r| passes(r, q)).map(|r| r.record.pmid).collect()
}
