mod common;

use std::collections::BTreeMap;

use common::corpus::{random_corpus, random_query, random_record, tagged, Pools};
use common::facet_oracle;
use medfacet_core::index::{EnrichedRecord, FacetIndex, FacetQuery, IndexStore};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Five planted records: GNAQ in {1,2,3} whose drugs span four tokens.
fn planted() -> Vec<EnrichedRecord> {
    vec![
        tagged(1, Some(2020), &s(&["metformin", "chloroquine"]), &s(&["GNAQ"]), &s(&["D008545"]), "a", ""),
        tagged(2, Some(2021), &s(&["metformin"]), &s(&["GNAQ", "BAP1"]), &[], "b", ""),
        tagged(3, Some(2019), &s(&["hydroxychloroquine", "celecoxib"]), &s(&["GNAQ"]), &[], "c", ""),
        tagged(4, Some(2021), &s(&["metformin", "aspirin"]), &s(&["BAP1"]), &[], "d", ""),
        tagged(5, None, &[], &[], &s(&["D008545"]), "e", ""),
    ]
}

#[test]
fn gnaq_query_counts_drugs_of_matching_records() {
    let corpus = planted();
    let idx = FacetIndex::from_records(corpus.clone());
    let q = FacetQuery { genes: s(&["GNAQ"]), ..Default::default() };
    let r = idx.search(&q).unwrap();
    assert_eq!(r.total, 3);
    assert_eq!(r.facet("drugs").len(), 4);
    assert_eq!(r, facet_oracle::search(&corpus, &q));
    assert_eq!(r.facet("drugs")[0], ("metformin".to_string(), 2));
}

#[test]
fn neutral_query_counts_whole_corpus() {
    let corpus = planted();
    let idx = FacetIndex::from_records(corpus.clone());
    let r = idx.search(&FacetQuery::default()).unwrap();
    assert_eq!(r.total, 5);
    assert_eq!(r, facet_oracle::search(&corpus, &FacetQuery::default()));
    assert_eq!(r.facet("drugs")[0], ("metformin".to_string(), 3));
}

#[test]
fn conjunction_across_facets() {
    let corpus = planted();
    let idx = FacetIndex::from_records(corpus.clone());
    let q = FacetQuery { genes: s(&["GNAQ"]), drugs: s(&["metformin"]), ..Default::default() };
    let r = idx.search(&q).unwrap();
    let pmids: Vec<u64> = r.hits.iter().map(|h| h.pmid).collect();
    assert_eq!(pmids, vec![2, 1]);
    assert_eq!(r.facet("genes"), &[("GNAQ".to_string(), 2), ("BAP1".to_string(), 1)]);
    assert_eq!(r, facet_oracle::search(&corpus, &q));
}

#[test]
fn snapshot_restore_preserves_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pools = Pools::new(20, 10, 8);
    let corpus = random_corpus(&mut rng, 300, &pools);
    let idx = FacetIndex::from_records(corpus);
    idx.set_watermark(Some("pubmed25n0003.xml.gz".into()));
    let dir = tempfile::tempdir().unwrap();
    let m1 = idx.snapshot(dir.path()).unwrap();
    let back = FacetIndex::restore(dir.path()).unwrap();
    assert_eq!(back.watermark(), idx.watermark());
    for _ in 0..50 {
        let q = random_query(&mut rng, &pools);
        assert_eq!(back.search(&q).unwrap(), idx.search(&q).unwrap());
    }
    let again = tempfile::tempdir().unwrap();
    assert_eq!(back.snapshot(again.path()).unwrap(), m1);
}

#[test]
fn store_reload_after_mixed_writes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pools = Pools::new(10, 5, 5);
    let dir = tempfile::tempdir().unwrap();
    let store = IndexStore::new(dir.path().join("index"));
    let idx = store.load().unwrap();
    let mut pmids = Vec::new();
    for round in 0..4u64 {
        for _ in 0..100 {
            let pmid = rng.random_range(1..400_000u64);
            pmids.push(pmid);
            idx.upsert(random_record(&mut rng, pmid, &pools));
        }
        for p in pmids.iter().step_by(7) {
            idx.delete(*p);
        }
        store.commit(&idx).unwrap();
        let back = store.load().unwrap();
        assert_eq!(back.digest(), idx.digest(), "round {round}");
    }
}

fn corpus_and_queries(seed: u64, n: usize, queries: usize) -> (Vec<EnrichedRecord>, Vec<FacetQuery>, Pools) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pools = Pools::new(rng.random_range(3..40), rng.random_range(2..20), rng.random_range(2..15));
    let corpus = random_corpus(&mut rng, n, &pools);
    let qs = (0..queries).map(|_| random_query(&mut rng, &pools)).collect();
    (corpus, qs, pools)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_brute_force(seed in any::<u64>(), n in 0usize..400) {
        let (corpus, queries, _) = corpus_and_queries(seed, n, 20);
        let idx = FacetIndex::from_records(corpus.clone());
        for q in &queries {
            prop_assert_eq!(idx.search(q).unwrap(), facet_oracle::search(&corpus, q));
        }
    }

    #[test]
    fn filters_are_monotone(seed in any::<u64>()) {
        let (corpus, queries, pools) = corpus_and_queries(seed, 200, 15);
        let idx = FacetIndex::from_records(corpus);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for q in queries {
            let base = idx.search(&q).unwrap().total;
            // one more value inside an active facet never shrinks the result
            if !q.drugs.is_empty() {
                let mut wider = q.clone();
                wider.drugs.push(pools.drugs[rng.random_range(0..pools.drugs.len())].clone());
                prop_assert!(idx.search(&wider).unwrap().total >= base);
            }
            // a new facet filter never grows it
            if q.genes.is_empty() {
                let mut narrower = q.clone();
                narrower.genes.push(pools.genes[rng.random_range(0..pools.genes.len())].clone());
                prop_assert!(idx.search(&narrower).unwrap().total <= base);
            }
        }
    }

    #[test]
    fn facet_counts_are_consistent(seed in any::<u64>()) {
        let (corpus, queries, _) = corpus_and_queries(seed, 150, 8);
        let idx = FacetIndex::from_records(corpus);
        for q in queries {
            let r = idx.search(&q).unwrap();
            if q.drugs.is_empty() {
                for (value, count) in r.facet("drugs") {
                    let mut refined = q.clone();
                    refined.drugs = vec![value.clone()];
                    prop_assert_eq!(idx.search(&refined).unwrap().total, *count);
                }
            }
            if q.mesh.is_empty() {
                for (value, count) in r.facet("mesh") {
                    let mut refined = q.clone();
                    refined.mesh = vec![value.clone()];
                    prop_assert_eq!(idx.search(&refined).unwrap().total, *count);
                }
            }
            for (_, count) in r.facets.values().flatten() {
                prop_assert!(*count <= r.total);
            }
        }
    }

    #[test]
    fn last_write_wins(seed in any::<u64>(), events in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pools = Pools::new(8, 4, 4);
        let idx = FacetIndex::new();
        let mut expected: BTreeMap<u64, EnrichedRecord> = BTreeMap::new();
        for _ in 0..events {
            let pmid = rng.random_range(1..20u64);
            if rng.random_bool(0.25) {
                prop_assert_eq!(idx.delete(pmid), expected.remove(&pmid).is_some());
            } else {
                let r = random_record(&mut rng, pmid, &pools);
                expected.insert(pmid, r.clone());
                idx.upsert(r);
            }
        }
        let rebuilt = FacetIndex::from_records(expected.values().cloned());
        prop_assert_eq!(idx.digest(), rebuilt.digest());
        for (pmid, r) in &expected {
            prop_assert_eq!(idx.get(*pmid), Some(r.clone()));
        }
        let all: Vec<EnrichedRecord> = expected.into_values().collect();
        let q = FacetQuery { page_size: 500, ..Default::default() };
        prop_assert_eq!(idx.search(&q).unwrap(), facet_oracle::search(&all, &q));
    }
}
