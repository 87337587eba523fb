//! Helpers shared by the integration tests: an XML batch builder, a random
//! corpus generator and a brute-force facet search used as the reference
//! implementation.

#![allow(dead_code)]

pub mod archive;
pub mod corpus;
pub mod facet_oracle;
pub mod xml;

use std::path::PathBuf;
use std::sync::Arc;

use medfacet_core::vocab::{DrugVocabulary, GeneVocabulary};

/// The repository's `data/` directory.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn sample_drugs() -> Arc<DrugVocabulary> {
    Arc::new(DrugVocabulary::load_path(data_dir().join("vocab/drugs.tsv")).expect("sample drug vocabulary"))
}

pub fn sample_genes() -> Arc<GeneVocabulary> {
    Arc::new(GeneVocabulary::load_path(data_dir().join("vocab/genes.tsv")).expect("sample gene vocabulary"))
}
