//! Core of the medfacet system: MEDLINE/PubMed ingestion, controlled-vocabulary
//! enrichment (drugs and genes) and a faceted search index over the enriched
//! corpus.
//!
//! The crate is organised along the ETL flow:
//!
//! - [`vocab`] loads and validates the drug and gene vocabularies.
//! - [`ingest`] lists, fetches and parses gzip-compressed PubMed XML batches.
//! - [`drugs`] and [`genes`] derive the `drugs` / `genes` fields of a record.
//! - [`index`] stores enriched records and answers faceted queries.
//! - [`pipeline`] wires the stages together with checkpointing.

pub mod drugs;
pub mod genes;
pub mod index;
pub mod ingest;
pub mod pipeline;
pub mod record;
pub mod text;
pub mod vocab;

pub use drugs::{DrugChannel, DrugIndexer, DrugMatch};
pub use genes::{
    Disambiguator, DisambiguationRequest, GeneChannel, GeneExtraction, GeneIndexer, GeneMatch,
    MatchTier, Verdict,
};
pub use index::{EnrichedRecord, FacetIndex, FacetQuery, FacetResult};
pub use record::{PubMedRecord, RecordEvent, SourceField};
pub use vocab::{AmbiguityClass, DrugEntry, DrugVocabulary, GeneEntry, GeneVocabulary};
