//! Extraction stage: batch listing/fetching and XML parsing.

pub mod archive;
pub mod parser;

pub use archive::{fetch_batch, list_remote_batches, ArchiveError, ArchiveLocator};
pub use parser::{
    extract_year, parse_batch, parse_xml, BatchError, BatchItem, BatchParser, BatchStats,
    ParseError, YearSources,
};
