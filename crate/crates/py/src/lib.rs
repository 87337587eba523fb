//! Python module `medfacet`.
//!
//! Records, queries and results cross the boundary as plain dicts in the
//! same JSON shape the HTTP API uses; conversion goes through the stdlib
//! `json` module so the Rust serde definitions stay the single source.

use std::path::PathBuf;
use std::sync::Arc;

use medfacet_core::genes::{render_prompt as render, ContextLexicon, Disambiguator, NullOracle, TableOracle};
use medfacet_core::index::{self, EnrichedRecord, FacetQuery, IndexStore};
use medfacet_core::pipeline::{self as etl, Enricher, PipelineConfig};
use medfacet_core::{DisambiguationRequest, DrugIndexer, DrugVocabulary, GeneIndexer, GeneVocabulary, PubMedRecord};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(medfacet, MedfacetError, PyException, "Raised for any failure inside medfacet.");

fn err(e: impl std::fmt::Display) -> PyErr {
    MedfacetError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn table_oracle(path: Option<PathBuf>) -> PyResult<Option<Arc<dyn Disambiguator>>> {
    path.map(|p| {
        TableOracle::open(&p)
            .map(|t| Arc::new(t) as Arc<dyn Disambiguator>)
            .map_err(|e| err(format!("{}: {e}", p.display())))
    })
    .transpose()
}

/// Drug and gene indexers over a pair of vocabularies.
#[pyclass(frozen, module = "medfacet")]
struct Extractor {
    inner: Enricher,
}

#[pymethods]
impl Extractor {
    /// `lexicon` is an optional genetics word list (one term per line),
    /// `oracle_table` an optional `digest<TAB>verdict` file. Without a table
    /// every gated candidate is dropped.
    #[new]
    #[pyo3(signature = (drugs, genes, lexicon=None, oracle_table=None))]
    fn new(drugs: PathBuf, genes: PathBuf, lexicon: Option<PathBuf>, oracle_table: Option<PathBuf>) -> PyResult<Self> {
        let d = DrugVocabulary::load_path(&drugs).map_err(|e| err(format!("{}: {e}", drugs.display())))?;
        let g = GeneVocabulary::load_path(&genes).map_err(|e| err(format!("{}: {e}", genes.display())))?;
        let lexicon = match lexicon {
            None => ContextLexicon::default(),
            Some(p) => {
                let f = std::fs::File::open(&p).map_err(|e| err(format!("{}: {e}", p.display())))?;
                ContextLexicon::from_reader(std::io::BufReader::new(f)).map_err(err)?
            }
        };
        let oracle = table_oracle(oracle_table)?.unwrap_or_else(|| Arc::new(NullOracle));
        Ok(Extractor {
            inner: Enricher::new(
                DrugIndexer::new(Arc::new(d)),
                GeneIndexer::with_lexicon(Arc::new(g), lexicon),
                oracle,
            ),
        })
    }

    /// Enriches a citation dict (`pmid`, `title`, `abstract`, `mesh_descriptors`,
    /// `registry_numbers`, ...). Returns the enriched record, ready for
    /// `FacetIndex.upsert`, plus `dropped` and `oracle_calls`.
    fn extract<'py>(&self, record: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let py = record.py();
        let record: PubMedRecord = from_py(record)?;
        let e = py.detach(|| self.inner.enrich(record));
        let out = to_py(py, &e.record)?;
        out.set_item("dropped", to_py(py, &e.dropped)?)?;
        out.set_item("oracle_calls", e.oracle_calls)?;
        Ok(out)
    }

    /// Shortcut for free text with no structured fields.
    #[pyo3(signature = (title, abstract_text="", pmid=0))]
    fn extract_text<'py>(&self, py: Python<'py>, title: &str, abstract_text: &str, pmid: u64) -> PyResult<Bound<'py, PyAny>> {
        let mut r = PubMedRecord::new(pmid);
        r.title = title.to_string();
        r.abstract_text = abstract_text.to_string();
        self.extract(&to_py(py, &r)?)
    }

    #[getter]
    fn drug_count(&self) -> usize {
        self.inner.drug_indexer().vocabulary().len()
    }

    #[getter]
    fn gene_count(&self) -> usize {
        self.inner.gene_indexer().vocabulary().len()
    }
}

/// In-memory faceted index.
#[pyclass(frozen, module = "medfacet")]
struct FacetIndex {
    inner: index::FacetIndex,
}

#[pymethods]
impl FacetIndex {
    #[new]
    fn new() -> Self {
        FacetIndex {
            inner: index::FacetIndex::new(),
        }
    }

    /// Opens the committed index of an index directory (as written by the pipeline).
    #[staticmethod]
    fn load(py: Python<'_>, root: PathBuf) -> PyResult<Self> {
        let inner = py.detach(|| IndexStore::new(root).load_existing()).map_err(err)?;
        Ok(FacetIndex { inner })
    }

    /// Atomically commits this index as the current version under `root`.
    fn commit(&self, py: Python<'_>, root: PathBuf) -> PyResult<()> {
        py.detach(|| IndexStore::new(root).commit(&self.inner)).map_err(err)?;
        Ok(())
    }

    /// Writes a snapshot directory.
    fn snapshot(&self, py: Python<'_>, dir: PathBuf) -> PyResult<()> {
        py.detach(|| self.inner.snapshot(&dir)).map_err(err)?;
        Ok(())
    }

    #[staticmethod]
    fn restore(py: Python<'_>, dir: PathBuf) -> PyResult<Self> {
        let inner = py.detach(|| index::FacetIndex::restore(&dir)).map_err(err)?;
        Ok(FacetIndex { inner })
    }

    /// Inserts or replaces an enriched record (the dict `Extractor.extract` returns).
    fn upsert(&self, record: &Bound<'_, PyAny>) -> PyResult<()> {
        let r: EnrichedRecord = from_py(record)?;
        r.check_invariants().map_err(PyValueError::new_err)?;
        self.inner.upsert(r);
        Ok(())
    }

    fn delete(&self, pmid: u64) -> bool {
        self.inner.delete(pmid)
    }

    fn get<'py>(&self, py: Python<'py>, pmid: u64) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.inner.get(pmid).map(|r| to_py(py, &r)).transpose()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, pmid: u64) -> bool {
        self.inner.get(pmid).is_some()
    }

    /// Content digest; equal for indexes holding the same records.
    fn digest(&self) -> String {
        self.inner.digest()
    }

    /// Filters combine with AND across facets and OR within one.
    /// Returns `{"total", "hits", "facets"}`.
    #[pyo3(signature = (q=None, *, drugs=Vec::new(), genes=Vec::new(), mesh=Vec::new(),
                        year_min=None, year_max=None, page=0,
                        page_size=index::DEFAULT_PAGE_SIZE, facet_limit=index::DEFAULT_FACET_LIMIT))]
    #[allow(clippy::too_many_arguments)]
    fn search<'py>(
        &self,
        py: Python<'py>,
        q: Option<String>,
        drugs: Vec<String>,
        genes: Vec<String>,
        mesh: Vec<String>,
        year_min: Option<i32>,
        year_max: Option<i32>,
        page: usize,
        page_size: usize,
        facet_limit: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let query = FacetQuery {
            text: q,
            drugs,
            genes,
            mesh,
            year_min,
            year_max,
            page,
            page_size,
            facet_limit,
        };
        let result = py
            .detach(|| self.inner.search(&query))
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        to_py(py, &result)
    }
}

/// Checks a drug and a gene vocabulary file; returns both validation reports.
#[pyfunction]
fn validate_vocabularies<'py>(py: Python<'py>, drugs: PathBuf, genes: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let d = DrugVocabulary::read_unchecked_path(&drugs).map_err(|e| err(format!("{}: {e}", drugs.display())))?;
    let g = GeneVocabulary::read_unchecked_path(&genes).map_err(|e| err(format!("{}: {e}", genes.display())))?;
    to_py(py, &serde_json::json!({ "drugs": d.validate(), "genes": g.validate() }))
}

/// Runs the ETL pipeline from a TOML configuration and returns the run report.
#[pyfunction]
#[pyo3(signature = (config, incremental=false, workers=None))]
fn run_pipeline<'py>(py: Python<'py>, config: PathBuf, incremental: bool, workers: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = PipelineConfig::load(&config).map_err(err)?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let report = py
        .detach(|| if incremental { etl::run_incremental(&cfg) } else { etl::run_full(&cfg) })
        .map_err(err)?;
    to_py(py, &report)
}

/// Re-adjudicates logged dropped candidates.
#[pyfunction]
#[pyo3(signature = (config, oracle_table=None))]
fn replay<'py>(py: Python<'py>, config: PathBuf, oracle_table: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = PipelineConfig::load(&config).map_err(err)?;
    let oracle = table_oracle(oracle_table)?;
    let report = py.detach(|| etl::replay(&cfg, oracle)).map_err(err)?;
    to_py(py, &report)
}

/// The disambiguation prompt for one candidate.
#[pyfunction]
fn render_prompt(symbol: &str, gene_name: &str, text: &str) -> PyResult<String> {
    let req = DisambiguationRequest::new(symbol, gene_name, text).map_err(PyValueError::new_err)?;
    Ok(render(&req))
}

/// Cache/table key of a disambiguation request.
#[pyfunction]
fn request_digest(symbol: &str, gene_name: &str, text: &str) -> PyResult<String> {
    let req = DisambiguationRequest::new(symbol, gene_name, text).map_err(PyValueError::new_err)?;
    Ok(req.digest())
}

#[pymodule]
pub fn medfacet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MedfacetError", m.py().get_type::<MedfacetError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Extractor>()?;
    m.add_class::<FacetIndex>()?;
    m.add_function(wrap_pyfunction!(validate_vocabularies, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(request_digest, m)?)?;
    Ok(())
}
