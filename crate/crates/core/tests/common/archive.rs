//! On-disk batch archives and pipeline configurations for end-to-end tests.

use std::fs;
use std::path::{Path, PathBuf};

use md5::{Digest, Md5};
use medfacet_core::pipeline::PipelineConfig;
use tempfile::TempDir;

use super::xml::{batch, gzip, Citation};

pub struct Workspace {
    pub dir: TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        let ws = Workspace {
            dir: tempfile::tempdir().unwrap(),
        };
        fs::create_dir_all(ws.archive()).unwrap();
        ws
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    pub fn archive(&self) -> PathBuf {
        self.root().join("archive")
    }

    /// Writes `<name>` gzip-compressed together with an NLM-style md5 sidecar.
    pub fn put(&self, name: &str, xml: &str) {
        let gz = gzip(xml.as_bytes());
        let digest = hex::encode(Md5::digest(&gz));
        fs::write(self.archive().join(name), &gz).unwrap();
        fs::write(
            self.archive().join(format!("{name}.md5")),
            format!("MD5({name})= {digest}\n"),
        )
        .unwrap();
    }

    pub fn put_batch(&self, name: &str, citations: &[Citation], deletes: &[u64]) {
        self.put(name, &batch(citations, deletes));
    }

    /// Pipeline configuration with state under `<root>/<state>`.
    pub fn config_in(&self, state: &str, workers: usize) -> PipelineConfig {
        let data = super::data_dir();
        let state = self.root().join(state);
        let mut cfg = PipelineConfig::new(
            self.archive().to_string_lossy(),
            data.join("vocab/drugs.tsv"),
            data.join("vocab/genes.tsv"),
            state.join("checkpoint.json"),
            state.join("index"),
        );
        cfg.workers = workers;
        cfg.queue_capacity = 4;
        cfg.retry.initial_backoff_ms = 1;
        cfg
    }

    pub fn config(&self, workers: usize) -> PipelineConfig {
        self.config_in("state", workers)
    }
}

pub fn batch_name(i: usize) -> String {
    format!("pubmed26n{i:04}.xml.gz")
}

const TEXTS: &[(&str, &str)] = &[
    (
        "Metformin in GNAQ-mutant uveal melanoma",
        "Metformin hydrochloride reduced growth of GNAQ mutation positive cells; BAP1 loss was frequent.",
    ),
    (
        "Coronary artery disease (CAD) outcomes with aspirin",
        "Patients with CAD received aspirin or rivaroxaban.",
    ),
    (
        "CAD gene expression and pyrimidine synthesis",
        "CAD is a gene regulating pyrimidine synthesis; celecoxib lowered CAD mRNA levels.",
    ),
    (
        "VHL disease registry",
        "Articles were retrieved from the VHL. Sirolimus and propranolol were discussed.",
    ),
    (
        "Germline VHL mutations",
        "We sequenced DNMT3A and VHL in 40 patients treated with vorinostat.",
    ),
    (
        "Melatonin and caffeine in Parkinson disease",
        "LRRK2 and SNCA carriers; levodopa (L-dopa) with melatonin.",
    ),
    (
        "Trametinib plus selumetinib",
        "MEK inhibition with trametinib in NRAS mutant melanoma; MET amplification was noted.",
    ),
    ("Quiet abstract", "No drugs or genes here."),
];

/// A deterministic citation whose text cycles through [`TEXTS`].
pub fn citation(pmid: u64, variant: usize) -> Citation {
    let (t, a) = TEXTS[variant % TEXTS.len()];
    let mut c = Citation::new(pmid)
        .title(t)
        .abstract_text(a)
        .year(2000 + (pmid % 25) as i32);
    if pmid.is_multiple_of(3) {
        c.mesh = vec!["D000075924".into()];
    }
    if pmid.is_multiple_of(4) {
        c.chemicals = vec![("D008687".into(), "9100L32L2N".into())];
    }
    c
}

/// Five batches with revisions, deletes (one of an unknown PMID) and a
/// PMID repeated inside one batch.
pub fn five_batches() -> Vec<(String, Vec<Citation>, Vec<u64>)> {
    let b = |range: std::ops::Range<u64>, shift: usize| -> Vec<Citation> {
        range.map(|p| citation(p, p as usize + shift)).collect()
    };
    let mut b2 = b(201..206, 0);
    b2.push(citation(103, 5));
    let mut b4 = b(401..406, 1);
    b4.push(citation(201, 2));
    let mut b5 = b(501..504, 3);
    b5.push(citation(501, 4));
    vec![
        (batch_name(1), b(101..107, 0), vec![]),
        (batch_name(2), b2, vec![]),
        (batch_name(3), b(301..305, 2), vec![102]),
        (batch_name(4), b4, vec![999]),
        (batch_name(5), b5, vec![301]),
    ]
}

pub fn write_five(ws: &Workspace) {
    for (name, cs, del) in five_batches() {
        ws.put_batch(&name, &cs, &del);
    }
}
