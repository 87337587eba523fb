//! Builds PubMed-style XML batches for tests.

use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;

#[derive(Debug, Clone, Default)]
pub struct Citation {
    pub pmid: u64,
    pub title: String,
    pub abstract_sections: Vec<String>,
    pub journal_year: Option<String>,
    pub medline_date: Option<String>,
    pub article_year: Option<String>,
    pub completed_year: Option<String>,
    /// Descriptor UIs of MeshHeadingList.
    pub mesh: Vec<String>,
    /// (substance UI, registry number) pairs of ChemicalList.
    pub chemicals: Vec<(String, String)>,
    pub keywords: Vec<String>,
    pub gene_symbols: Vec<String>,
    pub journal: String,
    pub authors: Vec<(String, String)>,
    pub revised: Option<(u32, u32, u32)>,
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Citation {
    pub fn new(pmid: u64) -> Self {
        Citation {
            pmid,
            title: format!("Article {pmid}"),
            journal: "Test Journal".into(),
            ..Default::default()
        }
    }

    pub fn year(mut self, y: i32) -> Self {
        self.journal_year = Some(y.to_string());
        self
    }

    pub fn title(mut self, t: &str) -> Self {
        self.title = t.into();
        self
    }

    pub fn abstract_text(mut self, t: &str) -> Self {
        self.abstract_sections = vec![t.into()];
        self
    }

    pub fn to_xml(&self) -> String {
        let mut x = String::new();
        x.push_str("<PubmedArticle>\n<MedlineCitation Status=\"MEDLINE\" Owner=\"NLM\">\n");
        x.push_str(&format!("<PMID Version=\"1\">{}</PMID>\n", self.pmid));
        if let Some(y) = &self.completed_year {
            x.push_str(&format!("<DateCompleted><Year>{y}</Year><Month>01</Month><Day>02</Day></DateCompleted>\n"));
        }
        if let Some((y, m, d)) = self.revised {
            x.push_str(&format!(
                "<DateRevised><Year>{y:04}</Year><Month>{m:02}</Month><Day>{d:02}</Day></DateRevised>\n"
            ));
        }
        x.push_str("<Article PubModel=\"Print\">\n<Journal>\n<JournalIssue CitedMedium=\"Print\">\n<PubDate>");
        if let Some(y) = &self.journal_year {
            x.push_str(&format!("<Year>{y}</Year><Month>Mar</Month>"));
        }
        if let Some(md) = &self.medline_date {
            x.push_str(&format!("<MedlineDate>{}</MedlineDate>", escape(md)));
        }
        x.push_str("</PubDate>\n</JournalIssue>\n");
        x.push_str(&format!("<Title>{}</Title>\n</Journal>\n", escape(&self.journal)));
        x.push_str(&format!("<ArticleTitle>{}</ArticleTitle>\n", escape(&self.title)));
        if !self.abstract_sections.is_empty() {
            x.push_str("<Abstract>\n");
            for s in &self.abstract_sections {
                x.push_str(&format!("<AbstractText>{}</AbstractText>\n", escape(s)));
            }
            x.push_str("</Abstract>\n");
        }
        if !self.authors.is_empty() {
            x.push_str("<AuthorList CompleteYN=\"Y\">\n");
            for (last, fore) in &self.authors {
                x.push_str(&format!(
                    "<Author ValidYN=\"Y\"><LastName>{}</LastName><ForeName>{}</ForeName></Author>\n",
                    escape(last),
                    escape(fore)
                ));
            }
            x.push_str("</AuthorList>\n");
        }
        if let Some(y) = &self.article_year {
            x.push_str(&format!(
                "<ArticleDate DateType=\"Electronic\"><Year>{y}</Year><Month>05</Month><Day>06</Day></ArticleDate>\n"
            ));
        }
        x.push_str("</Article>\n");
        if !self.chemicals.is_empty() {
            x.push_str("<ChemicalList>\n");
            for (ui, rn) in &self.chemicals {
                x.push_str(&format!(
                    "<Chemical><RegistryNumber>{}</RegistryNumber><NameOfSubstance UI=\"{}\">substance</NameOfSubstance></Chemical>\n",
                    escape(rn),
                    escape(ui)
                ));
            }
            x.push_str("</ChemicalList>\n");
        }
        if !self.gene_symbols.is_empty() {
            x.push_str("<GeneSymbolList>\n");
            for g in &self.gene_symbols {
                x.push_str(&format!("<GeneSymbol>{}</GeneSymbol>\n", escape(g)));
            }
            x.push_str("</GeneSymbolList>\n");
        }
        if !self.mesh.is_empty() {
            x.push_str("<MeshHeadingList>\n");
            for ui in &self.mesh {
                x.push_str(&format!(
                    "<MeshHeading><DescriptorName UI=\"{}\" MajorTopicYN=\"N\">heading</DescriptorName></MeshHeading>\n",
                    escape(ui)
                ));
            }
            x.push_str("</MeshHeadingList>\n");
        }
        if !self.keywords.is_empty() {
            x.push_str("<KeywordList Owner=\"NOTNLM\">\n");
            for k in &self.keywords {
                x.push_str(&format!("<Keyword MajorTopicYN=\"N\">{}</Keyword>\n", escape(k)));
            }
            x.push_str("</KeywordList>\n");
        }
        x.push_str("</MedlineCitation>\n<PubmedData><ArticleIdList>");
        x.push_str(&format!("<ArticleId IdType=\"pubmed\">{}</ArticleId>", self.pmid));
        x.push_str("</ArticleIdList></PubmedData>\n</PubmedArticle>\n");
        x
    }
}

/// A batch document from pre-rendered citation elements.
pub fn batch_from_elements(elements: &[String], deletes: &[u64]) -> String {
    let mut x = String::from(
        "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<!DOCTYPE PubmedArticleSet PUBLIC \"-//NLM//DTD PubMedArticle, 1st January 2025//EN\" \"https://dtd.nlm.nih.gov/ncbi/pubmed/out/pubmed_250101.dtd\">\n<PubmedArticleSet>\n",
    );
    for e in elements {
        x.push_str(e);
    }
    if !deletes.is_empty() {
        x.push_str("<DeleteCitation>\n");
        for p in deletes {
            x.push_str(&format!("<PMID Version=\"1\">{p}</PMID>\n"));
        }
        x.push_str("</DeleteCitation>\n");
    }
    x.push_str("</PubmedArticleSet>\n");
    x
}

pub fn batch(citations: &[Citation], deletes: &[u64]) -> String {
    let elements: Vec<String> = citations.iter().map(Citation::to_xml).collect();
    batch_from_elements(&elements, deletes)
}

pub fn gzip(bytes: &[u8]) -> Vec<u8> {
    let mut enc = GzEncoder::new(Vec::new(), Compression::fast());
    enc.write_all(bytes).unwrap();
    enc.finish().unwrap()
}
