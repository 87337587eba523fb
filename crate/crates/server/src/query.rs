//! Query-string decoding for `/api/search`.

use medfacet_core::index::FacetQuery;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("parameter {name}: {value:?} is not a valid {expected}")]
    Invalid {
        name: String,
        value: String,
        expected: &'static str,
    },
    #[error("parameter {0} may be given only once")]
    Repeated(String),
    #[error("unknown parameter {0}")]
    Unknown(String),
    #[error("{0}")]
    Query(#[from] medfacet_core::index::QueryError),
}

impl ParamError {
    pub fn code(&self) -> &'static str {
        match self {
            ParamError::Invalid { .. } | ParamError::Repeated(_) => "bad_parameter",
            ParamError::Unknown(_) => "unknown_parameter",
            ParamError::Query(_) => "invalid_query",
        }
    }
}

fn number<T: std::str::FromStr>(name: &str, value: &str, expected: &'static str) -> Result<T, ParamError> {
    value.trim().parse().map_err(|_| ParamError::Invalid {
        name: name.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn once<T>(slot: &mut Option<T>, name: &str, value: T) -> Result<(), ParamError> {
    if slot.replace(value).is_some() {
        return Err(ParamError::Repeated(name.to_string()));
    }
    Ok(())
}

/// Maps `q`, repeatable `drug`/`gene`/`mesh`, `year_min`, `year_max`, `page`,
/// `page_size` and `facet_limit` onto a validated [`FacetQuery`]. Empty
/// filter values are ignored.
pub fn parse_search_query(raw: &str) -> Result<FacetQuery, ParamError> {
    let mut q = FacetQuery::default();
    let (mut text, mut year_min, mut year_max) = (None, None, None);
    let (mut page, mut page_size, mut facet_limit) = (None, None, None);
    for (k, v) in form_urlencoded::parse(raw.as_bytes()) {
        let v = v.into_owned();
        match k.as_ref() {
            "q" => once(&mut text, "q", v)?,
            "drug" | "gene" | "mesh" if v.trim().is_empty() => {}
            "drug" => q.drugs.push(v),
            "gene" => q.genes.push(v),
            "mesh" => q.mesh.push(v),
            "year_min" => once(&mut year_min, "year_min", number(&k, &v, "year")?)?,
            "year_max" => once(&mut year_max, "year_max", number(&k, &v, "year")?)?,
            "page" => once(&mut page, "page", number(&k, &v, "page number")?)?,
            "page_size" => once(&mut page_size, "page_size", number(&k, &v, "page size")?)?,
            "facet_limit" => once(&mut facet_limit, "facet_limit", number(&k, &v, "facet limit")?)?,
            other => return Err(ParamError::Unknown(other.to_string())),
        }
    }
    q.text = text.filter(|t| !t.trim().is_empty());
    q.year_min = year_min;
    q.year_max = year_max;
    if let Some(p) = page {
        q.page = p;
    }
    if let Some(s) = page_size {
        q.page_size = s;
    }
    if let Some(l) = facet_limit {
        q.facet_limit = l;
    }
    q.validate()?;
    Ok(q)
}
