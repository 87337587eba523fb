//! Text normalisation shared by the matchers and the full-text index.

/// Case-folded text with every run of non-alphanumeric characters collapsed
/// to a single space, plus a map back to byte ranges of the source string.
#[derive(Debug, Clone)]
pub struct NormalizedText {
    pub text: String,
    /// For each byte of `text`, the byte range in the source it came from.
    origin: Vec<(usize, usize)>,
}

impl NormalizedText {
    pub fn new(source: &str) -> Self {
        let mut text = String::with_capacity(source.len());
        let mut origin = Vec::with_capacity(source.len());
        let mut gap: Option<(usize, usize)> = None;
        for (start, c) in source.char_indices() {
            let end = start + c.len_utf8();
            if c.is_alphanumeric() {
                if let Some(span) = gap.take() {
                    if !text.is_empty() {
                        text.push(' ');
                        origin.push(span);
                    }
                }
                for lc in c.to_lowercase() {
                    let before = text.len();
                    text.push(lc);
                    origin.extend(std::iter::repeat_n((start, end), text.len() - before));
                }
            } else {
                gap = Some(match gap {
                    Some((s, _)) => (s, end),
                    None => (start, end),
                });
            }
        }
        NormalizedText { text, origin }
    }

    /// True when `[start, end)` of the normalised text is bounded by spaces or
    /// string edges.
    pub fn is_whole_phrase(&self, start: usize, end: usize) -> bool {
        let bytes = self.text.as_bytes();
        (start == 0 || bytes[start - 1] == b' ') && (end == bytes.len() || bytes[end] == b' ')
    }

    /// The slice of `source` a normalised range was produced from.
    pub fn source_slice<'a>(&self, source: &'a str, start: usize, end: usize) -> &'a str {
        if start >= end {
            return "";
        }
        let s = self.origin[start].0;
        let e = self.origin[end - 1].1;
        &source[s..e]
    }
}

/// Normalised form of a vocabulary phrase; the key used for synonym lookups.
pub fn normalize_phrase(phrase: &str) -> String {
    NormalizedText::new(phrase).text
}

/// Alphanumeric runs of `text`, in order.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
}

/// Lower-cased alphanumeric tokens, used by the full-text filter.
pub fn search_terms(text: &str) -> impl Iterator<Item = String> + '_ {
    words(text).map(str::to_lowercase)
}

/// True when the occurrence `text[start..end]` is not flanked by
/// alphanumeric characters.
pub fn is_token_boundary(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
}
