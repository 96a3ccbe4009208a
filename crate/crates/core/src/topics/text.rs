//! Abstract cleaning, tokenization and sentence splitting.

use std::collections::HashSet;

use serde::Serialize;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Self(HashSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub stopwords: Stopwords,
    pub stem: bool,
    pub min_len: usize,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            stopwords: Stopwords::default(),
            stem: false,
            min_len: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenizedDoc {
    pub article_id: String,
    pub tokens: Vec<String>,
    pub country: String,
}

/// Strips a handful of common English inflections. Deliberately light:
/// plural `-s`/`-es`/`-ies`, `-ing` and `-ed`.
pub fn light_stem(word: &str) -> String {
    let n = word.chars().count();
    if n > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    if word.ends_with("sses") {
        return word[..word.len() - 2].to_string();
    }
    if n > 5 && word.ends_with("ing") {
        return word[..word.len() - 3].to_string();
    }
    if n > 4 && word.ends_with("ed") {
        return word[..word.len() - 2].to_string();
    }
    if n > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

/// Lowercased alphabetic tokens with stopwords and short tokens removed.
pub fn tokenize(text: &str, options: &PreprocessOptions) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphabetic() { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .filter(|t| t.chars().count() >= options.min_len && !options.stopwords.contains(t))
        .map(|t| {
            if options.stem {
                light_stem(t)
            } else {
                t.to_string()
            }
        })
        .filter(|t| t.chars().count() >= options.min_len)
        .collect()
}

pub fn preprocess(
    article_id: &str,
    country: &str,
    text: &str,
    options: &PreprocessOptions,
) -> TokenizedDoc {
    TokenizedDoc {
        article_id: article_id.to_string(),
        tokens: tokenize(text, options),
        country: country.to_string(),
    }
}

/// Splits at `.`, `!` or `?` when followed by whitespace and then an
/// uppercase letter, or by the end of the text.
pub fn sentence_split(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            let boundary = j == chars.len() || (j > i + 1 && chars[j].1.is_uppercase());
            if boundary {
                let end = pos + c.len_utf8();
                let sentence = text[start..end].trim();
                if !sentence.is_empty() {
                    out.push(sentence.to_string());
                }
                start = end;
            }
        }
        i += 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}
