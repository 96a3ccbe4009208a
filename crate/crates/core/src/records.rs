//! Corpus ingestion, author-name normalization and the per-author yearly
//! publication count matrix.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("empty name: given={given:?} surname={surname:?}")]
    EmptyName { given: String, surname: String },
    #[error("parse error at row {row}: {message}")]
    Parse { row: u64, message: String },
    #[error("missing required column `{column}`")]
    Schema { column: String },
    #[error("article {article_id} has conference {found:?}, expected {expected:?}")]
    MixedConference {
        article_id: String,
        expected: String,
        found: String,
    },
    #[error("duplicate article id {0}")]
    DuplicateArticle(String),
    #[error("article {article_id} year {year} outside {range}")]
    YearOutOfRange {
        article_id: String,
        year: i32,
        range: YearRange,
    },
    #[error("article {0} has no authors")]
    NoAuthors(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Inclusive span of publication years covered by a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub const fn new(start: i32, end: i32) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl Default for YearRange {
    fn default() -> Self {
        Self::new(2010, 2024)
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorEntry {
    pub given_names: String,
    pub surname: String,
    #[serde(default)]
    pub affiliation: String,
    #[serde(default)]
    pub country: String,
}

impl AuthorEntry {
    pub fn new(given: &str, surname: &str, affiliation: &str, country: &str) -> Self {
        Self {
            given_names: given.to_string(),
            surname: surname.to_string(),
            affiliation: affiliation.to_string(),
            country: country.to_string(),
        }
    }

    pub fn display_name(&self) -> String {
        format!("{} {}", self.given_names.trim(), self.surname.trim())
    }

    pub fn key(&self) -> Result<AuthorKey, RecordsError> {
        normalize_name(&self.given_names, &self.surname)
    }
}

/// One published paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub article_id: String,
    pub conference: String,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    pub authors: Vec<AuthorEntry>,
}

/// Normalized identity of an author: diacritic-free lowercase first and last name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AuthorKey {
    pub first: String,
    pub last: String,
}

impl fmt::Display for AuthorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.first, self.last)
    }
}

fn fold(text: &str) -> String {
    text.to_lowercase()
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .collect()
}

/// Builds the unique author key from a given-name field and a surname.
///
/// Only the first given-name token survives (middle names and initials are
/// dropped, as is trailing punctuation on that token). Whitespace inside the
/// surname becomes a hyphen so the key never contains spaces.
pub fn normalize_name(given_names: &str, surname: &str) -> Result<AuthorKey, RecordsError> {
    let empty = || RecordsError::EmptyName {
        given: given_names.to_string(),
        surname: surname.to_string(),
    };
    let given = fold(given_names);
    let first = given
        .split_whitespace()
        .next()
        .map(|tok| tok.trim_end_matches(|c: char| !c.is_alphanumeric()))
        .unwrap_or_default();
    let last = fold(surname)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("-");
    if first.is_empty() || last.is_empty() {
        return Err(empty());
    }
    Ok(AuthorKey {
        first: first.to_string(),
        last,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthorProfile {
    pub key: AuthorKey,
    /// Name as written on the most recent record.
    pub display_name: String,
    /// Every distinct affiliation string seen, sorted.
    pub affiliations: Vec<String>,
    pub latest_affiliation: String,
    pub country: String,
    pub year_counts: BTreeMap<i32, u32>,
    pub groups: BTreeSet<String>,
}

impl AuthorProfile {
    pub fn total_publications(&self) -> u64 {
        self.year_counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn count(&self, year: i32) -> u32 {
        self.year_counts.get(&year).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DedupStats {
    pub raw_name_rows: usize,
    pub merged_rows: usize,
    pub duplicate_fraction: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusOptions {
    pub years: YearRange,
    /// Report keys whose records span more than one country.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub conference: String,
    pub years: YearRange,
    /// Sorted by article id.
    pub articles: Vec<ArticleRecord>,
    pub authors: BTreeMap<AuthorKey, AuthorProfile>,
    pub article_authors: BTreeMap<String, BTreeSet<AuthorKey>>,
    pub dedup_stats: DedupStats,
    /// Populated only in strict mode.
    pub collisions: BTreeMap<AuthorKey, BTreeSet<String>>,
}

impl Corpus {
    pub fn article(&self, id: &str) -> Option<&ArticleRecord> {
        self.articles
            .binary_search_by(|a| a.article_id.as_str().cmp(id))
            .ok()
            .map(|i| &self.articles[i])
    }

    pub fn author_count(&self) -> usize {
        self.authors.len()
    }
}

struct Accum {
    articles: BTreeSet<(i32, String)>,
    affiliations: BTreeSet<String>,
    countries: BTreeSet<String>,
    latest: (i32, String),
    entry: AuthorEntry,
}

/// Merges the authors of one conference's articles by normalized key and
/// tallies distinct articles per author per year.
pub fn build_corpus(
    articles: Vec<ArticleRecord>,
    conference: &str,
    options: &CorpusOptions,
) -> Result<Corpus, RecordsError> {
    let mut articles = articles;
    articles.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    for pair in articles.windows(2) {
        if pair[0].article_id == pair[1].article_id {
            return Err(RecordsError::DuplicateArticle(pair[0].article_id.clone()));
        }
    }

    let mut accum: BTreeMap<AuthorKey, Accum> = BTreeMap::new();
    let mut article_authors = BTreeMap::new();
    let mut name_rows: BTreeSet<(String, String)> = BTreeSet::new();

    for article in &articles {
        if article.conference != conference {
            return Err(RecordsError::MixedConference {
                article_id: article.article_id.clone(),
                expected: conference.to_string(),
                found: article.conference.clone(),
            });
        }
        if !options.years.contains(article.year) {
            return Err(RecordsError::YearOutOfRange {
                article_id: article.article_id.clone(),
                year: article.year,
                range: options.years,
            });
        }
        if article.authors.is_empty() {
            return Err(RecordsError::NoAuthors(article.article_id.clone()));
        }
        let stamp = (article.year, article.article_id.clone());
        let mut keys = BTreeSet::new();
        for entry in &article.authors {
            let key = entry.key()?;
            name_rows.insert((entry.display_name(), entry.affiliation.trim().to_string()));
            let first_in_article = keys.insert(key.clone());
            let acc = accum.entry(key).or_insert_with(|| Accum {
                articles: BTreeSet::new(),
                affiliations: BTreeSet::new(),
                countries: BTreeSet::new(),
                latest: stamp.clone(),
                entry: entry.clone(),
            });
            acc.articles.insert(stamp.clone());
            if !entry.affiliation.trim().is_empty() {
                acc.affiliations
                    .insert(entry.affiliation.trim().to_string());
            }
            if !entry.country.trim().is_empty() {
                acc.countries.insert(entry.country.trim().to_string());
            }
            if first_in_article && stamp > acc.latest {
                acc.latest = stamp.clone();
                acc.entry = entry.clone();
            }
        }
        article_authors.insert(article.article_id.clone(), keys);
    }

    let mut collisions = BTreeMap::new();
    let authors: BTreeMap<AuthorKey, AuthorProfile> = accum
        .into_iter()
        .map(|(key, acc)| {
            if options.strict && acc.countries.len() > 1 {
                collisions.insert(key.clone(), acc.countries.clone());
            }
            let mut year_counts: BTreeMap<i32, u32> =
                options.years.years().map(|y| (y, 0)).collect();
            for (year, _) in &acc.articles {
                *year_counts.entry(*year).or_insert(0) += 1;
            }
            let profile = AuthorProfile {
                key: key.clone(),
                display_name: acc.entry.display_name(),
                affiliations: acc.affiliations.into_iter().collect(),
                latest_affiliation: acc.entry.affiliation.trim().to_string(),
                country: acc.entry.country.trim().to_string(),
                year_counts,
                groups: BTreeSet::new(),
            };
            (key, profile)
        })
        .collect();

    let raw_name_rows = name_rows.len();
    let merged_rows = raw_name_rows - authors.len();
    let duplicate_fraction = if raw_name_rows > 0 {
        merged_rows as f64 / raw_name_rows as f64
    } else {
        0.0
    };

    Ok(Corpus {
        conference: conference.to_string(),
        years: options.years,
        articles,
        authors,
        article_authors,
        dedup_stats: DedupStats {
            raw_name_rows,
            merged_rows,
            duplicate_fraction,
        },
        collisions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub row: u64,
    pub article_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub articles: Vec<ArticleRecord>,
    pub warnings: Vec<IngestWarning>,
}

pub const CSV_COLUMNS: [&str; 9] = [
    "article_id",
    "conference",
    "year",
    "title",
    "abstract",
    "author_given",
    "author_surname",
    "affiliation",
    "country",
];

pub fn ingest_articles(
    path: &Path,
    format: InputFormat,
    years: YearRange,
) -> Result<Ingested, RecordsError> {
    let file = File::open(path)?;
    match format {
        InputFormat::Csv => ingest_csv(file, years),
        InputFormat::Json => ingest_json(file, years),
    }
}

fn parse_year(raw: &str, row: u64) -> Result<i32, RecordsError> {
    raw.trim().parse::<i32>().map_err(|_| RecordsError::Parse {
        row,
        message: format!("invalid year {raw:?}"),
    })
}

fn check_names(entry: &AuthorEntry, row: u64) -> Result<(), RecordsError> {
    entry.key().map(|_| ()).map_err(|e| RecordsError::Parse {
        row,
        message: e.to_string(),
    })
}

/// Reads the one-row-per-(article, author) CSV export.
pub fn ingest_csv<R: Read>(reader: R, years: YearRange) -> Result<Ingested, RecordsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| RecordsError::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut idx = [0usize; CSV_COLUMNS.len()];
    for (slot, column) in idx.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == column)
            .ok_or_else(|| RecordsError::Schema {
                column: column.to_string(),
            })?;
    }

    let mut out = Ingested::default();
    let mut index: HashMap<String, Option<usize>> = HashMap::new();
    for result in rdr.records() {
        let record = result.map_err(|e| RecordsError::Parse {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(idx[i]).unwrap_or("").to_string();
        let article_id = field(0).trim().to_string();
        if article_id.is_empty() {
            return Err(RecordsError::Parse {
                row,
                message: "empty article_id".into(),
            });
        }
        let year = parse_year(&field(2), row)?;
        let author = AuthorEntry {
            given_names: field(5),
            surname: field(6),
            affiliation: field(7).trim().to_string(),
            country: field(8).trim().to_string(),
        };
        check_names(&author, row)?;

        match index.get(&article_id) {
            Some(None) => continue,
            Some(Some(pos)) => {
                let article: &mut ArticleRecord = &mut out.articles[*pos];
                if article.year != year || article.conference != field(1).trim() {
                    return Err(RecordsError::Parse {
                        row,
                        message: format!("conflicting article fields for {article_id}"),
                    });
                }
                article.authors.push(author);
            }
            None => {
                if !years.contains(year) {
                    out.warnings.push(IngestWarning {
                        row,
                        article_id: article_id.clone(),
                        message: format!("year {year} outside {years}; article skipped"),
                    });
                    index.insert(article_id, None);
                    continue;
                }
                index.insert(article_id.clone(), Some(out.articles.len()));
                out.articles.push(ArticleRecord {
                    article_id,
                    conference: field(1).trim().to_string(),
                    year,
                    title: field(3),
                    abstract_text: field(4),
                    authors: vec![author],
                });
            }
        }
    }
    Ok(out)
}

const JSON_FIELDS: [&str; 5] = ["article_id", "conference", "year", "title", "authors"];
const JSON_AUTHOR_FIELDS: [&str; 2] = ["given_names", "surname"];

/// Reads a JSON array of article objects, each carrying an `authors` array.
pub fn ingest_json<R: Read>(reader: R, years: YearRange) -> Result<Ingested, RecordsError> {
    let value: Value = serde_json::from_reader(reader).map_err(|e| RecordsError::Parse {
        row: e.line() as u64,
        message: e.to_string(),
    })?;
    let items = value.as_array().ok_or_else(|| RecordsError::Parse {
        row: 1,
        message: "expected a JSON array of articles".into(),
    })?;

    let mut out = Ingested::default();
    let mut seen = BTreeSet::new();
    for (i, item) in items.iter().enumerate() {
        let row = i as u64 + 1;
        let obj = item.as_object().ok_or_else(|| RecordsError::Parse {
            row,
            message: "article is not an object".into(),
        })?;
        for column in JSON_FIELDS {
            if !obj.contains_key(column) {
                return Err(RecordsError::Schema {
                    column: column.to_string(),
                });
            }
        }
        let text = |key: &str| match obj.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(Value::Null) | None => Ok(String::new()),
            Some(other) => Err(RecordsError::Parse {
                row,
                message: format!("field `{key}` must be a string, got {other}"),
            }),
        };
        let year = match &obj["year"] {
            Value::Number(n) => {
                n.as_i64()
                    .and_then(|y| i32::try_from(y).ok())
                    .ok_or_else(|| RecordsError::Parse {
                        row,
                        message: format!("invalid year {n}"),
                    })?
            }
            Value::String(s) => parse_year(s, row)?,
            other => {
                return Err(RecordsError::Parse {
                    row,
                    message: format!("invalid year {other}"),
                })
            }
        };
        let article_id = text("article_id")?.trim().to_string();
        if !seen.insert(article_id.clone()) {
            return Err(RecordsError::Parse {
                row,
                message: format!("duplicate article id {article_id}"),
            });
        }
        let raw_authors = obj["authors"]
            .as_array()
            .ok_or_else(|| RecordsError::Parse {
                row,
                message: "`authors` must be an array".into(),
            })?;
        let mut authors = Vec::with_capacity(raw_authors.len());
        for a in raw_authors {
            if let Some(map) = a.as_object() {
                for column in JSON_AUTHOR_FIELDS {
                    if !map.contains_key(column) {
                        return Err(RecordsError::Schema {
                            column: format!("authors.{column}"),
                        });
                    }
                }
            }
            let entry: AuthorEntry =
                serde_json::from_value(a.clone()).map_err(|e| RecordsError::Parse {
                    row,
                    message: e.to_string(),
                })?;
            check_names(&entry, row)?;
            authors.push(entry);
        }
        if authors.is_empty() {
            return Err(RecordsError::Parse {
                row,
                message: format!("article {article_id} has no authors"),
            });
        }
        if !years.contains(year) {
            out.warnings.push(IngestWarning {
                row,
                article_id,
                message: format!("year {year} outside {years}; article skipped"),
            });
            continue;
        }
        out.articles.push(ArticleRecord {
            article_id,
            conference: text("conference")?.trim().to_string(),
            year,
            title: text("title")?,
            abstract_text: text("abstract")?,
            authors,
        });
    }
    Ok(out)
}
