//! Duplicate-publication scanning: articles sharing an author set (in any
//! order) whose titles or abstracts embed close together.
//!
//! The scan only flags pairs for human review; every candidate is reported
//! with its raw scores whether flagged or not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::records::{ArticleRecord, AuthorKey, Corpus};
use crate::topics::{cosine, embed_all, paragraph_embeddings, EmbeddingProvider, ProviderError};

#[derive(Debug, Error)]
pub enum DupError {
    #[error("author Jaccard threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("article {0} has an empty title")]
    EmptyTitle(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DupThresholds {
    pub title: f64,
    pub abstract_text: f64,
}

impl Default for DupThresholds {
    fn default() -> Self {
        Self {
            title: 0.85,
            abstract_text: 0.85,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AuthorRelation {
    Identical,
    Jaccard(f64),
}

impl AuthorRelation {
    fn from_sets(a: &BTreeSet<AuthorKey>, b: &BTreeSet<AuthorKey>) -> Self {
        if a == b {
            AuthorRelation::Identical
        } else {
            AuthorRelation::Jaccard(jaccard(a, b))
        }
    }
}

impl fmt::Display for AuthorRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuthorRelation::Identical => f.write_str("identical"),
            AuthorRelation::Jaccard(j) => write!(f, "jaccard:{j:.4}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DupCandidate {
    /// Lexically smaller id of the pair.
    pub article_a: String,
    pub article_b: String,
    pub author_relation: AuthorRelation,
    pub title_similarity: f64,
    /// `None` when either abstract is missing.
    pub abstract_similarity: Option<f64>,
    pub flagged: bool,
}

impl DupCandidate {
    pub fn max_similarity(&self) -> f64 {
        self.abstract_similarity
            .map_or(self.title_similarity, |a| a.max(self.title_similarity))
    }
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    inter as f64 / union as f64
}

/// Unordered article pairs whose author-key sets have Jaccard similarity of
/// at least `min_author_jaccard`, as `(smaller id, larger id)` in sorted order.
pub fn candidate_pairs(
    corpus: &Corpus,
    min_author_jaccard: f64,
) -> Result<Vec<(String, String)>, DupError> {
    if !(min_author_jaccard > 0.0 && min_author_jaccard <= 1.0) {
        return Err(DupError::InvalidThreshold(min_author_jaccard));
    }
    let mut by_author: BTreeMap<&AuthorKey, Vec<&str>> = BTreeMap::new();
    for (id, keys) in &corpus.article_authors {
        for k in keys {
            by_author.entry(k).or_default().push(id);
        }
    }
    let mut pairs = BTreeSet::new();
    for (id, keys) in &corpus.article_authors {
        let mut seen = BTreeSet::new();
        for k in keys {
            for &other in &by_author[k] {
                if other > id.as_str() && seen.insert(other) {
                    let j = jaccard(keys, &corpus.article_authors[other]);
                    if j >= min_author_jaccard {
                        pairs.insert((id.clone(), other.to_string()));
                    }
                }
            }
        }
    }
    Ok(pairs.into_iter().collect())
}

struct Embedded {
    title: Vec<f64>,
    paragraph: Option<Vec<f64>>,
}

fn embed_articles<P: EmbeddingProvider + ?Sized>(
    articles: &[&ArticleRecord],
    provider: &P,
) -> Result<Vec<Embedded>, ProviderError> {
    let titles: Vec<String> = articles
        .iter()
        .map(|a| a.title.trim().to_string())
        .collect();
    let title_vecs = embed_all(provider, &titles)?;
    let abstracts: Vec<&str> = articles.iter().map(|a| a.abstract_text.as_str()).collect();
    let paragraphs = paragraph_embeddings(&abstracts, provider)?;
    Ok(title_vecs
        .into_iter()
        .zip(paragraphs)
        .map(|(title, paragraph)| Embedded { title, paragraph })
        .collect())
}

fn score(
    a: &ArticleRecord,
    b: &ArticleRecord,
    relation: AuthorRelation,
    ea: &Embedded,
    eb: &Embedded,
    thresholds: &DupThresholds,
) -> DupCandidate {
    let (a, b, ea, eb) = if a.article_id <= b.article_id {
        (a, b, ea, eb)
    } else {
        (b, a, eb, ea)
    };
    let title_similarity = cosine(&ea.title, &eb.title).unwrap_or(0.0);
    let abstract_similarity = match (&ea.paragraph, &eb.paragraph) {
        (Some(x), Some(y)) => cosine(x, y),
        _ => None,
    };
    let flagged = title_similarity >= thresholds.title
        || abstract_similarity.is_some_and(|s| s >= thresholds.abstract_text);
    DupCandidate {
        article_a: a.article_id.clone(),
        article_b: b.article_id.clone(),
        author_relation: relation,
        title_similarity,
        abstract_similarity,
        flagged,
    }
}

/// Scores one pair: cosine of whole-title embeddings and of paragraph
/// (mean-of-sentences) abstract embeddings.
pub fn score_pair<P: EmbeddingProvider + ?Sized>(
    a: &ArticleRecord,
    b: &ArticleRecord,
    provider: &P,
    thresholds: &DupThresholds,
) -> Result<DupCandidate, DupError> {
    for art in [a, b] {
        if art.title.trim().is_empty() {
            return Err(DupError::EmptyTitle(art.article_id.clone()));
        }
    }
    let keys = |art: &ArticleRecord| -> BTreeSet<AuthorKey> {
        art.authors.iter().filter_map(|e| e.key().ok()).collect()
    };
    let relation = AuthorRelation::from_sets(&keys(a), &keys(b));
    let emb = embed_articles(&[a, b], provider)?;
    Ok(score(a, b, relation, &emb[0], &emb[1], thresholds))
}

/// Every candidate pair scored, highest similarity first (ties by ids).
pub fn dup_report<P: EmbeddingProvider + ?Sized>(
    corpus: &Corpus,
    provider: &P,
    thresholds: &DupThresholds,
    min_author_jaccard: f64,
) -> Result<Vec<DupCandidate>, DupError> {
    let pairs = candidate_pairs(corpus, min_author_jaccard)?;
    let ids: BTreeSet<&str> = pairs
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    let articles: Vec<&ArticleRecord> = ids
        .iter()
        .map(|id| corpus.article(id).expect("pair ids come from the corpus"))
        .collect();
    let embedded = embed_articles(&articles, provider)?;
    let slot: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut out: Vec<DupCandidate> = pairs
        .iter()
        .map(|(a, b)| {
            let (ia, ib) = (slot[a.as_str()], slot[b.as_str()]);
            let relation =
                AuthorRelation::from_sets(&corpus.article_authors[a], &corpus.article_authors[b]);
            score(
                articles[ia],
                articles[ib],
                relation,
                &embedded[ia],
                &embedded[ib],
                thresholds,
            )
        })
        .collect();
    out.sort_by(|x, y| {
        y.max_similarity()
            .total_cmp(&x.max_similarity())
            .then_with(|| x.article_a.cmp(&y.article_a))
            .then_with(|| x.article_b.cmp(&y.article_b))
    });
    Ok(out)
}

pub const REPORT_HEADER: [&str; 6] = [
    "article_a",
    "article_b",
    "author_relation",
    "title_sim",
    "abstract_sim",
    "flagged",
];

/// CSV rows (without header) in report order; similarities at 4 decimals.
pub fn report_rows(candidates: &[DupCandidate]) -> Vec<[String; 6]> {
    candidates
        .iter()
        .map(|c| {
            [
                c.article_a.clone(),
                c.article_b.clone(),
                c.author_relation.to_string(),
                format!("{:.4}", c.title_similarity),
                c.abstract_similarity
                    .map_or(String::new(), |s| format!("{s:.4}")),
                c.flagged.to_string(),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{build_corpus, AuthorEntry, CorpusOptions};
    use crate::topics::StubEmbedder;

    fn art(id: &str, title: &str, abs: &str, authors: &[&str]) -> ArticleRecord {
        ArticleRecord {
            article_id: id.into(),
            conference: "HRI".into(),
            year: 2023,
            title: title.into(),
            abstract_text: abs.into(),
            authors: authors
                .iter()
                .map(|n| AuthorEntry::new(n, "Z", "", "China"))
                .collect(),
        }
    }

    fn corpus(arts: Vec<ArticleRecord>) -> Corpus {
        build_corpus(arts, "HRI", &CorpusOptions::default()).unwrap()
    }

    #[test]
    fn shuffled_authors_are_candidates() {
        let c = corpus(vec![
            art("p1", "t", "", &["A", "B", "C"]),
            art("p2", "t", "", &["C", "B", "A"]),
            art("p3", "t", "", &["A", "D"]),
        ]);
        assert_eq!(
            candidate_pairs(&c, 1.0).unwrap(),
            vec![("p1".to_string(), "p2".to_string())]
        );
    }

    #[test]
    fn partial_overlap_needs_relaxed_threshold() {
        let c = corpus(vec![
            art("p1", "t", "", &["A", "B"]),
            art("p2", "t", "", &["A", "C"]),
        ]);
        assert!(candidate_pairs(&c, 1.0).unwrap().is_empty());
        assert_eq!(candidate_pairs(&c, 0.3).unwrap().len(), 1);
        assert!(candidate_pairs(&c, 0.0).is_err());
        assert!(candidate_pairs(&c, 1.5).is_err());
    }

    #[test]
    fn no_shared_sets_no_pairs() {
        let c = corpus(vec![art("p1", "t", "", &["A"]), art("p2", "t", "", &["B"])]);
        assert!(candidate_pairs(&c, 1.0).unwrap().is_empty());
    }

    #[test]
    fn identical_pair_scores_one() {
        let s = StubEmbedder::default();
        let a = art(
            "x2",
            "Pillow robot for sleep",
            "Robots pat. Children sleep.",
            &["A", "B"],
        );
        let b = art(
            "x1",
            "Pillow robot for sleep",
            "Robots pat. Children sleep.",
            &["B", "A"],
        );
        let c = score_pair(&a, &b, &s, &DupThresholds::default()).unwrap();
        assert_eq!(c.article_a, "x1");
        assert_eq!(c.author_relation, AuthorRelation::Identical);
        assert!((c.title_similarity - 1.0).abs() < 1e-12);
        assert!((c.abstract_similarity.unwrap() - 1.0).abs() < 1e-12);
        assert!(c.flagged);
    }

    #[test]
    fn unrelated_pair_not_flagged() {
        let s = StubEmbedder::default();
        let a = art(
            "x1",
            "Quantum lattice spectroscopy",
            "Photons scatter inside crystals.",
            &["A"],
        );
        let b = art(
            "x2",
            "Bedtime lullaby companions",
            "Toddlers enjoy gentle songs.",
            &["A"],
        );
        let c = score_pair(&a, &b, &s, &DupThresholds::default()).unwrap();
        assert!(c.title_similarity.abs() < 0.3);
        assert!(c.abstract_similarity.unwrap().abs() < 0.3);
        assert!(!c.flagged);
        let swapped = score_pair(&b, &a, &s, &DupThresholds::default()).unwrap();
        assert_eq!(c, swapped);
    }

    #[test]
    fn missing_abstract_is_title_only() {
        let s = StubEmbedder::default();
        let a = art("x1", "Same title here", "", &["A"]);
        let b = art("x2", "Same title here", "Something.", &["A"]);
        let c = score_pair(&a, &b, &s, &DupThresholds::default()).unwrap();
        assert!(c.abstract_similarity.is_none());
        assert!(c.flagged);
        let empty = art("x3", "  ", "", &["A"]);
        assert!(matches!(
            score_pair(&a, &empty, &s, &DupThresholds::default()),
            Err(DupError::EmptyTitle(_))
        ));
    }

    #[test]
    fn report_orders_by_score() {
        let s = StubEmbedder::default();
        let c = corpus(vec![
            art(
                "a1",
                "Pillow robot sings child to sleep",
                "The robot pats. The child sleeps.",
                &["A", "B"],
            ),
            art(
                "a2",
                "Pillow robot sings child to sleep",
                "The robot pats. The child sleeps.",
                &["B", "A"],
            ),
            art(
                "b1",
                "Whale pet robot reminds asthmatic children medication",
                "Asthma adherence is low.",
                &["C", "D"],
            ),
            art(
                "b2",
                "Whale pet robot reminds asthmatic children medication daily",
                "Asthma adherence is low.",
                &["D", "C"],
            ),
        ]);
        let rep = dup_report(&c, &s, &DupThresholds::default(), 1.0).unwrap();
        assert_eq!(rep.len(), 2);
        assert_eq!(rep[0].article_a, "a1");
        assert!(rep.iter().all(|r| r.flagged));
        assert!(rep[0].max_similarity() >= rep[1].max_similarity());
        let rows = report_rows(&rep);
        assert_eq!(rows[0][2], "identical");
        assert_eq!(rows[0][5], "true");
    }

    #[test]
    fn empty_corpus_empty_report() {
        let s = StubEmbedder::default();
        let c = corpus(vec![]);
        assert!(dup_report(&c, &s, &DupThresholds::default(), 1.0)
            .unwrap()
            .is_empty());
    }
}
