//! Topic analysis of abstracts: preprocessing, LDA per country, and
//! country-level embedding similarity.

pub mod embed;
pub mod lda;
pub mod text;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::records::{ArticleRecord, AuthorEntry, Corpus};

pub use embed::{
    cosine, country_embedding, embed_all, mean_vector, paragraph_embedding, paragraph_embeddings,
    similarity_matrix, EmbeddingProvider, EmbeddingVector, HealthStatus, HttpEmbedder,
    ProviderError, SimilarityMatrix, StubEmbedder, MAX_BATCH,
};
pub use lda::{lda_fit, top_terms, top_words, LdaParams, TopicModel, DEFAULT_SEED};
pub use text::{
    light_stem, preprocess, sentence_split, tokenize, PreprocessOptions, Stopwords, TokenizedDoc,
};

#[derive(Debug, Error)]
pub enum TopicsError {
    #[error("no documents to fit")]
    EmptyCorpus,
    #[error("vocabulary is empty after preprocessing")]
    DegenerateVocab,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("topic {topic} out of range for k={k}")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("no article with a non-empty abstract")]
    NoAbstracts,
    #[error("need at least two groups for a similarity matrix, got {0}")]
    TooFewGroups(usize),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("zero embedding vector for {0:?}")]
    ZeroVector(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Groups articles under every label carried by at least one of their
/// authors. Articles appear once per label, in article-id order.
pub fn articles_by_label<F>(corpus: &Corpus, label_of: F) -> BTreeMap<String, Vec<&ArticleRecord>>
where
    F: Fn(&AuthorEntry) -> Option<String>,
{
    let mut out: BTreeMap<String, Vec<&ArticleRecord>> = BTreeMap::new();
    for article in &corpus.articles {
        let labels: BTreeSet<String> = article.authors.iter().filter_map(&label_of).collect();
        for label in labels {
            out.entry(label).or_default().push(article);
        }
    }
    out
}

/// Preprocessed abstracts of one group, ready for [`lda_fit`].
pub fn group_documents(
    label: &str,
    articles: &[&ArticleRecord],
    options: &PreprocessOptions,
) -> Vec<TokenizedDoc> {
    articles
        .iter()
        .map(|a| preprocess(&a.article_id, label, &a.abstract_text, options))
        .collect()
}
