//! Sentence-embedding providers and the two-stage mean pooling that turns a
//! set of abstracts into one country-level vector.
//!
//! The provider contract is a batch call: a list of UTF-8 strings in, an
//! equal-length list of `dim`-component vectors out, order preserved. Two
//! implementations ship here: [`StubEmbedder`], a deterministic hashed
//! bag-of-words projection for offline runs, and [`HttpEmbedder`], a client
//! for the JSON `POST /embed` / `GET /health` service.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::text::sentence_split;
use super::TopicsError;
use crate::records::ArticleRecord;
use crate::scalar::RealScalar;

/// Largest batch a provider accepts in one request.
pub const MAX_BATCH: usize = 256;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Protocol(String),
}

pub trait EmbeddingProvider {
    fn dim(&self) -> usize;

    fn model(&self) -> &str;

    /// One vector per input text, same order. Implementations may assume
    /// `texts.len() <= MAX_BATCH`.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Embeds any number of texts in `MAX_BATCH` chunks, validating the shape
/// of every response.
pub fn embed_all<P: EmbeddingProvider + ?Sized>(
    provider: &P,
    texts: &[String],
) -> Result<Vec<Vec<f64>>, ProviderError> {
    let dim = provider.dim();
    let mut out = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(MAX_BATCH) {
        let vectors = provider.embed_batch(chunk)?;
        if vectors.len() != chunk.len() {
            return Err(ProviderError::Protocol(format!(
                "sent {} texts, received {} vectors",
                chunk.len(),
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(ProviderError::Protocol(format!(
                    "vector has {} components, declared dim is {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ProviderError::Protocol("non-finite component".into()));
            }
        }
        out.extend(vectors);
    }
    Ok(out)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ seed.wrapping_mul(FNV_PRIME);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic offline embedder.
///
/// Text is lowercased and split into alphanumeric tokens. Each token maps to
/// a pseudo-random direction in `[-1, 1]^dim` derived from `(seed, token)`;
/// the text vector is the sum over tokens, scaled to unit length. Equal token
/// multisets give identical vectors; text without tokens embeds to zero.
#[derive(Debug, Clone)]
pub struct StubEmbedder {
    dim: usize,
    seed: u64,
}

impl StubEmbedder {
    pub const DEFAULT_DIM: usize = 384;

    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed }
    }

    pub fn embed_text(&self, text: &str) -> Vec<f64> {
        let mut tokens: Vec<String> = text
            .to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
        tokens.sort_unstable();
        let mut v = vec![0.0f64; self.dim];
        for token in &tokens {
            let h = fnv1a(token.as_bytes(), self.seed);
            for (d, slot) in v.iter_mut().enumerate() {
                let bits = splitmix64(h ^ (d as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                *slot += (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl Default for StubEmbedder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIM, 0)
    }
}

impl EmbeddingProvider for StubEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn model(&self) -> &str {
        "stub"
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| self.embed_text(t)).collect())
    }
}

#[derive(Debug, Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Debug, Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    dim: usize,
    #[allow(dead_code)]
    #[serde(default)]
    model: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    pub model: String,
    pub dim: usize,
}

/// Client for an embedding service speaking the JSON batch contract.
#[derive(Debug)]
pub struct HttpEmbedder {
    base: String,
    agent: ureq::Agent,
    health: HealthStatus,
}

fn call_error(e: ureq::Error) -> ProviderError {
    match e {
        ureq::Error::Status(status, resp) => ProviderError::Status {
            status,
            body: resp.into_string().unwrap_or_default(),
        },
        ureq::Error::Transport(t) => ProviderError::Transport(t.to_string()),
    }
}

impl HttpEmbedder {
    /// Checks `GET /health` and records the declared model and dimension.
    pub fn connect(base_url: &str) -> Result<Self, ProviderError> {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(120))
            .build();
        let base = base_url.trim_end_matches('/').to_string();
        let health: HealthStatus = agent
            .get(&format!("{base}/health"))
            .call()
            .map_err(call_error)?
            .into_json()
            .map_err(|e| ProviderError::Protocol(e.to_string()))?;
        if health.status != "ok" {
            return Err(ProviderError::Protocol(format!(
                "service status {:?}",
                health.status
            )));
        }
        Ok(Self {
            base,
            agent,
            health,
        })
    }

    pub fn health(&self) -> &HealthStatus {
        &self.health
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn dim(&self) -> usize {
        self.health.dim
    }

    fn model(&self) -> &str {
        &self.health.model
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let resp: EmbedResponse = self
            .agent
            .post(&format!("{}/embed", self.base))
            .send_json(EmbedRequest { texts })
            .map_err(call_error)?
            .into_json()
            .map_err(|e| ProviderError::Protocol(e.to_string()))?;
        if resp.dim != self.health.dim {
            return Err(ProviderError::Protocol(format!(
                "response dim {} differs from advertised {}",
                resp.dim, self.health.dim
            )));
        }
        Ok(resp.vectors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingVector<T = f64> {
    pub values: Vec<T>,
}

impl<T: RealScalar> EmbeddingVector<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            values: self.values.iter().map(|&x| x * c).collect(),
        }
    }
}

/// Component-wise mean, summed in input order.
pub fn mean_vector<T: RealScalar>(vectors: &[Vec<T>]) -> Option<Vec<T>> {
    let first = vectors.first()?;
    let mut acc = vec![T::zero(); first.len()];
    for v in vectors {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = *a + x;
        }
    }
    let n = T::from_count(vectors.len() as u64);
    Some(acc.into_iter().map(|x| x / n).collect())
}

/// Cosine similarity; `None` if either vector has zero norm or lengths differ.
pub fn cosine<T: RealScalar>(a: &[T], b: &[T]) -> Option<T> {
    if a.len() != b.len() {
        return None;
    }
    let mut dot = T::zero();
    let mut na = T::zero();
    let mut nb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot = dot + x * y;
        na = na + x * x;
        nb = nb + y * y;
    }
    if na == T::zero() || nb == T::zero() {
        return None;
    }
    let c = dot / (na.sqrt() * nb.sqrt());
    Some(c.max(-T::one()).min(T::one()))
}

/// Mean of the sentence embeddings of one abstract, or `None` when the text
/// has no sentences.
pub fn paragraph_embedding<P: EmbeddingProvider + ?Sized>(
    text: &str,
    provider: &P,
) -> Result<Option<Vec<f64>>, ProviderError> {
    let sentences = sentence_split(text);
    if sentences.is_empty() {
        return Ok(None);
    }
    Ok(mean_vector(&embed_all(provider, &sentences)?))
}

/// Paragraph embeddings for many texts with all sentences sent through the
/// provider in shared batches. Texts without sentences yield `None`.
pub fn paragraph_embeddings<P: EmbeddingProvider + ?Sized>(
    texts: &[&str],
    provider: &P,
) -> Result<Vec<Option<Vec<f64>>>, ProviderError> {
    let split: Vec<Vec<String>> = texts.iter().map(|t| sentence_split(t)).collect();
    let flat: Vec<String> = split.iter().flatten().cloned().collect();
    let vectors = embed_all(provider, &flat)?;
    let mut offset = 0;
    Ok(split
        .iter()
        .map(|s| {
            let slice = &vectors[offset..offset + s.len()];
            offset += s.len();
            mean_vector(slice)
        })
        .collect())
}

/// Mean of the paragraph embeddings of every non-empty abstract. Articles are
/// taken in article-id order so the result does not depend on input order.
pub fn country_embedding<P: EmbeddingProvider + ?Sized>(
    articles: &[&ArticleRecord],
    provider: &P,
) -> Result<EmbeddingVector, TopicsError> {
    let mut sorted: Vec<&ArticleRecord> = articles.to_vec();
    sorted.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    let texts: Vec<&str> = sorted
        .iter()
        .map(|a| a.abstract_text.as_str())
        .filter(|t| !t.trim().is_empty())
        .collect();
    let paragraphs: Vec<Vec<f64>> = paragraph_embeddings(&texts, provider)?
        .into_iter()
        .flatten()
        .collect();
    let values = mean_vector(&paragraphs).ok_or(TopicsError::NoAbstracts)?;
    Ok(EmbeddingVector { values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityMatrix<T = f64> {
    pub labels: Vec<String>,
    /// Row-major `labels.len()^2` cosine values.
    pub cells: Vec<T>,
}

impl<T: Copy> SimilarityMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.cells[i * self.labels.len() + j]
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }
}

pub fn similarity_matrix<T: RealScalar>(
    embeddings: &BTreeMap<String, EmbeddingVector<T>>,
) -> Result<SimilarityMatrix<T>, TopicsError> {
    if embeddings.len() < 2 {
        return Err(TopicsError::TooFewGroups(embeddings.len()));
    }
    let labels: Vec<String> = embeddings.keys().cloned().collect();
    let vectors: Vec<&EmbeddingVector<T>> = embeddings.values().collect();
    let dim = vectors[0].dim();
    for (label, v) in labels.iter().zip(&vectors) {
        if v.dim() != dim {
            return Err(TopicsError::DimMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
        if v.norm() == T::zero() {
            return Err(TopicsError::ZeroVector(label.clone()));
        }
    }
    let n = labels.len();
    let mut cells = vec![T::one(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = cosine(&vectors[i].values, &vectors[j].values).expect("validated");
            cells[i * n + j] = c;
            cells[j * n + i] = c;
        }
    }
    Ok(SimilarityMatrix { labels, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::AuthorEntry;
    use std::cell::RefCell;

    fn article(id: &str, abstract_text: &str) -> ArticleRecord {
        ArticleRecord {
            article_id: id.into(),
            conference: "HRI".into(),
            year: 2020,
            title: format!("T {id}"),
            abstract_text: abstract_text.into(),
            authors: vec![AuthorEntry::new("A", "B", "", "China")],
        }
    }

    /// Provider returning fixed vectors per sentence text.
    struct TableProvider {
        table: BTreeMap<String, Vec<f64>>,
        calls: RefCell<Vec<usize>>,
    }

    impl EmbeddingProvider for TableProvider {
        fn dim(&self) -> usize {
            2
        }
        fn model(&self) -> &str {
            "table"
        }
        fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
            self.calls.borrow_mut().push(texts.len());
            Ok(texts.iter().map(|t| self.table[t].clone()).collect())
        }
    }

    #[test]
    fn stub_is_unit_and_deterministic() {
        let s = StubEmbedder::default();
        let a = s.embed_text("Robots help children sleep.");
        let b = s.embed_text("sleep children HELP robots");
        assert_eq!(a, b);
        assert_eq!(a.len(), 384);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(s.embed_text("...").iter().all(|&x| x == 0.0));
        let other = StubEmbedder::new(384, 7).embed_text("Robots help children sleep.");
        assert_ne!(a, other);
    }

    #[test]
    fn stub_unrelated_texts_near_orthogonal() {
        let s = StubEmbedder::default();
        let a = s.embed_text("quantum annealing lattice spectroscopy");
        let b = s.embed_text("children pillow lullaby bedtime");
        assert!(cosine(&a, &b).unwrap().abs() < 0.3);
    }

    #[test]
    fn singleton_means_are_bitwise() {
        let s = StubEmbedder::default();
        let art = article("a", "Robots help children sleep better at night");
        let emb = country_embedding(&[&art], &s).unwrap();
        assert_eq!(
            emb.values,
            s.embed_text("Robots help children sleep better at night")
        );
    }

    #[test]
    fn two_stage_mean_by_hand() {
        let table: BTreeMap<String, Vec<f64>> = [
            ("One.", vec![1.0, 0.0]),
            ("Two.", vec![0.0, 1.0]),
            ("Three.", vec![3.0, 3.0]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let p = TableProvider {
            table,
            calls: RefCell::new(vec![]),
        };
        let a = article("a", "One. Two.");
        let b = article("b", "Three.");
        let c = article("c", "   ");
        let emb = country_embedding(&[&b, &a, &c], &p).unwrap();
        // paragraphs: (0.5, 0.5) and (3, 3); country = (1.75, 1.75)
        assert_eq!(emb.values, vec![1.75, 1.75]);
        assert_eq!(*p.calls.borrow(), vec![3]);
    }

    #[test]
    fn identical_abstracts_equal_paragraph() {
        let s = StubEmbedder::default();
        let text = "Robots pat children. Parents sing lullabies.";
        let emb = country_embedding(&[&article("a", text), &article("b", text)], &s).unwrap();
        let para = paragraph_embedding(text, &s).unwrap().unwrap();
        for (x, y) in emb.values.iter().zip(&para) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn no_abstracts_is_error() {
        let s = StubEmbedder::default();
        assert!(matches!(
            country_embedding(&[&article("a", "")], &s),
            Err(TopicsError::NoAbstracts)
        ));
    }

    #[test]
    fn batches_are_capped() {
        let texts: Vec<String> = (0..600).map(|i| format!("t{i}")).collect();
        let table = texts.iter().map(|t| (t.clone(), vec![1.0, 0.0])).collect();
        let p = TableProvider {
            table,
            calls: RefCell::new(vec![]),
        };
        let out = embed_all(&p, &texts).unwrap();
        assert_eq!(out.len(), 600);
        assert_eq!(*p.calls.borrow(), vec![256, 256, 88]);
    }

    #[test]
    fn similarity_basics() {
        let m: BTreeMap<String, EmbeddingVector> = [
            ("a", vec![1.0, 0.0]),
            ("b", vec![0.0, 2.0]),
            ("c", vec![3.0, 0.0]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), EmbeddingVector { values: v }))
        .collect();
        let s = similarity_matrix(&m).unwrap();
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(0, 2), 1.0);
        assert_eq!(s.get(1, 1), 1.0);
        assert_eq!(s.get(2, 0), s.get(0, 2));
    }

    #[test]
    fn similarity_errors() {
        let one: BTreeMap<String, EmbeddingVector> =
            [("a".to_string(), EmbeddingVector { values: vec![1.0] })].into();
        assert!(matches!(
            similarity_matrix(&one),
            Err(TopicsError::TooFewGroups(1))
        ));
        let mut two = one.clone();
        two.insert(
            "b".into(),
            EmbeddingVector {
                values: vec![1.0, 2.0],
            },
        );
        assert!(matches!(
            similarity_matrix(&two),
            Err(TopicsError::DimMismatch { .. })
        ));
        two.insert("b".into(), EmbeddingVector { values: vec![0.0] });
        assert!(matches!(
            similarity_matrix(&two),
            Err(TopicsError::ZeroVector(_))
        ));
    }

    #[test]
    fn similarity_works_in_f32() {
        let m: BTreeMap<String, EmbeddingVector<f32>> = [
            (
                "a".to_string(),
                EmbeddingVector {
                    values: vec![1.0f32, 1.0],
                },
            ),
            (
                "b".to_string(),
                EmbeddingVector {
                    values: vec![1.0f32, 0.0],
                },
            ),
        ]
        .into();
        let s = similarity_matrix(&m).unwrap();
        assert!((s.get(0, 1) - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }
}
