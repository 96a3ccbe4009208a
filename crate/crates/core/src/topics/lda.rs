//! Latent Dirichlet allocation fit by collapsed Gibbs sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::text::TokenizedDoc;
use super::TopicsError;

pub const DEFAULT_SEED: u64 = 20_240_101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaParams {
    /// `alpha = 50 / k`, `beta = 0.01`, 1000 sweeps.
    pub fn with_topics(k: usize) -> Self {
        Self {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            seed: DEFAULT_SEED,
        }
    }
}

impl Default for LdaParams {
    fn default() -> Self {
        Self::with_topics(5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicModel {
    pub k: usize,
    /// Sorted vocabulary; term ids index into this.
    pub vocab: Vec<String>,
    /// `k x |vocab|` topic-term probabilities.
    pub phi: Vec<Vec<f64>>,
    /// `docs x k` document-topic probabilities.
    pub theta: Vec<Vec<f64>>,
    pub doc_ids: Vec<String>,
    /// Topic of every token, per document, in token order.
    pub assignments: Vec<Vec<usize>>,
    /// `k x |vocab|` final assignment counts.
    pub topic_term_counts: Vec<Vec<u32>>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
}

pub fn lda_fit(docs: &[TokenizedDoc], params: &LdaParams) -> Result<TopicModel, TopicsError> {
    if docs.is_empty() {
        return Err(TopicsError::EmptyCorpus);
    }
    let k = params.k;
    if k == 0 {
        return Err(TopicsError::InvalidParam("k must be >= 1".into()));
    }
    if !(params.alpha > 0.0 && params.beta > 0.0) {
        return Err(TopicsError::InvalidParam(
            "alpha and beta must be positive".into(),
        ));
    }

    let vocab_index: BTreeMap<&str, usize> = {
        let mut terms: Vec<&str> = docs
            .iter()
            .flat_map(|d| d.tokens.iter().map(String::as_str))
            .collect();
        terms.sort_unstable();
        terms.dedup();
        terms.into_iter().enumerate().map(|(i, t)| (t, i)).collect()
    };
    let v = vocab_index.len();
    if v == 0 {
        return Err(TopicsError::DegenerateVocab);
    }
    let words: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.tokens.iter().map(|t| vocab_index[t.as_str()]).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut doc_topic = vec![vec![0u32; k]; docs.len()];
    let mut topic_term = vec![0u32; k * v];
    let mut topic_total = vec![0u32; k];
    let mut z: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
    for (d, ws) in words.iter().enumerate() {
        let mut zd = Vec::with_capacity(ws.len());
        for &w in ws {
            let t = rng.gen_range(0..k);
            doc_topic[d][t] += 1;
            topic_term[t * v + w] += 1;
            topic_total[t] += 1;
            zd.push(t);
        }
        z.push(zd);
    }

    let vbeta = v as f64 * params.beta;
    let mut weights = vec![0.0f64; k];
    for _ in 0..params.iterations {
        for (d, ws) in words.iter().enumerate() {
            for (i, &w) in ws.iter().enumerate() {
                let old = z[d][i];
                doc_topic[d][old] -= 1;
                topic_term[old * v + w] -= 1;
                topic_total[old] -= 1;

                let mut acc = 0.0;
                for t in 0..k {
                    acc += (f64::from(doc_topic[d][t]) + params.alpha)
                        * (f64::from(topic_term[t * v + w]) + params.beta)
                        / (f64::from(topic_total[t]) + vbeta);
                    weights[t] = acc;
                }
                let u = rng.gen::<f64>() * acc;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                z[d][i] = new;
                doc_topic[d][new] += 1;
                topic_term[new * v + w] += 1;
                topic_total[new] += 1;
            }
        }
    }

    let phi = (0..k)
        .map(|t| {
            let denom = f64::from(topic_total[t]) + vbeta;
            (0..v)
                .map(|w| (f64::from(topic_term[t * v + w]) + params.beta) / denom)
                .collect()
        })
        .collect();
    let kalpha = k as f64 * params.alpha;
    let theta = doc_topic
        .iter()
        .zip(&words)
        .map(|(counts, ws)| {
            let denom = ws.len() as f64 + kalpha;
            counts
                .iter()
                .map(|&c| (f64::from(c) + params.alpha) / denom)
                .collect()
        })
        .collect();

    Ok(TopicModel {
        k,
        vocab: vocab_index.keys().map(|t| t.to_string()).collect(),
        phi,
        theta,
        doc_ids: docs.iter().map(|d| d.article_id.clone()).collect(),
        assignments: z,
        topic_term_counts: (0..k)
            .map(|t| topic_term[t * v..(t + 1) * v].to_vec())
            .collect(),
        alpha: params.alpha,
        beta: params.beta,
        seed: params.seed,
        iterations: params.iterations,
    })
}

/// The `n` highest-probability terms of a topic with their weights; equal
/// weights are ordered lexicographically.
pub fn top_terms(
    model: &TopicModel,
    topic: usize,
    n: usize,
) -> Result<Vec<(String, f64)>, TopicsError> {
    let row = model
        .phi
        .get(topic)
        .ok_or(TopicsError::TopicOutOfRange { topic, k: model.k })?;
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| model.vocab[a].cmp(&model.vocab[b]))
    });
    Ok(idx
        .into_iter()
        .take(n)
        .map(|i| (model.vocab[i].clone(), row[i]))
        .collect())
}

pub fn top_words(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<String>, TopicsError> {
    Ok(top_terms(model, topic, n)?
        .into_iter()
        .map(|(w, _)| w)
        .collect())
}
