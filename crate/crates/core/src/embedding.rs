//! Sentence embedding providers used for fact retrieval and relation matching.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::LlmFailure;
use crate::text;

pub trait EmbeddingProvider: Send + Sync {
    /// Embeds every text; returned vectors are unit norm (or all-zero for
    /// texts with no tokens).
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, LlmFailure>;
}

/// Feature-hashed bag of words. Deterministic across runs and platforms.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0.0f32; self.dim];
        for w in text::words(text) {
            let h = fnv1a(w.as_bytes());
            let slot = (h % self.dim as u64) as usize;
            let sign = if (h >> 63) & 1 == 0 { 1.0 } else { -1.0 };
            v[slot] += sign;
        }
        normalize(&mut v);
        v
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self::new(512)
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, LlmFailure> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn normalize(v: &mut [f32]) {
    let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Embeds `texts` and scales every vector to unit length.
pub fn embed_unit(
    provider: &dyn EmbeddingProvider,
    texts: &[String],
) -> Result<Vec<Vec<f32>>, LlmFailure> {
    let mut vectors = provider.embed(texts)?;
    vectors.iter_mut().for_each(|v| normalize(v));
    Ok(vectors)
}

/// Dot product; equals cosine similarity for unit vectors.
pub fn cosine(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
}

/// Client for a remote embedding service speaking
/// `POST {"texts": [...]}` → `{"vectors": [[...], ...]}`.
pub struct HttpEmbedder {
    url: String,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpEmbedder {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        Self {
            url: url.into(),
            timeout,
            agent: crate::http::agent(timeout),
        }
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, LlmFailure> {
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(EmbedRequest { texts })
            .map_err(|e| crate::http::failure(e, self.timeout))?;
        if !resp.status().is_success() {
            return Err(crate::http::status_failure(&mut resp));
        }
        let body: EmbedResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| LlmFailure::MalformedPayload(e.to_string()))?;
        if body.vectors.len() != texts.len() {
            return Err(LlmFailure::MalformedPayload(format!(
                "expected {} vectors, got {}",
                texts.len(),
                body.vectors.len()
            )));
        }
        Ok(body
            .vectors
            .into_iter()
            .map(|mut v| {
                normalize(&mut v);
                v
            })
            .collect())
    }
}
