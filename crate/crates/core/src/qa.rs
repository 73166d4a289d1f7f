//! Edited-fact memory, top-x retrieval and LLM question answering.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, embed_unit, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::llm::{CompletionPort, CompletionRequest};
use crate::prompt::PromptTemplate;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrieverConfig {
    pub top_x: usize,
}

impl RetrieverConfig {
    pub fn new(top_x: usize) -> Result<Self> {
        if top_x == 0 {
            return Err(Error::Config("top_x must be at least 1".into()));
        }
        Ok(Self { top_x })
    }

    /// 6 for MQuAKE-CF style data, 1 for MQuAKE-T.
    pub fn for_catalog(name: &str) -> Self {
        match name {
            "mquake-t" => Self { top_x: 1 },
            _ => Self { top_x: 6 },
        }
    }
}

type TermVector = HashMap<String, f32>;

fn term_vector(s: &str) -> TermVector {
    let mut v = TermVector::new();
    for w in text::words(s) {
        *v.entry(w).or_default() += 1.0;
    }
    let norm = v.values().map(|x| x * x).sum::<f32>().sqrt();
    if norm > 0.0 {
        v.values_mut().for_each(|x| *x /= norm);
    }
    v
}

fn sparse_cosine(a: &TermVector, b: &TermVector) -> f32 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum()
}

#[derive(Clone)]
enum Backend {
    Lexical(Vec<TermVector>),
    Embedding {
        provider: Arc<dyn EmbeddingProvider>,
        vectors: Vec<Vec<f32>>,
    },
}

/// Ordered, duplicate-free store of edited-fact sentences.
#[derive(Clone)]
pub struct FactMemory {
    facts: Vec<String>,
    backend: Backend,
}

impl fmt::Debug for FactMemory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let backend = match self.backend {
            Backend::Lexical(_) => "lexical",
            Backend::Embedding { .. } => "embedding",
        };
        f.debug_struct("FactMemory")
            .field("facts", &self.facts.len())
            .field("backend", &backend)
            .finish()
    }
}

fn dedup<I, S>(facts: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut seen = HashSet::new();
    facts
        .into_iter()
        .map(|f| f.as_ref().trim().to_string())
        .filter(|f| !f.is_empty() && seen.insert(f.clone()))
        .collect()
}

impl FactMemory {
    /// Memory ranked by word-count cosine.
    pub fn lexical<I, S>(facts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let facts = dedup(facts);
        let vectors = facts.iter().map(|f| term_vector(f)).collect();
        Self {
            facts,
            backend: Backend::Lexical(vectors),
        }
    }

    /// Memory ranked by embedding cosine.
    pub fn embedded<I, S>(facts: I, provider: Arc<dyn EmbeddingProvider>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let facts = dedup(facts);
        let vectors = if facts.is_empty() {
            Vec::new()
        } else {
            embed_unit(provider.as_ref(), &facts)?
        };
        Ok(Self {
            facts,
            backend: Backend::Embedding { provider, vectors },
        })
    }

    pub fn facts(&self) -> &[String] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Similarity of `query` to every stored fact, in storage order.
    pub fn scores(&self, query: &str) -> Result<Vec<f32>> {
        Ok(match &self.backend {
            Backend::Lexical(vectors) => {
                let q = term_vector(query);
                vectors.iter().map(|v| sparse_cosine(&q, v)).collect()
            }
            Backend::Embedding { provider, vectors } => {
                let q = embed_unit(provider.as_ref(), &[query.to_string()])?
                    .pop()
                    .unwrap_or_default();
                vectors.iter().map(|v| cosine(&q, v)).collect()
            }
        })
    }

    /// The `min(top_x, len)` most similar facts, best first; ties keep
    /// storage order.
    pub fn retrieve_top_x(&self, question: &str, cfg: RetrieverConfig) -> Result<Vec<&str>> {
        if self.facts.is_empty() {
            return Err(Error::EmptyMemory);
        }
        let scores = self.scores(question)?;
        let mut order: Vec<usize> = (0..self.facts.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Ok(order
            .into_iter()
            .take(cfg.top_x)
            .map(|i| self.facts[i].as_str())
            .collect())
    }
}

/// Pulls the answer out of a completion: the text after the first
/// `Answer:` marker (or the first non-empty line when there is none), with
/// surrounding whitespace, quotes and terminal punctuation removed.
pub fn extract_answer(completion: &str) -> Option<String> {
    let after = match completion.find("Answer:") {
        Some(i) => &completion[i + "Answer:".len()..],
        None => completion,
    };
    let line = after.lines().map(str::trim).find(|l| !l.is_empty())?;
    let cleaned = line
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '`' || c.is_whitespace())
        .trim_end_matches(['.', ',', ';', ':', '!', '?'])
        .trim();
    (!cleaned.is_empty()).then(|| cleaned.to_string())
}

/// Prompts the model with the retrieved facts and the question.
/// Unanswerable output maps to `None`; only transport failures are errors.
pub fn answer_question(
    question: &str,
    facts: &[&str],
    llm: &dyn CompletionPort,
    template: &PromptTemplate,
) -> Result<Option<String>> {
    let facts: Vec<String> = facts.iter().map(|f| f.to_string()).collect();
    let prompt = template.render(question, &[], &facts);
    let req = CompletionRequest::new(prompt).max_tokens(32);
    let completion = llm.complete(&req)?;
    Ok(extract_answer(&completion))
}
