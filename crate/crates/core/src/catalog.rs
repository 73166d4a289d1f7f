//! Predefined canonical relation lists and free-form relation normalization.
//!
//! Extraction prompts ask the model to pick relations from a fixed list, but
//! models still emit near misses ("citizenship" for "country of citizenship").
//! [`RelationCatalog::normalize`] force-maps any candidate onto the most
//! similar canonical label and reports the similarity so callers can log
//! low-confidence mappings.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::embedding::{cosine, embed_unit, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::text;

const MQUAKE_CF: &str = include_str!("../data/catalogs/mquake-cf.txt");
const MQUAKE_T: &str = include_str!("../data/catalogs/mquake-t.txt");

pub const BUILTIN_CATALOGS: [&str; 2] = ["mquake-cf", "mquake-t"];

/// Result of mapping a candidate string onto the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub label: String,
    /// 1.0 for an exact (folded) match; otherwise the primary similarity of
    /// the chosen label (word Jaccard, or cosine with embeddings).
    pub score: f64,
    pub exact: bool,
}

#[derive(Debug, Clone)]
struct LexicalKey {
    words: BTreeSet<String>,
    trigrams: BTreeSet<String>,
}

impl LexicalKey {
    fn new(s: &str) -> Self {
        Self {
            words: text::word_set(s),
            trigrams: text::trigrams(s),
        }
    }
}

#[derive(Clone)]
struct EmbeddingIndex {
    provider: Arc<dyn EmbeddingProvider>,
    vectors: Vec<Vec<f32>>,
}

#[derive(Clone)]
pub struct RelationCatalog {
    name: String,
    relations: Vec<String>,
    index: HashMap<String, usize>,
    lexical: Vec<LexicalKey>,
    embeddings: Option<EmbeddingIndex>,
}

impl fmt::Debug for RelationCatalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RelationCatalog")
            .field("name", &self.name)
            .field("relations", &self.relations.len())
            .field("embeddings", &self.embeddings.is_some())
            .finish()
    }
}

impl RelationCatalog {
    pub fn from_labels<I, S>(name: impl Into<String>, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let name = name.into();
        let mut relations = Vec::new();
        let mut index = HashMap::new();
        for label in labels {
            let label = label.as_ref().trim();
            if label.is_empty() {
                continue;
            }
            let key = text::fold(label);
            if index.insert(key, relations.len()).is_some() {
                return Err(Error::DuplicateRelation(label.to_string()));
            }
            relations.push(label.to_string());
        }
        if relations.is_empty() {
            return Err(Error::EmptyCatalog(name));
        }
        let lexical = relations.iter().map(|r| LexicalKey::new(r)).collect();
        Ok(Self {
            name,
            relations,
            index,
            lexical,
            embeddings: None,
        })
    }

    /// Parses the line-oriented catalog format: one label per line, blank
    /// lines ignored, `#` starts a comment line.
    pub fn parse(name: impl Into<String>, contents: &str) -> Result<Self> {
        let labels = contents
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Self::from_labels(name, labels)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let contents = match name {
            "mquake-cf" => MQUAKE_CF,
            "mquake-t" => MQUAKE_T,
            _ => return None,
        };
        Some(Self::parse(name, contents).expect("built-in catalogs are valid"))
    }

    /// Loads a built-in catalog by name, or a catalog file by path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(catalog) = Self::builtin(name_or_path) {
            return Ok(catalog);
        }
        let path = Path::new(name_or_path);
        if !path.is_file() {
            return Err(Error::NotFound(name_or_path.to_string()));
        }
        let contents = fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| name_or_path.to_string());
        Self::parse(name, &contents)
    }

    /// Switches normalization from lexical matching to embedding cosine.
    pub fn with_embeddings(mut self, provider: Arc<dyn EmbeddingProvider>) -> Result<Self> {
        let vectors = embed_unit(provider.as_ref(), &self.relations)?;
        self.embeddings = Some(EmbeddingIndex { provider, vectors });
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn has_embeddings(&self) -> bool {
        self.embeddings.is_some()
    }

    /// Canonical spelling of `label` if it is a catalog member (case and
    /// whitespace insensitive).
    pub fn canonical(&self, label: &str) -> Option<&str> {
        self.position(label).map(|i| self.relations[i].as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(&text::fold(label)).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// Maps `candidate` to the most similar canonical relation. Never fails
    /// for non-empty input; ties go to the earlier catalog entry.
    pub fn normalize(&self, candidate: &str) -> Result<Normalized> {
        let candidate = candidate.trim();
        if candidate.is_empty() {
            return Err(Error::EmptyCandidate);
        }
        if let Some(label) = self.canonical(candidate) {
            return Ok(Normalized {
                label: label.to_string(),
                score: 1.0,
                exact: true,
            });
        }
        let (best, score) = match &self.embeddings {
            Some(index) => self.argmax_embedding(candidate, index)?,
            None => self.argmax_lexical(candidate),
        };
        Ok(Normalized {
            label: self.relations[best].clone(),
            score,
            exact: false,
        })
    }

    fn argmax_lexical(&self, candidate: &str) -> (usize, f64) {
        let key = LexicalKey::new(candidate);
        let mut best = 0;
        let mut best_sim = lexical_pair(&key, &self.lexical[0]);
        for (i, entry) in self.lexical.iter().enumerate().skip(1) {
            let sim = lexical_pair(&key, entry);
            if sim.0 > best_sim.0 || (sim.0 == best_sim.0 && sim.1 > best_sim.1) {
                best = i;
                best_sim = sim;
            }
        }
        (best, best_sim.0)
    }

    fn argmax_embedding(&self, candidate: &str, index: &EmbeddingIndex) -> Result<(usize, f64)> {
        let query = embed_unit(index.provider.as_ref(), &[candidate.to_string()])?
            .pop()
            .unwrap_or_default();
        let mut best = 0;
        let mut best_sim = f32::NEG_INFINITY;
        for (i, v) in index.vectors.iter().enumerate() {
            let sim = cosine(&query, v);
            if sim > best_sim {
                best = i;
                best_sim = sim;
            }
        }
        Ok((best, f64::from(best_sim)))
    }
}

fn lexical_pair(a: &LexicalKey, b: &LexicalKey) -> (f64, f64) {
    (
        text::jaccard(&a.words, &b.words),
        text::dice(&a.trigrams, &b.trigrams),
    )
}
