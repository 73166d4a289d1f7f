//! Multi-hop question answering under knowledge edits.
//!
//! Edit sentences become fact triples that overwrite slots in a local
//! knowledge graph; questions become relation chains that compile to path
//! queries over it. A retrieval-augmented LLM answer is kept as a fallback
//! for when the graph has no answer.

pub mod arbitration;
pub mod catalog;
pub mod chain;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod extraction;
mod http;
pub mod kg;
pub mod llm;
pub mod par;
pub mod prompt;
pub mod qa;
pub mod query;
pub mod text;

pub use arbitration::{finalize, AnswerRecord, GoldAnswer, OutcomeClass};
pub use catalog::{Normalized, RelationCatalog};
pub use chain::RelationChain;
pub use error::{Error, LlmFailure, Result};
pub use extraction::{Extractor, FactTripleDraft, LexiconPersonDetector, PersonDetector};
pub use kg::{EditRecord, EntityRef, KnowledgeGraph, Provenance, RelationRef, Triple};
pub use llm::{CompletionPort, CompletionRequest, MockRule, MockScript};
pub use qa::{FactMemory, RetrieverConfig};
pub use query::{build_query, execute_local, execute_remote, CompiledQuery, QueryAnswer};
