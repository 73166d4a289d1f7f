use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::batch::batch_indices;
use super::dataset::QaInstance;
use crate::arbitration::{AnswerRecord, GoldAnswer};
use crate::catalog::RelationCatalog;
use crate::chain::RelationChain;
use crate::embedding::EmbeddingProvider;
use crate::error::{Error, Result};
use crate::extraction::{Extractor, LexiconPersonDetector, PersonDetector};
use crate::kg::KnowledgeGraph;
use crate::llm::CompletionPort;
use crate::par::{self, Execution};
use crate::prompt::Prompts;
use crate::qa::{answer_question, FactMemory, RetrieverConfig};
use crate::query::execute_local;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Retrieval-augmented LLM answering only.
    Qa,
    /// Relation chain extraction and graph lookup only.
    Kbqa,
    /// Both, with the graph answer taking precedence.
    Full,
}

impl Mode {
    pub fn uses_llm_qa(self) -> bool {
        matches!(self, Mode::Qa | Mode::Full)
    }

    pub fn uses_kbqa(self) -> bool {
        matches!(self, Mode::Kbqa | Mode::Full)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qa" | "qa-only" | "qaonly" => Ok(Mode::Qa),
            "kbqa" | "kbqa-only" | "kbqaonly" => Ok(Mode::Kbqa),
            "full" => Ok(Mode::Full),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Qa => "qa",
            Mode::Kbqa => "kbqa",
            Mode::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub k: usize,
    pub mode: Mode,
    pub catalog: String,
    pub retriever: RetrieverConfig,
    pub seed: u64,
}

impl EvalConfig {
    pub fn new(k: usize, mode: Mode, catalog: impl Into<String>) -> Self {
        let catalog = catalog.into();
        Self {
            k,
            mode,
            retriever: RetrieverConfig::for_catalog(&catalog),
            catalog,
            seed: 0,
        }
    }
}

/// Backends the pipeline talks to.
#[derive(Clone)]
pub struct Ports {
    /// Used for triple and relation-chain extraction.
    pub extraction_llm: Arc<dyn CompletionPort>,
    /// Used for retrieval-augmented answering.
    pub qa_llm: Arc<dyn CompletionPort>,
    /// `None` selects lexical retrieval.
    pub embedder: Option<Arc<dyn EmbeddingProvider>>,
    pub person: Arc<dyn PersonDetector>,
}

impl Ports {
    pub fn single(llm: Arc<dyn CompletionPort>) -> Self {
        Self {
            extraction_llm: Arc::clone(&llm),
            qa_llm: llm,
            embedder: Some(Arc::new(crate::embedding::HashingEmbedder::default())),
            person: Arc::new(LexiconPersonDetector::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_id: String,
    pub hop_count: usize,
    pub gold: GoldAnswer,
    pub records: Vec<AnswerRecord>,
    /// Any paraphrase's final answer matches the gold answer or an alias.
    pub correct: bool,
    /// Same, against the gold answer only.
    pub correct_strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditFailure {
    pub sentence: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    pub index: usize,
    pub results: Vec<InstanceResult>,
    pub edits_applied: usize,
    pub edit_failures: Vec<EditFailure>,
}

impl GroupResult {
    pub fn accuracy(&self) -> f64 {
        percent(
            self.results.iter().filter(|r| r.correct).count(),
            self.results.len(),
        )
    }

    pub fn accuracy_strict(&self) -> f64 {
        percent(
            self.results.iter().filter(|r| r.correct_strict).count(),
            self.results.len(),
        )
    }
}

pub(crate) fn percent(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * hits as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub config: EvalConfig,
    pub groups: Vec<GroupResult>,
    pub wall_clock: Duration,
}

impl EvalRun {
    pub fn instances(&self) -> impl Iterator<Item = &InstanceResult> {
        self.groups.iter().flat_map(|g| &g.results)
    }

    /// Per-instance verdicts ordered by instance id.
    pub fn verdicts(&self) -> Vec<(String, bool)> {
        let mut v: Vec<_> = self
            .instances()
            .map(|r| (r.instance_id.clone(), r.correct))
            .collect();
        v.sort();
        v
    }
}

/// True iff any paraphrase's final answer matches gold or an alias.
pub fn score_instance(records: &[AnswerRecord], gold: &GoldAnswer) -> bool {
    records.iter().any(|r| r.final_correct(gold))
}

fn score_instance_strict(records: &[AnswerRecord], gold: &GoldAnswer) -> bool {
    records.iter().any(|r| {
        r.final_answer
            .as_deref()
            .is_some_and(|a| gold.matches_strict(a))
    })
}

/// Builds the shared base graph from every instance's unedited facts.
/// Facts whose relation is not in the catalog are skipped.
pub fn build_base_graph(
    instances: &[QaInstance],
    catalog: Arc<RelationCatalog>,
) -> (KnowledgeGraph, usize) {
    let mut g = KnowledgeGraph::new(catalog);
    let mut skipped = 0;
    for inst in instances {
        for [s, r, o] in &inst.base_triples {
            if g.assert_fact(s, r, o).is_err() {
                skipped += 1;
            }
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} base facts with relations outside the catalog");
    }
    (g, skipped)
}

/// Notes when the question names known entities besides the chain head;
/// the head is still the first parsed segment.
fn other_mentions(question: &str, chain: &RelationChain, graph: &KnowledgeGraph) -> Option<String> {
    let head = graph.entity(&chain.head).map(|e| e.id.as_str());
    let others: Vec<&str> = graph
        .mentioned_entities(question)
        .into_iter()
        .filter(|e| Some(e.id.as_str()) != head)
        .map(|e| e.label.as_str())
        .collect();
    (!others.is_empty()).then(|| {
        format!(
            "question names other known entities besides head `{}`: {}",
            chain.head,
            others.join(", ")
        )
    })
}

/// Runs the batched protocol over a fixed instance set.
pub struct Evaluator {
    config: EvalConfig,
    extractor: Extractor,
    ports: Ports,
    prompts: Arc<Prompts>,
    base: Arc<KnowledgeGraph>,
    execution: Execution,
}

impl Evaluator {
    pub fn new(config: EvalConfig, ports: Ports, base: KnowledgeGraph) -> Self {
        let prompts = Arc::new(Prompts::builtin(&config.catalog));
        let extractor = Extractor::new(
            Arc::clone(&ports.extraction_llm),
            base.catalog_arc(),
            Arc::clone(&prompts),
        )
        .with_person_detector(Arc::clone(&ports.person));
        Self {
            config,
            extractor,
            ports,
            prompts,
            base: Arc::new(base),
            execution: Execution::default(),
        }
    }

    pub fn with_prompts(mut self, prompts: Prompts) -> Self {
        let prompts = Arc::new(prompts);
        self.extractor.prompts = Arc::clone(&prompts);
        self.prompts = prompts;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }

    pub fn evaluate(&self, instances: &[QaInstance]) -> Result<EvalRun> {
        let start = Instant::now();
        let batches = batch_indices(instances.len(), self.config.k, self.config.seed)?;
        let indexed: Vec<(usize, Vec<usize>)> = batches.into_iter().enumerate().collect();
        let groups = par::map(self.execution, &indexed, |(index, members)| {
            let group: Vec<&QaInstance> = members.iter().map(|&i| &instances[i]).collect();
            self.run_group(*index, &group)
        });
        Ok(EvalRun {
            config: self.config.clone(),
            groups,
            wall_clock: start.elapsed(),
        })
    }

    /// Applies every edit in the group to a fresh copy of the base graph,
    /// loads them into a fresh fact memory, then answers every question.
    /// Per-question failures are recorded and score as incorrect.
    pub fn run_group(&self, index: usize, group: &[&QaInstance]) -> GroupResult {
        let mode = self.config.mode;
        let sentences: Vec<&str> = group
            .iter()
            .flat_map(|inst| inst.edits.iter().map(String::as_str))
            .collect();

        let mut graph = None;
        let mut edits_applied = 0;
        let mut edit_failures = Vec::new();
        if mode.uses_kbqa() {
            let mut g = (*self.base).clone();
            for sentence in &sentences {
                let applied = self
                    .extractor
                    .extract_fact_triple(sentence)
                    .and_then(|t| g.apply_edit(&t.subject, &t.relation, &t.object));
                match applied {
                    Ok(_) => edits_applied += 1,
                    Err(e) => edit_failures.push(EditFailure {
                        sentence: sentence.to_string(),
                        error: e.to_string(),
                    }),
                }
            }
            graph = Some(g);
        }

        // An embedding failure fails every LLM answer in the group.
        let memory = mode.uses_llm_qa().then(|| {
            match &self.ports.embedder {
                Some(p) => FactMemory::embedded(&sentences, Arc::clone(p)),
                None => Ok(FactMemory::lexical(&sentences)),
            }
            .map_err(|e| e.to_string())
        });

        let results = par::map(self.execution, group, |inst| {
            let records: Vec<AnswerRecord> = inst
                .questions
                .iter()
                .map(|q| self.answer(q, &inst.gold, graph.as_ref(), memory.as_ref()))
                .collect();
            InstanceResult {
                instance_id: inst.id.clone(),
                hop_count: inst.hop_count,
                correct: score_instance(&records, &inst.gold),
                correct_strict: score_instance_strict(&records, &inst.gold),
                gold: inst.gold.clone(),
                records,
            }
        });
        GroupResult {
            index,
            results,
            edits_applied,
            edit_failures,
        }
    }

    fn answer(
        &self,
        question: &str,
        gold: &GoldAnswer,
        graph: Option<&KnowledgeGraph>,
        memory: Option<&Result<FactMemory, String>>,
    ) -> AnswerRecord {
        let mut errors = Vec::new();
        let mut retrieved = Vec::new();
        let mut llm_answer = None;
        if let Some(memory) = memory {
            let outcome = match memory {
                Ok(mem) => self.answer_with_llm(question, mem, &mut retrieved),
                Err(e) => Err(Error::Config(format!("fact memory unavailable: {e}"))),
            };
            match outcome {
                Ok(a) => llm_answer = a,
                Err(e) => errors.push(format!("qa: {e}")),
            }
        }
        let mut chain = None;
        let mut kbqa_answer = None;
        let mut diagnostics = Vec::new();
        if let Some(g) = graph {
            match self.extractor.extract_relation_chain(question) {
                Ok(c) => {
                    kbqa_answer = execute_local(&c, g).map(|a| a.label);
                    diagnostics.extend(other_mentions(question, &c, g));
                    chain = Some(c);
                }
                Err(e) => errors.push(format!("kbqa: {e}")),
            }
        }
        let mut record = AnswerRecord::new(question, llm_answer, kbqa_answer, gold);
        record.chain = chain;
        record.retrieved_facts = retrieved;
        record.errors = errors;
        record.diagnostics = diagnostics;
        record
    }

    fn answer_with_llm(
        &self,
        question: &str,
        memory: &FactMemory,
        retrieved: &mut Vec<String>,
    ) -> Result<Option<String>> {
        let facts = if memory.is_empty() {
            Vec::new()
        } else {
            memory.retrieve_top_x(question, self.config.retriever)?
        };
        retrieved.extend(facts.iter().map(|f| f.to_string()));
        answer_question(
            question,
            &facts,
            self.ports.qa_llm.as_ref(),
            &self.prompts.qa,
        )
    }
}
