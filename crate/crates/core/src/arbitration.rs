//! Combines the graph answer with the LLM answer and classifies how the two
//! relate to the gold answer.

use serde::{Deserialize, Serialize};

use crate::chain::RelationChain;
use crate::text::normalize_answer;

/// The graph answer wins whenever it exists; otherwise the LLM answer.
pub fn finalize(llm_answer: Option<&str>, kbqa_answer: Option<&str>) -> Option<String> {
    kbqa_answer.or(llm_answer).map(str::to_owned)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnswer {
    pub answer: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

impl GoldAnswer {
    pub fn new(answer: impl Into<String>) -> Self {
        Self {
            answer: answer.into(),
            aliases: Vec::new(),
        }
    }

    pub fn with_aliases<I, S>(mut self, aliases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.aliases = aliases.into_iter().map(Into::into).collect();
        self
    }

    /// Match against the answer only.
    pub fn matches_strict(&self, candidate: &str) -> bool {
        let c = normalize_answer(candidate);
        !c.is_empty() && c == normalize_answer(&self.answer)
    }

    /// Match against the answer or any alias.
    pub fn matches(&self, candidate: &str) -> bool {
        let c = normalize_answer(candidate);
        !c.is_empty()
            && std::iter::once(&self.answer)
                .chain(&self.aliases)
                .any(|g| normalize_answer(g) == c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutcomeClass {
    /// Both correct with the same normalized answer.
    Agree,
    LlmWrongKgRight,
    LlmRightKgWrong,
    /// The graph produced no answer.
    KgSilent,
    BothWrong,
    /// Both correct but with different surface forms (e.g. two aliases).
    BothRightDiffer,
}

impl OutcomeClass {
    pub const ALL: [OutcomeClass; 6] = [
        OutcomeClass::Agree,
        OutcomeClass::LlmWrongKgRight,
        OutcomeClass::LlmRightKgWrong,
        OutcomeClass::KgSilent,
        OutcomeClass::BothWrong,
        OutcomeClass::BothRightDiffer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeClass::Agree => "agree",
            OutcomeClass::LlmWrongKgRight => "llm_wrong_kg_right",
            OutcomeClass::LlmRightKgWrong => "llm_right_kg_wrong",
            OutcomeClass::KgSilent => "kg_silent",
            OutcomeClass::BothWrong => "both_wrong",
            OutcomeClass::BothRightDiffer => "both_right_differ",
        }
    }
}

pub fn classify(
    llm_answer: Option<&str>,
    kbqa_answer: Option<&str>,
    gold: &GoldAnswer,
) -> OutcomeClass {
    let Some(kg) = kbqa_answer else {
        return OutcomeClass::KgSilent;
    };
    let llm_ok = llm_answer.is_some_and(|a| gold.matches(a));
    match (llm_ok, gold.matches(kg)) {
        (true, true) => {
            if normalize_answer(llm_answer.unwrap_or_default()) == normalize_answer(kg) {
                OutcomeClass::Agree
            } else {
                OutcomeClass::BothRightDiffer
            }
        }
        (false, true) => OutcomeClass::LlmWrongKgRight,
        (true, false) => OutcomeClass::LlmRightKgWrong,
        (false, false) => OutcomeClass::BothWrong,
    }
}

/// Per-question trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question: String,
    pub llm_answer: Option<String>,
    pub kbqa_answer: Option<String>,
    pub final_answer: Option<String>,
    pub outcome: OutcomeClass,
    pub chain: Option<RelationChain>,
    pub retrieved_facts: Vec<String>,
    /// Failures hit while answering; the record still scores.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    /// Non-fatal observations, such as a question naming several known
    /// entities.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl AnswerRecord {
    pub fn new(
        question: impl Into<String>,
        llm_answer: Option<String>,
        kbqa_answer: Option<String>,
        gold: &GoldAnswer,
    ) -> Self {
        let final_answer = finalize(llm_answer.as_deref(), kbqa_answer.as_deref());
        let outcome = classify(llm_answer.as_deref(), kbqa_answer.as_deref(), gold);
        Self {
            question: question.into(),
            llm_answer,
            kbqa_answer,
            final_answer,
            outcome,
            chain: None,
            retrieved_facts: Vec::new(),
            errors: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn classify_outcome(&self, gold: &GoldAnswer) -> OutcomeClass {
        classify(
            self.llm_answer.as_deref(),
            self.kbqa_answer.as_deref(),
            gold,
        )
    }

    pub fn final_correct(&self, gold: &GoldAnswer) -> bool {
        self.final_answer
            .as_deref()
            .is_some_and(|a| gold.matches(a))
    }

    pub fn llm_correct(&self, gold: &GoldAnswer) -> bool {
        self.llm_answer.as_deref().is_some_and(|a| gold.matches(a))
    }
}
