//! Synthetic benchmark generator with known gold paths.
//!
//! Every instance owns a private set of entities, so edits from one instance
//! never touch another instance's path. For each instance the generator
//! records the unedited facts, the edit sentences with their exact triples,
//! and the relation chain of its questions, which lets it emit scripted
//! oracle completions for every prompt the pipeline will send.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::QaInstance;
use crate::arbitration::GoldAnswer;
use crate::catalog::RelationCatalog;
use crate::chain::RelationChain;
use crate::error::Result;
use crate::llm::{MockRule, MockScript, MockScriptFile};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub instances: usize,
    pub seed: u64,
    pub min_hops: usize,
    pub max_hops: usize,
    pub max_edits: usize,
}

impl SyntheticConfig {
    pub fn new(instances: usize, seed: u64) -> Self {
        Self {
            instances,
            seed,
            min_hops: 2,
            max_hops: 4,
            max_edits: 4,
        }
    }
}

/// Ground truth kept alongside each generated instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticCase {
    pub instance: QaInstance,
    pub chain: RelationChain,
    /// (sentence, subject, relation, object) for every edit.
    pub edit_triples: Vec<(String, [String; 3])>,
    /// Answer before any edit is applied.
    pub original_answer: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticSuite {
    pub cases: Vec<SyntheticCase>,
}

const SYLLABLES: &[&str] = &[
    "ka", "lor", "ven", "tis", "mar", "quo", "bel", "dra", "nu", "sel", "tor", "vi", "zan", "rho",
    "pel", "gri", "sam", "ul", "fen", "ox",
];

struct Namer {
    next: usize,
}

impl Namer {
    // Single hyphenated token: unique, and never looks like a person name.
    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> String {
        let n = rng.random_range(2..=3);
        let mut stem: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        stem[..1].make_ascii_uppercase();
        self.next += 1;
        format!("{stem}-{}", self.next)
    }
}

fn nested_phrase(head: &str, relations: &[String]) -> String {
    let mut phrase = head.to_string();
    for r in relations {
        phrase = format!("the {r} of {phrase}");
    }
    phrase
}

fn edit_sentence(subject: &str, relation: &str, object: &str) -> String {
    format!("The {relation} of {subject} is {object}.")
}

/// Triple-prompt input line the pipeline renders for `sentence`.
fn triple_suffix(sentence: &str) -> String {
    format!("Sentence: {sentence}\nTriple:")
}

fn chain_suffix(question: &str) -> String {
    format!("Question: {question}\nChain:")
}

fn answer_suffix(question: &str) -> String {
    format!("Question: {question}\nAnswer:")
}

pub fn generate(cfg: &SyntheticConfig, catalog: &RelationCatalog) -> SyntheticSuite {
    assert!(cfg.min_hops >= 1 && cfg.min_hops <= cfg.max_hops);
    assert!(cfg.max_edits >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut namer = Namer { next: 0 };
    let relations = catalog.relations();
    let cases = (0..cfg.instances)
        .map(|idx| {
            let hops = rng.random_range(cfg.min_hops..=cfg.max_hops);
            let chain_rels: Vec<String> =
                relations.choose_multiple(&mut rng, hops).cloned().collect();
            let n_edits = rng.random_range(1..=hops.min(cfg.max_edits));
            let mut positions: Vec<usize> = (0..hops).collect();
            positions.shuffle(&mut rng);
            let edited: BTreeSet<usize> = positions[..n_edits].iter().copied().collect();

            let head = namer.fresh(&mut rng);
            let mut base = Vec::new();
            // Original path.
            let mut original = Vec::with_capacity(hops);
            let mut cur = head.clone();
            for r in &chain_rels {
                let next = namer.fresh(&mut rng);
                base.push([cur.clone(), r.clone(), next.clone()]);
                original.push(next.clone());
                cur = next;
            }
            let original_answer = cur;

            // Post-edit path.
            let mut edit_triples = Vec::new();
            let mut cur = head.clone();
            let mut diverged = false;
            for (j, r) in chain_rels.iter().enumerate() {
                if edited.contains(&j) {
                    if diverged {
                        // Give the edit something to replace.
                        base.push([cur.clone(), r.clone(), namer.fresh(&mut rng)]);
                    }
                    let new_object = namer.fresh(&mut rng);
                    let sentence = edit_sentence(&cur, r, &new_object);
                    edit_triples.push((sentence, [cur.clone(), r.clone(), new_object.clone()]));
                    cur = new_object;
                    diverged = true;
                } else if diverged {
                    let next = namer.fresh(&mut rng);
                    base.push([cur.clone(), r.clone(), next.clone()]);
                    cur = next;
                } else {
                    cur = original[j].clone();
                }
            }
            let gold = cur;

            let phrase = nested_phrase(&head, &chain_rels);
            let questions = vec![
                format!("What is {phrase}?"),
                format!("Can you name {phrase}?"),
                format!("Tell me {phrase}."),
            ];
            SyntheticCase {
                instance: QaInstance {
                    id: format!("syn-{idx:05}"),
                    questions,
                    edits: edit_triples.iter().map(|(s, _)| s.clone()).collect(),
                    gold: GoldAnswer::new(gold),
                    hop_count: hops,
                    base_triples: base,
                },
                chain: RelationChain {
                    head,
                    relations: chain_rels,
                },
                edit_triples,
                original_answer,
            }
        })
        .collect();
    SyntheticSuite { cases }
}

impl SyntheticSuite {
    pub fn instances(&self) -> Vec<QaInstance> {
        self.cases.iter().map(|c| c.instance.clone()).collect()
    }

    /// Rules answering every triple and chain prompt correctly.
    pub fn extraction_rules(&self) -> Vec<MockRule> {
        let mut rules = Vec::new();
        for case in &self.cases {
            for (sentence, [s, r, o]) in &case.edit_triples {
                rules.push(MockRule::suffix(
                    triple_suffix(sentence),
                    format!("{s}->{r}->{o}"),
                ));
            }
            for q in &case.instance.questions {
                rules.push(MockRule::suffix(chain_suffix(q), case.chain.render()));
            }
        }
        rules
    }

    /// Rules for an idealized reader: it answers with the gold answer when
    /// every edit of the instance is among the facts shown, and with the
    /// pre-edit answer otherwise.
    pub fn qa_rules(&self) -> Vec<MockRule> {
        let mut rules = Vec::new();
        for case in &self.cases {
            for q in &case.instance.questions {
                rules.push(MockRule {
                    suffix: Some(answer_suffix(q)),
                    contains: case
                        .instance
                        .edits
                        .iter()
                        .map(|e| format!("- {e}"))
                        .collect(),
                    response: case.instance.gold.answer.clone(),
                    ..MockRule::default()
                });
                rules.push(MockRule::suffix(
                    answer_suffix(q),
                    case.original_answer.clone(),
                ));
            }
        }
        rules
    }

    pub fn oracle_script_file(&self) -> MockScriptFile {
        let mut rules = self.extraction_rules();
        rules.extend(self.qa_rules());
        MockScriptFile {
            rules,
            default_response: "unknown".into(),
        }
    }

    /// One script serving extraction and answering prompts.
    pub fn oracle(&self) -> Result<MockScript> {
        MockScript::from_script_file(self.oracle_script_file())
    }

    pub fn extraction_oracle(&self) -> Result<MockScript> {
        MockScript::from_script_file(MockScriptFile {
            rules: self.extraction_rules(),
            default_response: "unknown".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite(n: usize) -> SyntheticSuite {
        generate(
            &SyntheticConfig::new(n, 11),
            &RelationCatalog::builtin("mquake-cf").unwrap(),
        )
    }

    #[test]
    fn instances_are_valid() {
        for (i, inst) in suite(200).instances().iter().enumerate() {
            inst.validate(i).unwrap();
            assert!(inst.edits.len() <= inst.hop_count);
        }
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(suite(20).cases, suite(20).cases);
    }

    #[test]
    fn gold_differs_from_original_answer() {
        for c in suite(100).cases {
            assert_ne!(c.instance.gold.answer, c.original_answer);
        }
    }
}
