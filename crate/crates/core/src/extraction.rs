//! LLM-driven extraction of edit triples and question relation chains, plus
//! the deterministic post-processing applied to raw model output.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::RelationCatalog;
use crate::chain::RelationChain;
use crate::error::{Error, Result};
use crate::llm::{CompletionPort, CompletionRequest};
use crate::prompt::Prompts;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactTripleDraft {
    pub subject: String,
    pub relation: String,
    pub object: String,
    /// The relation emitted by the model was not canonical and was mapped.
    pub normalized: bool,
    /// Subject and object were swapped by the orientation check.
    pub orientation_corrected: bool,
}

pub trait PersonDetector: Send + Sync {
    fn is_person(&self, label: &str) -> bool;
}

const FIRST_NAMES: &[&str] = &[
    "aaron",
    "adam",
    "alan",
    "albert",
    "alex",
    "alexander",
    "alice",
    "amy",
    "andrew",
    "angela",
    "anna",
    "anne",
    "barack",
    "ben",
    "benjamin",
    "bill",
    "bob",
    "bongbong",
    "boris",
    "brian",
    "carlos",
    "charles",
    "chris",
    "christopher",
    "daniel",
    "david",
    "donald",
    "edward",
    "elizabeth",
    "emily",
    "emma",
    "eric",
    "erik",
    "frank",
    "fumio",
    "george",
    "henry",
    "jack",
    "james",
    "jane",
    "jennifer",
    "jessica",
    "joe",
    "joey",
    "john",
    "jose",
    "joseph",
    "juan",
    "julia",
    "justin",
    "karen",
    "kieron",
    "laura",
    "linda",
    "lionel",
    "lisa",
    "maria",
    "mark",
    "mary",
    "michael",
    "mike",
    "narendra",
    "olivia",
    "paul",
    "peter",
    "richard",
    "rishi",
    "robert",
    "sarah",
    "scott",
    "stephen",
    "steven",
    "susan",
    "thomas",
    "tim",
    "tom",
    "vladimir",
    "william",
    "xi",
];

const TITLES: &[&str] = &[
    "mr",
    "mrs",
    "ms",
    "dr",
    "sir",
    "dame",
    "lord",
    "lady",
    "king",
    "queen",
    "prince",
    "princess",
    "president",
    "pope",
    "saint",
    "st",
];

// Tokens that mark places, organizations and works rather than people.
const NON_PERSON: &[&str] = &[
    "airlines",
    "airport",
    "association",
    "bank",
    "basketball",
    "church",
    "city",
    "club",
    "college",
    "company",
    "corporation",
    "council",
    "county",
    "cricket",
    "cup",
    "district",
    "east",
    "empire",
    "entertainment",
    "fc",
    "federation",
    "football",
    "games",
    "group",
    "inc",
    "institute",
    "island",
    "islands",
    "kingdom",
    "lake",
    "language",
    "league",
    "ltd",
    "ministry",
    "motors",
    "mountain",
    "museum",
    "network",
    "new",
    "news",
    "north",
    "ocean",
    "park",
    "party",
    "pictures",
    "press",
    "province",
    "radio",
    "records",
    "republic",
    "river",
    "school",
    "sea",
    "south",
    "state",
    "states",
    "station",
    "street",
    "studios",
    "television",
    "times",
    "union",
    "united",
    "university",
    "west",
];

const PARTICLES: &[&str] = &[
    "de", "del", "da", "di", "van", "von", "der", "bin", "al", "le", "la",
];

/// Lexicon-backed person heuristic: a known title or first name, or two to
/// four capitalized name tokens with no organization or place marker.
#[derive(Debug, Clone)]
pub struct LexiconPersonDetector {
    first_names: HashSet<String>,
    titles: HashSet<String>,
    non_person: HashSet<String>,
}

impl Default for LexiconPersonDetector {
    fn default() -> Self {
        let set = |words: &[&str]| words.iter().map(|w| w.to_string()).collect();
        Self {
            first_names: set(FIRST_NAMES),
            titles: set(TITLES),
            non_person: set(NON_PERSON),
        }
    }
}

impl LexiconPersonDetector {
    pub fn add_first_name(&mut self, name: &str) {
        self.first_names.insert(name.to_lowercase());
    }
}

impl PersonDetector for LexiconPersonDetector {
    fn is_person(&self, label: &str) -> bool {
        let tokens: Vec<&str> = label.split_whitespace().collect();
        if tokens.is_empty() {
            return false;
        }
        let norm = |t: &str| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        };
        if tokens.iter().any(|t| self.non_person.contains(&norm(t))) {
            return false;
        }
        let first = norm(tokens[0]);
        if tokens.len() >= 2 && self.titles.contains(&first) {
            return true;
        }
        if self.first_names.contains(&first) && tokens.len() <= 4 {
            return true;
        }
        if !(2..=4).contains(&tokens.len()) {
            return false;
        }
        let name_like = |t: &str| {
            let mut chars = t.chars();
            let Some(c) = chars.next() else { return false };
            c.is_uppercase() && t.chars().all(|c| c.is_alphabetic() || "'.-".contains(c))
        };
        let capitalized = tokens.iter().filter(|t| name_like(t)).count();
        let all_ok = tokens
            .iter()
            .all(|t| name_like(t) || PARTICLES.contains(&t.to_lowercase().as_str()));
        all_ok && capitalized >= 2
    }
}

/// Swaps subject and object when the object is not a person but the
/// subject is. Applying it twice equals applying it once.
pub fn correct_triple_orientation(
    draft: FactTripleDraft,
    person: &dyn PersonDetector,
) -> FactTripleDraft {
    if !person.is_person(&draft.object) && person.is_person(&draft.subject) {
        FactTripleDraft {
            subject: draft.object,
            object: draft.subject,
            orientation_corrected: true,
            ..draft
        }
    } else {
        draft
    }
}

fn arrow_line(raw: &str) -> Option<&str> {
    raw.lines().find(|l| l.contains("->"))
}

/// Parses raw chain output: the first line containing `->` is split on the
/// delimiter; the first segment is the entity, later segments are relations
/// unless they start with `?`.
pub fn parse_chain_output(raw: &str) -> Result<(String, Vec<String>)> {
    let line =
        arrow_line(raw).ok_or_else(|| Error::MalformedChain("no line contains `->`".into()))?;
    let mut segments = line.split("->").map(str::trim);
    let entity = segments.next().unwrap_or_default();
    if entity.is_empty() {
        return Err(Error::MalformedChain(format!("empty entity in `{line}`")));
    }
    let relations = segments
        .filter(|s| !s.is_empty() && !s.starts_with('?'))
        .map(str::to_owned)
        .collect();
    Ok((entity.to_string(), relations))
}

/// Parses raw triple output into exactly three non-empty segments.
pub fn parse_triple_output(raw: &str) -> Result<(String, String, String)> {
    let line =
        arrow_line(raw).ok_or_else(|| Error::MalformedTriple("no line contains `->`".into()))?;
    let parts: Vec<&str> = line.split("->").map(str::trim).collect();
    match parts.as_slice() {
        [s, r, o] if !s.is_empty() && !r.is_empty() && !o.is_empty() => {
            Ok((s.to_string(), r.to_string(), o.to_string()))
        }
        _ => Err(Error::MalformedTriple(format!(
            "expected subject->relation->object, got `{line}`"
        ))),
    }
}

/// Bundles the ports extraction needs.
#[derive(Clone)]
pub struct Extractor {
    pub llm: Arc<dyn CompletionPort>,
    pub catalog: Arc<RelationCatalog>,
    pub prompts: Arc<Prompts>,
    pub person: Arc<dyn PersonDetector>,
}

impl Extractor {
    pub fn new(
        llm: Arc<dyn CompletionPort>,
        catalog: Arc<RelationCatalog>,
        prompts: Arc<Prompts>,
    ) -> Self {
        Self {
            llm,
            catalog,
            prompts,
            person: Arc::new(LexiconPersonDetector::default()),
        }
    }

    pub fn with_person_detector(mut self, person: Arc<dyn PersonDetector>) -> Self {
        self.person = person;
        self
    }

    fn ask(&self, prompt: String) -> Result<String> {
        let req = CompletionRequest::new(prompt).max_tokens(128).stop("\n\n");
        Ok(self.llm.complete(&req)?)
    }

    pub fn extract_fact_triple(&self, sentence: &str) -> Result<FactTripleDraft> {
        if sentence.trim().is_empty() {
            return Err(Error::MalformedTriple("empty sentence".into()));
        }
        let prompt = self
            .prompts
            .triple
            .render(sentence, self.catalog.relations(), &[]);
        let raw = self.ask(prompt)?;
        let (subject, relation, object) = parse_triple_output(&raw)?;
        let mapped = self.catalog.normalize(&relation)?;
        if !mapped.exact {
            log::debug!(
                "relation `{relation}` mapped to `{}` (score {:.3})",
                mapped.label,
                mapped.score
            );
        }
        let draft = FactTripleDraft {
            subject,
            relation: mapped.label,
            object,
            normalized: !mapped.exact,
            orientation_corrected: false,
        };
        Ok(correct_triple_orientation(draft, self.person.as_ref()))
    }

    pub fn extract_relation_chain(&self, question: &str) -> Result<RelationChain> {
        if question.trim().is_empty() {
            return Err(Error::MalformedChain("empty question".into()));
        }
        let prompt = self
            .prompts
            .chain
            .render(question, self.catalog.relations(), &[]);
        let raw = self.ask(prompt)?;
        let (head, relations) = parse_chain_output(&raw)?;
        if relations.is_empty() {
            return Err(Error::MalformedChain(format!("no relations in `{raw}`")));
        }
        let relations = relations
            .iter()
            .map(|r| self.catalog.normalize(r).map(|n| n.label))
            .collect::<Result<Vec<_>>>()?;
        Ok(RelationChain { head, relations })
    }
}
