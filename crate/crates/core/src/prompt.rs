//! Few-shot prompt templates.
//!
//! Templates are plain text with `{{input}}`, `{{shots}}`, `{{relations}}`
//! and `{{facts}}` placeholders. Exemplars are tab-separated
//! `input<TAB>output` lines; `#` lines are comments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    TripleExtraction,
    ChainExtraction,
    Qa,
}

impl Task {
    fn labels(self) -> (&'static str, &'static str) {
        match self {
            Task::TripleExtraction => ("Sentence", "Triple"),
            Task::ChainExtraction => ("Question", "Chain"),
            Task::Qa => ("Question", "Answer"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub task: Task,
    pub body: String,
    pub shots: Vec<(String, String)>,
}

impl PromptTemplate {
    pub fn new(task: Task, body: impl Into<String>, shots: Vec<(String, String)>) -> Self {
        Self {
            task,
            body: body.into(),
            shots,
        }
    }

    pub fn from_files(task: Task, body: &Path, shots: Option<&Path>) -> Result<Self> {
        let body = fs::read_to_string(body)?;
        let shots = match shots {
            Some(path) => parse_shots(&fs::read_to_string(path)?, path)?,
            None => Vec::new(),
        };
        Ok(Self::new(task, body, shots))
    }

    fn render_shots(&self) -> String {
        let (input_label, output_label) = self.task.labels();
        self.shots
            .iter()
            .map(|(i, o)| format!("{input_label}: {i}\n{output_label}: {o}\n\n"))
            .collect()
    }

    /// Fills the template. `relations` and `facts` replace their
    /// placeholders when present in the body.
    pub fn render(&self, input: &str, relations: &[String], facts: &[String]) -> String {
        let relations = relations
            .iter()
            .map(|r| format!("'{r}'"))
            .collect::<Vec<_>>()
            .join(", ");
        let facts = facts
            .iter()
            .map(|f| format!("- {f}"))
            .collect::<Vec<_>>()
            .join("\n");
        self.body
            .replace("{{shots}}", &self.render_shots())
            .replace("{{relations}}", &format!("[{relations}]"))
            .replace("{{facts}}", &facts)
            .replace("{{input}}", input.trim())
    }
}

pub fn parse_shots(contents: &str, source: &Path) -> Result<Vec<(String, String)>> {
    let mut shots = Vec::new();
    for (n, line) in contents.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((input, output)) = line.split_once('\t') else {
            return Err(Error::Parse {
                path: source.to_path_buf(),
                line: n + 1,
                message: "expected input<TAB>output".into(),
            });
        };
        shots.push((input.trim().to_string(), output.trim().to_string()));
    }
    Ok(shots)
}

const TRIPLE: &str = include_str!("../data/prompts/triple.txt");
const TRIPLE_SHOTS: &str = include_str!("../data/prompts/triple_shots.tsv");
const CHAIN: &str = include_str!("../data/prompts/chain.txt");
const CHAIN_SHOTS_CF: &str = include_str!("../data/prompts/chain_shots_cf.tsv");
const CHAIN_SHOTS_T: &str = include_str!("../data/prompts/chain_shots_t.tsv");
const QA: &str = include_str!("../data/prompts/qa.txt");

/// The three templates the pipeline uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompts {
    pub triple: PromptTemplate,
    pub chain: PromptTemplate,
    pub qa: PromptTemplate,
}

impl Prompts {
    /// Built-in templates; the chain exemplar set follows the catalog
    /// (`mquake-t` gets the 3-shot set, anything else the 4-shot set).
    pub fn builtin(catalog: &str) -> Self {
        let builtin =
            |s: &str| parse_shots(s, Path::new("<builtin>")).expect("valid built-in shots");
        let chain_shots = if catalog == "mquake-t" {
            builtin(CHAIN_SHOTS_T)
        } else {
            builtin(CHAIN_SHOTS_CF)
        };
        Self {
            triple: PromptTemplate::new(Task::TripleExtraction, TRIPLE, builtin(TRIPLE_SHOTS)),
            chain: PromptTemplate::new(Task::ChainExtraction, CHAIN, chain_shots),
            qa: PromptTemplate::new(Task::Qa, QA, Vec::new()),
        }
    }

    /// Built-in templates with per-file overrides from `dir`: `triple.txt`,
    /// `chain.txt`, `qa.txt`, `triple_shots.tsv` and `chain_shots.tsv`.
    /// Missing files keep the built-in version.
    pub fn from_dir(dir: &Path, catalog: &str) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "prompt directory {} does not exist",
                dir.display()
            )));
        }
        let mut prompts = Self::builtin(catalog);
        let read = |name: &str| -> Result<Option<(String, std::path::PathBuf)>> {
            let path = dir.join(name);
            if path.is_file() {
                Ok(Some((fs::read_to_string(&path)?, path)))
            } else {
                Ok(None)
            }
        };
        for (name, template) in [
            ("triple.txt", &mut prompts.triple),
            ("chain.txt", &mut prompts.chain),
            ("qa.txt", &mut prompts.qa),
        ] {
            if let Some((body, _)) = read(name)? {
                template.body = body;
            }
        }
        for (name, template) in [
            ("triple_shots.tsv", &mut prompts.triple),
            ("chain_shots.tsv", &mut prompts.chain),
        ] {
            if let Some((contents, path)) = read(name)? {
                template.shots = parse_shots(&contents, &path)?;
            }
        }
        Ok(prompts)
    }
}
