//! Optional TOML configuration. Every key can also be given as a flag, and
//! flags win.
//!
//! ```toml
//! [eval]
//! k = 100                  # batch size
//! mode = "full"            # qa | kbqa | full
//! catalog = "mquake-cf"    # built-in name or path to a catalog file
//! seed = 0                 # batching shuffle seed
//! top_x = 6                # facts retrieved per question
//! report = "report.json"   # JSON report; the CSV trace goes next to it
//! layout = "auto"          # auto | native | mquake
//! snapshot = "base.tsv"    # extra base facts loaded before the dataset's own
//! sequential = false       # disable data-parallel execution
//!
//! [llm]
//! backend = "http"         # http | mock:<script.json>
//! url = "http://localhost:8000/v1/completions"
//! model = "my-model"
//! api_key_env = "LLM_API_KEY"
//! shape = "completion"     # completion | chat
//! timeout_secs = 60
//! retries = 1
//! debug = false            # log requests and responses (auth redacted)
//!
//! [embedding]
//! backend = "hashing"      # hashing | lexical | http
//! url = "http://localhost:8001/embed"
//! dim = 512                # hashing embedder dimension
//! timeout_secs = 60
//! normalize_relations = false  # map relation names by embedding similarity
//!
//! [prompts]
//! dir = "prompts/"         # overrides for triple.txt, chain.txt, qa.txt, *_shots.tsv
//!
//! [sparql]
//! endpoint = "http://localhost:7200/repositories/kg"
//! timeout_secs = 60
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

pub const DEFAULT_PATH: &str = "kgedit.toml";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub eval: EvalSection,
    pub llm: LlmSection,
    pub embedding: EmbeddingSection,
    pub prompts: PromptSection,
    pub sparql: SparqlSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub k: Option<usize>,
    pub mode: Option<String>,
    pub catalog: Option<String>,
    pub seed: Option<u64>,
    pub top_x: Option<usize>,
    pub report: Option<PathBuf>,
    pub layout: Option<String>,
    pub snapshot: Option<PathBuf>,
    pub sequential: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSection {
    pub backend: Option<String>,
    pub url: Option<String>,
    pub model: Option<String>,
    pub api_key_env: Option<String>,
    pub shape: Option<String>,
    pub timeout_secs: Option<u64>,
    pub retries: Option<u32>,
    pub debug: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub backend: Option<String>,
    pub url: Option<String>,
    pub dim: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub normalize_relations: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparqlSection {
    pub endpoint: Option<String>,
    pub timeout_secs: Option<u64>,
}

impl FileConfig {
    /// Reads `path`, or `kgedit.toml` in the working directory when no path
    /// is given and that file exists.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let path = match path {
            Some(p) => p.to_path_buf(),
            None if Path::new(DEFAULT_PATH).is_file() => PathBuf::from(DEFAULT_PATH),
            None => return Ok(Self::default()),
        };
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: Self =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }
}
