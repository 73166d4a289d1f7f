//! Builds language-model, embedding and prompt backends from flags and
//! configuration.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use kgedit::embedding::{EmbeddingProvider, HashingEmbedder, HttpEmbedder};
use kgedit::eval::Ports;
use kgedit::llm::{HttpCompletionClient, HttpLlmConfig, PayloadShape};
use kgedit::prompt::Prompts;
use kgedit::{CompletionPort, LexiconPersonDetector, MockScript, RelationCatalog};

use crate::config::FileConfig;
use crate::BackendArgs;

pub fn llm(args: &BackendArgs, config: &FileConfig) -> anyhow::Result<Arc<dyn CompletionPort>> {
    let section = &config.llm;
    let backend = args
        .llm
        .clone()
        .or_else(|| section.backend.clone())
        .context("no LLM backend: pass --llm http or --llm mock:<script.json>")?;
    if let Some(path) = backend.strip_prefix("mock:") {
        let script = MockScript::load(Path::new(path))
            .with_context(|| format!("loading mock script {path}"))?;
        return Ok(Arc::new(script));
    }
    if backend != "http" {
        bail!("unknown LLM backend `{backend}` (expected http or mock:<path>)");
    }
    let url = args
        .llm_url
        .clone()
        .or_else(|| section.url.clone())
        .context("the http backend needs --llm-url or [llm] url")?;
    let model = args
        .model
        .clone()
        .or_else(|| section.model.clone())
        .context("the http backend needs --model or [llm] model")?;
    let mut http = HttpLlmConfig::new(url, model);
    http.api_key_env = section.api_key_env.clone();
    http.shape = match section.shape.as_deref() {
        None | Some("completion") => PayloadShape::Completion,
        Some("chat") => PayloadShape::Chat,
        Some(other) => bail!("unknown payload shape `{other}` (expected completion or chat)"),
    };
    if let Some(secs) = section.timeout_secs {
        http.timeout = Duration::from_secs(secs);
    }
    if let Some(retries) = section.retries {
        http.retries = retries;
    }
    http.debug = section.debug.unwrap_or(false);
    Ok(Arc::new(HttpCompletionClient::new(http)))
}

pub fn embedder(
    args: &BackendArgs,
    config: &FileConfig,
) -> anyhow::Result<Option<Arc<dyn EmbeddingProvider>>> {
    let section = &config.embedding;
    let backend = args
        .embedder
        .clone()
        .or_else(|| section.backend.clone())
        .unwrap_or_else(|| "hashing".into());
    Ok(match backend.as_str() {
        "hashing" => {
            let dim = section.dim.unwrap_or(512);
            if dim == 0 {
                bail!("[embedding] dim must be at least 1");
            }
            Some(Arc::new(HashingEmbedder::new(dim)))
        }
        "lexical" => None,
        "http" => {
            let url = args
                .embedding_url
                .clone()
                .or_else(|| section.url.clone())
                .context("the http embedder needs --embedding-url or [embedding] url")?;
            let timeout = Duration::from_secs(section.timeout_secs.unwrap_or(60));
            Some(Arc::new(HttpEmbedder::new(url, timeout)))
        }
        other => bail!("unknown embedder `{other}` (expected hashing, lexical or http)"),
    })
}

pub fn catalog(
    name: &str,
    embedder: Option<&Arc<dyn EmbeddingProvider>>,
    config: &FileConfig,
) -> anyhow::Result<Arc<RelationCatalog>> {
    let mut catalog =
        RelationCatalog::load(name).with_context(|| format!("loading catalog {name}"))?;
    if config.embedding.normalize_relations.unwrap_or(false) {
        if let Some(provider) = embedder {
            catalog = catalog.with_embeddings(Arc::clone(provider))?;
        }
    }
    Ok(Arc::new(catalog))
}

pub fn prompts(
    args: &BackendArgs,
    config: &FileConfig,
    catalog: &str,
) -> anyhow::Result<Option<Prompts>> {
    let Some(dir) = args.prompts.as_ref().or(config.prompts.dir.as_ref()) else {
        return Ok(None);
    };
    Ok(Some(Prompts::from_dir(dir, catalog)?))
}

pub fn ports(llm: Arc<dyn CompletionPort>, embedder: Option<Arc<dyn EmbeddingProvider>>) -> Ports {
    Ports {
        extraction_llm: Arc::clone(&llm),
        qa_llm: llm,
        embedder,
        person: Arc::new(LexiconPersonDetector::default()),
    }
}
