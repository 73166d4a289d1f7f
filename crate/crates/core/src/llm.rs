//! Completion port with a scripted mock and an HTTP client.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, LlmFailure, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f32,
    pub stop: Vec<String>,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            max_tokens: 256,
            temperature: 0.0,
            stop: Vec::new(),
        }
    }

    pub fn max_tokens(mut self, n: u32) -> Self {
        self.max_tokens = n;
        self
    }

    pub fn stop(mut self, stop: impl Into<String>) -> Self {
        self.stop.push(stop.into());
        self
    }
}

pub trait CompletionPort: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmFailure>;
}

fn check_prompt(req: &CompletionRequest) -> Result<(), LlmFailure> {
    if req.prompt.trim().is_empty() {
        return Err(LlmFailure::MalformedPayload("empty prompt".into()));
    }
    Ok(())
}

/// Cuts `text` at the earliest occurrence of any stop sequence.
pub fn apply_stop(text: &str, stop: &[String]) -> String {
    let cut = stop
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| text.find(s.as_str()))
        .min()
        .unwrap_or(text.len());
    text[..cut].to_string()
}

/// One scripted rule. Every condition that is set must hold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    /// The prompt (ignoring trailing whitespace) ends with this text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suffix: Option<String>,
    /// Each of these substrings appears somewhere in the prompt.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contains: Vec<String>,
    /// Regular expression searched in the prompt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub response: String,
}

impl MockRule {
    pub fn contains(needle: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            contains: vec![needle.into()],
            response: response.into(),
            ..Self::default()
        }
    }

    pub fn suffix(suffix: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            suffix: Some(suffix.into()),
            response: response.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
struct CompiledRule {
    suffix: Option<String>,
    contains: Vec<String>,
    pattern: Option<Regex>,
    response: String,
}

impl CompiledRule {
    fn matches(&self, prompt: &str) -> bool {
        if let Some(suffix) = &self.suffix {
            if !prompt.trim_end().ends_with(suffix.trim_end()) {
                return false;
            }
        }
        if !self.contains.iter().all(|c| prompt.contains(c.as_str())) {
            return false;
        }
        self.pattern.as_ref().is_none_or(|p| p.is_match(prompt))
    }
}

/// On-disk form of a [`MockScript`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockScriptFile {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default)]
    pub default_response: String,
}

/// Deterministic completion backend: the first matching rule's response, or
/// the default response.
#[derive(Debug, Clone)]
pub struct MockScript {
    rules: Vec<CompiledRule>,
    default_response: String,
    // Rules with a suffix condition, keyed by trimmed suffix length, then by
    // the suffix text; and the rules without one.
    by_suffix: BTreeMap<usize, HashMap<String, Vec<usize>>>,
    unsuffixed: Vec<usize>,
}

impl MockScript {
    pub fn new(default_response: impl Into<String>) -> Self {
        Self {
            rules: Vec::new(),
            default_response: default_response.into(),
            by_suffix: BTreeMap::new(),
            unsuffixed: Vec::new(),
        }
    }

    pub fn with_rule(mut self, rule: MockRule) -> Result<Self> {
        self.push(rule)?;
        Ok(self)
    }

    pub fn push(&mut self, rule: MockRule) -> Result<()> {
        let pattern = rule
            .pattern
            .as_deref()
            .map(Regex::new)
            .transpose()
            .map_err(|e| Error::Config(format!("bad mock pattern: {e}")))?;
        let index = self.rules.len();
        match rule.suffix.as_deref().map(str::trim_end) {
            Some(suffix) => self
                .by_suffix
                .entry(suffix.len())
                .or_default()
                .entry(suffix.to_string())
                .or_default()
                .push(index),
            None => self.unsuffixed.push(index),
        }
        self.rules.push(CompiledRule {
            suffix: rule.suffix,
            contains: rule.contains,
            pattern,
            response: rule.response,
        });
        Ok(())
    }

    pub fn from_script_file(file: MockScriptFile) -> Result<Self> {
        let mut script = Self::new(file.default_response);
        for rule in file.rules {
            script.push(rule)?;
        }
        Ok(script)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: MockScriptFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_script_file(file)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn respond(&self, prompt: &str) -> &str {
        let tail = prompt.trim_end();
        let mut candidates: Vec<usize> = self.unsuffixed.clone();
        for (&len, rules) in &self.by_suffix {
            let Some(start) = tail.len().checked_sub(len) else {
                break;
            };
            if let Some(hits) = tail.get(start..).and_then(|t| rules.get(t)) {
                candidates.extend(hits);
            }
        }
        candidates.sort_unstable();
        candidates
            .into_iter()
            .map(|i| &self.rules[i])
            .find(|r| r.matches(prompt))
            .map_or(self.default_response.as_str(), |r| r.response.as_str())
    }
}

impl CompletionPort for MockScript {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmFailure> {
        check_prompt(req)?;
        Ok(apply_stop(self.respond(&req.prompt), &req.stop))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadShape {
    /// `{"prompt": ...}` → `choices[0].text`
    #[default]
    Completion,
    /// `{"messages": [...]}` → `choices[0].message.content`
    Chat,
}

#[derive(Debug, Clone)]
pub struct HttpLlmConfig {
    pub url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token, if any.
    pub api_key_env: Option<String>,
    pub shape: PayloadShape,
    pub timeout: Duration,
    pub retries: u32,
    pub debug: bool,
}

impl HttpLlmConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            model: model.into(),
            api_key_env: None,
            shape: PayloadShape::default(),
            timeout: Duration::from_secs(60),
            retries: 1,
            debug: false,
        }
    }
}

/// Client for OpenAI-style completion and chat endpoints.
pub struct HttpCompletionClient {
    config: HttpLlmConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpCompletionClient {
    pub fn new(config: HttpLlmConfig) -> Self {
        let api_key = config
            .api_key_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok());
        let agent = crate::http::agent(config.timeout);
        Self {
            config,
            api_key,
            agent,
        }
    }

    fn payload(&self, req: &CompletionRequest) -> Value {
        let mut body = match self.config.shape {
            PayloadShape::Completion => json!({
                "model": self.config.model,
                "prompt": req.prompt,
            }),
            PayloadShape::Chat => json!({
                "model": self.config.model,
                "messages": [{"role": "user", "content": req.prompt}],
            }),
        };
        body["max_tokens"] = json!(req.max_tokens);
        body["temperature"] = json!(req.temperature);
        if !req.stop.is_empty() {
            body["stop"] = json!(req.stop);
        }
        body
    }

    fn extract(&self, body: &Value) -> Result<String, LlmFailure> {
        let choice = body
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| LlmFailure::MalformedPayload("missing choices[0]".into()))?;
        let text = match self.config.shape {
            PayloadShape::Completion => choice.get("text"),
            PayloadShape::Chat => choice.get("message").and_then(|m| m.get("content")),
        };
        text.and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| LlmFailure::MalformedPayload("missing completion text".into()))
    }

    fn attempt(&self, payload: &Value) -> Result<Value, Attempt> {
        let mut request = self.agent.post(&self.config.url);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = request
            .send_json(payload)
            .map_err(|e| Attempt::Retry(crate::http::failure(e, self.config.timeout)))?;
        let status = resp.status();
        if !status.is_success() {
            let failure = crate::http::status_failure(&mut resp);
            return Err(if status.as_u16() == 429 || status.is_server_error() {
                Attempt::Retry(failure)
            } else {
                Attempt::Fatal(failure)
            });
        }
        resp.body_mut()
            .read_json()
            .map_err(|e| Attempt::Fatal(LlmFailure::MalformedPayload(e.to_string())))
    }
}

enum Attempt {
    Retry(LlmFailure),
    Fatal(LlmFailure),
}

impl CompletionPort for HttpCompletionClient {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmFailure> {
        check_prompt(req)?;
        let payload = self.payload(req);
        if self.config.debug {
            let auth = if self.api_key.is_some() {
                "Bearer ***"
            } else {
                "none"
            };
            log::debug!("POST {} auth={auth} payload={payload}", self.config.url);
        }
        let mut tries = 0;
        let body = loop {
            match self.attempt(&payload) {
                Ok(body) => break body,
                Err(Attempt::Retry(f)) if tries < self.config.retries => {
                    log::warn!("completion request failed ({f}); retrying");
                    tries += 1;
                }
                Err(Attempt::Retry(f) | Attempt::Fatal(f)) => return Err(f),
            }
        };
        if self.config.debug {
            log::debug!("response {body}");
        }
        let text = self.extract(&body)?;
        Ok(apply_stop(&text, &req.stop))
    }
}
