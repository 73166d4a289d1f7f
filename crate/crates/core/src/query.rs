//! Compiles relation chains into SPARQL path queries and executes them,
//! either against the local graph or a remote SPARQL endpoint.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Deserialize;

use crate::chain::{variable_name, RelationChain};
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;

pub const ENTITY_NS: &str = "http://www.kg/entity/";
pub const RELATION_NS: &str = "http://www.kg/relation/";

/// Maps labels to the short identifiers used in query text.
pub trait IdResolver {
    fn entity_id(&self, label: &str) -> Option<String>;
    fn relation_id(&self, label: &str) -> Option<String>;
}

impl IdResolver for KnowledgeGraph {
    fn entity_id(&self, label: &str) -> Option<String> {
        self.entity(label).map(|e| e.id.clone())
    }

    fn relation_id(&self, label: &str) -> Option<String> {
        self.relation_ref(label).map(|r| r.id.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledQuery {
    pub text: String,
    /// Variables in order of appearance, ending with `id` and `label`.
    pub variable_names: Vec<String>,
    pub hop_count: usize,
}

/// Emits the path query for `chain`: one triple pattern per hop threading
/// ?x, ?y, ?z, ... into ?id, then the label pattern and `LIMIT 1`.
pub fn build_query(chain: &RelationChain, ids: &dyn IdResolver) -> Result<CompiledQuery> {
    if chain.relations.is_empty() {
        return Err(Error::EmptyChain);
    }
    let head = ids
        .entity_id(&chain.head)
        .ok_or_else(|| Error::UnresolvableEntity(chain.head.clone()))?;
    let hops = chain.relations.len();
    let mut variable_names = Vec::with_capacity(hops + 1);
    let mut text = format!(
        "PREFIX ent: <{ENTITY_NS}>\nPREFIX rel: <{RELATION_NS}>\nSELECT DISTINCT ?id ?label WHERE {{\n"
    );
    let mut subject = format!("ent:{head}");
    for (i, relation) in chain.relations.iter().enumerate() {
        let rel = ids
            .relation_id(relation)
            .ok_or_else(|| Error::UnresolvableRelation(relation.clone()))?;
        let object = if i + 1 == hops {
            "id".to_string()
        } else {
            variable_name(i)
        };
        let _ = writeln!(text, "   {subject} rel:{rel} ?{object}.");
        subject = format!("?{object}");
        variable_names.push(object);
    }
    text.push_str("   ?id rdfs:label ?label.\n}\nLIMIT 1");
    variable_names.push("label".into());
    Ok(CompiledQuery {
        text,
        variable_names,
        hop_count: hops,
    })
}

/// Answer of a path query: the terminal entity's identifier and label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAnswer {
    pub id: String,
    pub label: String,
}

pub fn execute_local(chain: &RelationChain, graph: &KnowledgeGraph) -> Option<QueryAnswer> {
    graph.chain_query(chain).map(|e| QueryAnswer {
        id: e.id.clone(),
        label: e.label.clone(),
    })
}

#[derive(Deserialize)]
struct SparqlResults {
    results: SparqlBindings,
}

#[derive(Deserialize)]
struct SparqlBindings {
    bindings: Vec<serde_json::Map<String, serde_json::Value>>,
}

fn binding_value(
    binding: &serde_json::Map<String, serde_json::Value>,
    var: &str,
) -> Result<String> {
    binding
        .get(var)
        .and_then(|b| b.get("value"))
        .and_then(|v| v.as_str())
        .map(str::to_owned)
        .ok_or_else(|| Error::MalformedResponse(format!("binding lacks ?{var}")))
}

/// Parses a `application/sparql-results+json` document into the first
/// (?id, ?label) binding. Entity IRIs in the local namespace are shortened
/// back to their identifiers.
pub fn parse_sparql_json(body: &str) -> Result<Option<QueryAnswer>> {
    let parsed: SparqlResults =
        serde_json::from_str(body).map_err(|e| Error::MalformedResponse(e.to_string()))?;
    let Some(first) = parsed.results.bindings.first() else {
        return Ok(None);
    };
    let id = binding_value(first, "id")?;
    let label = binding_value(first, "label")?;
    let id = id.strip_prefix(ENTITY_NS).map(str::to_owned).unwrap_or(id);
    Ok(Some(QueryAnswer { id, label }))
}

/// Client for a SPARQL-over-HTTP endpoint (form-encoded POST).
pub struct SparqlEndpoint {
    url: String,
    agent: ureq::Agent,
}

impl SparqlEndpoint {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        Self {
            url: url.into(),
            agent: crate::http::agent(timeout),
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn execute(&self, query: &CompiledQuery) -> Result<Option<QueryAnswer>> {
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Accept", "application/sparql-results+json")
            .send_form([("query", query.text.as_str())])
            .map_err(|e| Error::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::Transport(format!("HTTP {status}")));
        }
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Transport(e.to_string()))?;
        parse_sparql_json(&body)
    }
}

/// One-shot remote execution with the default 60 s timeout.
pub fn execute_remote(query: &CompiledQuery, endpoint_url: &str) -> Result<Option<QueryAnswer>> {
    SparqlEndpoint::new(endpoint_url, Duration::from_secs(60)).execute(query)
}
