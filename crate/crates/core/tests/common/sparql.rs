//! Basic-graph-pattern SPARQL evaluator behind a stub HTTP endpoint.

use std::collections::HashMap;
use std::sync::LazyLock;

use kgedit::query::{ENTITY_NS, RELATION_NS};
use kgedit::KnowledgeGraph;
use regex::Regex;
use serde_json::json;

use super::{form_field, Response, StubServer};

const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Iri(String),
    Literal(String),
}

impl Term {
    fn text(&self) -> &str {
        match self {
            Term::Iri(s) | Term::Literal(s) => s,
        }
    }
}

#[derive(Debug)]
enum Slot {
    Var(String),
    Const(Term),
}

/// Full IRI triples plus one rdfs:label triple per entity.
pub fn export_triples(g: &KnowledgeGraph) -> Vec<[Term; 3]> {
    let mut out: Vec<[Term; 3]> = g
        .triples()
        .map(|t| {
            [
                Term::Iri(format!("{ENTITY_NS}{}", t.subject.id)),
                Term::Iri(format!("{RELATION_NS}{}", t.relation.id)),
                Term::Iri(format!("{ENTITY_NS}{}", t.object.id)),
            ]
        })
        .collect();
    for e in g.entities() {
        out.push([
            Term::Iri(format!("{ENTITY_NS}{}", e.id)),
            Term::Iri(RDFS_LABEL.into()),
            Term::Literal(e.label.clone()),
        ]);
    }
    out
}

static PREFIX_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^\s*PREFIX\s+(\w*):\s*<([^>]*)>").unwrap());
static SELECT_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"SELECT\s+(?:DISTINCT\s+)?((?:\?\w+\s*)+)WHERE\s*\{([^}]*)\}").unwrap()
});
static LIMIT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"LIMIT\s+(\d+)").unwrap());

struct Parsed {
    select: Vec<String>,
    patterns: Vec<[Slot; 3]>,
    limit: Option<usize>,
}

fn parse(query: &str) -> Result<Parsed, String> {
    let mut prefixes: HashMap<String, String> = HashMap::new();
    prefixes.insert(
        "rdfs".into(),
        "http://www.w3.org/2000/01/rdf-schema#".into(),
    );
    for c in PREFIX_RE.captures_iter(query) {
        prefixes.insert(c[1].to_string(), c[2].to_string());
    }
    let c = SELECT_RE
        .captures(query)
        .ok_or("no SELECT ... WHERE block")?;
    let select = c[1]
        .split_whitespace()
        .map(|v| v.trim_start_matches('?').to_string())
        .collect();
    let slot = |tok: &str| -> Result<Slot, String> {
        if let Some(v) = tok.strip_prefix('?') {
            return Ok(Slot::Var(v.to_string()));
        }
        if let Some(iri) = tok.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return Ok(Slot::Const(Term::Iri(iri.to_string())));
        }
        let (p, local) = tok.split_once(':').ok_or(format!("bad term {tok}"))?;
        let ns = prefixes.get(p).ok_or(format!("undeclared prefix {p}"))?;
        Ok(Slot::Const(Term::Iri(format!("{ns}{local}"))))
    };
    let mut patterns = Vec::new();
    for stmt in c[2].split('.').map(str::trim).filter(|s| !s.is_empty()) {
        let toks: Vec<&str> = stmt.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(format!("bad pattern `{stmt}`"));
        }
        patterns.push([slot(toks[0])?, slot(toks[1])?, slot(toks[2])?]);
    }
    let limit = LIMIT_RE.captures(query).map(|c| c[1].parse().unwrap());
    Ok(Parsed {
        select,
        patterns,
        limit,
    })
}

type Binding = HashMap<String, Term>;

fn solve(
    data: &[[Term; 3]],
    patterns: &[[Slot; 3]],
    b: &Binding,
    out: &mut Vec<Binding>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    let Some((p, rest)) = patterns.split_first() else {
        out.push(b.clone());
        return;
    };
    for t in data {
        let mut next = b.clone();
        let ok = p.iter().zip(t.iter()).all(|(slot, term)| match slot {
            Slot::Const(c) => c == term,
            Slot::Var(v) => match next.get(v) {
                Some(bound) => bound == term,
                None => {
                    next.insert(v.clone(), term.clone());
                    true
                }
            },
        });
        if ok {
            solve(data, rest, &next, out, cap);
            if out.len() >= cap {
                return;
            }
        }
    }
}

/// Evaluates `query` and renders `application/sparql-results+json`.
pub fn evaluate(data: &[[Term; 3]], query: &str) -> Result<String, String> {
    let q = parse(query)?;
    let mut out = Vec::new();
    solve(
        data,
        &q.patterns,
        &Binding::new(),
        &mut out,
        q.limit.unwrap_or(usize::MAX),
    );
    let bindings: Vec<_> = out
        .iter()
        .map(|b| {
            let mut m = serde_json::Map::new();
            for v in &q.select {
                if let Some(t) = b.get(v) {
                    let kind = match t {
                        Term::Iri(_) => "uri",
                        Term::Literal(_) => "literal",
                    };
                    m.insert(v.clone(), json!({"type": kind, "value": t.text()}));
                }
            }
            serde_json::Value::Object(m)
        })
        .collect();
    Ok(json!({"head": {"vars": q.select}, "results": {"bindings": bindings}}).to_string())
}

/// Starts an endpoint over a snapshot of `g`.
pub fn endpoint(g: &KnowledgeGraph) -> StubServer {
    let data = export_triples(g);
    StubServer::start(move |req| {
        let Some(query) = form_field(&req.body, "query") else {
            return Response::status(400);
        };
        match evaluate(&data, &query) {
            Ok(body) => Response {
                status: 200,
                content_type: "application/sparql-results+json",
                body,
            },
            Err(_) => Response::status(400),
        }
    })
}
