//! Edit-aware in-memory knowledge graph.
//!
//! Entities and relations get sequential identifiers (`E0`, `E1`, ... and
//! `R0`, `R1`, ...) in order of first use. Base facts may be multi-valued;
//! an edit replaces every object under its `(subject, relation)` slot with a
//! single new object. Path queries return the first complete path found by
//! following objects in insertion order, so the first object at each hop
//! wins unless it leads to a dead end.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::RelationCatalog;
use crate::chain::RelationChain;
use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityRef {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationRef {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Base,
    Edited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: EntityRef,
    pub relation: RelationRef,
    pub object: EntityRef,
    pub provenance: Provenance,
}

/// One accepted edit: what was removed from the slot and what replaced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    pub subject: EntityRef,
    pub relation: RelationRef,
    pub removed: Vec<EntityRef>,
    pub new_object: EntityRef,
}

type Slot = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
struct Edge {
    object: usize,
    provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    catalog: Arc<RelationCatalog>,
    entities: Vec<EntityRef>,
    entity_index: HashMap<String, usize>,
    relations: Vec<RelationRef>,
    relation_index: HashMap<usize, usize>,
    adjacency: HashMap<Slot, Vec<Edge>>,
    // Slots in first-insertion order, for stable iteration and snapshots.
    slot_order: Vec<Slot>,
    edit_log: Vec<EditRecord>,
}

impl KnowledgeGraph {
    pub fn new(catalog: Arc<RelationCatalog>) -> Self {
        Self {
            catalog,
            entities: Vec::new(),
            entity_index: HashMap::new(),
            relations: Vec::new(),
            relation_index: HashMap::new(),
            adjacency: HashMap::new(),
            slot_order: Vec::new(),
            edit_log: Vec::new(),
        }
    }

    pub fn catalog(&self) -> &RelationCatalog {
        &self.catalog
    }

    pub fn catalog_arc(&self) -> Arc<RelationCatalog> {
        Arc::clone(&self.catalog)
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn triple_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum()
    }

    pub fn edit_log(&self) -> &[EditRecord] {
        &self.edit_log
    }

    pub fn entities(&self) -> &[EntityRef] {
        &self.entities
    }

    /// Returns the entity with a case-insensitive label match, creating it
    /// with the next sequential id if absent.
    pub fn upsert_entity(&mut self, label: &str) -> Result<EntityRef> {
        self.upsert_index(label).map(|i| self.entities[i].clone())
    }

    fn upsert_index(&mut self, label: &str) -> Result<usize> {
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        let key = text::fold(label);
        if let Some(&i) = self.entity_index.get(&key) {
            return Ok(i);
        }
        let i = self.entities.len();
        self.entities.push(EntityRef {
            id: format!("E{i}"),
            label: label.to_string(),
        });
        self.entity_index.insert(key, i);
        Ok(i)
    }

    pub fn entity(&self, label: &str) -> Option<&EntityRef> {
        self.entity_position(label).map(|i| &self.entities[i])
    }

    fn entity_position(&self, label: &str) -> Option<usize> {
        self.entity_index.get(&text::fold(label)).copied()
    }

    /// Known entities named in `text`, by greedy longest match over runs of
    /// up to eight words. Each entity is reported once, in mention order.
    pub fn mentioned_entities(&self, text: &str) -> Vec<&EntityRef> {
        const MAX_WORDS: usize = 8;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let mut found: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = (i + 1..=tokens.len().min(i + MAX_WORDS))
                .rev()
                .find_map(|j| self.mention_at(&tokens[i..j]).map(|e| (j, e)));
            match longest {
                Some((j, e)) => {
                    if !found.contains(&e) {
                        found.push(e);
                    }
                    i = j;
                }
                None => i += 1,
            }
        }
        found.into_iter().map(|e| &self.entities[e]).collect()
    }

    fn mention_at(&self, span: &[&str]) -> Option<usize> {
        let joined = span.join(" ");
        let trimmed = joined
            .trim_start_matches(['"', '\'', '('])
            .trim_end_matches(['?', ',', ';', ':', '!', '"', ')']);
        let base = trimmed
            .strip_suffix("'s")
            .or_else(|| trimmed.strip_suffix("\u{2019}s"))
            .unwrap_or(trimmed);
        let found = [base, base.trim_end_matches('.')]
            .into_iter()
            .filter(|s| !s.is_empty())
            .find_map(|s| self.entity_position(s));
        found
    }

    fn entity_by_id(&self, id: &str) -> Option<usize> {
        let i: usize = id.strip_prefix('E')?.parse().ok()?;
        (i < self.entities.len() && self.entities[i].id == id).then_some(i)
    }

    /// Resolves a canonical relation, registering an id on first use.
    pub fn relation(&mut self, label: &str) -> Result<RelationRef> {
        self.relation_slot(label).map(|i| self.relations[i].clone())
    }

    fn relation_slot(&mut self, label: &str) -> Result<usize> {
        let pos = self
            .catalog
            .position(label)
            .ok_or_else(|| Error::UnknownRelation(label.to_string()))?;
        if let Some(&i) = self.relation_index.get(&pos) {
            return Ok(i);
        }
        let i = self.relations.len();
        self.relations.push(RelationRef {
            id: format!("R{i}"),
            label: self.catalog.relations()[pos].clone(),
        });
        self.relation_index.insert(pos, i);
        Ok(i)
    }

    /// Looks up an already-registered relation without registering it.
    pub fn relation_ref(&self, label: &str) -> Option<&RelationRef> {
        self.relation_position(label).map(|i| &self.relations[i])
    }

    fn relation_position(&self, label: &str) -> Option<usize> {
        let pos = self.catalog.position(label)?;
        self.relation_index.get(&pos).copied()
    }

    fn relation_by_id(&self, id: &str) -> Option<usize> {
        let i: usize = id.strip_prefix('R')?.parse().ok()?;
        (i < self.relations.len() && self.relations[i].id == id).then_some(i)
    }

    /// Adds a base fact by labels. Set semantics: re-asserting is a no-op.
    pub fn assert_fact(&mut self, subject: &str, relation: &str, object: &str) -> Result<()> {
        let r = self.relation_slot(relation)?;
        let s = self.upsert_index(subject)?;
        let o = self.upsert_index(object)?;
        self.insert_edge(s, r, o, Provenance::Base);
        Ok(())
    }

    /// Adds `t` keeping its provenance. Entities are matched by label; the
    /// refs' ids are not trusted across graphs.
    pub fn assert_triple(&mut self, t: &Triple) -> Result<()> {
        let r = self.relation_slot(&t.relation.label)?;
        let s = self.upsert_index(&t.subject.label)?;
        let o = self.upsert_index(&t.object.label)?;
        self.insert_edge(s, r, o, t.provenance);
        Ok(())
    }

    fn insert_edge(&mut self, s: usize, r: usize, o: usize, provenance: Provenance) {
        let slot = (s, r);
        let edges = self.adjacency.entry(slot).or_insert_with(|| {
            self.slot_order.push(slot);
            Vec::new()
        });
        if !edges.iter().any(|e| e.object == o) {
            edges.push(Edge {
                object: o,
                provenance,
            });
        }
    }

    /// Replaces every object under `(subject, relation)` with `new_object`.
    /// Unknown subjects and objects are created.
    pub fn apply_edit(
        &mut self,
        subject: &str,
        relation: &str,
        new_object: &str,
    ) -> Result<EditRecord> {
        let r = self.relation_slot(relation)?;
        let s = self.upsert_index(subject)?;
        let o = self.upsert_index(new_object)?;
        let slot = (s, r);
        let new_edges = vec![Edge {
            object: o,
            provenance: Provenance::Edited,
        }];
        let removed = match self.adjacency.insert(slot, new_edges) {
            Some(old) => old
                .into_iter()
                .filter(|e| e.object != o)
                .map(|e| self.entities[e.object].clone())
                .collect(),
            None => {
                self.slot_order.push(slot);
                Vec::new()
            }
        };
        let record = EditRecord {
            subject: self.entities[s].clone(),
            relation: self.relations[r].clone(),
            removed,
            new_object: self.entities[o].clone(),
        };
        self.edit_log.push(record.clone());
        Ok(record)
    }

    /// Current objects under `(subject, relation)`, in insertion order.
    pub fn objects_of(&self, subject: &EntityRef, relation: &RelationRef) -> Vec<EntityRef> {
        let (Some(s), Some(r)) = (
            self.entity_by_id(&subject.id),
            self.relation_by_id(&relation.id),
        ) else {
            return Vec::new();
        };
        self.edges(s, r)
            .iter()
            .map(|e| self.entities[e.object].clone())
            .collect()
    }

    /// Label-based variant of [`objects_of`](Self::objects_of).
    pub fn objects_by_label(&self, subject: &str, relation: &str) -> Vec<&EntityRef> {
        let (Some(s), Some(r)) = (
            self.entity_position(subject),
            self.relation_position(relation),
        ) else {
            return Vec::new();
        };
        self.edges(s, r)
            .iter()
            .map(|e| &self.entities[e.object])
            .collect()
    }

    fn edges(&self, s: usize, r: usize) -> &[Edge] {
        self.adjacency
            .get(&(s, r))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Follows `chain` from its head and returns the terminal entity of the
    /// first complete path, exploring objects in insertion order. `None` when
    /// the head is unknown or no path covers every hop.
    pub fn chain_query(&self, chain: &RelationChain) -> Option<&EntityRef> {
        if chain.relations.is_empty() {
            return None;
        }
        let head = self.entity_position(&chain.head)?;
        let relations = chain
            .relations
            .iter()
            .map(|r| self.relation_position(r))
            .collect::<Option<Vec<_>>>()?;
        self.first_path_end(head, &relations)
            .map(|i| &self.entities[i])
    }

    fn first_path_end(&self, current: usize, relations: &[usize]) -> Option<usize> {
        let Some((&r, rest)) = relations.split_first() else {
            return Some(current);
        };
        self.edges(current, r)
            .iter()
            .find_map(|e| self.first_path_end(e.object, rest))
    }

    /// All triples, grouped by slot in first-insertion order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.slot_order.iter().flat_map(move |&(s, r)| {
            self.edges(s, r).iter().map(move |e| Triple {
                subject: self.entities[s].clone(),
                relation: self.relations[r].clone(),
                object: self.entities[e.object].clone(),
                provenance: e.provenance,
            })
        })
    }

    /// Compares entity sets and adjacency, ignoring the edit log and the order
    /// in which slots were first created.
    pub fn same_state(&self, other: &KnowledgeGraph) -> bool {
        self.entities == other.entities
            && self.relations == other.relations
            && self.adjacency == other.adjacency
    }

    /// Serializes to the tab-separated snapshot format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in self.triples() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                t.subject.label, t.relation.label, t.object.label
            );
        }
        out
    }

    pub fn from_tsv(catalog: Arc<RelationCatalog>, contents: &str, source: &Path) -> Result<Self> {
        let mut g = Self::new(catalog);
        for (n, line) in contents.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: source.to_path_buf(),
                line: n + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected 3 tab-separated fields, found {}",
                    fields.len()
                )));
            }
            g.assert_fact(fields[0], fields[1], fields[2])
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(g)
    }

    pub fn load(catalog: Arc<RelationCatalog>, path: &Path) -> Result<Self> {
        let contents = fs::read_to_string(path)?;
        Self::from_tsv(catalog, &contents, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv())?;
        Ok(())
    }
}
