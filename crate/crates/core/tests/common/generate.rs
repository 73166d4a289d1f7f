//! Random graphs mirrored into the reference model.

use std::sync::Arc;

use kgedit::{KnowledgeGraph, RelationCatalog, RelationChain};
use rand::seq::IndexedRandom;
use rand::Rng;

use super::oracle::TripleList;

pub fn cf_catalog() -> Arc<RelationCatalog> {
    Arc::new(RelationCatalog::builtin("mquake-cf").unwrap())
}

pub struct RandomGraph {
    pub graph: KnowledgeGraph,
    pub model: TripleList,
    pub entities: Vec<String>,
    pub relations: Vec<String>,
}

impl RandomGraph {
    /// Empty graph over `n_entities` names and the first `n_relations`
    /// catalog relations.
    pub fn empty(n_entities: usize, n_relations: usize) -> Self {
        let catalog = cf_catalog();
        let relations = catalog.relations()[..n_relations].to_vec();
        Self {
            graph: KnowledgeGraph::new(catalog),
            model: TripleList::default(),
            entities: (0..n_entities).map(|i| format!("e{i}")).collect(),
            relations,
        }
    }

    pub fn generate(
        rng: &mut impl Rng,
        n_entities: usize,
        n_relations: usize,
        n_triples: usize,
    ) -> Self {
        let mut g = Self::empty(n_entities, n_relations);
        for _ in 0..n_triples {
            let (s, r, o) = g.random_triple(rng);
            g.graph.assert_fact(&s, &r, &o).unwrap();
            g.model.assert(&s, &r, &o);
        }
        g
    }

    pub fn random_triple(&self, rng: &mut impl Rng) -> (String, String, String) {
        (
            self.entities.choose(rng).unwrap().clone(),
            self.relations.choose(rng).unwrap().clone(),
            self.entities.choose(rng).unwrap().clone(),
        )
    }

    pub fn edit(&mut self, s: &str, r: &str, o: &str) {
        self.graph.apply_edit(s, r, o).unwrap();
        self.model.edit(s, r, o);
    }

    /// Chain of 1 to 4 hops; the head is occasionally an unknown entity.
    pub fn random_chain(&self, rng: &mut impl Rng) -> RelationChain {
        let hops = rng.random_range(1..=4);
        let head = if rng.random_bool(0.05) {
            "nobody".to_string()
        } else {
            self.entities.choose(rng).unwrap().clone()
        };
        let relations: Vec<String> = (0..hops)
            .map(|_| self.relations.choose(rng).unwrap().clone())
            .collect();
        RelationChain { head, relations }
    }
}
