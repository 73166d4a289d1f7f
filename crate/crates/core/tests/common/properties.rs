//! Randomized property checks shared by the kg tests and acceptance suite.

use std::collections::BTreeMap;

use kgedit::KnowledgeGraph;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::RandomGraph;

/// Compares `chain_query` with the reference model on `cases` random chains.
/// Returns (mismatches, cases with an answer).
pub fn chain_query_mismatches(cases: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let mut answered = 0;
    let mut done = 0;
    while done < cases {
        let n_triples = rng.random_range(10..=1000);
        let n_entities = rng.random_range(5..=(n_triples / 4).max(6));
        let mut rg = RandomGraph::generate(&mut rng, n_entities, 6, n_triples);
        for _ in 0..rng.random_range(0..20) {
            let (s, r, o) = rg.random_triple(&mut rng);
            rg.edit(&s, &r, &o);
        }
        for _ in 0..25 {
            let chain = rg.random_chain(&mut rng);
            let got = rg.graph.chain_query(&chain).map(|e| e.label.clone());
            let expected = rg.model.first_path(&chain.head, &chain.relations);
            answered += usize::from(expected.is_some());
            if got != expected {
                mismatches += 1;
            }
            done += 1;
        }
    }
    (mismatches, answered)
}

fn sorted_triples(g: &KnowledgeGraph) -> Vec<(String, String, String)> {
    let mut v: Vec<_> = g
        .triples()
        .map(|t| (t.subject.label, t.relation.label, t.object.label))
        .collect();
    v.sort();
    v
}

/// Applies `sequences` random edit sequences and checks, after every edit:
/// the edited slot holds exactly the new object, every other slot is
/// unchanged, reapplying the edit is a no-op, and the graph matches the
/// reference model. At the end of each sequence every edited slot holds the
/// object of its last edit. Returns the violation messages.
pub fn edit_sequence_violations(sequences: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for seq in 0..sequences {
        let n_triples = rng.random_range(0..30);
        let mut rg = RandomGraph::generate(&mut rng, 10, 4, n_triples);
        let mut last: BTreeMap<(String, String), String> = BTreeMap::new();
        for _ in 0..rng.random_range(1..=8) {
            let (mut s, mut r, o) = rg.random_triple(&mut rng);
            if rng.random_bool(0.5) && !rg.model.triples.is_empty() {
                let t = rg.model.triples.choose(&mut rng).unwrap();
                (s, r) = (t.0.clone(), t.1.clone());
            }
            let before = sorted_triples(&rg.graph);
            rg.edit(&s, &r, &o);
            last.insert((s.clone(), r.clone()), o.clone());

            let objects: Vec<&str> = rg
                .graph
                .objects_by_label(&s, &r)
                .iter()
                .map(|e| e.label.as_str())
                .collect();
            if objects != [o.as_str()] {
                violations.push(format!(
                    "seq {seq}: slot ({s}, {r}) holds {objects:?}, expected [{o}]"
                ));
            }
            let after = sorted_triples(&rg.graph);
            let outside = |v: &[(String, String, String)]| -> Vec<(String, String, String)> {
                v.iter()
                    .filter(|t| !(t.0 == s && t.1 == r))
                    .cloned()
                    .collect()
            };
            if outside(&before) != outside(&after) {
                violations.push(format!(
                    "seq {seq}: edit of ({s}, {r}) touched another slot"
                ));
            }
            let mut again = rg.graph.clone();
            again.apply_edit(&s, &r, &o).unwrap();
            if !again.same_state(&rg.graph) {
                violations.push(format!(
                    "seq {seq}: reapplying ({s}, {r}, {o}) changed the graph"
                ));
            }
            let mut model = rg.model.triples.clone();
            model.sort();
            if model != after {
                violations.push(format!(
                    "seq {seq}: graph diverged from the reference model"
                ));
            }
        }
        for ((s, r), o) in &last {
            let objects: Vec<&str> = rg
                .graph
                .objects_by_label(s, r)
                .iter()
                .map(|e| e.label.as_str())
                .collect();
            if objects != [o.as_str()] {
                violations.push(format!(
                    "seq {seq}: last write to ({s}, {r}) was {o}, found {objects:?}"
                ));
            }
        }
    }
    violations
}
