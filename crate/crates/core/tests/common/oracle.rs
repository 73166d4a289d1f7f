//! Reference models used as independent oracles.

use kgedit::text::{dice, jaccard, trigrams, word_set};

/// Graph model as one flat, insertion-ordered triple list. Labels are
/// compared exactly; generators only produce lowercase labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleList {
    pub triples: Vec<(String, String, String)>,
}

impl TripleList {
    pub fn assert(&mut self, s: &str, r: &str, o: &str) {
        let t = (s.to_string(), r.to_string(), o.to_string());
        if !self.triples.contains(&t) {
            self.triples.push(t);
        }
    }

    pub fn edit(&mut self, s: &str, r: &str, o: &str) {
        self.triples.retain(|(ts, tr, _)| !(ts == s && tr == r));
        self.triples
            .push((s.to_string(), r.to_string(), o.to_string()));
    }

    /// Objects for (s, r); insertion order within a slot is preserved, but
    /// an edited slot moves to the end of the list, which does not matter
    /// for per-slot order.
    pub fn objects(&self, s: &str, r: &str) -> Vec<String> {
        self.triples
            .iter()
            .filter(|(ts, tr, _)| ts == s && tr == r)
            .map(|(_, _, o)| o.clone())
            .collect()
    }

    /// Terminal of the first complete path in depth-first, insertion order.
    pub fn first_path(&self, head: &str, relations: &[String]) -> Option<String> {
        if relations.is_empty() {
            return None;
        }
        fn dfs(g: &TripleList, cur: &str, rest: &[String]) -> Option<String> {
            let Some((r, tail)) = rest.split_first() else {
                return Some(cur.to_string());
            };
            g.triples
                .iter()
                .filter(|(ts, tr, _)| ts == cur && tr == r)
                .find_map(|(_, _, o)| dfs(g, o, tail))
        }
        dfs(self, head, relations)
    }

    /// Every complete path's terminal, by exhaustive depth-first search.
    pub fn all_path_ends(&self, head: &str, relations: &[String]) -> Vec<String> {
        fn dfs(g: &TripleList, cur: &str, rest: &[String], out: &mut Vec<String>) {
            match rest.split_first() {
                None => out.push(cur.to_string()),
                Some((r, tail)) => {
                    for (ts, tr, o) in &g.triples {
                        if ts == cur && tr == r {
                            dfs(g, o, tail, out);
                        }
                    }
                }
            }
        }
        let mut out = Vec::new();
        dfs(self, head, relations, &mut out);
        out
    }
}

/// Lexical similarity as (word Jaccard, trigram Dice), computed from the
/// definitions.
pub fn lexical_similarity(a: &str, b: &str) -> (f64, f64) {
    (
        jaccard(&word_set(a), &word_set(b)),
        dice(&trigrams(a), &trigrams(b)),
    )
}

/// Exhaustive argmax over a catalog with catalog-order tie-breaking.
pub fn brute_force_normalize(candidate: &str, catalog: &[String]) -> String {
    let mut best: Option<(usize, (f64, f64))> = None;
    for (i, label) in catalog.iter().enumerate() {
        let sim = lexical_similarity(candidate, label);
        let better = match best {
            None => true,
            Some((_, b)) => sim.0 > b.0 || (sim.0 == b.0 && sim.1 > b.1),
        };
        if better {
            best = Some((i, sim));
        }
    }
    catalog[best.unwrap().0].clone()
}

/// Hand-applies the three output-parsing rules: keep the first line
/// containing "->", split on "->", first segment is the entity, remaining
/// segments are relations unless they begin with "?".
pub fn three_rule_parse(raw: &str) -> Option<(String, Vec<String>)> {
    let line = raw.split('\n').find(|l| l.contains("->"))?;
    let pieces: Vec<String> = line.split("->").map(|p| p.trim().to_string()).collect();
    let entity = pieces[0].clone();
    if entity.is_empty() {
        return None;
    }
    let mut relations = Vec::new();
    for p in &pieces[1..] {
        if p.is_empty() || p.starts_with('?') {
            continue;
        }
        relations.push(p.clone());
    }
    Some((entity, relations))
}
