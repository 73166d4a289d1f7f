use std::fmt;

use serde::{Deserialize, Serialize};

/// A known head entity followed by the relations to traverse from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationChain {
    pub head: String,
    pub relations: Vec<String>,
}

impl RelationChain {
    pub fn new<I, S>(head: impl Into<String>, relations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            head: head.into(),
            relations: relations.into_iter().map(Into::into).collect(),
        }
    }

    pub fn hops(&self) -> usize {
        self.relations.len()
    }

    /// Renders the arrow form, e.g. `Eeyore->creator->?x->child->?y`.
    pub fn render(&self) -> String {
        let mut out = self.head.clone();
        for (i, r) in self.relations.iter().enumerate() {
            out.push_str("->");
            out.push_str(r);
            out.push_str("->?");
            out.push_str(&variable_name(i));
        }
        out
    }
}

impl fmt::Display for RelationChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Name of the `i`-th unknown along a chain: x, y, z, m, then v5, v6, ...
pub fn variable_name(i: usize) -> String {
    match i {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        3 => "m".into(),
        n => format!("v{}", n + 1),
    }
}
