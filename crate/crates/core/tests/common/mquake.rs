//! Records in the public MQuAKE layout.

use serde_json::{json, Value};

/// A record with a `hops`-long path, where the first `edits` hops are edited.
pub fn record(case: usize, hops: usize, edits: usize) -> Value {
    let rels = [
        "country of citizenship",
        "capital",
        "head of state",
        "spouse",
    ];
    let node = |tag: &str, j: usize| format!("{tag}{case}-{j}");
    let orig: Vec<[String; 3]> = (0..hops)
        .map(|j| [node("n", j), rels[j].to_string(), node("n", j + 1)])
        .collect();
    let mut new = orig.clone();
    let mut rewrites = Vec::new();
    for j in 0..edits {
        let target = node("m", j + 1);
        new[j][2] = target.clone();
        if j + 1 < hops {
            new[j + 1][0] = target.clone();
        }
        rewrites.push(json!({
            "prompt": format!("The {} of {{}} is", rels[j]),
            "subject": new[j][0],
            "target_new": {"str": target, "id": format!("Q{case}{j}")},
            "target_true": {"str": orig[j][2], "id": "Q0"},
            "relation_id": "P0",
        }));
    }
    let answer = new[hops - 1][2].clone();
    let hop = |t: &[String; 3]| json!({"question": format!("{} {}?", t[1], t[0]), "cloze": "", "answer": t[2]});
    json!({
        "case_id": case,
        "requested_rewrite": rewrites,
        "questions": [
            format!("Question one about {}?", node("n", 0)),
            format!("Question two about {}?", node("n", 0)),
            format!("Question three about {}?", node("n", 0)),
        ],
        "answer": orig[hops - 1][2],
        "answer_alias": [],
        "new_answer": answer,
        "new_answer_alias": [format!("alias of {answer}")],
        "single_hops": orig.iter().map(hop).collect::<Vec<_>>(),
        "new_single_hops": new.iter().map(hop).collect::<Vec<_>>(),
        "orig": {
            "triples_labeled": orig,
            "new_triples_labeled": new,
        },
    })
}
