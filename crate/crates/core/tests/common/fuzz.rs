//! Random raw model outputs for the chain parser.

use kgedit::RelationChain;
use rand::seq::IndexedRandom;
use rand::Rng;

const NOISE: &[&str] = &[
    "Sure, here is the chain:",
    "Answer:",
    "",
    "   ",
    "Let me think step by step.",
    "The relation chain follows.",
    "Thanks!",
    "Note - this uses > and - separately.",
];

const WORDS: &[&str] = &[
    "Eeyore",
    "A. A. Milne",
    "United Kingdom",
    "creator",
    "child",
    "capital",
    "country of citizenship",
    "head of government",
    "sport",
    "author",
    "?x",
    "?y",
    "?",
    "??z",
    "",
    " ",
    "Gaelic football",
    "Joey de Leon",
];

fn pad(rng: &mut impl Rng, s: &str) -> String {
    let ws = ["", " ", "  ", "\t"];
    format!("{}{s}{}", ws.choose(rng).unwrap(), ws.choose(rng).unwrap())
}

/// A multi-line output mixing noise lines with zero or more arrow lines.
pub fn raw_chain_output(rng: &mut impl Rng) -> String {
    let mut lines = Vec::new();
    for _ in 0..rng.random_range(0..3) {
        lines.push(NOISE.choose(rng).unwrap().to_string());
    }
    for _ in 0..rng.random_range(0..3) {
        let n = rng.random_range(1..8);
        let segs: Vec<String> = (0..n)
            .map(|_| {
                let w = *WORDS.choose(rng).unwrap();
                pad(rng, w)
            })
            .collect();
        let mut line = segs.join("->");
        if rng.random_bool(0.2) {
            line.push_str("->");
        }
        lines.push(line);
        if rng.random_bool(0.5) {
            lines.push(NOISE.choose(rng).unwrap().to_string());
        }
    }
    lines.join("\n")
}

pub fn random_chain(rng: &mut impl Rng, relations: &[String]) -> RelationChain {
    const HEADS: &[&str] = &[
        "Eeyore",
        "Joey de Leon",
        "Kaven-17",
        "Ångström",
        "São Paulo FC",
        "x",
        "R2-D2",
        "The Lord of the Rings",
    ];
    let hops = rng.random_range(1..=6);
    RelationChain {
        head: HEADS.choose(rng).unwrap().to_string(),
        relations: (0..hops)
            .map(|_| relations.choose(rng).unwrap().clone())
            .collect(),
    }
}
