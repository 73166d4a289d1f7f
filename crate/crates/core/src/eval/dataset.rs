//! Benchmark loading and validation.
//!
//! Two record layouts are understood. The native layout is
//!
//! ```json
//! {"id": "...", "questions": [q1, q2, q3], "edits": ["..."],
//!  "answer": "...", "answer_aliases": ["..."], "hops": 3,
//!  "base_triples": [["subject", "relation", "object"], ...]}
//! ```
//!
//! where field locations are configurable through [`FieldMapping`]. The
//! public MQuAKE layout (`requested_rewrite`, `new_answer`, `orig`, ...) is
//! detected automatically and mapped onto the same [`QaInstance`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arbitration::GoldAnswer;
use crate::error::{Error, Result};

pub const MQUAKE_CF_SIZE: usize = 3000;
pub const MQUAKE_T_SIZE: usize = 1868;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaInstance {
    pub id: String,
    pub questions: Vec<String>,
    pub edits: Vec<String>,
    pub gold: GoldAnswer,
    pub hop_count: usize,
    /// Unedited facts the questions rely on, used to seed the local graph.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base_triples: Vec<[String; 3]>,
}

impl QaInstance {
    pub fn validate(&self, index: usize) -> Result<()> {
        let fail = |message: String| Err(Error::Schema { index, message });
        if self.questions.len() != 3 {
            return fail(format!(
                "expected 3 questions, found {}",
                self.questions.len()
            ));
        }
        if self.questions.iter().any(|q| q.trim().is_empty()) {
            return fail("empty question".into());
        }
        if !(1..=4).contains(&self.edits.len()) {
            return fail(format!("expected 1-4 edits, found {}", self.edits.len()));
        }
        if !(2..=4).contains(&self.hop_count) {
            return fail(format!("hop count {} outside 2-4", self.hop_count));
        }
        if self.gold.answer.trim().is_empty() {
            return fail("empty gold answer".into());
        }
        Ok(())
    }
}

/// JSON pointers locating each native field within a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMapping {
    pub id: String,
    pub questions: String,
    pub edits: String,
    pub answer: String,
    pub aliases: String,
    pub hops: String,
    pub base_triples: String,
}

impl Default for FieldMapping {
    fn default() -> Self {
        Self {
            id: "/id".into(),
            questions: "/questions".into(),
            edits: "/edits".into(),
            answer: "/answer".into(),
            aliases: "/answer_aliases".into(),
            hops: "/hops".into(),
            base_triples: "/base_triples".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layout {
    /// Pick MQuAKE when records carry `requested_rewrite`, native otherwise.
    Auto,
    Native(FieldMapping),
    Mquake,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetKind {
    MquakeCf,
    MquakeT,
    Other,
}

impl DatasetKind {
    /// Guesses the benchmark from a file name such as `MQuAKE-CF-3k.json`.
    pub fn detect(path: &Path) -> Self {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if name.contains("mquake-cf") {
            DatasetKind::MquakeCf
        } else if name.contains("mquake-t") {
            DatasetKind::MquakeT
        } else {
            DatasetKind::Other
        }
    }

    pub fn expected_size(self) -> Option<usize> {
        match self {
            DatasetKind::MquakeCf => Some(MQUAKE_CF_SIZE),
            DatasetKind::MquakeT => Some(MQUAKE_T_SIZE),
            DatasetKind::Other => None,
        }
    }

    /// Batch sizes used for this benchmark in published evaluations.
    pub fn standard_batch_sizes(self) -> &'static [usize] {
        match self {
            DatasetKind::MquakeCf => &[1, 100, 1000, 3000],
            DatasetKind::MquakeT => &[1, 100, 500, 1868],
            DatasetKind::Other => &[],
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub instances: Vec<QaInstance>,
    pub kind: DatasetKind,
    pub warnings: Vec<String>,
}

impl LoadedDataset {
    pub fn hop_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for i in &self.instances {
            *h.entry(i.hop_count).or_default() += 1;
        }
        h
    }
}

pub fn load_dataset(path: &Path, layout: &Layout) -> Result<LoadedDataset> {
    let contents = fs::read_to_string(path)?;
    let mut loaded = parse_dataset(&contents, layout)?;
    loaded.kind = DatasetKind::detect(path);
    if let Some(expected) = loaded.kind.expected_size() {
        if loaded.instances.len() != expected {
            let msg = format!(
                "count mismatch: {:?} should have {expected} instances, found {}",
                loaded.kind,
                loaded.instances.len()
            );
            log::warn!("{msg}");
            loaded.warnings.push(msg);
        }
    }
    Ok(loaded)
}

pub fn parse_dataset(contents: &str, layout: &Layout) -> Result<LoadedDataset> {
    let root: Value = serde_json::from_str(contents)?;
    let Value::Array(records) = root else {
        return Err(Error::Schema {
            index: 0,
            message: "dataset must be a JSON array".into(),
        });
    };
    let layout = match layout {
        Layout::Auto => match records.first() {
            Some(r) if r.get("requested_rewrite").is_some() => Layout::Mquake,
            _ => Layout::Native(FieldMapping::default()),
        },
        other => other.clone(),
    };
    let mut warnings = Vec::new();
    let mut instances = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        let instance = match &layout {
            Layout::Native(mapping) => native_record(record, mapping, index)?,
            Layout::Mquake => mquake_record(record, index, &mut warnings)?,
            Layout::Auto => unreachable!(),
        };
        instance.validate(index)?;
        instances.push(instance);
    }
    Ok(LoadedDataset {
        instances,
        kind: DatasetKind::Other,
        warnings,
    })
}

fn schema(index: usize, message: impl Into<String>) -> Error {
    Error::Schema {
        index,
        message: message.into(),
    }
}

fn string_list(v: Option<&Value>, field: &str, index: usize) -> Result<Vec<String>> {
    match v {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|x| {
                x.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| schema(index, format!("{field}: expected strings")))
            })
            .collect(),
        Some(_) => Err(schema(index, format!("{field}: expected an array"))),
    }
}

fn triple_list(v: Option<&Value>, field: &str, index: usize) -> Result<Vec<[String; 3]>> {
    let Some(Value::Array(items)) = v else {
        return Ok(Vec::new());
    };
    items
        .iter()
        .map(|t| {
            let parts = string_list(Some(t), field, index)?;
            <[String; 3]>::try_from(parts)
                .map_err(|_| schema(index, format!("{field}: triples need 3 strings")))
        })
        .collect()
}

fn id_string(v: Option<&Value>, index: usize) -> String {
    match v {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => index.to_string(),
    }
}

fn native_record(record: &Value, m: &FieldMapping, index: usize) -> Result<QaInstance> {
    let questions = string_list(record.pointer(&m.questions), "questions", index)?;
    let edits = string_list(record.pointer(&m.edits), "edits", index)?;
    let answer = record
        .pointer(&m.answer)
        .and_then(Value::as_str)
        .ok_or_else(|| schema(index, "missing answer"))?
        .to_string();
    let aliases = string_list(record.pointer(&m.aliases), "aliases", index)?;
    let hop_count = record
        .pointer(&m.hops)
        .and_then(Value::as_u64)
        .ok_or_else(|| schema(index, "missing hop count"))? as usize;
    Ok(QaInstance {
        id: id_string(record.pointer(&m.id), index),
        questions,
        edits,
        gold: GoldAnswer { answer, aliases },
        hop_count,
        base_triples: triple_list(record.pointer(&m.base_triples), "base_triples", index)?,
    })
}

fn mquake_record(record: &Value, index: usize, warnings: &mut Vec<String>) -> Result<QaInstance> {
    let questions = string_list(record.get("questions"), "questions", index)?;
    let rewrites = record
        .get("requested_rewrite")
        .and_then(Value::as_array)
        .ok_or_else(|| schema(index, "requested_rewrite must be an array"))?;
    let mut edits = Vec::with_capacity(rewrites.len());
    let mut edited_pairs = Vec::new();
    for rw in rewrites {
        let prompt = rw.get("prompt").and_then(Value::as_str);
        let subject = rw.get("subject").and_then(Value::as_str);
        let target = rw.pointer("/target_new/str").and_then(Value::as_str);
        let (Some(prompt), Some(subject), Some(target)) = (prompt, subject, target) else {
            return Err(schema(
                index,
                "rewrite needs prompt, subject and target_new.str",
            ));
        };
        edits.push(format!(
            "{} {}",
            prompt.replace("{}", subject).trim_end(),
            target
        ));
        edited_pairs.push((subject.to_lowercase(), target.to_lowercase()));
    }
    let answer = record
        .get("new_answer")
        .and_then(Value::as_str)
        .ok_or_else(|| schema(index, "missing new_answer"))?
        .to_string();
    let aliases = string_list(record.get("new_answer_alias"), "new_answer_alias", index)?;
    let hop_count = ["new_single_hops", "single_hops"]
        .iter()
        .find_map(|k| record.get(*k).and_then(Value::as_array).map(Vec::len))
        .or_else(|| {
            record
                .pointer("/orig/triples")
                .and_then(Value::as_array)
                .map(Vec::len)
        })
        .ok_or_else(|| schema(index, "cannot determine hop count"))?;
    // Original and post-edit paths minus the edited facts themselves.
    let mut base_triples = Vec::new();
    for key in ["/orig/triples_labeled", "/orig/new_triples_labeled"] {
        for t in triple_list(record.pointer(key), key, index)? {
            let pair = (t[0].to_lowercase(), t[2].to_lowercase());
            if !edited_pairs.contains(&pair) && !base_triples.contains(&t) {
                base_triples.push(t);
            }
        }
    }
    if base_triples.is_empty() && index == 0 {
        warnings.push("records carry no labeled triples; graph starts empty".into());
    }
    Ok(QaInstance {
        id: id_string(record.get("case_id"), index),
        questions,
        edits,
        gold: GoldAnswer { answer, aliases },
        hop_count,
        base_triples,
    })
}

/// Writes instances in the native layout.
pub fn save_dataset(path: &Path, instances: &[QaInstance]) -> Result<()> {
    let records: Vec<Value> = instances.iter().map(native_json).collect();
    fs::write(path, serde_json::to_string_pretty(&records)?)?;
    Ok(())
}

fn native_json(i: &QaInstance) -> Value {
    let mut v = serde_json::json!({
        "id": i.id,
        "questions": i.questions,
        "edits": i.edits,
        "answer": i.gold.answer,
        "answer_aliases": i.gold.aliases,
        "hops": i.hop_count,
    });
    if !i.base_triples.is_empty() {
        v["base_triples"] = serde_json::json!(i.base_triples);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    const NATIVE: &str = r#"[{"id": "a", "questions": ["q1", "q2", "q3"], "edits": ["e1"],
        "answer": "Dublin", "answer_aliases": ["Baile Atha Cliath"], "hops": 2,
        "base_triples": [["Kieron Dyer", "position played on team / speciality", "Midfielder"]]}]"#;

    #[test]
    fn native_layout() {
        let d = parse_dataset(NATIVE, &Layout::Auto).unwrap();
        let i = &d.instances[0];
        assert_eq!(i.id, "a");
        assert_eq!(i.gold.aliases, ["Baile Atha Cliath"]);
        assert_eq!(i.base_triples.len(), 1);
    }

    #[test]
    fn two_questions_is_schema_error() {
        let bad = NATIVE.replace(r#""q1", "q2", "q3""#, r#""q1", "q2""#);
        let err = parse_dataset(&bad, &Layout::Auto).unwrap_err();
        assert!(matches!(err, Error::Schema { index: 0, .. }), "{err}");
        assert!(err.is_schema_error());
    }

    #[test]
    fn custom_mapping() {
        let text = r#"[{"meta": {"key": 7}, "qs": ["a", "b", "c"], "facts": ["f"],
            "gold": {"text": "X"}, "n": 3}]"#;
        let m = FieldMapping {
            id: "/meta/key".into(),
            questions: "/qs".into(),
            edits: "/facts".into(),
            answer: "/gold/text".into(),
            aliases: "/gold/aliases".into(),
            hops: "/n".into(),
            base_triples: "/none".into(),
        };
        let d = parse_dataset(text, &Layout::Native(m)).unwrap();
        assert_eq!(d.instances[0].id, "7");
        assert_eq!(d.instances[0].hop_count, 3);
        assert!(d.instances[0].gold.aliases.is_empty());
    }

    #[test]
    fn mquake_layout() {
        let text = r#"[{
            "case_id": 12,
            "requested_rewrite": [{
                "prompt": "The name of the current head of the {} government is",
                "subject": "Philippines",
                "target_new": {"str": "Bongbong Marcos"},
                "target_true": {"str": "Rodrigo Duterte"}
            }],
            "questions": [
                "Who is the head of government of the country that Joey de Leon is a citizen of?",
                "q2", "q3"],
            "answer": "Rodrigo Duterte",
            "new_answer": "Bongbong Marcos",
            "new_answer_alias": ["Ferdinand Marcos Jr."],
            "new_single_hops": [{}, {}],
            "orig": {
                "triples_labeled": [
                    ["Joey de Leon", "country of citizenship", "Philippines"],
                    ["Philippines", "head of government", "Rodrigo Duterte"]],
                "new_triples_labeled": [
                    ["Joey de Leon", "country of citizenship", "Philippines"],
                    ["Philippines", "head of government", "Bongbong Marcos"]]
            }
        }]"#;
        let d = parse_dataset(text, &Layout::Auto).unwrap();
        let i = &d.instances[0];
        assert_eq!(i.id, "12");
        assert_eq!(
            i.edits,
            ["The name of the current head of the Philippines government is Bongbong Marcos"]
        );
        assert_eq!(i.gold.answer, "Bongbong Marcos");
        assert_eq!(i.hop_count, 2);
        assert_eq!(i.base_triples.len(), 2);
        assert!(!i.base_triples.iter().any(|t| t[2] == "Bongbong Marcos"));
    }

    #[test]
    fn detect_kind_from_name() {
        assert_eq!(
            DatasetKind::detect(Path::new("data/MQuAKE-CF-3k.json")),
            DatasetKind::MquakeCf
        );
        assert_eq!(
            DatasetKind::detect(Path::new("MQuAKE-T.json")),
            DatasetKind::MquakeT
        );
        assert_eq!(
            DatasetKind::detect(Path::new("synthetic.json")),
            DatasetKind::Other
        );
    }
}
