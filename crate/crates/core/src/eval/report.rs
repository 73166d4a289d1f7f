use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::runner::{percent, EvalConfig, EvalRun};
use crate::arbitration::OutcomeClass;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub index: usize,
    pub size: usize,
    pub accuracy: f64,
    pub accuracy_strict: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopSummary {
    pub instances: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub instances: usize,
    pub questions: usize,
    pub groups: Vec<GroupSummary>,
    /// Mean of group accuracies (percent), alias-aware.
    pub overall_accuracy: f64,
    /// Mean of group accuracies (percent), gold answer only.
    pub overall_accuracy_strict: f64,
    pub per_hop: BTreeMap<usize, HopSummary>,
    /// Fraction of individual questions whose final answer is correct (percent).
    pub question_accuracy_final: f64,
    /// Same for the LLM answer alone (percent).
    pub question_accuracy_llm: f64,
    pub outcome_counts: BTreeMap<OutcomeClass, usize>,
    /// Outcome counts divided by the number of questions.
    pub outcome_rates: BTreeMap<OutcomeClass, f64>,
    pub edits_applied: usize,
    pub edit_failures: usize,
    pub question_failures: usize,
    pub warnings: Vec<String>,
    pub wall_clock_secs: f64,
}

impl EvalReport {
    pub fn from_run(run: &EvalRun) -> Self {
        let groups: Vec<GroupSummary> = run
            .groups
            .iter()
            .map(|g| GroupSummary {
                index: g.index,
                size: g.results.len(),
                accuracy: g.accuracy(),
                accuracy_strict: g.accuracy_strict(),
            })
            .collect();
        let mean = |f: fn(&GroupSummary) -> f64| {
            if groups.is_empty() {
                0.0
            } else {
                groups.iter().map(f).sum::<f64>() / groups.len() as f64
            }
        };
        let overall_accuracy = mean(|g| g.accuracy);
        let overall_accuracy_strict = mean(|g| g.accuracy_strict);

        let mut hop_hits: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for r in run.instances() {
            let e = hop_hits.entry(r.hop_count).or_default();
            e.0 += 1;
            e.1 += usize::from(r.correct);
        }
        let per_hop = hop_hits
            .into_iter()
            .map(|(h, (n, hits))| {
                (
                    h,
                    HopSummary {
                        instances: n,
                        accuracy: percent(hits, n),
                    },
                )
            })
            .collect();

        let counts = OutcomeCounts::from_run(run);
        let outcome_rates = OutcomeClass::ALL
            .iter()
            .map(|&c| (c, counts.rate(c)))
            .collect();

        Self {
            config: run.config.clone(),
            instances: run.instances().count(),
            questions: counts.questions,
            groups,
            overall_accuracy,
            overall_accuracy_strict,
            per_hop,
            question_accuracy_final: percent(counts.final_correct, counts.questions),
            question_accuracy_llm: percent(counts.llm_correct, counts.questions),
            outcome_counts: counts.by_class.clone(),
            outcome_rates,
            edits_applied: run.groups.iter().map(|g| g.edits_applied).sum(),
            edit_failures: run.groups.iter().map(|g| g.edit_failures.len()).sum(),
            question_failures: counts.failures,
            warnings: Vec::new(),
            wall_clock_secs: run.wall_clock.as_secs_f64(),
        }
    }

    /// Report JSON with the wall-clock field zeroed, for reproducibility checks.
    pub fn canonical_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_clock_secs = 0.0;
        Ok(serde_json::to_string_pretty(&copy)?)
    }

    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "mode={} k={} catalog={} top_x={} seed={}",
            c.mode, c.k, c.catalog, c.retriever.top_x, c.seed
        );
        let _ = writeln!(
            out,
            "instances={} questions={} groups={} edits_applied={} edit_failures={}",
            self.instances,
            self.questions,
            self.groups.len(),
            self.edits_applied,
            self.edit_failures
        );
        let _ = writeln!(out, "{:<28}{:>10}", "metric", "value");
        let _ = writeln!(
            out,
            "{:<28}{:>10.2}",
            "accuracy (alias-aware) %", self.overall_accuracy
        );
        let _ = writeln!(
            out,
            "{:<28}{:>10.2}",
            "accuracy (strict) %", self.overall_accuracy_strict
        );
        for (hop, s) in &self.per_hop {
            let _ = writeln!(
                out,
                "{:<28}{:>10.2}",
                format!("{hop}-hop % (n={})", s.instances),
                s.accuracy
            );
        }
        for (class, rate) in &self.outcome_rates {
            let _ = writeln!(out, "{:<28}{:>10.4}", class.as_str(), rate);
        }
        let _ = writeln!(out, "{:<28}{:>10.2}", "wall clock s", self.wall_clock_secs);
        out
    }
}

/// Question-level tallies behind the outcome rates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeCounts {
    pub questions: usize,
    pub final_correct: usize,
    pub llm_correct: usize,
    pub failures: usize,
    pub by_class: BTreeMap<OutcomeClass, usize>,
}

impl OutcomeCounts {
    pub fn from_run(run: &EvalRun) -> Self {
        let mut counts = Self {
            by_class: OutcomeClass::ALL.iter().map(|&c| (c, 0)).collect(),
            ..Self::default()
        };
        for inst in run.instances() {
            for rec in &inst.records {
                counts.questions += 1;
                counts.final_correct += usize::from(rec.final_correct(&inst.gold));
                counts.llm_correct += usize::from(rec.llm_correct(&inst.gold));
                counts.failures += usize::from(!rec.errors.is_empty());
                *counts.by_class.entry(rec.outcome).or_default() += 1;
            }
        }
        counts
    }

    pub fn count(&self, class: OutcomeClass) -> usize {
        self.by_class.get(&class).copied().unwrap_or(0)
    }

    pub fn rate(&self, class: OutcomeClass) -> f64 {
        if self.questions == 0 {
            0.0
        } else {
            self.count(class) as f64 / self.questions as f64
        }
    }
}

fn trace_path(report_path: &Path) -> PathBuf {
    report_path.with_extension("csv")
}

#[derive(Serialize)]
struct TraceRow<'a> {
    group: usize,
    instance_id: &'a str,
    hop_count: usize,
    paraphrase: usize,
    question: &'a str,
    gold: &'a str,
    llm_answer: &'a str,
    kbqa_answer: &'a str,
    final_answer: &'a str,
    outcome: &'static str,
    final_correct: bool,
    llm_correct: bool,
    instance_correct: bool,
    chain: String,
    errors: String,
    diagnostics: String,
}

pub fn write_trace(path: &Path, run: &EvalRun) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for g in &run.groups {
        for inst in &g.results {
            for (p, rec) in inst.records.iter().enumerate() {
                w.serialize(TraceRow {
                    group: g.index,
                    instance_id: &inst.instance_id,
                    hop_count: inst.hop_count,
                    paraphrase: p,
                    question: &rec.question,
                    gold: &inst.gold.answer,
                    llm_answer: rec.llm_answer.as_deref().unwrap_or(""),
                    kbqa_answer: rec.kbqa_answer.as_deref().unwrap_or(""),
                    final_answer: rec.final_answer.as_deref().unwrap_or(""),
                    outcome: rec.outcome.as_str(),
                    final_correct: rec.final_correct(&inst.gold),
                    llm_correct: rec.llm_correct(&inst.gold),
                    instance_correct: inst.correct,
                    chain: rec.chain.as_ref().map(|c| c.render()).unwrap_or_default(),
                    errors: rec.errors.join("; "),
                    diagnostics: rec.diagnostics.join("; "),
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the JSON report to `report_path` and the per-question CSV trace
/// next to it (same stem, `.csv`), then prints the summary table to `out`.
pub fn emit_report(
    run: &EvalRun,
    report_path: &Path,
    warnings: &[String],
    out: &mut dyn Write,
) -> Result<EvalReport> {
    let mut report = EvalReport::from_run(run);
    report.warnings = warnings.to_vec();
    if let Some(dir) = report_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(report_path, serde_json::to_string_pretty(&report)?)?;
    write_trace(&trace_path(report_path), run)?;
    out.write_all(report.summary_table().as_bytes())?;
    Ok(report)
}
