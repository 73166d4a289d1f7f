use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use kgedit::eval::{
    check_batch_size, emit_report, generate, load_dataset, save_dataset, DatasetKind, EvalConfig,
    Evaluator, FieldMapping, Layout, Mode, QaInstance, SyntheticConfig,
};
use kgedit::extraction::parse_chain_output;
use kgedit::par::Execution;
use kgedit::query::SparqlEndpoint;
use kgedit::{
    build_query, execute_local, GoldAnswer, KnowledgeGraph, RelationCatalog, RelationChain,
    RetrieverConfig,
};

use crate::config::FileConfig;
use crate::{backends, AskArgs, EvalArgs, GraphCommand, SynthArgs};

fn parse_mode(flag: Option<&str>, config: Option<&str>) -> anyhow::Result<Mode> {
    Ok(flag.or(config).unwrap_or("full").parse()?)
}

fn layout(name: &str, mapping: Option<&Path>) -> anyhow::Result<Layout> {
    let mapping = match mapping {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading field mapping {}", path.display()))?;
            Some(serde_json::from_str::<FieldMapping>(&text)?)
        }
        None => None,
    };
    Ok(match (name, mapping) {
        ("native", m) | ("auto", m @ Some(_)) => Layout::Native(m.unwrap_or_default()),
        ("auto", None) => Layout::Auto,
        ("mquake", None) => Layout::Mquake,
        ("mquake", Some(_)) => bail!("--mapping only applies to the native layout"),
        (other, _) => bail!("unknown layout `{other}` (expected auto, native or mquake)"),
    })
}

fn load_snapshot(
    catalog: Arc<RelationCatalog>,
    path: Option<&Path>,
) -> anyhow::Result<KnowledgeGraph> {
    match path {
        Some(path) => KnowledgeGraph::load(catalog, path)
            .with_context(|| format!("loading snapshot {}", path.display())),
        None => Ok(KnowledgeGraph::new(catalog)),
    }
}

pub fn eval(args: EvalArgs, config: &FileConfig) -> anyhow::Result<()> {
    let section = &config.eval;
    let layout_name = args
        .layout
        .as_deref()
        .or(section.layout.as_deref())
        .unwrap_or("auto");
    let layout = layout(layout_name, args.mapping.as_deref())?;
    let dataset = load_dataset(&args.dataset, &layout)
        .with_context(|| format!("loading dataset {}", args.dataset.display()))?;
    log::info!(
        "loaded {} instances, hop histogram {:?}",
        dataset.instances.len(),
        dataset.hop_histogram()
    );

    let k = args.k.or(section.k).unwrap_or(1);
    let mode = parse_mode(args.mode.as_deref(), section.mode.as_deref())?;
    let catalog_name = args
        .catalog
        .clone()
        .or_else(|| section.catalog.clone())
        .unwrap_or_else(|| match dataset.kind {
            DatasetKind::MquakeT => "mquake-t".into(),
            _ => "mquake-cf".into(),
        });
    let seed = args.seed.or(section.seed).unwrap_or(0);
    let report = args
        .report
        .clone()
        .or_else(|| section.report.clone())
        .unwrap_or_else(|| PathBuf::from("report.json"));
    let sequential = args.sequential || section.sequential.unwrap_or(false);

    let mut warnings = dataset.warnings.clone();
    if let Some(w) = check_batch_size(k, dataset.kind) {
        log::warn!("{w}");
        warnings.push(w);
    }

    let llm = backends::llm(&args.backend, config)?;
    let embedder = backends::embedder(&args.backend, config)?;
    let catalog = backends::catalog(&catalog_name, embedder.as_ref(), config)?;

    let snapshot = args.graph.as_deref().or(section.snapshot.as_deref());
    let mut base = load_snapshot(Arc::clone(&catalog), snapshot)?;
    let mut skipped = 0;
    for inst in &dataset.instances {
        for [s, r, o] in &inst.base_triples {
            if base.assert_fact(s, r, o).is_err() {
                skipped += 1;
            }
        }
    }
    if skipped > 0 {
        let w = format!("skipped {skipped} base facts with relations outside the catalog");
        log::warn!("{w}");
        warnings.push(w);
    }

    let mut eval_config = EvalConfig::new(k, mode, catalog.name());
    eval_config.seed = seed;
    if let Some(top_x) = args.top_x.or(section.top_x) {
        eval_config.retriever = RetrieverConfig::new(top_x)?;
    }
    let prompts = backends::prompts(&args.backend, config, catalog.name())?;
    let mut evaluator = Evaluator::new(eval_config, backends::ports(llm, embedder), base)
        .with_execution(if sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        });
    if let Some(prompts) = prompts {
        evaluator = evaluator.with_prompts(prompts);
    }

    let run = evaluator.evaluate(&dataset.instances)?;
    let stdout = io::stdout();
    emit_report(&run, &report, &warnings, &mut stdout.lock())?;
    Ok(())
}

fn read_edits(path: &Path) -> anyhow::Result<Vec<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading edits {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

fn show(answer: Option<&str>) -> &str {
    answer.unwrap_or("-")
}

pub fn ask(args: AskArgs, config: &FileConfig) -> anyhow::Result<()> {
    let mode = parse_mode(args.mode.as_deref(), config.eval.mode.as_deref())?;
    let catalog_name = args
        .catalog
        .clone()
        .or_else(|| config.eval.catalog.clone())
        .unwrap_or_else(|| "mquake-cf".into());
    let edits = match &args.edits {
        Some(path) => read_edits(path)?,
        None => Vec::new(),
    };

    let llm = backends::llm(&args.backend, config)?;
    let embedder = backends::embedder(&args.backend, config)?;
    let catalog = backends::catalog(&catalog_name, embedder.as_ref(), config)?;
    let snapshot = args.graph.as_deref().or(config.eval.snapshot.as_deref());
    let base = load_snapshot(Arc::clone(&catalog), snapshot)?;

    let mut eval_config = EvalConfig::new(1, mode, catalog.name());
    if let Some(top_x) = args.top_x.or(config.eval.top_x) {
        eval_config.retriever = RetrieverConfig::new(top_x)?;
    }
    let prompts = backends::prompts(&args.backend, config, catalog.name())?;
    let mut evaluator = Evaluator::new(eval_config, backends::ports(llm, embedder), base)
        .with_execution(Execution::Sequential);
    if let Some(prompts) = prompts {
        evaluator = evaluator.with_prompts(prompts);
    }

    let instance = QaInstance {
        id: "ask".into(),
        questions: vec![args.question],
        edits,
        gold: GoldAnswer::new(""),
        hop_count: 0,
        base_triples: Vec::new(),
    };
    let group = evaluator.run_group(0, &[&instance]);
    for failure in &group.edit_failures {
        eprintln!(
            "warning: edit `{}` not applied: {}",
            failure.sentence, failure.error
        );
    }
    let record = group
        .results
        .first()
        .and_then(|r| r.records.first())
        .context("no answer record produced")?;
    for e in &record.errors {
        eprintln!("warning: {e}");
    }
    for d in &record.diagnostics {
        eprintln!("note: {d}");
    }
    let chain = record.chain.as_ref().map(RelationChain::render);
    let mut out = io::stdout().lock();
    writeln!(out, "chain: {}", show(chain.as_deref()))?;
    writeln!(out, "kbqa: {}", show(record.kbqa_answer.as_deref()))?;
    writeln!(out, "llm: {}", show(record.llm_answer.as_deref()))?;
    writeln!(out, "final: {}", show(record.final_answer.as_deref()))?;
    Ok(())
}

fn graph_catalog(
    flag: Option<String>,
    config: &FileConfig,
) -> anyhow::Result<Arc<RelationCatalog>> {
    let name = flag
        .or_else(|| config.eval.catalog.clone())
        .unwrap_or_else(|| "mquake-cf".into());
    Ok(Arc::new(
        RelationCatalog::load(&name).with_context(|| format!("loading catalog {name}"))?,
    ))
}

fn canonical_relation(catalog: &RelationCatalog, relation: &str) -> anyhow::Result<String> {
    let mapped = catalog.normalize(relation)?;
    if !mapped.exact {
        eprintln!("relation `{relation}` mapped to `{}`", mapped.label);
    }
    Ok(mapped.label)
}

pub fn graph(action: GraphCommand, config: &FileConfig) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    match action {
        GraphCommand::Load { snapshot, catalog } => {
            let catalog = graph_catalog(catalog, config)?;
            let g = load_snapshot(catalog, Some(&snapshot))?;
            writeln!(out, "entities: {}", g.entity_count())?;
            writeln!(out, "triples: {}", g.triple_count())?;
        }
        GraphCommand::Edit {
            snapshot,
            subject,
            relation,
            object,
            out: target,
            catalog,
        } => {
            let catalog = graph_catalog(catalog, config)?;
            let relation = canonical_relation(&catalog, &relation)?;
            let mut g = load_snapshot(catalog, Some(&snapshot))?;
            let record = g.apply_edit(&subject, &relation, &object)?;
            let target = target.unwrap_or(snapshot);
            g.save(&target)
                .with_context(|| format!("writing snapshot {}", target.display()))?;
            let removed: Vec<&str> = record.removed.iter().map(|e| e.label.as_str()).collect();
            writeln!(
                out,
                "{subject} -> {relation} -> {object} (replaced: {})",
                if removed.is_empty() {
                    "none".to_string()
                } else {
                    removed.join(", ")
                }
            )?;
        }
        GraphCommand::Query {
            snapshot,
            chain,
            sparql,
            endpoint,
            catalog,
        } => {
            let catalog = graph_catalog(catalog, config)?;
            let (head, relations) = parse_chain_output(&chain)?;
            let relations = relations
                .iter()
                .map(|r| canonical_relation(&catalog, r))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let chain = RelationChain::new(head, relations);
            let g = load_snapshot(catalog, Some(&snapshot))?;
            let endpoint = endpoint.or_else(|| config.sparql.endpoint.clone());
            if sparql || endpoint.is_some() {
                let query = build_query(&chain, &g)?;
                if sparql {
                    writeln!(out, "{}", query.text)?;
                }
                if let Some(url) = endpoint {
                    let timeout = Duration::from_secs(config.sparql.timeout_secs.unwrap_or(60));
                    let answer = SparqlEndpoint::new(url, timeout).execute(&query)?;
                    writeln!(
                        out,
                        "answer: {}",
                        show(answer.as_ref().map(|a| a.label.as_str()))
                    )?;
                    return Ok(());
                }
            }
            let answer = execute_local(&chain, &g);
            writeln!(
                out,
                "answer: {}",
                show(answer.as_ref().map(|a| a.label.as_str()))
            )?;
        }
    }
    Ok(())
}

pub fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let catalog = RelationCatalog::load(&args.catalog)
        .with_context(|| format!("loading catalog {}", args.catalog))?;
    let suite = generate(&SyntheticConfig::new(args.instances, args.seed), &catalog);
    save_dataset(&args.out, &suite.instances())?;
    if let Some(path) = &args.script {
        let script = serde_json::to_string_pretty(&suite.oracle_script_file())?;
        fs::write(path, script).with_context(|| format!("writing script {}", path.display()))?;
    }
    println!(
        "wrote {} instances to {}",
        suite.cases.len(),
        args.out.display()
    );
    Ok(())
}
