//! `kgedit` command-line interface.

mod backends;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::FileConfig;

#[derive(Parser)]
#[command(
    name = "kgedit",
    version,
    about = "Multi-hop QA over an edit-aware knowledge graph"
)]
struct Cli {
    /// TOML configuration file (defaults to ./kgedit.toml when present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the batched evaluation over a dataset and write a report.
    Eval(EvalArgs),
    /// Answer one question after applying a set of edit sentences.
    Ask(AskArgs),
    /// Inspect, edit or query a graph snapshot.
    Graph {
        #[command(subcommand)]
        action: GraphCommand,
    },
    /// Write a synthetic dataset and a matching scripted-LLM file.
    Synth(SynthArgs),
}

/// Backend options shared by commands that talk to a language model.
#[derive(Args, Clone, Default)]
pub struct BackendArgs {
    /// `http` or `mock:<script.json>`.
    #[arg(long)]
    pub llm: Option<String>,
    /// Completion endpoint for the http backend.
    #[arg(long)]
    pub llm_url: Option<String>,
    /// Model name sent to the http backend.
    #[arg(long)]
    pub model: Option<String>,
    /// `hashing`, `lexical` or `http`.
    #[arg(long)]
    pub embedder: Option<String>,
    /// Embedding endpoint for the http embedder.
    #[arg(long)]
    pub embedding_url: Option<String>,
    /// Directory with prompt overrides.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Dataset JSON file (native or MQuAKE layout).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Batch size.
    #[arg(long)]
    pub k: Option<usize>,
    /// `qa`, `kbqa` or `full`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Built-in catalog name (`mquake-cf`, `mquake-t`) or catalog file.
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; the per-question CSV trace is written next to it.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Facts retrieved per question.
    #[arg(long)]
    pub top_x: Option<usize>,
    /// `auto`, `native` or `mquake`.
    #[arg(long)]
    pub layout: Option<String>,
    /// JSON field mapping for the native layout.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Graph snapshot with extra base facts.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Disable data-parallel execution.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Args)]
pub struct AskArgs {
    #[arg(long)]
    pub question: String,
    /// File with one edit sentence per line (`#` starts a comment).
    #[arg(long)]
    pub edits: Option<PathBuf>,
    /// Graph snapshot to start from.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub top_x: Option<usize>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Subcommand)]
pub enum GraphCommand {
    /// Validate a snapshot and print its size.
    Load {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        catalog: Option<String>,
    },
    /// Overwrite the objects of one (subject, relation) slot.
    Edit {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        relation: String,
        #[arg(long)]
        object: String,
        /// Output path (defaults to rewriting the snapshot).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        catalog: Option<String>,
    },
    /// Follow a chain such as `Eeyore->creator->child`.
    Query {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        chain: String,
        /// Print the compiled SPARQL query.
        #[arg(long)]
        sparql: bool,
        /// Run the query against this SPARQL endpoint instead of locally.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        catalog: Option<String>,
    },
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "mquake-cf")]
    pub catalog: String,
    /// Dataset output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Scripted-LLM output path, usable as `--llm mock:<path>`.
    #[arg(long)]
    pub script: Option<PathBuf>,
}

fn is_schema_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<kgedit::Error>()
            .is_some_and(kgedit::Error::is_schema_error)
            || cause.is::<toml::de::Error>()
            || cause.is::<serde_json::Error>()
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Eval(args) => commands::eval(args, &config),
        Command::Ask(args) => commands::ask(args, &config),
        Command::Graph { action } => commands::graph(action, &config),
        Command::Synth(args) => commands::synth(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_schema_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
