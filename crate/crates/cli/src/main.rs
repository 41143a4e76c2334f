//! Single command-line entry point wiring the toolchain end to end: diagram
//! parsing, model lowering, rule validation, graph querying and analytics,
//! endpoint-backed extraction, and the evaluation harness.
//!
//! Exit codes: 0 success; 1 at least one rule violated or query mismatch;
//! 2 usage, parse or IO error; 3 endpoint failure.

mod commands;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use util::{CliError, Format};

#[derive(Parser)]
#[command(
    name = "chainscope",
    version,
    about = "Supply-chain process and knowledge-graph analysis toolchain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an activity diagram and report its shape.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Lower a diagram to the canonical model JSON.
    Model {
        file: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a rule file against a process model.
    Validate {
        /// Process model: canonical JSON or a diagram file.
        #[arg(long)]
        model: PathBuf,
        /// Rule DSL file.
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Knowledge-graph operations on script files.
    #[command(subcommand)]
    Kg(KgCommand),
    /// All simple paths between two nodes.
    Trace {
        /// Graph script file.
        graph: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Endpoint-backed extraction (requires a configured endpoint).
    #[command(subcommand)]
    Extract(ExtractCommand),
    /// Score extractions against ground truth.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Interactive query loop; `nl:`-prefixed lines go through the endpoint.
    Repl {
        /// Graph script file.
        graph: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KgCommand {
    /// Parse a script and report node/relationship counts.
    Ingest {
        script: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a query against a script's graph.
    Query {
        script: PathBuf,
        /// Query text; alternatively --query-file.
        #[arg(long, conflicts_with = "query_file")]
        query: Option<String>,
        #[arg(long)]
        query_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Bottlenecks (articulation points) and degree centrality.
    Analyze {
        script: PathBuf,
        /// How many central nodes to list.
        #[arg(long, default_value_t = 5)]
        top: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Normalize a script: ingest and re-export deterministically.
    Export {
        script: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExtractCommand {
    /// Extract a process model from a textual description.
    Process {
        /// File with the textual description.
        #[arg(long)]
        description: PathBuf,
        /// Optional diagram image forwarded to the endpoint.
        #[arg(long)]
        image: Option<PathBuf>,
        /// Prior diagram to update.
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Append the exchange transcript (JSON lines) to this file.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Extract a knowledge graph from a textual description.
    Graph {
        #[arg(long)]
        description: PathBuf,
        #[arg(long)]
        image: Option<PathBuf>,
        /// Prior graph script to update.
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Formalize free-text rules against a process model.
    Rules {
        /// File with the free-form rule text.
        #[arg(long)]
        text: PathBuf,
        /// Process model (canonical JSON or diagram).
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Generate a query from natural language against a graph's schema.
    Query {
        /// The analyst text.
        #[arg(long)]
        text: String,
        /// Graph script providing the schema.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Score an extracted graph against the ground-truth graph.
    Graph {
        /// Ground-truth graph script.
        #[arg(long)]
        truth: PathBuf,
        /// Optional explicit attribute list (`node :: key` lines).
        #[arg(long)]
        attrs: Option<PathBuf>,
        /// Extracted graph script.
        #[arg(long)]
        extracted: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Score an extracted process model and rules against ground truth.
    Process {
        #[arg(long)]
        truth_model: PathBuf,
        #[arg(long)]
        truth_rules: PathBuf,
        #[arg(long)]
        extracted_model: PathBuf,
        #[arg(long)]
        extracted_rules: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Score candidate queries against reference queries on a graph.
    Queries {
        #[arg(long)]
        graph: PathBuf,
        /// Candidate queries, one per line.
        #[arg(long)]
        candidates: PathBuf,
        /// Reference queries, one per line, aligned with the candidates.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run every aspect over a bundled fixture directory and print the
    /// results table.
    All {
        /// Fixture root (contains kg_reference.cypher and eval/).
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error[{}]: {}", error.category(), error);
            ExitCode::from(error.exit_code() as u8)
        }
    }
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Parse { file, format } => commands::diagram::parse(&file, format),
        Command::Model { file, output } => commands::diagram::model(&file, output.as_deref()),
        Command::Validate {
            model,
            rules,
            format,
        } => commands::diagram::validate(&model, &rules, format),
        Command::Kg(kg) => match kg {
            KgCommand::Ingest { script, format } => commands::kg::ingest(&script, format),
            KgCommand::Query {
                script,
                query,
                query_file,
                format,
            } => commands::kg::query(&script, query.as_deref(), query_file.as_deref(), format),
            KgCommand::Analyze {
                script,
                top,
                format,
            } => commands::kg::analyze(&script, top, format),
            KgCommand::Export { script, output } => {
                commands::kg::export(&script, output.as_deref())
            }
        },
        Command::Trace {
            graph,
            from,
            to,
            max_len,
            format,
        } => commands::kg::trace(&graph, &from, &to, max_len, format),
        Command::Extract(extract) => match extract {
            ExtractCommand::Process {
                description,
                image,
                prior,
                config,
                output,
                transcript,
            } => commands::extract::process(
                &description,
                image.as_deref(),
                prior.as_deref(),
                config.as_deref(),
                output.as_deref(),
                transcript.as_deref(),
            ),
            ExtractCommand::Graph {
                description,
                image,
                prior,
                config,
                output,
                transcript,
            } => commands::extract::graph(
                &description,
                image.as_deref(),
                prior.as_deref(),
                config.as_deref(),
                output.as_deref(),
                transcript.as_deref(),
            ),
            ExtractCommand::Rules {
                text,
                model,
                config,
                output,
                transcript,
            } => commands::extract::rules(
                &text,
                &model,
                config.as_deref(),
                output.as_deref(),
                transcript.as_deref(),
            ),
            ExtractCommand::Query {
                text,
                graph,
                config,
                transcript,
            } => commands::extract::query(&text, &graph, config.as_deref(), transcript.as_deref()),
        },
        Command::Eval(eval) => match eval {
            EvalCommand::Graph {
                truth,
                attrs,
                extracted,
                format,
            } => commands::eval::graph(&truth, attrs.as_deref(), &extracted, format),
            EvalCommand::Process {
                truth_model,
                truth_rules,
                extracted_model,
                extracted_rules,
                format,
            } => commands::eval::process(
                &truth_model,
                &truth_rules,
                &extracted_model,
                &extracted_rules,
                format,
            ),
            EvalCommand::Queries {
                graph,
                candidates,
                reference,
                format,
            } => commands::eval::queries(&graph, &candidates, &reference, format),
            EvalCommand::All { fixtures, format } => commands::eval::all(&fixtures, format),
        },
        Command::Repl { graph, config } => commands::kg::repl(&graph, config.as_deref()),
    }
}
