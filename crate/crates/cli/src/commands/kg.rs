//! `kg`, `trace` and `repl` subcommands.

use std::io::BufRead;
use std::path::Path;

use chainscope_core::kg::{
    articulation_points, degree_centrality, execute, export_script, ingest_script, parse_query,
    trace_paths, PropertyGraph,
};
use chainscope_gateway::{nl_to_query, EndpointConfig, HttpTransport};

use crate::util::{read_file, write_output, CliError, Format};

fn load_graph(script: &Path) -> Result<PropertyGraph, CliError> {
    ingest_script(&read_file(script)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", script.display())))
}

pub fn ingest(script: &Path, format: Format) -> Result<u8, CliError> {
    let graph = load_graph(script)?;
    match format {
        Format::Text => println!(
            "ok: {} nodes, {} relationships, {} attributes beyond name",
            graph.node_count(),
            graph.rel_count(),
            graph.attribute_pairs().len()
        ),
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "nodes": graph.node_count(),
                "relationships": graph.rel_count(),
                "attributes": graph.attribute_pairs().len(),
            })
        ),
    }
    Ok(0)
}

pub fn query(
    script: &Path,
    query_text: Option<&str>,
    query_file: Option<&Path>,
    format: Format,
) -> Result<u8, CliError> {
    let graph = load_graph(script)?;
    let text = match (query_text, query_file) {
        (Some(text), _) => text.to_string(),
        (None, Some(path)) => read_file(path)?,
        (None, None) => {
            return Err(CliError::Usage("pass --query or --query-file".into()));
        }
    };
    let parsed = parse_query(text.trim()).map_err(|e| CliError::Parse(e.to_string()))?;
    let table = execute(&parsed, &graph).map_err(|e| CliError::Parse(e.to_string()))?;
    match format {
        Format::Text => print!("{}", table.render_text()),
        Format::Json => println!(
            "{}",
            serde_json::to_string(&table).expect("table serializes")
        ),
    }
    Ok(0)
}

pub fn analyze(script: &Path, top: usize, format: Format) -> Result<u8, CliError> {
    let graph = load_graph(script)?;
    let bottlenecks = articulation_points(&graph);
    let central = degree_centrality(&graph, top.max(1));
    match format {
        Format::Text => {
            let names: Vec<String> = bottlenecks
                .iter()
                .map(|id| render_node(&graph, id))
                .collect();
            println!(
                "bottlenecks (articulation points): {}",
                list_or_none(&names)
            );
            println!("top degree centrality:");
            for (id, degree) in &central {
                println!("  {:<30} degree {}", render_node(&graph, id), degree);
            }
        }
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "articulation_points": bottlenecks,
                "degree_centrality": central,
            })
        ),
    }
    Ok(0)
}

fn list_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".into()
    } else {
        items.join(", ")
    }
}

fn render_node(graph: &PropertyGraph, id: &str) -> String {
    match graph.nodes.get(id).and_then(|n| n.name()) {
        Some(name) => format!("{id} ({name})"),
        None => id.to_string(),
    }
}

pub fn export(script: &Path, output: Option<&Path>) -> Result<u8, CliError> {
    let graph = load_graph(script)?;
    write_output(output, &export_script(&graph))?;
    Ok(0)
}

pub fn trace(
    script: &Path,
    from: &str,
    to: &str,
    max_len: usize,
    format: Format,
) -> Result<u8, CliError> {
    let graph = load_graph(script)?;
    let paths =
        trace_paths(&graph, from, to, max_len).map_err(|e| CliError::Usage(e.to_string()))?;
    match format {
        Format::Text => {
            if paths.is_empty() {
                println!("no paths from {from} to {to} within {max_len} hops");
            }
            for path in &paths {
                let rendered: Vec<String> = path.iter().map(|id| render_node(&graph, id)).collect();
                println!("{}", rendered.join(" -> "));
            }
        }
        Format::Json => println!(
            "{}",
            serde_json::to_string(&paths).expect("paths serialize")
        ),
    }
    Ok(0)
}

/// Line-oriented query loop. Plain lines are parsed and executed locally;
/// `nl:`-prefixed lines go through the configured endpoint. The transport is
/// built lazily, so sessions without `nl:` lines stay fully offline.
pub fn repl(script: &Path, config_path: Option<&Path>) -> Result<u8, CliError> {
    let graph = load_graph(script)?;
    let mut endpoint: Option<(HttpTransport, EndpointConfig)> = None;

    let stdin = std::io::stdin();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| CliError::Io(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "exit" || line == "quit" {
            break;
        }

        let query = if let Some(nl) = line.strip_prefix("nl:") {
            if endpoint.is_none() {
                let config = EndpointConfig::load(config_path)?;
                let transport = HttpTransport::new(&config)?;
                endpoint = Some((transport, config));
            }
            let (transport, config) = endpoint.as_ref().expect("endpoint just configured");
            match nl_to_query(nl.trim(), &graph, transport, config) {
                Ok(generated) => {
                    println!("query: {}", generated.text);
                    generated.query
                }
                Err(e) => {
                    eprintln!("error[endpoint]: {e}");
                    continue;
                }
            }
        } else {
            match parse_query(line) {
                Ok(q) => q,
                Err(e) => {
                    eprintln!("error[parse]: {e}");
                    continue;
                }
            }
        };

        match execute(&query, &graph) {
            Ok(table) => print!("{}", table.render_text()),
            Err(e) => eprintln!("error[parse]: {e}"),
        }
    }
    Ok(0)
}
