//! Endpoint-backed `extract` subcommands. Everything here builds an HTTP
//! transport; all other subcommands run fully offline.

use std::path::Path;

use chainscope_core::kg::{export_script, ingest_script};
use chainscope_core::rules::render_rules;
use chainscope_core::{parse_activity_diagram, to_canonical_json};
use chainscope_gateway::{
    extract_graph, extract_process, formalize_rules, nl_to_query, EndpointConfig, HttpTransport,
    Transcript,
};

use crate::util::{load_model, read_bytes, read_file, write_output, CliError};

fn endpoint(config_path: Option<&Path>) -> Result<(HttpTransport, EndpointConfig), CliError> {
    let config = EndpointConfig::load(config_path)?;
    let transport = HttpTransport::new(&config)?;
    Ok((transport, config))
}

fn append_transcript(path: Option<&Path>, transcript: &Transcript) -> Result<(), CliError> {
    let Some(path) = path else {
        return Ok(());
    };
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    file.write_all(transcript.to_jsonl().as_bytes())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn process(
    description: &Path,
    image: Option<&Path>,
    prior: Option<&Path>,
    config_path: Option<&Path>,
    output: Option<&Path>,
    transcript_path: Option<&Path>,
) -> Result<u8, CliError> {
    let description = read_file(description)?;
    let image_bytes = image.map(read_bytes).transpose()?;
    let prior_ast = prior
        .map(|p| {
            let text = read_file(p)?;
            parse_activity_diagram(&text, &p.display().to_string())
                .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
        })
        .transpose()?;

    let (transport, config) = endpoint(config_path)?;
    let result = extract_process(
        &description,
        image_bytes.as_deref(),
        prior_ast.as_ref(),
        &transport,
        &config,
    );
    match result {
        Ok(extraction) => {
            append_transcript(transcript_path, &extraction.transcript)?;
            let bytes = to_canonical_json(&extraction.model);
            write_output(output, std::str::from_utf8(&bytes).expect("canonical JSON"))?;
            Ok(0)
        }
        Err(e) => {
            if let chainscope_gateway::GatewayError::ValidationFailed { transcript, .. } = &e {
                append_transcript(transcript_path, transcript)?;
            }
            Err(e.into())
        }
    }
}

pub fn graph(
    description: &Path,
    image: Option<&Path>,
    prior: Option<&Path>,
    config_path: Option<&Path>,
    output: Option<&Path>,
    transcript_path: Option<&Path>,
) -> Result<u8, CliError> {
    let description = read_file(description)?;
    let image_bytes = image.map(read_bytes).transpose()?;
    let prior_graph = prior
        .map(|p| {
            ingest_script(&read_file(p)?)
                .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
        })
        .transpose()?;

    let (transport, config) = endpoint(config_path)?;
    let result = extract_graph(
        &description,
        image_bytes.as_deref(),
        prior_graph.as_ref(),
        &transport,
        &config,
    );
    match result {
        Ok(extraction) => {
            append_transcript(transcript_path, &extraction.transcript)?;
            write_output(output, &export_script(&extraction.value))?;
            Ok(0)
        }
        Err(e) => {
            if let chainscope_gateway::GatewayError::ValidationFailed { transcript, .. } = &e {
                append_transcript(transcript_path, transcript)?;
            }
            Err(e.into())
        }
    }
}

pub fn rules(
    text: &Path,
    model_path: &Path,
    config_path: Option<&Path>,
    output: Option<&Path>,
    transcript_path: Option<&Path>,
) -> Result<u8, CliError> {
    let free_text = read_file(text)?;
    let model = load_model(model_path)?;
    let (transport, config) = endpoint(config_path)?;
    match formalize_rules(&free_text, &model, &transport, &config) {
        Ok(result) => {
            append_transcript(transcript_path, &result.transcript)?;
            for warning in &result.warnings {
                eprintln!("warning: {warning}");
            }
            write_output(output, &render_rules(&result.rules))?;
            Ok(0)
        }
        Err(e) => {
            if let chainscope_gateway::GatewayError::ValidationFailed { transcript, .. } = &e {
                append_transcript(transcript_path, transcript)?;
            }
            Err(e.into())
        }
    }
}

pub fn query(
    text: &str,
    graph_path: &Path,
    config_path: Option<&Path>,
    transcript_path: Option<&Path>,
) -> Result<u8, CliError> {
    let graph = ingest_script(&read_file(graph_path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", graph_path.display())))?;
    let (transport, config) = endpoint(config_path)?;
    match nl_to_query(text, &graph, &transport, &config) {
        Ok(result) => {
            append_transcript(transcript_path, &result.transcript)?;
            println!("{}", result.text);
            Ok(0)
        }
        Err(e) => {
            if let chainscope_gateway::GatewayError::ValidationFailed { transcript, .. } = &e {
                append_transcript(transcript_path, transcript)?;
            }
            Err(e.into())
        }
    }
}
