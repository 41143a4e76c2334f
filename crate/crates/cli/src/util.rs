//! Shared CLI plumbing: error categories mapped to exit codes, file IO and
//! model loading.

use std::fmt;
use std::path::Path;

use chainscope_core::model::ProcessModel;
use chainscope_core::{from_canonical_json, lower_to_model, parse_activity_diagram};

/// Exit codes: 0 success, 1 violation/mismatch, 2 usage/parse/IO, 3 endpoint.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Parse(String),
    Endpoint(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Endpoint(_) => "endpoint",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Endpoint(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Parse(m) | CliError::Endpoint(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<chainscope_core::ParseError> for CliError {
    fn from(e: chainscope_core::ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<chainscope_gateway::GatewayError> for CliError {
    fn from(e: chainscope_gateway::GatewayError) -> Self {
        use chainscope_gateway::GatewayError;
        match &e {
            GatewayError::Config(_) | GatewayError::MissingSlot(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Endpoint(e.to_string()),
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            if !content.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

/// Loads a process model from canonical JSON or, when the file starts with
/// `@startuml`, by parsing and lowering the diagram.
pub fn load_model(path: &Path) -> Result<ProcessModel, CliError> {
    let text = read_file(path)?;
    if text.trim_start().starts_with('{') {
        from_canonical_json(text.as_bytes())
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    } else {
        let ast = parse_activity_diagram(&text, &path.display().to_string())
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        lower_to_model(&ast).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}
