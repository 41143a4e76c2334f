//! Shared parse-error type for the textual front ends (activity diagrams,
//! rule DSL, graph scripts, queries).

use std::fmt;

use serde::{Deserialize, Serialize};

/// A parse failure with a precise location in the source text.
///
/// `line` and `column` are 1-based and always point into the input; `snippet`
/// is the offending line verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl ParseError {
    pub fn new(
        line: usize,
        column: usize,
        message: impl Into<String>,
        snippet: impl Into<String>,
    ) -> Self {
        ParseError {
            line: line.max(1),
            column: column.max(1),
            message: message.into(),
            snippet: snippet.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )?;
        if !self.snippet.is_empty() {
            write!(f, "\n  | {}", self.snippet)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}
