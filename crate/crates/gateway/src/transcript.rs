//! Append-only record of every endpoint exchange.

use serde::{Deserialize, Serialize};

use crate::transport::ChatRequest;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ParseOutcome {
    Ok,
    ParseError { message: String },
}

/// One exchange: the request (credential-free by construction), the raw
/// response, how validation went, and timing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub attempt: usize,
    pub request: ChatRequest,
    pub response: String,
    pub outcome: ParseOutcome,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: TranscriptEntry) {
        self.entries.push(entry);
    }

    /// One JSON object per line, ready for appending to a log file.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry).expect("transcript serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::ChatMessage;

    #[test]
    fn jsonl_has_one_line_per_entry() {
        let mut transcript = Transcript::default();
        for attempt in 0..2 {
            transcript.push(TranscriptEntry {
                attempt,
                request: ChatRequest {
                    model: "m".into(),
                    messages: vec![ChatMessage::user("hello")],
                    temperature: 0.0,
                },
                response: "world".into(),
                outcome: ParseOutcome::Ok,
                elapsed_ms: 1,
            });
        }
        let jsonl = transcript.to_jsonl();
        assert_eq!(jsonl.lines().count(), 2);
        assert!(jsonl
            .lines()
            .all(|l| serde_json::from_str::<TranscriptEntry>(l).is_ok()));
    }
}
