//! Gateway to an OpenAI-compatible chat endpoint: renders the extraction
//! prompts, sends requests through a pluggable transport, validates every
//! response with the deterministic parsers, and retries with parser
//! feedback on failure.
//!
//! Nothing in this crate requires network access at test time: the
//! [`transport::MockTransport`] scripts responses, and extraction functions
//! are generic over [`transport::ChatTransport`].

pub mod config;
mod error;
pub mod extract;
pub mod prompts;
pub mod transcript;
pub mod transport;

pub use config::EndpointConfig;
pub use error::GatewayError;
pub use extract::{
    extract_graph, extract_process, formalize_rules, nl_to_query, Extracted, FormalizedRules,
    ProcessExtraction, QueryGeneration,
};
pub use prompts::{render_prompt, PromptId, PromptTemplate, Slots};
pub use transcript::{ParseOutcome, Transcript, TranscriptEntry};
pub use transport::{ChatMessage, ChatRequest, ChatTransport, HttpTransport, MockTransport};
