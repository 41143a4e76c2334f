//! Gateway error types.

use chainscope_core::ParseError;

use crate::transcript::Transcript;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("missing prompt slot [{0}]")]
    MissingSlot(String),

    #[error("endpoint request failed: {0}")]
    Transport(String),

    #[error("response still invalid after {attempts} attempts: {last_error}")]
    ValidationFailed {
        attempts: usize,
        last_error: ParseError,
        transcript: Box<Transcript>,
    },

    #[error("model lowering failed: {0}")]
    Lowering(String),

    #[error("configuration error: {0}")]
    Config(String),
}
