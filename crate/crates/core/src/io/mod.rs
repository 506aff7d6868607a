//! Reading frameworks and writing results.

pub mod output;
pub mod saf;

pub use output::{emit_result, format_significant, OutputFormat, Parameters, Payload, ResultEnvelope};
pub use saf::{parse_framework, parse_saf, serialize_saf, SafDocument, SafError, Statement};
