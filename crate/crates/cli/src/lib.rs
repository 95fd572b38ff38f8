//! Document format, DOT export, JSON mirror and command implementations for
//! the AHP engine.

pub mod document;
pub mod dot;
pub mod emit;
pub mod json;
pub mod parse;

pub use document::Document;
pub use dot::export_dot;
pub use emit::emit_document;
pub use parse::{parse_document, DocError};
