//! The textual circuit language: syntax tree, parser, canonical printer,
//! validator and elaborator.

mod ast;
mod circuit;
mod elaborate;
mod parse;
mod print;
mod validate;

pub use ast::{CircuitAst, Connect, DeclKind, Endpoint, NodeDecl};
pub use circuit::{Channel, Circuit, Node};
pub use elaborate::{elaborate, ElaborateError, ElaborateOptions, SyncPolicy};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use print::print_canonical;
pub use validate::{has_errors, validate, Diagnostic, Severity};
