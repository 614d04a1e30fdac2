//! The ludeme description language: syntax tree, parser, canonical printer,
//! catalog of known ludemes and validation against it.

mod ast;
pub mod catalog;
pub mod generate;
mod parser;
mod printer;
mod validate;

pub use ast::{Arg, Hole, LudemeNode, LudemeTree, PlayerRef, Span};
pub use catalog::{parse_fragment, Catalog, CATALOG_VERSION};
pub use parser::{parse, parse_bytes, ParseError, ParseErrorKind, ParseErrorList};
pub use printer::{pretty, print, print_arg, print_node};
pub use validate::{validate, validate_node, Issue, IssueKind, ValidationReport};
