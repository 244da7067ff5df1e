//! CSS subset: parsing, selector matching and the cascade.

mod cascade;
mod parser;
mod selector;
mod values;

use thiserror::Error;

use crate::dom::NodeId;
use crate::scheduler::TraversalError;

pub use cascade::{cascade, compute_styles, default_display, restyle_subtree, StyleMap, INLINE_SPECIFICITY};
pub use parser::{
    parse_declarations, parse_stylesheet, parse_stylesheet_from, Declaration, Diagnostic, ParsedSheet, Property, Rule,
    Value,
};
pub use selector::{Combinator, Compound, Selector, Specificity};
pub use values::{Color, ComputedStyle, Display, Edges, Rgb, Size, ROOT_FONT_SIZE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StyleError {
    #[error("node {0} is not an element")]
    NotAnElement(NodeId),
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error(transparent)]
    Traversal(TraversalError),
}

/// Parses several sheets into one rule list with distinct source orders.
pub fn parse_sheets<'a>(sheets: impl IntoIterator<Item = &'a str>) -> ParsedSheet {
    let mut all = ParsedSheet::default();
    for text in sheets {
        let sheet = parse_stylesheet_from(text, all.rules.len());
        all.rules.extend(sheet.rules);
        all.diagnostics.extend(sheet.diagnostics);
    }
    all
}
