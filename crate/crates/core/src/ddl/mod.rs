//! The schema DDL: parsing, printing, well-formedness and the bridge to and
//! from schema graphs.

mod bridge;
mod check;
mod parser;
mod printer;
mod readback;
mod types;

pub use bridge::{graph_type_to_schema, graph_type_to_schema_with, schema_edge_id, TypeIndex};
pub use check::{check_graph_type, interpretation_diagnostics, Diagnostic};
pub use parser::parse_ddl_unchecked;
pub use printer::print_ddl;
pub use readback::schema_to_graph_type;
pub use types::{exposed_sets, EdgeType, ElementType, Exposed, GraphType, NodeType, PropertyType};

use crate::error::DdlError;

/// Parses DDL text and rejects graph types violating a well-formedness rule.
pub fn parse_ddl(text: &str) -> Result<GraphType, DdlError> {
    let gt = parse_ddl_unchecked(text)?;
    let diags = check_graph_type(&gt);
    if diags.is_empty() {
        Ok(gt)
    } else {
        Err(DdlError::Invalid(diags))
    }
}
