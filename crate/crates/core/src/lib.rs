//! In-memory property-graph schema engine.
//!
//! Schemas and instances are both [`PropertyGraph`]s; an instance is valid
//! when a [`Homomorphism`] into its schema satisfies the structure, key,
//! value and mandatory conditions. Schemas are written in a small DDL
//! ([`ddl`]), changed by sesqui-pushout rewriting ([`rewrite`]), and kept in
//! step with their instances by propagation ([`propagation`]).

pub mod codegen;
pub mod ddl;
pub mod error;
pub mod graph;
pub mod hom;
pub mod iso;
pub mod propagation;
pub mod rewrite;
pub mod smo;
pub mod value;

pub use codegen::{emit_clone_query, emit_merge_query, emit_rule_query, QueryText, Selector};
pub use error::{DdlError, GraphError, HomError, PropagationError, RewriteError, SmoError};
pub use graph::{dictionary_union, Edge, ElementData, Mutation, ObjectId, PropertyDictionary, PropertyGraph};
pub use hom::{check_homomorphism, compose, find_homomorphisms, Homomorphism, ValidationReport, ValueMode};
pub use propagation::{
    controlled_propagate_to_instance, controlled_propagate_to_schema, propagate_to_instance, propagate_to_schema,
    Propagated, PropagationRelation,
};
pub use rewrite::{apply_expansive, apply_restrictive, apply_rule, derive_actions, find_matchings, ActionPlan, Matching, Rule};
pub use smo::{
    compile_smo, push_back_deletion, push_through_addition, AuditTrail, Direction, Hierarchy, SchemaManipulation, SmoOp,
    TrailEntry,
};
pub use value::{DataType, Value};
