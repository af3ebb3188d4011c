use thiserror::Error;

use crate::ddl::Diagnostic;
use crate::graph::ObjectId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown element `{0}`")]
    UnknownElement(ObjectId),
    #[error("parallel edge {from} -> {to} in a simple graph")]
    ParallelEdge { from: ObjectId, to: ObjectId },
    #[error("cannot mark `{key}` mandatory on `{element}`: no such property")]
    MandatoryKeyAbsent { element: ObjectId, key: String },
    #[error("id `{0}` is already in use")]
    DuplicateId(ObjectId),
    #[error("cannot merge `{0}` with itself")]
    SameNode(ObjectId),
    #[error("malformed graph json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DdlError {
    #[error("syntax error at {line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Syntax { line: usize, column: usize, expected: Vec<String>, found: String },
    #[error("invalid graph type: {}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("schema cannot be read back: {0}")]
    UnsupportedHistory(String),
    #[error("malformed schema: {0}")]
    MalformedSchema(String),
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("`{node}` is mapped to `{target}`, which is not a node of the target graph")]
    DanglingMap { node: ObjectId, target: ObjectId },
    #[error("node `{0}` is not mapped")]
    NotTotal(ObjectId),
    #[error("`{0}` is mapped but is not a node of the source graph")]
    UnknownSource(ObjectId),
    #[error("cannot compose: `{0}` has no image under the second map")]
    MismatchedGraphs(ObjectId),
    #[error("malformed homomorphism json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("rule is not {0}")]
    InvalidRuleClass(&'static str),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed rule json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropagationError {
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("bad directive for `{node}` -> `{target}`: {reason}")]
    BadDirective { node: ObjectId, target: ObjectId, reason: String },
    #[error("cannot repair typing: {0}")]
    Unrepairable(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed relation json: {0}")]
    Json(String),
}

impl From<HomError> for PropagationError {
    fn from(e: HomError) -> Self {
        PropagationError::InconsistentInputs(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmoError {
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("trail entry {index} does not replay: {reason}")]
    ReplayMismatch { index: usize, reason: String },
    #[error("deletion of `{key}` is local to `{label}`; the property is not inherited")]
    AmbiguousOrigin { label: String, key: String },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Ddl(#[from] DdlError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed smo json: {0}")]
    Json(String),
}
