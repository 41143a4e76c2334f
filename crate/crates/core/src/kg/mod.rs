//! In-memory property graph: script ingestion/export, a read-only query
//! subset with an independent brute-force oracle, and supply-chain
//! analytics (bottlenecks, centrality, path tracing).

mod analytics;
mod brute;
mod exec;
mod graph;
mod lex;
mod query;
mod script;

pub use analytics::{
    articulation_points, articulation_points_by_recount, degree_centrality, trace_paths,
};
pub use brute::brute_force_match;
pub use exec::execute;
pub use graph::{NodeData, PropertyGraph, Relationship, ResultTable, Value};
pub use query::{
    parse_query, CmpOp, Direction, Expr, NodePattern, Operand, OrderBy, PathPattern, Query,
    RelPattern, ReturnItem, ValueExpr,
};
pub use script::{export_script, ingest_script};

use std::fmt;

/// Runtime failures of queries and analytics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    UnknownNode(String),
    /// The matcher exceeded its intermediate-binding guard.
    ResourceLimit(usize),
    BadArgument(String),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UnknownNode(id) => write!(f, "unknown node id {id}"),
            GraphError::ResourceLimit(limit) => {
                write!(f, "query aborted: more than {limit} intermediate bindings")
            }
            GraphError::BadArgument(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for GraphError {}
