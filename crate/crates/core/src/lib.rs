//! Deterministic core of the supply-chain analysis toolchain: an activity
//! diagram parser and canonical process model, an ordering-rule engine, an
//! in-memory property graph with a query subset and analytics, and the
//! evaluation harness that scores extracted artifacts against ground truth.
//!
//! The offline pipeline in one pass:
//!
//! ```
//! use chainscope_core::{lower_to_model, parse_activity_diagram};
//! use chainscope_core::engine::evaluate;
//! use chainscope_core::rules::{parse_rules, VerdictStatus};
//!
//! let diagram = "@startuml
//! |Lab|
//! start
//! :Design Part;
//! |Factory|
//! :Build Part;
//! stop
//! @enduml";
//! let ast = parse_activity_diagram(diagram, "example").unwrap();
//! let model = lower_to_model(&ast).unwrap();
//! assert_eq!(model.participants, ["Lab", "Factory"]);
//!
//! let rules = parse_rules(r#"rule 1 : before("Design Part","Build Part")"#).unwrap();
//! let verdicts = evaluate(&rules, &model);
//! assert_eq!(verdicts[0].status, VerdictStatus::Satisfied);
//! ```

pub mod ast;
pub mod cfg;
pub mod engine;
pub mod error;
pub mod eval;
pub mod kg;
pub mod label;
pub mod model;
pub mod parser;
pub mod rules;
pub mod synth;

pub use ast::{serialize_ast, DiagramAst, Element};
pub use cfg::{build_cfg, Cfg, CfgPath};
pub use error::ParseError;
pub use label::normalize_label;
pub use model::{
    from_canonical_json, lower_to_model, to_canonical_json, Artifact, Edge, ModelError, Node,
    NodeKind, ProcessModel,
};
pub use parser::parse_activity_diagram;

#[cfg(test)]
mod assert_thread_safe {
    //! The core types are plain data and move freely across threads.
    use super::*;

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_types_are_send_and_sync() {
        assert_send_sync::<DiagramAst>();
        assert_send_sync::<ProcessModel>();
        assert_send_sync::<Cfg>();
        assert_send_sync::<rules::Rule>();
        assert_send_sync::<rules::Verdict>();
        assert_send_sync::<kg::PropertyGraph>();
        assert_send_sync::<kg::ResultTable>();
    }
}
