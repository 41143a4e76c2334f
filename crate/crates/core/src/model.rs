//! Canonical process model lowered from a diagram AST, and its deterministic
//! JSON interchange form.
//!
//! Lowering chains sequential elements, turns if/else into a decision with
//! two guarded out-edges joining at an explicit merge node, fork blocks into
//! fork/join pairs, and repeat blocks into a trailing decision whose guarded
//! back edge returns to the body head. Notes of the form `produces: X`
//! attach an artifact to the nearest preceding activity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{DiagramAst, Element};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Start,
    Stop,
    Activity,
    Decision,
    Fork,
    Join,
    Merge,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::Start => "start",
            NodeKind::Stop => "stop",
            NodeKind::Activity => "activity",
            NodeKind::Decision => "decision",
            NodeKind::Fork => "fork",
            NodeKind::Join => "join",
            NodeKind::Merge => "merge",
        };
        f.write_str(s)
    }
}

/// A node of the process model. Ids are `"n1".."nK"` in AST traversal order
/// and stable under re-lowering of an equal AST. `label` is empty for
/// structural kinds and holds the condition text for decisions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lane: Option<String>,
}

/// A control-flow edge. Only decision out-edges carry a guard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guard: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub produced_by: String,
}

/// Canonical "diagram as data" form: participants in order of first
/// appearance, nodes, guarded edges and produced artifacts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessModel {
    pub participants: Vec<String>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    NoStart,
    MisplacedStart,
    NoStop,
    FallsOffEnd { dangling: String },
    Unreachable { nodes: Vec<String> },
    EmptyRepeatBody,
    DuplicateGuards { decision: String, guard: String },
    Schema(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NoStart => write!(f, "diagram has no start marker"),
            ModelError::MisplacedStart => {
                write!(f, "start marker must be the first flow element")
            }
            ModelError::NoStop => write!(f, "diagram never reaches a stop marker"),
            ModelError::FallsOffEnd { dangling } => {
                write!(
                    f,
                    "control falls off the end without `stop` (after node {dangling})"
                )
            }
            ModelError::Unreachable { nodes } => {
                write!(f, "unreachable nodes: {}", nodes.join(", "))
            }
            ModelError::EmptyRepeatBody => write!(f, "repeat block has an empty body"),
            ModelError::DuplicateGuards { decision, guard } => {
                write!(f, "decision {decision} has two out-edges guarded `{guard}`")
            }
            ModelError::Schema(msg) => write!(f, "invalid model: {msg}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl ProcessModel {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn start_node(&self) -> Option<&Node> {
        self.nodes.iter().find(|n| n.kind == NodeKind::Start)
    }

    /// Full structural validation; lowering output always passes, loaded
    /// documents are checked on the way in.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut ids = BTreeSet::new();
        for node in &self.nodes {
            if !ids.insert(node.id.as_str()) {
                return Err(ModelError::Schema(format!("duplicate node id {}", node.id)));
            }
        }
        for edge in &self.edges {
            for endpoint in [&edge.from, &edge.to] {
                if !ids.contains(endpoint.as_str()) {
                    return Err(ModelError::Schema(format!(
                        "edge {} -> {} references unknown node {endpoint}",
                        edge.from, edge.to
                    )));
                }
            }
        }
        for artifact in &self.artifacts {
            if !ids.contains(artifact.produced_by.as_str()) {
                return Err(ModelError::Schema(format!(
                    "artifact {} produced by unknown node {}",
                    artifact.name, artifact.produced_by
                )));
            }
        }

        let starts: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Start)
            .collect();
        if starts.is_empty() {
            return Err(ModelError::NoStart);
        }
        if starts.len() > 1 {
            return Err(ModelError::Schema("more than one start node".into()));
        }
        if !self.nodes.iter().any(|n| n.kind == NodeKind::Stop) {
            return Err(ModelError::NoStop);
        }

        // Guard discipline: decisions have exactly two guarded out-edges with
        // distinct guards; no other edge carries a guard.
        for node in &self.nodes {
            let out: Vec<&Edge> = self.edges.iter().filter(|e| e.from == node.id).collect();
            if node.kind == NodeKind::Decision {
                if out.len() != 2 {
                    return Err(ModelError::Schema(format!(
                        "decision {} has {} out-edges, expected 2",
                        node.id,
                        out.len()
                    )));
                }
                let mut seen = BTreeSet::new();
                for edge in &out {
                    let guard = edge.guard.as_deref().ok_or_else(|| {
                        ModelError::Schema(format!(
                            "decision {} has an unguarded out-edge",
                            node.id
                        ))
                    })?;
                    if !seen.insert(guard.to_lowercase()) {
                        return Err(ModelError::DuplicateGuards {
                            decision: node.id.clone(),
                            guard: guard.to_string(),
                        });
                    }
                }
            } else {
                if node.kind == NodeKind::Fork && out.len() < 2 {
                    return Err(ModelError::Schema(format!(
                        "fork {} has fewer than two out-edges",
                        node.id
                    )));
                }
                if let Some(edge) = out.iter().find(|e| e.guard.is_some()) {
                    return Err(ModelError::Schema(format!(
                        "non-decision edge {} -> {} carries a guard",
                        edge.from, edge.to
                    )));
                }
            }
        }

        // Every node reachable from start.
        let start = starts[0].id.clone();
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for edge in &self.edges {
            adjacency
                .entry(edge.from.as_str())
                .or_default()
                .push(edge.to.as_str());
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut stack = vec![start.as_str()];
        while let Some(id) = stack.pop() {
            if seen.insert(id) {
                if let Some(next) = adjacency.get(id) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        let unreachable: Vec<String> = self
            .nodes
            .iter()
            .filter(|n| !seen.contains(n.id.as_str()))
            .map(|n| n.id.clone())
            .collect();
        if !unreachable.is_empty() {
            return Err(ModelError::Unreachable { nodes: unreachable });
        }
        Ok(())
    }
}

/// Lowers a well-formed AST to a validated process model.
pub fn lower_to_model(ast: &DiagramAst) -> Result<ProcessModel, ModelError> {
    let mut lowering = Lowering::default();
    let frontier = lowering.lower_body(&ast.elements, Vec::new())?;
    if let Some((from, _)) = frontier.first() {
        return Err(ModelError::FallsOffEnd {
            dangling: from.clone(),
        });
    }
    if !lowering.saw_start {
        return Err(ModelError::NoStart);
    }
    let model = ProcessModel {
        participants: lowering.participants,
        nodes: lowering.nodes,
        edges: lowering.edges,
        artifacts: lowering.artifacts,
    };
    model.validate()?;
    Ok(model)
}

/// Dangling out-connections waiting for their target node.
type Frontier = Vec<(String, Option<String>)>;

#[derive(Default)]
struct Lowering {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    artifacts: Vec<Artifact>,
    participants: Vec<String>,
    lane: Option<String>,
    saw_start: bool,
}

impl Lowering {
    fn add_node(&mut self, kind: NodeKind, label: &str) -> String {
        let id = format!("n{}", self.nodes.len() + 1);
        self.nodes.push(Node {
            id: id.clone(),
            kind,
            label: label.to_string(),
            lane: self.lane.clone(),
        });
        id
    }

    fn connect(&mut self, frontier: Frontier, to: &str) {
        for (from, guard) in frontier {
            self.edges.push(Edge {
                from,
                to: to.to_string(),
                guard,
            });
        }
    }

    fn switch_lane(&mut self, lane: &str) {
        if !self.participants.iter().any(|p| p == lane) {
            self.participants.push(lane.to_string());
        }
        self.lane = Some(lane.to_string());
    }

    fn lower_body(
        &mut self,
        elements: &[Element],
        mut frontier: Frontier,
    ) -> Result<Frontier, ModelError> {
        for element in elements {
            frontier = self.lower_element(element, frontier)?;
        }
        Ok(frontier)
    }

    fn lower_element(
        &mut self,
        element: &Element,
        frontier: Frontier,
    ) -> Result<Frontier, ModelError> {
        match element {
            Element::LaneSwitch { lane } => {
                self.switch_lane(lane);
                Ok(frontier)
            }
            Element::Note { text } => {
                // Only `produces:` notes carry model content; anything else
                // is informational and dropped.
                if let Some(name) = text.strip_prefix("produces:") {
                    if let Some(activity) = self
                        .nodes
                        .iter()
                        .rev()
                        .find(|n| n.kind == NodeKind::Activity)
                        .map(|n| n.id.clone())
                    {
                        self.artifacts.push(Artifact {
                            name: name.trim().to_string(),
                            produced_by: activity,
                        });
                    }
                }
                Ok(frontier)
            }
            Element::StartMarker => {
                if self.saw_start || !frontier.is_empty() {
                    return Err(ModelError::MisplacedStart);
                }
                self.saw_start = true;
                let id = self.add_node(NodeKind::Start, "");
                Ok(vec![(id, None)])
            }
            Element::StopMarker => {
                let id = self.add_node(NodeKind::Stop, "");
                self.connect(frontier, &id);
                Ok(Vec::new())
            }
            Element::Activity { label } => {
                let id = self.add_node(NodeKind::Activity, label);
                self.connect(frontier, &id);
                Ok(vec![(id, None)])
            }
            Element::IfBlock {
                condition,
                then_label,
                then_body,
                else_label,
                else_body,
            } => {
                let decision = self.add_node(NodeKind::Decision, condition);
                self.connect(frontier, &decision);
                let then_guard = then_label.clone();
                let else_guard = else_label.clone().unwrap_or_else(|| "no".to_string());
                if then_guard.to_lowercase() == else_guard.to_lowercase() {
                    return Err(ModelError::DuplicateGuards {
                        decision,
                        guard: then_guard,
                    });
                }

                let then_out =
                    self.lower_body(then_body, vec![(decision.clone(), Some(then_guard))])?;
                let else_in = vec![(decision.clone(), Some(else_guard))];
                let else_out = match else_body {
                    Some(body) => self.lower_body(body, else_in)?,
                    None => else_in,
                };

                let merge = self.add_node(NodeKind::Merge, "");
                let mut incoming = then_out;
                incoming.extend(else_out);
                self.connect(incoming, &merge);
                Ok(vec![(merge, None)])
            }
            Element::ForkBlock { branches } => {
                let fork = self.add_node(NodeKind::Fork, "");
                self.connect(frontier, &fork);
                let mut joined = Vec::new();
                for branch in branches {
                    let out = self.lower_body(branch, vec![(fork.clone(), None)])?;
                    joined.extend(out);
                }
                let join = self.add_node(NodeKind::Join, "");
                self.connect(joined, &join);
                Ok(vec![(join, None)])
            }
            Element::RepeatBlock {
                body,
                while_condition,
                exit_label,
            } => {
                let head_index = self.nodes.len();
                let body_out = self.lower_body(body, frontier)?;
                let head = match self.nodes.get(head_index) {
                    Some(node) => node.id.clone(),
                    None => return Err(ModelError::EmptyRepeatBody),
                };
                let decision = self.add_node(NodeKind::Decision, while_condition);
                self.connect(body_out, &decision);

                let (exit_guard, back_guard) = repeat_guards(exit_label.as_deref());
                self.edges.push(Edge {
                    from: decision.clone(),
                    to: head,
                    guard: Some(back_guard),
                });
                Ok(vec![(decision, Some(exit_guard))])
            }
        }
    }
}

/// Guard pair for a repeat decision: (exit guard, back-edge guard). The
/// `is (lbl)` label names the exit edge; the loop edge gets its complement.
fn repeat_guards(exit_label: Option<&str>) -> (String, String) {
    match exit_label {
        None => ("no".to_string(), "yes".to_string()),
        Some(label) => {
            let back = match label.to_lowercase().as_str() {
                "yes" => "no".to_string(),
                "no" => "yes".to_string(),
                "true" => "false".to_string(),
                "false" => "true".to_string(),
                _ => format!("not {label}"),
            };
            (label.to_string(), back)
        }
    }
}

/// Serializes the model to canonical bytes: fixed key order, compact layout,
/// no insignificant whitespace. Bit-deterministic for equal models.
pub fn to_canonical_json(model: &ProcessModel) -> Vec<u8> {
    serde_json::to_vec(model).expect("process model serialization cannot fail")
}

/// Parses and validates canonical model bytes.
pub fn from_canonical_json(bytes: &[u8]) -> Result<ProcessModel, ModelError> {
    let model: ProcessModel =
        serde_json::from_slice(bytes).map_err(|e| ModelError::Schema(e.to_string()))?;
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_activity_diagram;

    fn lower(text: &str) -> Result<ProcessModel, ModelError> {
        let ast = parse_activity_diagram(text, "test").expect("fixture parses");
        lower_to_model(&ast)
    }

    #[test]
    fn straight_line_chain() {
        let model = lower("@startuml\nstart\n:A;\n:B;\nstop\n@enduml").unwrap();
        let ids: Vec<&str> = model.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["n1", "n2", "n3", "n4"]);
        let kinds: Vec<NodeKind> = model.nodes.iter().map(|n| n.kind).collect();
        assert_eq!(
            kinds,
            [
                NodeKind::Start,
                NodeKind::Activity,
                NodeKind::Activity,
                NodeKind::Stop
            ]
        );
        let edges: Vec<(&str, &str)> = model
            .edges
            .iter()
            .map(|e| (e.from.as_str(), e.to.as_str()))
            .collect();
        assert_eq!(edges, [("n1", "n2"), ("n2", "n3"), ("n3", "n4")]);
    }

    #[test]
    fn decision_guards_from_branch_labels() {
        let model = lower(
            "@startuml\nstart\nif (Compliance Verified?) then (yes)\n:Integrate into System-on-Chip;\nelse (no)\n:Develop CPU Core IP;\nendif\nstop\n@enduml",
        )
        .unwrap();
        let decision = model
            .nodes
            .iter()
            .find(|n| n.kind == NodeKind::Decision)
            .unwrap();
        let mut guards: Vec<&str> = model
            .edges
            .iter()
            .filter(|e| e.from == decision.id)
            .map(|e| e.guard.as_deref().unwrap())
            .collect();
        guards.sort();
        assert_eq!(guards, ["no", "yes"]);
        // Merge node is materialized after the branches.
        assert!(model.nodes.iter().any(|n| n.kind == NodeKind::Merge));
    }

    #[test]
    fn lowering_is_deterministic() {
        let text = "@startuml\n|L|\nstart\nfork\n:A;\nfork again\n:B;\nend fork\nstop\n@enduml";
        let a = lower(text).unwrap();
        let b = lower(text).unwrap();
        assert_eq!(a, b);
        assert_eq!(to_canonical_json(&a), to_canonical_json(&b));
    }

    #[test]
    fn produces_note_attaches_artifact() {
        let model =
            lower("@startuml\nstart\n:Mill Flour;\nnote right: produces: Flour\nstop\n@enduml")
                .unwrap();
        assert_eq!(model.artifacts.len(), 1);
        assert_eq!(model.artifacts[0].name, "Flour");
        assert_eq!(model.artifacts[0].produced_by, "n2");
    }

    #[test]
    fn informational_notes_dropped() {
        let model =
            lower("@startuml\nstart\n:A;\nnote right: just a remark\nstop\n@enduml").unwrap();
        assert!(model.artifacts.is_empty());
    }

    #[test]
    fn missing_start_is_error() {
        assert_eq!(
            lower("@startuml\n:A;\nstop\n@enduml").unwrap_err(),
            ModelError::NoStart
        );
    }

    #[test]
    fn falls_off_end_is_error() {
        assert!(matches!(
            lower("@startuml\nstart\n:A;\n@enduml").unwrap_err(),
            ModelError::FallsOffEnd { .. }
        ));
    }

    #[test]
    fn unreachable_after_stop_is_error() {
        assert!(matches!(
            lower("@startuml\nstart\n:A;\nstop\n:B;\nstop\n@enduml").unwrap_err(),
            ModelError::Unreachable { .. }
        ));
    }

    #[test]
    fn duplicate_guards_rejected() {
        let err =
            lower("@startuml\nstart\nif (x?) then (no)\n:A;\nendif\nstop\n@enduml").unwrap_err();
        assert!(matches!(err, ModelError::DuplicateGuards { .. }));
    }

    #[test]
    fn repeat_lowers_to_back_edge() {
        let model =
            lower("@startuml\nstart\nrepeat\n:Work;\nrepeat while (done?) is (yes)\nstop\n@enduml")
                .unwrap();
        let decision = model
            .nodes
            .iter()
            .find(|n| n.kind == NodeKind::Decision)
            .unwrap();
        let work = model.nodes.iter().find(|n| n.label == "Work").unwrap();
        let back = model
            .edges
            .iter()
            .find(|e| e.from == decision.id && e.to == work.id)
            .expect("back edge");
        assert_eq!(back.guard.as_deref(), Some("no"));
        let exit = model
            .edges
            .iter()
            .find(|e| e.from == decision.id && e.to != work.id)
            .expect("exit edge");
        assert_eq!(exit.guard.as_deref(), Some("yes"));
    }

    #[test]
    fn lanes_assigned_and_participants_ordered() {
        let model =
            lower("@startuml\n|One|\nstart\n:A;\n|Two|\n:B;\n|One|\n:C;\nstop\n@enduml").unwrap();
        assert_eq!(model.participants, ["One", "Two"]);
        let b = model.nodes.iter().find(|n| n.label == "B").unwrap();
        assert_eq!(b.lane.as_deref(), Some("Two"));
        let c = model.nodes.iter().find(|n| n.label == "C").unwrap();
        assert_eq!(c.lane.as_deref(), Some("One"));
    }

    #[test]
    fn canonical_json_round_trip_identity() {
        let model = lower("@startuml\n|L|\nstart\n:A;\nstop\n@enduml").unwrap();
        let bytes = to_canonical_json(&model);
        let back = from_canonical_json(&bytes).unwrap();
        assert_eq!(model, back);
        assert_eq!(to_canonical_json(&back), bytes);
    }

    #[test]
    fn from_canonical_json_rejects_bad_documents() {
        // Unknown kind.
        let bad = br#"{"participants":[],"nodes":[{"id":"n1","kind":"zigzag","label":""}],"edges":[],"artifacts":[]}"#;
        assert!(matches!(
            from_canonical_json(bad),
            Err(ModelError::Schema(_))
        ));

        // Duplicate id.
        let bad = br#"{"participants":[],"nodes":[{"id":"n1","kind":"start","label":""},{"id":"n1","kind":"stop","label":""}],"edges":[{"from":"n1","to":"n1"}],"artifacts":[]}"#;
        assert!(matches!(
            from_canonical_json(bad),
            Err(ModelError::Schema(_))
        ));

        // Dangling edge.
        let bad = br#"{"participants":[],"nodes":[{"id":"n1","kind":"start","label":""},{"id":"n2","kind":"stop","label":""}],"edges":[{"from":"n1","to":"n9"}],"artifacts":[]}"#;
        assert!(matches!(
            from_canonical_json(bad),
            Err(ModelError::Schema(_))
        ));
    }
}
