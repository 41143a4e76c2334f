//! Property-graph values, nodes, relationships and result tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A property value: text, integer, float or boolean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    /// Canonical rendering used for table cells and row ordering.
    pub fn render(&self) -> String {
        match self {
            Value::Bool(b) => b.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Float(x) => {
                if x.fract() == 0.0 && x.is_finite() {
                    format!("{x:.1}")
                } else {
                    format!("{x}")
                }
            }
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(x) => Some(*x),
            _ => None,
        }
    }
}

/// Renders an optional cell; absent values print as `null`.
pub(crate) fn render_cell(cell: &Option<Value>) -> String {
    match cell {
        Some(v) => v.render(),
        None => "null".to_string(),
    }
}

/// Total order over optional values: null < bool < numeric < text.
pub(crate) fn cmp_cells(a: &Option<Value>, b: &Option<Value>) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    fn rank(v: &Option<Value>) -> u8 {
        match v {
            None => 0,
            Some(Value::Bool(_)) => 1,
            Some(Value::Int(_)) | Some(Value::Float(_)) => 2,
            Some(Value::Text(_)) => 3,
        }
    }
    match rank(a).cmp(&rank(b)) {
        Ordering::Equal => match (a, b) {
            (Some(Value::Bool(x)), Some(Value::Bool(y))) => x.cmp(y),
            (Some(x), Some(y)) if x.as_f64().is_some() => x
                .as_f64()
                .partial_cmp(&y.as_f64())
                .unwrap_or(Ordering::Equal),
            (Some(Value::Text(x)), Some(Value::Text(y))) => x.cmp(y),
            _ => Ordering::Equal,
        },
        other => other,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeData {
    pub labels: BTreeSet<String>,
    pub props: BTreeMap<String, Value>,
}

impl NodeData {
    /// The primary name of the node: its `name` property when textual.
    pub fn name(&self) -> Option<&str> {
        match self.props.get("name") {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relationship {
    pub id: String,
    pub rel_type: String,
    pub from: String,
    pub to: String,
    pub props: BTreeMap<String, Value>,
}

/// Labeled nodes with properties and typed directed relationships. Node ids
/// are script aliases; relationship ids are `r1..rN` in creation order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyGraph {
    pub nodes: BTreeMap<String, NodeData>,
    pub rels: Vec<Relationship>,
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn rel_count(&self) -> usize {
        self.rels.len()
    }

    /// Inserts a node; returns false if the id is taken.
    pub fn add_node(&mut self, id: impl Into<String>, data: NodeData) -> bool {
        let id = id.into();
        if self.nodes.contains_key(&id) {
            return false;
        }
        self.nodes.insert(id, data);
        true
    }

    /// Appends a relationship; endpoints must exist.
    pub fn add_rel(
        &mut self,
        rel_type: impl Into<String>,
        from: &str,
        to: &str,
        props: BTreeMap<String, Value>,
    ) -> Result<&Relationship, super::GraphError> {
        for endpoint in [from, to] {
            if !self.nodes.contains_key(endpoint) {
                return Err(super::GraphError::UnknownNode(endpoint.to_string()));
            }
        }
        let id = format!("r{}", self.rels.len() + 1);
        self.rels.push(Relationship {
            id,
            rel_type: rel_type.into(),
            from: from.to_string(),
            to: to.to_string(),
            props,
        });
        Ok(self.rels.last().unwrap())
    }

    /// Total degree (in + out) of a node; a self-loop counts twice.
    pub fn degree(&self, id: &str) -> usize {
        self.rels
            .iter()
            .map(|r| usize::from(r.from == id) + usize::from(r.to == id))
            .sum()
    }

    /// Distinct node property keys other than `name`, with the owning node's
    /// name: the graph's attribute set for evaluation purposes.
    pub fn attribute_pairs(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for data in self.nodes.values() {
            if let Some(name) = data.name() {
                for key in data.props.keys() {
                    if key != "name" {
                        out.insert((name.to_string(), key.clone()));
                    }
                }
            }
        }
        out
    }

    /// Deterministic schema summary: node labels, relationship types and
    /// property keys in sorted order. Rendered into query-generation prompts.
    pub fn schema_summary(&self) -> String {
        let labels: BTreeSet<&str> = self
            .nodes
            .values()
            .flat_map(|n| n.labels.iter().map(String::as_str))
            .collect();
        let types: BTreeSet<&str> = self.rels.iter().map(|r| r.rel_type.as_str()).collect();
        let keys: BTreeSet<&str> = self
            .nodes
            .values()
            .flat_map(|n| n.props.keys().map(String::as_str))
            .chain(
                self.rels
                    .iter()
                    .flat_map(|r| r.props.keys().map(String::as_str)),
            )
            .collect();
        let join = |set: BTreeSet<&str>| -> String {
            if set.is_empty() {
                "(none)".to_string()
            } else {
                set.into_iter().collect::<Vec<_>>().join(", ")
            }
        };
        format!(
            "Node labels: {}\nRelationship types: {}\nProperty keys: {}",
            join(labels),
            join(types),
            join(keys)
        )
    }
}

/// Query result: named columns and rows of optional values. Row order is
/// deterministic: lexicographic over rendered cells unless the query ordered
/// them explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<Value>>>,
}

impl ResultTable {
    /// Renders an aligned text table.
    pub fn render_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| row.iter().map(render_cell).collect())
            .collect();
        for row in &rendered {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        let mut line = String::new();
        for (i, col) in self.columns.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{col:<width$}", width = widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for row in &rendered {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                line.push_str(&format!("{cell:<width$}", width = widths[i]));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for ResultTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_summary_lists_labels() {
        let mut g = PropertyGraph::new();
        let mut data = NodeData::default();
        data.labels.insert("Company".into());
        data.props.insert("name".into(), Value::Text("TSMC".into()));
        g.add_node("tsmc", data).then_some(()).unwrap();
        let schema = g.schema_summary();
        assert!(schema.contains("Company"));
        assert!(schema.contains("name"));
    }

    #[test]
    fn degree_counts_both_directions() {
        let mut g = PropertyGraph::new();
        g.add_node("a", NodeData::default());
        g.add_node("b", NodeData::default());
        g.add_rel("R", "a", "b", BTreeMap::new()).unwrap();
        g.add_rel("R", "a", "a", BTreeMap::new()).unwrap();
        assert_eq!(g.degree("a"), 3);
        assert_eq!(g.degree("b"), 1);
    }
}
