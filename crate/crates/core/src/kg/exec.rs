//! Backtracking pattern matcher for the query subset.
//!
//! Matching binds node and relationship variables pattern by pattern with
//! relationship uniqueness per match: no relationship is used twice within
//! one binding, including inside variable-length expansions. Results are
//! filtered by WHERE, projected, optionally collapsed by count aggregates,
//! and ordered deterministically.

use std::collections::BTreeMap;

use super::graph::{cmp_cells, render_cell, NodeData, PropertyGraph, ResultTable, Value};
use super::query::{
    CmpOp, Direction, Expr, NodePattern, Operand, Query, RelPattern, ReturnItem, ValueExpr,
};
use super::GraphError;

/// Intermediate-binding guard: queries abort beyond this many candidate
/// extensions.
pub const BINDING_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
enum Bound {
    Node(String),
    Rel(String),
    RelPath(Vec<String>),
}

/// Executes a parsed query against the graph.
pub fn execute(query: &Query, graph: &PropertyGraph) -> Result<ResultTable, GraphError> {
    let mut matcher = Matcher {
        graph,
        query,
        bindings: BTreeMap::new(),
        used_rels: Vec::new(),
        counter: 0,
        rows: Vec::new(),
    };
    matcher.match_pattern(0)?;
    let rows = matcher.rows;
    Ok(finish(query, rows))
}

/// Shared post-processing: aggregation, ordering, limit. Also used by the
/// CLI to render tables; the brute-force oracle has its own copy.
pub(super) fn finish(query: &Query, raw_rows: Vec<Vec<Option<Value>>>) -> ResultTable {
    let columns: Vec<String> = query.return_items.iter().map(|i| i.column_name()).collect();
    let has_count = query.return_items.iter().any(|i| i.count);

    let mut rows = if has_count {
        aggregate(&query.return_items, raw_rows)
    } else {
        raw_rows
    };

    if let Some(order) = &query.order_by {
        let key_idx = query
            .return_items
            .iter()
            .position(|i| i.expr == order.item)
            .expect("validated: order item appears in return");
        rows.sort_by(|a, b| {
            let primary = cmp_cells(&a[key_idx], &b[key_idx]);
            let primary = if order.ascending {
                primary
            } else {
                primary.reverse()
            };
            primary.then_with(|| rendered(a).cmp(&rendered(b)))
        });
    } else {
        rows.sort_by_key(|row| rendered(row));
    }

    if let Some(limit) = query.limit {
        rows.truncate(limit);
    }
    ResultTable { columns, rows }
}

fn rendered(row: &[Option<Value>]) -> Vec<String> {
    row.iter().map(render_cell).collect()
}

/// Collapses raw rows by the non-count items; count cells count rows with a
/// non-null inner value. A query with only count items always yields exactly
/// one row, even over zero matches.
fn aggregate(items: &[ReturnItem], raw_rows: Vec<Vec<Option<Value>>>) -> Vec<Vec<Option<Value>>> {
    // Rendered grouping key, sample row, per-item counts.
    type Groups = BTreeMap<Vec<String>, (Vec<Option<Value>>, Vec<i64>)>;
    let key_positions: Vec<usize> = items
        .iter()
        .enumerate()
        .filter(|(_, i)| !i.count)
        .map(|(idx, _)| idx)
        .collect();

    let mut groups: Groups = BTreeMap::new();
    for row in raw_rows {
        let key: Vec<String> = key_positions
            .iter()
            .map(|&i| render_cell(&row[i]))
            .collect();
        let counts_len = items.len();
        let entry = groups
            .entry(key)
            .or_insert_with(|| (row.clone(), vec![0; counts_len]));
        for (idx, item) in items.iter().enumerate() {
            if item.count && row[idx].is_some() {
                entry.1[idx] += 1;
            }
        }
    }

    if groups.is_empty() && key_positions.is_empty() {
        let row: Vec<Option<Value>> = items.iter().map(|_| Some(Value::Int(0))).collect();
        return vec![row];
    }

    groups
        .into_values()
        .map(|(sample, counts)| {
            items
                .iter()
                .enumerate()
                .map(|(idx, item)| {
                    if item.count {
                        Some(Value::Int(counts[idx]))
                    } else {
                        sample[idx].clone()
                    }
                })
                .collect()
        })
        .collect()
}

struct Matcher<'g, 'q> {
    graph: &'g PropertyGraph,
    query: &'q Query,
    bindings: BTreeMap<String, Bound>,
    used_rels: Vec<String>,
    counter: usize,
    rows: Vec<Vec<Option<Value>>>,
}

impl<'g, 'q> Matcher<'g, 'q> {
    fn tick(&mut self) -> Result<(), GraphError> {
        self.counter += 1;
        if self.counter > BINDING_LIMIT {
            return Err(GraphError::ResourceLimit(BINDING_LIMIT));
        }
        Ok(())
    }

    fn match_pattern(&mut self, pi: usize) -> Result<(), GraphError> {
        if pi == self.query.patterns.len() {
            if self.passes_where() {
                let row = self.project();
                self.rows.push(row);
            }
            return Ok(());
        }
        let pattern = &self.query.patterns[pi];
        let candidates: Vec<String> = match pattern
            .start
            .var
            .as_ref()
            .and_then(|v| self.bindings.get(v))
        {
            Some(Bound::Node(id)) => vec![id.clone()],
            Some(_) => return Ok(()), // variable bound to a relationship: no match
            None => self.graph.nodes.keys().cloned().collect(),
        };
        for id in candidates {
            self.tick()?;
            if !node_matches(&self.graph.nodes[&id], &pattern.start) {
                continue;
            }
            let undo = self.bind_node(&pattern.start, &id);
            if undo.is_some() || self.binding_consistent(&pattern.start, &id) {
                self.match_step(pi, 0, id.clone())?;
            }
            self.unbind(undo);
        }
        Ok(())
    }

    fn match_step(&mut self, pi: usize, si: usize, cur: String) -> Result<(), GraphError> {
        let pattern = &self.query.patterns[pi];
        if si == pattern.steps.len() {
            return self.match_pattern(pi + 1);
        }
        let (rel, node_pat) = &pattern.steps[si];
        match rel.range {
            None => self.match_single_rel(pi, si, cur, rel, node_pat),
            Some((min, max)) => {
                let mut path = Vec::new();
                self.match_var_length(pi, si, cur, rel, node_pat, min, max, &mut path)
            }
        }
    }

    fn match_single_rel(
        &mut self,
        pi: usize,
        si: usize,
        cur: String,
        rel: &'q RelPattern,
        node_pat: &'q NodePattern,
    ) -> Result<(), GraphError> {
        for ri in 0..self.graph.rels.len() {
            self.tick()?;
            let r = &self.graph.rels[ri];
            let next = match step_target(r, &cur, rel.direction) {
                Some(n) => n.to_string(),
                None => continue,
            };
            if let Some(t) = &rel.rel_type {
                if &r.rel_type != t {
                    continue;
                }
            }
            if self.used_rels.contains(&r.id) {
                continue;
            }
            if !node_matches(&self.graph.nodes[&next], node_pat) {
                continue;
            }
            if !self.binding_consistent(node_pat, &next) {
                continue;
            }
            let rel_id = r.id.clone();
            self.used_rels.push(rel_id.clone());
            let rel_undo = rel.var.as_ref().map(|v| {
                self.bindings.insert(v.clone(), Bound::Rel(rel_id.clone()));
                v.clone()
            });
            let node_undo = self.bind_node(node_pat, &next);
            self.match_step(pi, si + 1, next)?;
            self.unbind(node_undo);
            if let Some(v) = rel_undo {
                self.bindings.remove(&v);
            }
            self.used_rels.pop();
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn match_var_length(
        &mut self,
        pi: usize,
        si: usize,
        cur: String,
        rel: &'q RelPattern,
        node_pat: &'q NodePattern,
        min: usize,
        max: usize,
        path: &mut Vec<String>,
    ) -> Result<(), GraphError> {
        if path.len() >= min
            && node_matches(&self.graph.nodes[&cur], node_pat)
            && self.binding_consistent(node_pat, &cur)
        {
            let rel_undo = rel.var.as_ref().map(|v| {
                self.bindings
                    .insert(v.clone(), Bound::RelPath(path.clone()));
                v.clone()
            });
            let node_undo = self.bind_node(node_pat, &cur);
            self.match_step(pi, si + 1, cur.clone())?;
            self.unbind(node_undo);
            if let Some(v) = rel_undo {
                self.bindings.remove(&v);
            }
        }
        if path.len() == max {
            return Ok(());
        }
        for ri in 0..self.graph.rels.len() {
            self.tick()?;
            let r = &self.graph.rels[ri];
            let next = match step_target(r, &cur, rel.direction) {
                Some(n) => n.to_string(),
                None => continue,
            };
            if let Some(t) = &rel.rel_type {
                if &r.rel_type != t {
                    continue;
                }
            }
            if self.used_rels.contains(&r.id) {
                continue;
            }
            let rel_id = r.id.clone();
            self.used_rels.push(rel_id.clone());
            path.push(rel_id);
            self.match_var_length(pi, si, next, rel, node_pat, min, max, path)?;
            path.pop();
            self.used_rels.pop();
        }
        Ok(())
    }

    /// Binds the pattern variable to the node if it is free; returns the
    /// variable to unbind, or None when nothing was bound here.
    fn bind_node(&mut self, pattern: &NodePattern, id: &str) -> Option<String> {
        let var = pattern.var.as_ref()?;
        if self.bindings.contains_key(var) {
            return None;
        }
        self.bindings
            .insert(var.clone(), Bound::Node(id.to_string()));
        Some(var.clone())
    }

    /// True when a pre-existing binding of the pattern variable (if any)
    /// refers to this node.
    fn binding_consistent(&self, pattern: &NodePattern, id: &str) -> bool {
        match pattern.var.as_ref().and_then(|v| self.bindings.get(v)) {
            Some(Bound::Node(bound)) => bound == id,
            Some(_) => false,
            None => true,
        }
    }

    fn unbind(&mut self, var: Option<String>) {
        if let Some(v) = var {
            self.bindings.remove(&v);
        }
    }

    fn value_of(&self, expr: &ValueExpr) -> Option<Value> {
        match expr {
            ValueExpr::Var(v) => match self.bindings.get(v)? {
                Bound::Node(id) => Some(Value::Text(id.clone())),
                Bound::Rel(id) => Some(Value::Text(id.clone())),
                Bound::RelPath(_) => None,
            },
            ValueExpr::Prop(v, key) => match self.bindings.get(v)? {
                Bound::Node(id) => self.graph.nodes.get(id)?.props.get(key).cloned(),
                Bound::Rel(id) => self
                    .graph
                    .rels
                    .iter()
                    .find(|r| &r.id == id)?
                    .props
                    .get(key)
                    .cloned(),
                Bound::RelPath(_) => None,
            },
        }
    }

    fn operand_value(&self, operand: &Operand) -> Option<Value> {
        match operand {
            Operand::Literal(v) => Some(v.clone()),
            Operand::Prop(var, key) => self.value_of(&ValueExpr::Prop(var.clone(), key.clone())),
        }
    }

    fn passes_where(&self) -> bool {
        match &self.query.where_clause {
            None => true,
            Some(expr) => self.eval_expr(expr),
        }
    }

    fn eval_expr(&self, expr: &Expr) -> bool {
        match expr {
            Expr::And(a, b) => self.eval_expr(a) && self.eval_expr(b),
            Expr::Or(a, b) => self.eval_expr(a) || self.eval_expr(b),
            Expr::Cmp { lhs, op, rhs } => {
                compare(self.operand_value(lhs), *op, self.operand_value(rhs))
            }
        }
    }

    fn project(&self) -> Vec<Option<Value>> {
        self.query
            .return_items
            .iter()
            .map(|item| self.value_of(&item.expr))
            .collect()
    }
}

/// Target node when traversing `r` from `cur` in the pattern's direction.
fn step_target<'a>(
    r: &'a super::graph::Relationship,
    cur: &str,
    dir: Direction,
) -> Option<&'a str> {
    match dir {
        Direction::Right if r.from == cur => Some(&r.to),
        Direction::Left if r.to == cur => Some(&r.from),
        _ => None,
    }
}

pub(super) fn node_matches(data: &NodeData, pattern: &NodePattern) -> bool {
    if let Some(label) = &pattern.label {
        if !data.labels.contains(label) {
            return false;
        }
    }
    pattern.props.iter().all(|(k, v)| {
        data.props
            .get(k)
            .is_some_and(|actual| values_equal(actual, v))
    })
}

/// Value equality with cross-type numeric comparison. Comparisons involving
/// an absent value are false (rows with missing properties filter out).
pub(super) fn values_equal(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y,
        _ => match (a, b) {
            (Value::Text(x), Value::Text(y)) => x == y,
            (Value::Bool(x), Value::Bool(y)) => x == y,
            _ => false,
        },
    }
}

pub(super) fn compare(lhs: Option<Value>, op: CmpOp, rhs: Option<Value>) -> bool {
    let (Some(a), Some(b)) = (lhs, rhs) else {
        return false;
    };
    match op {
        CmpOp::Eq => values_equal(&a, &b),
        CmpOp::NotEq => {
            // Only comparable values can be un-equal; mixed types filter out.
            let comparable = matches!(
                (&a, &b),
                (Value::Text(_), Value::Text(_)) | (Value::Bool(_), Value::Bool(_))
            ) || (a.as_f64().is_some() && b.as_f64().is_some());
            comparable && !values_equal(&a, &b)
        }
        CmpOp::Lt | CmpOp::Gt => {
            let ord = match (&a, &b) {
                (Value::Text(x), Value::Text(y)) => x.cmp(y),
                (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
                _ => match (a.as_f64(), b.as_f64()) {
                    (Some(x), Some(y)) => match x.partial_cmp(&y) {
                        Some(o) => o,
                        None => return false,
                    },
                    _ => return false,
                },
            };
            match op {
                CmpOp::Lt => ord == std::cmp::Ordering::Less,
                _ => ord == std::cmp::Ordering::Greater,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{ingest_script, parse_query};

    fn demo() -> PropertyGraph {
        ingest_script(
            r#"
CREATE (t:Company {name: "TSMC", location: "Taiwan"})
CREATE (s:Company {name: "Samsung Electronics"})
CREATE (w:Material {name: "Wafer"})
CREATE (t)-[:FABRICATES]->(w)
CREATE (s)-[:FABRICATES]->(w)
"#,
        )
        .unwrap()
    }

    fn run(graph: &PropertyGraph, text: &str) -> ResultTable {
        execute(&parse_query(text).unwrap(), graph).unwrap()
    }

    #[test]
    fn company_names_in_lexicographic_order() {
        let table = run(&demo(), "MATCH (c:Company) RETURN c.name");
        assert_eq!(table.columns, vec!["c.name"]);
        let names: Vec<String> = table
            .rows
            .iter()
            .map(|r| r[0].as_ref().unwrap().render())
            .collect();
        assert_eq!(names, vec!["Samsung Electronics", "TSMC"]);
    }

    #[test]
    fn empty_graph_empty_table() {
        let graph = PropertyGraph::new();
        let table = run(&graph, "MATCH (n) RETURN n");
        assert!(table.rows.is_empty());
    }

    #[test]
    fn missing_property_rows_filter_out() {
        let table = run(
            &demo(),
            "MATCH (c:Company) WHERE c.location = \"Taiwan\" RETURN c.name",
        );
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0][0], Some(Value::Text("TSMC".into())));
    }

    #[test]
    fn relationship_uniqueness_within_a_match() {
        // One edge cannot serve both hops of (a)-[]->(w)<-[]-(b).
        let graph = ingest_script("CREATE (a:X)\nCREATE (w:Y)\nCREATE (a)-[:R]->(w)").unwrap();
        let table = run(&graph, "MATCH (a)-[]->(w)<-[]-(b) RETURN a, b");
        assert!(table.rows.is_empty(), "single edge reused: {table:?}");

        // With two parallel edges the pattern matches both orderings.
        let graph =
            ingest_script("CREATE (a:X)\nCREATE (w:Y)\nCREATE (a)-[:R]->(w)\nCREATE (a)-[:R]->(w)")
                .unwrap();
        let table = run(&graph, "MATCH (a)-[]->(w)<-[]-(b) RETURN a, b");
        assert_eq!(table.rows.len(), 2);
    }

    #[test]
    fn variable_length_on_a_chain() {
        let graph = ingest_script(
            "CREATE (a:N {name: \"a\"})\nCREATE (b:N {name: \"b\"})\nCREATE (c:N {name: \"c\"})\nCREATE (a)-[:R]->(b)\nCREATE (b)-[:R]->(c)",
        )
        .unwrap();
        let table = run(&graph, "MATCH (x)-[:R*1..2]->(y) RETURN x.name, y.name");
        let pairs: Vec<(String, String)> = table
            .rows
            .iter()
            .map(|r| {
                (
                    r[0].as_ref().unwrap().render(),
                    r[1].as_ref().unwrap().render(),
                )
            })
            .collect();
        assert_eq!(
            pairs,
            vec![
                ("a".into(), "b".into()),
                ("a".into(), "c".into()),
                ("b".into(), "c".into()),
            ]
        );
    }

    #[test]
    fn count_collapses_rows() {
        let table = run(&demo(), "MATCH (c:Company) RETURN count(c)");
        assert_eq!(table.rows, vec![vec![Some(Value::Int(2))]]);
        // Count over zero matches still yields one row.
        let table = run(&demo(), "MATCH (c:Missing) RETURN count(c)");
        assert_eq!(table.rows, vec![vec![Some(Value::Int(0))]]);
    }

    #[test]
    fn grouped_count() {
        let table = run(
            &demo(),
            "MATCH (c:Company)-[:FABRICATES]->(w) RETURN w.name, count(c)",
        );
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0][1], Some(Value::Int(2)));
    }

    #[test]
    fn order_by_desc_with_limit() {
        let table = run(
            &demo(),
            "MATCH (c:Company) RETURN c.name ORDER BY c.name DESC LIMIT 1",
        );
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0][0], Some(Value::Text("TSMC".into())));
    }

    #[test]
    fn shared_variables_join_patterns() {
        let table = run(
            &demo(),
            "MATCH (t {name: \"TSMC\"})-[:FABRICATES]->(w), (s)-[:FABRICATES]->(w) RETURN s.name",
        );
        // Relationship uniqueness spans the whole match: the TSMC edge is
        // taken by the first pattern, so s can only be the other fabricator.
        assert_eq!(table.rows.len(), 1);
        assert_eq!(
            table.rows[0][0],
            Some(Value::Text("Samsung Electronics".into()))
        );
    }

    #[test]
    fn resource_guard_fires_eventually() {
        // A dense complete digraph with an unconstrained 8-hop pattern blows
        // past the binding limit.
        let mut script = String::new();
        for i in 0..14 {
            script.push_str(&format!("CREATE (n{i}:N)\n"));
        }
        for i in 0..14 {
            for j in 0..14 {
                if i != j {
                    script.push_str(&format!("CREATE (n{i})-[:R]->(n{j})\n"));
                }
            }
        }
        let graph = ingest_script(&script).unwrap();
        let query = parse_query("MATCH (a)-[*1..8]->(b) RETURN count(a)").unwrap();
        match execute(&query, &graph) {
            Err(GraphError::ResourceLimit(_)) => {}
            other => panic!("expected resource limit, got {other:?}"),
        }
    }
}
