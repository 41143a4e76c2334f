//! Brute-force query oracle: enumerates node and relationship binding
//! tuples directly, filters, projects. Independent of the backtracking
//! matcher in `exec`; the two must produce identical tables on oracle-scale
//! graphs, which the acceptance campaign checks on randomized inputs.

use std::collections::BTreeMap;

use super::exec::{compare, node_matches};
use super::graph::{cmp_cells, render_cell, PropertyGraph, ResultTable, Value};
use super::query::{Direction, Expr, Operand, Query, ReturnItem, ValueExpr};

/// Positions of one flattened pattern element.
enum Slot<'q> {
    Node(&'q super::query::NodePattern),
    Rel {
        pattern: &'q super::query::RelPattern,
        // Node-slot indices this relationship connects.
        prev: usize,
        next: usize,
    },
}

#[derive(Default)]
struct Assignment {
    node_ids: Vec<Option<String>>,
    rel_seqs: Vec<Vec<usize>>,
    vars: BTreeMap<String, VarValue>,
}

#[derive(Clone, PartialEq)]
enum VarValue {
    Node(String),
    Rel(String),
    RelPath(Vec<String>),
}

/// Executes the query by exhaustive enumeration. Intended for graphs of
/// oracle scale (a dozen nodes).
pub fn brute_force_match(query: &Query, graph: &PropertyGraph) -> ResultTable {
    let mut slots: Vec<Slot> = Vec::new();
    let mut node_slot_count = 0usize;
    for pattern in &query.patterns {
        slots.push(Slot::Node(&pattern.start));
        node_slot_count += 1;
        for (rel, node) in &pattern.steps {
            slots.push(Slot::Rel {
                pattern: rel,
                prev: node_slot_count - 1,
                next: node_slot_count,
            });
            slots.push(Slot::Node(node));
            node_slot_count += 1;
        }
    }

    let mut state = Assignment {
        node_ids: vec![None; node_slot_count],
        rel_seqs: Vec::new(),
        vars: BTreeMap::new(),
    };
    let mut rows: Vec<Vec<Option<Value>>> = Vec::new();
    enumerate(query, graph, &slots, 0, 0, &mut state, &mut rows);
    finish(query, rows)
}

fn enumerate(
    query: &Query,
    graph: &PropertyGraph,
    slots: &[Slot],
    slot_idx: usize,
    node_slot: usize,
    state: &mut Assignment,
    rows: &mut Vec<Vec<Option<Value>>>,
) {
    if slot_idx == slots.len() {
        if eval_where(query, graph, &state.vars) {
            rows.push(project(query, graph, &state.vars));
        }
        return;
    }
    match &slots[slot_idx] {
        Slot::Node(pattern) => {
            let ids: Vec<String> = graph.nodes.keys().cloned().collect();
            for id in ids {
                if !node_matches(&graph.nodes[&id], pattern) {
                    continue;
                }
                if let Some(var) = &pattern.var {
                    match state.vars.get(var) {
                        Some(VarValue::Node(existing)) if existing != &id => continue,
                        Some(VarValue::Node(_)) => {}
                        Some(_) => continue,
                        None => {
                            state.vars.insert(var.clone(), VarValue::Node(id.clone()));
                            state.node_ids[node_slot] = Some(id.clone());
                            enumerate(
                                query,
                                graph,
                                slots,
                                slot_idx + 1,
                                node_slot + 1,
                                state,
                                rows,
                            );
                            state.node_ids[node_slot] = None;
                            state.vars.remove(var);
                            continue;
                        }
                    }
                }
                state.node_ids[node_slot] = Some(id.clone());
                enumerate(
                    query,
                    graph,
                    slots,
                    slot_idx + 1,
                    node_slot + 1,
                    state,
                    rows,
                );
                state.node_ids[node_slot] = None;
            }
        }
        Slot::Rel {
            pattern,
            prev,
            next,
        } => {
            let from_id = state.node_ids[*prev]
                .clone()
                .expect("prev node slot assigned");
            let (min, max) = pattern.range.unwrap_or((1, 1));
            let mut seq: Vec<usize> = Vec::new();
            expand_rel_seq(
                query, graph, slots, slot_idx, node_slot, state, rows, pattern, *next, &from_id,
                min, max, &mut seq,
            );
        }
    }
}

/// Enumerates relationship index sequences of length min..=max chaining from
/// `cur`, honoring type, direction and relationship uniqueness across the
/// whole assignment.
#[allow(clippy::too_many_arguments)]
fn expand_rel_seq(
    query: &Query,
    graph: &PropertyGraph,
    slots: &[Slot],
    slot_idx: usize,
    node_slot: usize,
    state: &mut Assignment,
    rows: &mut Vec<Vec<Option<Value>>>,
    pattern: &super::query::RelPattern,
    next_slot: usize,
    cur: &str,
    min: usize,
    max: usize,
    seq: &mut Vec<usize>,
) {
    if seq.len() >= min {
        // The sequence's endpoint becomes the next node slot's node; the
        // node pattern is validated right here and the node slot skipped.
        let endpoint = cur.to_string();
        let undo_rel_var = match &pattern.var {
            Some(var) if !state.vars.contains_key(var) => {
                let ids: Vec<String> = seq.iter().map(|&i| graph.rels[i].id.clone()).collect();
                let value = if pattern.range.is_some() {
                    VarValue::RelPath(ids)
                } else {
                    VarValue::Rel(ids[0].clone())
                };
                state.vars.insert(var.clone(), value);
                Some(var.clone())
            }
            _ => None,
        };
        state.rel_seqs.push(seq.clone());
        state.node_ids[next_slot] = Some(endpoint.clone());

        if let Slot::Node(node_pattern) = &slots[slot_idx + 1] {
            let mut bound_here = false;
            let matches_node = node_matches(&graph.nodes[&endpoint], node_pattern)
                && match node_pattern.var.as_ref() {
                    Some(var) => match state.vars.get(var) {
                        Some(VarValue::Node(existing)) => existing == &endpoint,
                        Some(_) => false,
                        None => {
                            state
                                .vars
                                .insert(var.clone(), VarValue::Node(endpoint.clone()));
                            bound_here = true;
                            true
                        }
                    },
                    None => true,
                };
            if matches_node {
                enumerate(
                    query,
                    graph,
                    slots,
                    slot_idx + 2,
                    node_slot + 1,
                    state,
                    rows,
                );
            }
            if bound_here {
                state.vars.remove(node_pattern.var.as_ref().unwrap());
            }
        }

        state.node_ids[next_slot] = None;
        state.rel_seqs.pop();
        if let Some(var) = undo_rel_var {
            state.vars.remove(&var);
        }
    }
    if seq.len() == max {
        return;
    }
    for ri in 0..graph.rels.len() {
        let r = &graph.rels[ri];
        if let Some(t) = &pattern.rel_type {
            if &r.rel_type != t {
                continue;
            }
        }
        let endpoint = match pattern.direction {
            Direction::Right if r.from == cur => r.to.clone(),
            Direction::Left if r.to == cur => r.from.clone(),
            _ => continue,
        };
        if rel_in_use(state, graph, seq, ri) {
            continue;
        }
        seq.push(ri);
        expand_rel_seq(
            query, graph, slots, slot_idx, node_slot, state, rows, pattern, next_slot, &endpoint,
            min, max, seq,
        );
        seq.pop();
    }
}

fn rel_in_use(state: &Assignment, graph: &PropertyGraph, seq: &[usize], ri: usize) -> bool {
    if seq.contains(&ri) {
        return true;
    }
    let id = &graph.rels[ri].id;
    state
        .rel_seqs
        .iter()
        .flatten()
        .any(|&used| &graph.rels[used].id == id)
}

fn var_value(
    graph: &PropertyGraph,
    vars: &BTreeMap<String, VarValue>,
    expr: &ValueExpr,
) -> Option<Value> {
    match expr {
        ValueExpr::Var(v) => match vars.get(v)? {
            VarValue::Node(id) => Some(Value::Text(id.clone())),
            VarValue::Rel(id) => Some(Value::Text(id.clone())),
            VarValue::RelPath(_) => None,
        },
        ValueExpr::Prop(v, key) => match vars.get(v)? {
            VarValue::Node(id) => graph.nodes.get(id)?.props.get(key).cloned(),
            VarValue::Rel(id) => graph
                .rels
                .iter()
                .find(|r| &r.id == id)?
                .props
                .get(key)
                .cloned(),
            VarValue::RelPath(_) => None,
        },
    }
}

fn eval_where(query: &Query, graph: &PropertyGraph, vars: &BTreeMap<String, VarValue>) -> bool {
    fn eval(graph: &PropertyGraph, vars: &BTreeMap<String, VarValue>, expr: &Expr) -> bool {
        match expr {
            Expr::And(a, b) => eval(graph, vars, a) && eval(graph, vars, b),
            Expr::Or(a, b) => eval(graph, vars, a) || eval(graph, vars, b),
            Expr::Cmp { lhs, op, rhs } => {
                let value = |operand: &Operand| match operand {
                    Operand::Literal(v) => Some(v.clone()),
                    Operand::Prop(var, key) => {
                        var_value(graph, vars, &ValueExpr::Prop(var.clone(), key.clone()))
                    }
                };
                compare(value(lhs), *op, value(rhs))
            }
        }
    }
    match &query.where_clause {
        None => true,
        Some(expr) => eval(graph, vars, expr),
    }
}

fn project(
    query: &Query,
    graph: &PropertyGraph,
    vars: &BTreeMap<String, VarValue>,
) -> Vec<Option<Value>> {
    query
        .return_items
        .iter()
        .map(|item| var_value(graph, vars, &item.expr))
        .collect()
}

/// Oracle-side aggregation, ordering and limit; written separately from the
/// executor's on purpose.
fn finish(query: &Query, raw_rows: Vec<Vec<Option<Value>>>) -> ResultTable {
    let columns: Vec<String> = query
        .return_items
        .iter()
        .map(ReturnItem::column_name)
        .collect();
    let has_count = query.return_items.iter().any(|i| i.count);

    let mut rows: Vec<Vec<Option<Value>>> = if has_count {
        let group_positions: Vec<usize> = query
            .return_items
            .iter()
            .enumerate()
            .filter(|(_, item)| !item.count)
            .map(|(i, _)| i)
            .collect();
        type Groups = BTreeMap<Vec<String>, (Vec<Option<Value>>, Vec<i64>)>;
        let mut grouped: Groups = BTreeMap::new();
        for row in &raw_rows {
            let key: Vec<String> = group_positions
                .iter()
                .map(|&i| render_cell(&row[i]))
                .collect();
            let entry = grouped
                .entry(key)
                .or_insert_with(|| (row.clone(), vec![0; query.return_items.len()]));
            for (i, item) in query.return_items.iter().enumerate() {
                if item.count && row[i].is_some() {
                    entry.1[i] += 1;
                }
            }
        }
        if grouped.is_empty() && group_positions.is_empty() {
            vec![query
                .return_items
                .iter()
                .map(|_| Some(Value::Int(0)))
                .collect()]
        } else {
            grouped
                .into_values()
                .map(|(sample, counts)| {
                    query
                        .return_items
                        .iter()
                        .enumerate()
                        .map(|(i, item)| {
                            if item.count {
                                Some(Value::Int(counts[i]))
                            } else {
                                sample[i].clone()
                            }
                        })
                        .collect()
                })
                .collect()
        }
    } else {
        raw_rows
    };

    match &query.order_by {
        Some(order) => {
            let idx = query
                .return_items
                .iter()
                .position(|i| i.expr == order.item)
                .expect("validated order item");
            rows.sort_by(|a, b| {
                let primary = cmp_cells(&a[idx], &b[idx]);
                let primary = if order.ascending {
                    primary
                } else {
                    primary.reverse()
                };
                primary.then_with(|| {
                    let ra: Vec<String> = a.iter().map(render_cell).collect();
                    let rb: Vec<String> = b.iter().map(render_cell).collect();
                    ra.cmp(&rb)
                })
            });
        }
        None => {
            rows.sort_by_key(|row| row.iter().map(render_cell).collect::<Vec<String>>());
        }
    }
    if let Some(limit) = query.limit {
        rows.truncate(limit);
    }
    ResultTable { columns, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{execute, ingest_script, parse_query};

    fn check(script: &str, query_text: &str) {
        let graph = ingest_script(script).unwrap();
        let query = parse_query(query_text).unwrap();
        let by_exec = execute(&query, &graph).unwrap();
        let by_brute = brute_force_match(&query, &graph);
        assert_eq!(by_exec, by_brute, "query {query_text}");
    }

    #[test]
    fn single_node_identity_query() {
        check("CREATE (only:Thing {name: \"X\"})", "MATCH (n) RETURN n");
    }

    #[test]
    fn var_length_two_hops_on_chain() {
        let script = "CREATE (a:N {name: \"a\"})\nCREATE (b:N {name: \"b\"})\nCREATE (c:N {name: \"c\"})\nCREATE (a)-[:R]->(b)\nCREATE (b)-[:R]->(c)";
        check(script, "MATCH (x)-[:R*1..2]->(y) RETURN x.name, y.name");
        // Hand enumeration: pairs (a,b), (b,c) at one hop, (a,c) at two.
        let graph = ingest_script(script).unwrap();
        let query = parse_query("MATCH (x)-[:R*2..2]->(y) RETURN x.name, y.name").unwrap();
        let table = brute_force_match(&query, &graph);
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0][0], Some(Value::Text("a".into())));
        assert_eq!(table.rows[0][1], Some(Value::Text("c".into())));
    }

    #[test]
    fn agrees_on_filters_and_aggregates() {
        let script = r#"
CREATE (t:Company {name: "TSMC", tier: 1})
CREATE (s:Company {name: "Samsung", tier: 1})
CREATE (x:Company {name: "Other", tier: 2})
CREATE (w:Material {name: "Wafer"})
CREATE (t)-[:FABRICATES]->(w)
CREATE (s)-[:FABRICATES]->(w)
CREATE (x)-[:SHIPS]->(w)
"#;
        for q in [
            "MATCH (c:Company) WHERE c.tier = 1 RETURN c.name",
            "MATCH (c:Company) WHERE c.tier <> 1 OR c.name = \"TSMC\" RETURN c.name",
            "MATCH (c)-[:FABRICATES]->(w) RETURN w.name, count(c)",
            "MATCH (c:Company) RETURN c.name ORDER BY c.name DESC LIMIT 2",
            "MATCH (a)-[]->(w)<-[]-(b) RETURN a.name, b.name",
            "MATCH (a)-[*1..3]->(w {name: \"Wafer\"}) RETURN a.name",
        ] {
            check(script, q);
        }
    }
}
