//! Supply-chain analytics over the property graph: bottleneck detection via
//! articulation points, degree centrality, and directed path tracing.

use std::collections::{BTreeMap, BTreeSet};

use super::graph::PropertyGraph;
use super::GraphError;

/// Cut vertices of the undirected projection: nodes whose removal increases
/// the number of connected components. Classic low-link computation.
pub fn articulation_points(graph: &PropertyGraph) -> BTreeSet<String> {
    let ids: Vec<&String> = graph.nodes.keys().collect();
    let index: BTreeMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let n = ids.len();

    // Undirected projection: dedupe parallel edges, drop self-loops.
    let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for rel in &graph.rels {
        let (a, b) = (index[rel.from.as_str()], index[rel.to.as_str()]);
        if a != b {
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
    }

    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut cut = vec![false; n];
    let mut timer = 0usize;

    // Iterative DFS so large graphs cannot overflow the stack.
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut root_children = 0usize;
        // Frame: (node, parent, iterator state over neighbors).
        let mut stack: Vec<(usize, usize, Vec<usize>, usize)> = Vec::new();
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((
            root,
            usize::MAX,
            adjacency[root].iter().copied().collect(),
            0,
        ));

        while let Some((u, parent, neighbors, cursor)) = stack.pop() {
            if cursor < neighbors.len() {
                let v = neighbors[cursor];
                stack.push((u, parent, neighbors, cursor + 1));
                if disc[v] == usize::MAX {
                    if u == root {
                        root_children += 1;
                    }
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, u, adjacency[v].iter().copied().collect(), 0));
                } else if v != parent {
                    low[u] = low[u].min(disc[v]);
                }
            } else if let Some(&mut (p, _, _, _)) = stack.last_mut() {
                // Returning from u into its parent frame p.
                low[p] = low[p].min(low[u]);
                if p != root && low[u] >= disc[p] {
                    cut[p] = true;
                }
            }
        }
        if root_children > 1 {
            cut[root] = true;
        }
    }

    ids.iter()
        .enumerate()
        .filter(|(i, _)| cut[*i])
        .map(|(_, id)| (*id).clone())
        .collect()
}

/// Oracle for [`articulation_points`]: remove each node in turn and recount
/// connected components of the undirected projection.
pub fn articulation_points_by_recount(graph: &PropertyGraph) -> BTreeSet<String> {
    let base = component_count(graph, None);
    graph
        .nodes
        .keys()
        .filter(|id| component_count(graph, Some(id)) > base)
        .cloned()
        .collect()
}

/// Connected components of the undirected projection, optionally with one
/// node removed. Removing node `skip` also removes its incident edges.
fn component_count(graph: &PropertyGraph, skip: Option<&str>) -> usize {
    let ids: Vec<&str> = graph
        .nodes
        .keys()
        .map(String::as_str)
        .filter(|id| Some(*id) != skip)
        .collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for rel in &graph.rels {
        if Some(rel.from.as_str()) == skip || Some(rel.to.as_str()) == skip {
            continue;
        }
        let (a, b) = (index[rel.from.as_str()], index[rel.to.as_str()]);
        if a != b {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    let mut seen = vec![false; ids.len()];
    let mut components = 0;
    for i in 0..ids.len() {
        if seen[i] {
            continue;
        }
        components += 1;
        let mut stack = vec![i];
        seen[i] = true;
        while let Some(u) = stack.pop() {
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    components
}

/// Top-k nodes by total degree (in + out), ties broken by id ascending.
pub fn degree_centrality(graph: &PropertyGraph, k: usize) -> Vec<(String, usize)> {
    let mut ranked: Vec<(String, usize)> = graph
        .nodes
        .keys()
        .map(|id| (id.clone(), graph.degree(id)))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

/// All simple directed paths from `src` to `dst` with at most `max_len`
/// edges, in lexicographic node-sequence order. Zero-length self-paths are
/// not reported.
pub fn trace_paths(
    graph: &PropertyGraph,
    src: &str,
    dst: &str,
    max_len: usize,
) -> Result<Vec<Vec<String>>, GraphError> {
    for endpoint in [src, dst] {
        if !graph.nodes.contains_key(endpoint) {
            return Err(GraphError::UnknownNode(endpoint.to_string()));
        }
    }
    if !(1..=8).contains(&max_len) {
        return Err(GraphError::BadArgument(format!(
            "max_len must be between 1 and 8, got {max_len}"
        )));
    }

    // Successor sets deduped: parallel edges yield the same node path.
    let mut successors: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for rel in &graph.rels {
        successors
            .entry(rel.from.as_str())
            .or_default()
            .insert(rel.to.as_str());
    }

    let mut found: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut path: Vec<&str> = vec![src];
    let mut on_path: BTreeSet<&str> = std::iter::once(src).collect();
    dfs(
        src,
        dst,
        max_len,
        &successors,
        &mut path,
        &mut on_path,
        &mut found,
    );
    Ok(found.into_iter().collect())
}

fn dfs<'a>(
    cur: &'a str,
    dst: &str,
    budget: usize,
    successors: &BTreeMap<&'a str, BTreeSet<&'a str>>,
    path: &mut Vec<&'a str>,
    on_path: &mut BTreeSet<&'a str>,
    found: &mut BTreeSet<Vec<String>>,
) {
    if budget == 0 {
        return;
    }
    let Some(next) = successors.get(cur) else {
        return;
    };
    for &v in next {
        if on_path.contains(v) {
            continue;
        }
        path.push(v);
        if v == dst {
            found.insert(path.iter().map(|s| s.to_string()).collect());
        } else {
            on_path.insert(v);
            dfs(v, dst, budget - 1, successors, path, on_path, found);
            on_path.remove(v);
        }
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::ingest_script;

    #[test]
    fn path_middle_is_the_cut_vertex() {
        let graph = ingest_script(
            "CREATE (a:N)\nCREATE (b:N)\nCREATE (c:N)\nCREATE (a)-[:R]->(b)\nCREATE (b)-[:R]->(c)",
        )
        .unwrap();
        let expected: BTreeSet<String> = std::iter::once("b".to_string()).collect();
        assert_eq!(articulation_points(&graph), expected);
        assert_eq!(articulation_points_by_recount(&graph), expected);
    }

    #[test]
    fn triangle_has_no_cut_vertex() {
        let graph = ingest_script("CREATE (a:N)\nCREATE (b:N)\nCREATE (c:N)\nCREATE (a)-[:R]->(b)\nCREATE (b)-[:R]->(c)\nCREATE (c)-[:R]->(a)").unwrap();
        assert!(articulation_points(&graph).is_empty());
        assert!(articulation_points_by_recount(&graph).is_empty());
    }

    #[test]
    fn star_center_ranks_first() {
        let graph = ingest_script("CREATE (hub:N)\nCREATE (x:N)\nCREATE (y:N)\nCREATE (z:N)\nCREATE (hub)-[:R]->(x)\nCREATE (hub)-[:R]->(y)\nCREATE (z)-[:R]->(hub)").unwrap();
        let top = degree_centrality(&graph, 2);
        assert_eq!(top[0], ("hub".to_string(), 3));
    }

    #[test]
    fn empty_graph_centrality() {
        assert!(degree_centrality(&PropertyGraph::new(), 3).is_empty());
    }

    #[test]
    fn centrality_is_stable_under_id_relabeling() {
        // With all degrees distinct, renaming ids renames the ranking
        // one-for-one; ties would fall back to id order.
        let original = ingest_script("CREATE (x:N)\nCREATE (y:N)\nCREATE (z:N)\nCREATE (x)-[:R]->(y)\nCREATE (x)-[:R]->(z)\nCREATE (y)-[:R]->(x)").unwrap();
        let renamed = ingest_script("CREATE (p:N)\nCREATE (q:N)\nCREATE (r:N)\nCREATE (p)-[:R]->(q)\nCREATE (p)-[:R]->(r)\nCREATE (q)-[:R]->(p)").unwrap();
        let degrees_a: Vec<usize> = degree_centrality(&original, 3)
            .into_iter()
            .map(|(_, d)| d)
            .collect();
        let degrees_b: Vec<usize> = degree_centrality(&renamed, 3)
            .into_iter()
            .map(|(_, d)| d)
            .collect();
        assert_eq!(degrees_a, degrees_b);
        assert_eq!(degree_centrality(&original, 1)[0].0, "x");
        assert_eq!(degree_centrality(&renamed, 1)[0].0, "p");
    }

    #[test]
    fn trace_on_chain_and_diamond() {
        let graph = ingest_script(
            "CREATE (a:N)\nCREATE (b:N)\nCREATE (c:N)\nCREATE (a)-[:R]->(b)\nCREATE (b)-[:R]->(c)",
        )
        .unwrap();
        let paths = trace_paths(&graph, "a", "c", 2).unwrap();
        assert_eq!(paths, vec![vec!["a".to_string(), "b".into(), "c".into()]]);
        // No zero-length self-paths.
        assert!(trace_paths(&graph, "a", "a", 3).unwrap().is_empty());

        let diamond = ingest_script("CREATE (s:N)\nCREATE (l:N)\nCREATE (r:N)\nCREATE (t:N)\nCREATE (s)-[:R]->(l)\nCREATE (s)-[:R]->(r)\nCREATE (l)-[:R]->(t)\nCREATE (r)-[:R]->(t)").unwrap();
        let paths = trace_paths(&diamond, "s", "t", 3).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths[0] < paths[1], "lexicographic order");
    }

    #[test]
    fn trace_rejects_unknown_endpoints_and_bad_range() {
        let graph = ingest_script("CREATE (a:N)").unwrap();
        assert!(matches!(
            trace_paths(&graph, "a", "zz", 2),
            Err(GraphError::UnknownNode(_))
        ));
        assert!(matches!(
            trace_paths(&graph, "a", "a", 0),
            Err(GraphError::BadArgument(_))
        ));
        assert!(matches!(
            trace_paths(&graph, "a", "a", 9),
            Err(GraphError::BadArgument(_))
        ));
    }
}
