//! Control-flow graph over a process model: reachability with blocked nodes,
//! bounded path enumeration, and fork-branch membership. These are the
//! primitives the rule engine's semantics are defined on.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::label::normalize_label;
use crate::model::{NodeKind, ProcessModel};

/// An out-edge in adjacency order (model edge order).
#[derive(Debug, Clone)]
struct OutEdge {
    to: usize,
    guard: Option<String>,
}

/// Immutable analysis view of a valid [`ProcessModel`].
#[derive(Debug, Clone)]
pub struct Cfg {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    kinds: Vec<NodeKind>,
    lanes: Vec<Option<String>>,
    labels: Vec<String>,
    adjacency: Vec<Vec<OutEdge>>,
    start: usize,
    label_index: BTreeMap<String, BTreeSet<String>>,
}

/// A maximal path from start under an edge budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgPath {
    pub nodes: Vec<String>,
    /// True when the path ends at a stop node; false when it was cut off by
    /// the edge budget.
    pub ended_at_stop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownNode(pub String);

impl std::fmt::Display for UnknownNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unknown node id {}", self.0)
    }
}

impl std::error::Error for UnknownNode {}

/// Builds the CFG. The model must be valid (see [`ProcessModel::validate`]).
pub fn build_cfg(model: &ProcessModel) -> Cfg {
    let ids: Vec<String> = model.nodes.iter().map(|n| n.id.clone()).collect();
    let index: BTreeMap<String, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();
    let kinds: Vec<NodeKind> = model.nodes.iter().map(|n| n.kind).collect();
    let lanes: Vec<Option<String>> = model.nodes.iter().map(|n| n.lane.clone()).collect();
    let labels: Vec<String> = model.nodes.iter().map(|n| n.label.clone()).collect();

    let mut adjacency: Vec<Vec<OutEdge>> = vec![Vec::new(); ids.len()];
    for edge in &model.edges {
        let from = index[&edge.from];
        adjacency[from].push(OutEdge {
            to: index[&edge.to],
            guard: edge.guard.clone(),
        });
    }

    let start = model
        .nodes
        .iter()
        .position(|n| n.kind == NodeKind::Start)
        .expect("valid model has a start node");

    let mut label_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for node in &model.nodes {
        if matches!(node.kind, NodeKind::Activity | NodeKind::Decision) {
            let key = normalize_label(&node.label);
            if !key.is_empty() {
                label_index.entry(key).or_default().insert(node.id.clone());
            }
        }
    }

    Cfg {
        ids,
        index,
        kinds,
        lanes,
        labels,
        adjacency,
        start,
        label_index,
    }
}

impl Cfg {
    pub fn start_id(&self) -> &str {
        &self.ids[self.start]
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn kind_of(&self, id: &str) -> Option<NodeKind> {
        self.index.get(id).map(|&i| self.kinds[i])
    }

    pub fn lane_of(&self, id: &str) -> Option<&str> {
        self.index.get(id).and_then(|&i| self.lanes[i].as_deref())
    }

    pub fn label_of(&self, id: &str) -> Option<&str> {
        self.index.get(id).map(|&i| self.labels[i].as_str())
    }

    /// Out-edges of a node as (target id, guard), in model edge order.
    pub fn successors(&self, id: &str) -> Vec<(&str, Option<&str>)> {
        match self.index.get(id) {
            Some(&i) => self.adjacency[i]
                .iter()
                .map(|e| (self.ids[e.to].as_str(), e.guard.as_deref()))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Normalized label -> set of activity/decision node ids.
    pub fn label_index(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.label_index
    }

    /// Node ids whose normalized label equals `normalize_label(label)`.
    pub fn nodes_with_label(&self, label: &str) -> BTreeSet<String> {
        self.label_index
            .get(&normalize_label(label))
            .cloned()
            .unwrap_or_default()
    }

    /// Set of nodes reachable from `from` along edges avoiding `blocked`
    /// nodes entirely. `from` itself is included and must not be blocked.
    pub fn reachable_without(
        &self,
        blocked: &BTreeSet<String>,
        from: &str,
    ) -> Result<BTreeSet<String>, UnknownNode> {
        let start = *self
            .index
            .get(from)
            .ok_or_else(|| UnknownNode(from.to_string()))?;
        for b in blocked {
            if !self.index.contains_key(b) {
                return Err(UnknownNode(b.clone()));
            }
        }
        debug_assert!(!blocked.contains(from), "precondition: from not blocked");

        let blocked_idx: BTreeSet<usize> = blocked.iter().map(|b| self.index[b]).collect();
        let mut seen = vec![false; self.ids.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for edge in &self.adjacency[u] {
                if !seen[edge.to] && !blocked_idx.contains(&edge.to) {
                    seen[edge.to] = true;
                    stack.push(edge.to);
                }
            }
        }
        Ok(seen
            .iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| self.ids[i].clone())
            .collect())
    }

    /// Shortest path (BFS, adjacency order) from `from` to any node in
    /// `targets`, avoiding `blocked`. Returns node ids including endpoints.
    pub fn path_avoiding(
        &self,
        blocked: &BTreeSet<String>,
        from: &str,
        targets: &BTreeSet<String>,
    ) -> Option<Vec<String>> {
        let start = *self.index.get(from)?;
        if blocked.contains(from) {
            return None;
        }
        let blocked_idx: BTreeSet<usize> = blocked
            .iter()
            .filter_map(|b| self.index.get(b).copied())
            .collect();
        let target_idx: BTreeSet<usize> = targets
            .iter()
            .filter_map(|t| self.index.get(t).copied())
            .collect();

        let mut parent: Vec<Option<usize>> = vec![None; self.ids.len()];
        let mut seen = vec![false; self.ids.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            if target_idx.contains(&u) {
                let mut path = vec![u];
                let mut cur = u;
                while let Some(p) = parent[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path.into_iter().map(|i| self.ids[i].clone()).collect());
            }
            for edge in &self.adjacency[u] {
                if !seen[edge.to] && !blocked_idx.contains(&edge.to) {
                    seen[edge.to] = true;
                    parent[edge.to] = Some(u);
                    queue.push_back(edge.to);
                }
            }
        }
        None
    }

    /// All maximal paths from start in which no edge is traversed more than
    /// `edge_budget` times. Depth-first, following adjacency order.
    pub fn enumerate_paths(&self, edge_budget: usize) -> Vec<CfgPath> {
        assert!(edge_budget >= 1, "edge budget must be at least 1");
        // Edge identity is (node index, position in its adjacency list).
        let mut edge_uses: Vec<Vec<usize>> =
            self.adjacency.iter().map(|a| vec![0; a.len()]).collect();
        let mut out = Vec::new();
        let mut path = vec![self.start];
        self.walk(self.start, edge_budget, &mut edge_uses, &mut path, &mut out);
        out
    }

    fn walk(
        &self,
        u: usize,
        budget: usize,
        edge_uses: &mut Vec<Vec<usize>>,
        path: &mut Vec<usize>,
        out: &mut Vec<CfgPath>,
    ) {
        let open: Vec<usize> = (0..self.adjacency[u].len())
            .filter(|&k| edge_uses[u][k] < budget)
            .collect();
        if self.adjacency[u].is_empty() || open.is_empty() {
            out.push(CfgPath {
                nodes: path.iter().map(|&i| self.ids[i].clone()).collect(),
                ended_at_stop: self.kinds[u] == NodeKind::Stop,
            });
            return;
        }
        for k in open {
            let to = self.adjacency[u][k].to;
            edge_uses[u][k] += 1;
            path.push(to);
            self.walk(to, budget, edge_uses, path, out);
            path.pop();
            edge_uses[u][k] -= 1;
        }
    }

    /// Assigns every node strictly inside a fork's branch subgraph to that
    /// fork and branch index. Nodes under nested forks map to the innermost
    /// fork; nodes outside any fork are absent.
    ///
    /// Branch regions are discovered by a depth-counting walk from each
    /// branch head: passing an inner fork increments the bracket depth,
    /// a join at depth zero is the matching join and bounds the region.
    pub fn fork_branch_membership(&self) -> BTreeMap<String, (String, usize)> {
        let mut assignment: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for fork in 0..self.ids.len() {
            if self.kinds[fork] != NodeKind::Fork {
                continue;
            }
            for (branch, edge) in self.adjacency[fork].iter().enumerate() {
                for member in self.branch_region(edge.to) {
                    match assignment.get(&member) {
                        // Innermost fork wins: forks are numbered in traversal
                        // order, so a containing fork created later is nested
                        // deeper.
                        Some(&(prev_fork, _)) if prev_fork >= fork => {}
                        _ => {
                            assignment.insert(member, (fork, branch));
                        }
                    }
                }
            }
        }
        assignment
            .into_iter()
            .map(|(node, (fork, branch))| {
                (self.ids[node].clone(), (self.ids[fork].clone(), branch))
            })
            .collect()
    }

    /// Nodes of one branch region starting at `head`, excluding the matching
    /// join. `depth` counts forks opened inside the region; on structurally
    /// lowered models it never exceeds the fork count, and capping it there
    /// keeps the walk finite on arbitrary graphs.
    fn branch_region(&self, head: usize) -> BTreeSet<usize> {
        let max_depth = self.kinds.iter().filter(|k| **k == NodeKind::Fork).count();
        let mut region = BTreeSet::new();
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut stack: Vec<(usize, usize)> = vec![(head, 0)];
        while let Some((u, depth)) = stack.pop() {
            if self.kinds[u] == NodeKind::Join && depth == 0 {
                continue; // matching join: region boundary
            }
            if !seen.insert((u, depth)) {
                continue;
            }
            region.insert(u);
            let next_depth = match self.kinds[u] {
                NodeKind::Fork => depth + 1,
                NodeKind::Join => depth - 1,
                _ => depth,
            };
            if next_depth > max_depth {
                continue;
            }
            for edge in &self.adjacency[u] {
                stack.push((edge.to, next_depth));
            }
        }
        region
    }
}
