//! Evaluation harness: scores extracted artifacts against ground truth and
//! renders the quantitative results table.
//!
//! Matching is recall-style: each aspect counts how many ground-truth items
//! appear in the extraction under normalized-label comparison. Extraction
//! surplus is reported informationally but never scored.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::kg::{PropertyGraph, ResultTable};
pub use crate::label::normalize_label;
use crate::model::{NodeKind, ProcessModel};
use crate::rules::Rule;

/// Ground truth for the knowledge-graph side.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphTruth {
    /// Normalized concept names.
    pub concepts: BTreeSet<String>,
    /// (normalized source name, normalized type, normalized target name).
    pub relationships: BTreeSet<(String, String, String)>,
    /// (normalized node name, normalized property key).
    pub attributes: BTreeSet<(String, String)>,
}

impl GraphTruth {
    /// Derives truth sets from a graph: every node is a concept, every
    /// relationship a relationship, every non-name property an attribute.
    pub fn of_graph(graph: &PropertyGraph) -> Self {
        let mut truth = GraphTruth::default();
        for data in graph.nodes.values() {
            if let Some(name) = data.name() {
                truth.concepts.insert(normalize_label(name));
            }
        }
        for rel in &graph.rels {
            if let (Some(from), Some(to)) =
                (graph.nodes[&rel.from].name(), graph.nodes[&rel.to].name())
            {
                truth.relationships.insert((
                    normalize_label(from),
                    normalize_label(&rel.rel_type),
                    normalize_label(to),
                ));
            }
        }
        for (node, key) in graph.attribute_pairs() {
            truth
                .attributes
                .insert((normalize_label(&node), normalize_label(&key)));
        }
        truth
    }

    /// Replaces the derived attribute set with an explicit list of
    /// (node name, key) pairs.
    pub fn with_attributes(mut self, pairs: &[(String, String)]) -> Self {
        self.attributes = pairs
            .iter()
            .map(|(node, key)| (normalize_label(node), normalize_label(key)))
            .collect();
        self
    }
}

/// Ground truth for the process side.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProcessTruth {
    pub participants: BTreeSet<String>,
    /// Normalized labels of activity and decision nodes.
    pub activities: BTreeSet<String>,
    /// Lane-handoff pairs: (from lane, to lane) of edges crossing lanes.
    pub relationships: BTreeSet<(String, String)>,
    pub artifacts: BTreeSet<String>,
    /// Normalized rule-body keys.
    pub rules: BTreeSet<String>,
}

impl ProcessTruth {
    pub fn of_model(model: &ProcessModel, rules: &[Rule]) -> Self {
        ProcessTruth {
            participants: model
                .participants
                .iter()
                .map(|p| normalize_label(p))
                .collect(),
            activities: activity_labels(model),
            relationships: handoff_pairs(model),
            artifacts: model
                .artifacts
                .iter()
                .map(|a| normalize_label(&a.name))
                .collect(),
            rules: rules.iter().map(|r| r.body.normalized_key()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub graph: GraphTruth,
    pub process: ProcessTruth,
}

/// One scored aspect: matched out of total, with the rounded percentage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub aspect: String,
    pub matched: usize,
    pub total: usize,
    pub percent: u32,
}

impl MatchReport {
    pub fn new(aspect: impl Into<String>, matched: usize, total: usize) -> Result<Self, EvalError> {
        Ok(MatchReport {
            aspect: aspect.into(),
            matched,
            total,
            percent: percent(matched, total)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    ZeroTotal,
    Parse(ParseError),
}

impl std::fmt::Display for EvalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalError::ZeroTotal => write!(f, "ground truth aspect is empty (total = 0)"),
            EvalError::Parse(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EvalError {}

/// Percentage as the paper reports it: round half up of 100 * matched / total.
pub fn percent(matched: usize, total: usize) -> Result<u32, EvalError> {
    if total == 0 {
        return Err(EvalError::ZeroTotal);
    }
    Ok(((200 * matched + total) / (2 * total)) as u32)
}

fn activity_labels(model: &ProcessModel) -> BTreeSet<String> {
    model
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Activity | NodeKind::Decision))
        .map(|n| normalize_label(&n.label))
        .filter(|l| !l.is_empty())
        .collect()
}

/// Lane-handoff pairs: for every edge whose endpoints sit in different
/// lanes, the (from lane, to lane) pair, normalized.
fn handoff_pairs(model: &ProcessModel) -> BTreeSet<(String, String)> {
    let mut pairs = BTreeSet::new();
    for edge in &model.edges {
        let from = model.node(&edge.from).and_then(|n| n.lane.as_deref());
        let to = model.node(&edge.to).and_then(|n| n.lane.as_deref());
        if let (Some(from), Some(to)) = (from, to) {
            let (from, to) = (normalize_label(from), normalize_label(to));
            if from != to {
                pairs.insert((from, to));
            }
        }
    }
    pairs
}

/// Scores a knowledge-graph extraction: concepts, relationships, attributes.
pub fn match_graph(
    extracted: &PropertyGraph,
    truth: &GraphTruth,
) -> Result<Vec<MatchReport>, EvalError> {
    let found = GraphTruth::of_graph(extracted);
    Ok(vec![
        MatchReport::new(
            aspect::CONCEPTS,
            truth.concepts.intersection(&found.concepts).count(),
            truth.concepts.len(),
        )?,
        MatchReport::new(
            aspect::KG_RELATIONSHIPS,
            truth
                .relationships
                .intersection(&found.relationships)
                .count(),
            truth.relationships.len(),
        )?,
        MatchReport::new(
            aspect::ATTRIBUTES,
            truth.attributes.intersection(&found.attributes).count(),
            truth.attributes.len(),
        )?,
    ])
}

/// Scores a process extraction: participants, activities, lane-handoff
/// relationships, artifacts, rules.
pub fn match_process(
    extracted: &ProcessModel,
    extracted_rules: &[Rule],
    truth: &ProcessTruth,
) -> Result<Vec<MatchReport>, EvalError> {
    let participants: BTreeSet<String> = extracted
        .participants
        .iter()
        .map(|p| normalize_label(p))
        .collect();
    let activities = activity_labels(extracted);
    let relationships = handoff_pairs(extracted);
    let artifacts: BTreeSet<String> = extracted
        .artifacts
        .iter()
        .map(|a| normalize_label(&a.name))
        .collect();
    let rules: BTreeSet<String> = extracted_rules
        .iter()
        .map(|r| r.body.normalized_key())
        .collect();

    Ok(vec![
        MatchReport::new(
            aspect::PARTICIPANTS,
            truth.participants.intersection(&participants).count(),
            truth.participants.len(),
        )?,
        MatchReport::new(
            aspect::ACTIVITIES,
            truth.activities.intersection(&activities).count(),
            truth.activities.len(),
        )?,
        MatchReport::new(
            aspect::PROCESS_RELATIONSHIPS,
            truth.relationships.intersection(&relationships).count(),
            truth.relationships.len(),
        )?,
        MatchReport::new(
            aspect::ARTIFACTS,
            truth.artifacts.intersection(&artifacts).count(),
            truth.artifacts.len(),
        )?,
        MatchReport::new(
            aspect::RULES,
            truth.rules.intersection(&rules).count(),
            truth.rules.len(),
        )?,
    ])
}

/// Scores candidate query results against oracle results. A `None` candidate
/// (parse or execution failure) is unmatched; a match is exact table
/// equality.
pub fn score_queries(
    pairs: &[(Option<ResultTable>, ResultTable)],
) -> Result<MatchReport, EvalError> {
    let matched = pairs
        .iter()
        .filter(|(candidate, oracle)| candidate.as_ref() == Some(oracle))
        .count();
    MatchReport::new(aspect::QUERIES, matched, pairs.len())
}

/// Canonical aspect names.
pub mod aspect {
    pub const CONCEPTS: &str = "concepts";
    pub const KG_RELATIONSHIPS: &str = "kg_relationships";
    pub const ATTRIBUTES: &str = "attributes";
    pub const PARTICIPANTS: &str = "participants";
    pub const QUERIES: &str = "queries";
    pub const ACTIVITIES: &str = "activities";
    pub const PROCESS_RELATIONSHIPS: &str = "process_relationships";
    pub const ARTIFACTS: &str = "artifacts";
    pub const RULES: &str = "rules";
}

/// The eight rows of the results table, in fixed order with display names.
const TABLE_ROWS: [(&str, &str); 8] = [
    (aspect::CONCEPTS, "Concepts"),
    (aspect::KG_RELATIONSHIPS, "Relationships (KG)"),
    (aspect::ATTRIBUTES, "Attributes"),
    (aspect::PARTICIPANTS, "Participants"),
    (aspect::QUERIES, "Queries"),
    (aspect::ACTIVITIES, "Activities"),
    (aspect::PROCESS_RELATIONSHIPS, "Relationships (Process)"),
    (aspect::RULES, "Rules"),
];

/// Renders the results table: fixed row order, `N (P%)` cells. Aspects
/// without a report are omitted; an empty report list renders the header
/// only.
pub fn summarize(reports: &[MatchReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24}  {:>12}  {}\n",
        "Aspect", "Ground Truth", "Extracted"
    ));
    for (key, display) in TABLE_ROWS {
        if let Some(report) = reports.iter().find(|r| r.aspect == key) {
            out.push_str(&format!(
                "{:<24}  {:>12}  {} ({}%)\n",
                display, report.total, report.matched, report.percent
            ));
        }
    }
    out
}

/// Informational surplus: extracted concepts absent from ground truth.
/// Reported alongside the recall table, never scored.
pub fn graph_surplus(extracted: &PropertyGraph, truth: &GraphTruth) -> usize {
    let found = GraphTruth::of_graph(extracted);
    found.concepts.difference(&truth.concepts).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{ingest_script, Value};

    #[test]
    fn percent_reproduces_reported_values() {
        // Every stated count/percentage pair from the results.
        let cases = [
            (22, 25, 88),
            (19, 23, 83),
            (6, 8, 75),
            (18, 25, 72),
            (15, 23, 65),
            (5, 8, 63),
            (10, 11, 91),
            (9, 11, 82),
            (7, 9, 78),
            (4, 5, 80),
            (8, 8, 100),
            (15, 20, 75),
        ];
        for (matched, total, expected) in cases {
            assert_eq!(
                percent(matched, total).unwrap(),
                expected,
                "{matched}/{total}"
            );
        }
        assert!(percent(1, 0).is_err());
    }

    #[test]
    fn percent_monotone_in_matched() {
        for total in 1..30 {
            let mut last = 0;
            for matched in 0..=total {
                let p = percent(matched, total).unwrap();
                assert!(p >= last);
                last = p;
            }
            assert_eq!(percent(total, total).unwrap(), 100);
            assert_eq!(percent(0, total).unwrap(), 0);
        }
    }

    #[test]
    fn self_match_is_always_total() {
        let graph = ingest_script(
            "CREATE (a:X {name: \"Alpha\", kind: \"k\"})\nCREATE (b:Y {name: \"Beta\"})\nCREATE (a)-[:LINKS]->(b)",
        )
        .unwrap();
        let truth = GraphTruth::of_graph(&graph);
        for report in match_graph(&graph, &truth).unwrap() {
            assert_eq!(report.matched, report.total, "{}", report.aspect);
            assert_eq!(report.percent, 100);
        }
    }

    const SMALL_TRUTH: &str = "CREATE (a:X {name: \"CPU Core IP\", kind: \"ip\"})\nCREATE (b:Y {name: \"Beta\"})\nCREATE (a)-[:LINKS]->(b)";

    #[test]
    fn matching_is_case_and_whitespace_insensitive() {
        let truth = GraphTruth::of_graph(&ingest_script(SMALL_TRUTH).unwrap());
        let extracted = ingest_script("CREATE (a:X {name: \"  cpu   core ip \"})").unwrap();
        let reports = match_graph(&extracted, &truth).unwrap();
        assert_eq!(reports[0].matched, 1);
    }

    #[test]
    fn empty_extraction_scores_zero() {
        let truth = GraphTruth::of_graph(&ingest_script(SMALL_TRUTH).unwrap());
        let reports = match_graph(&PropertyGraph::new(), &truth).unwrap();
        for report in &reports {
            assert_eq!(report.matched, 0);
            assert_eq!(report.percent, 0);
        }
    }

    #[test]
    fn summarize_renders_fixed_rows() {
        let reports = vec![
            MatchReport::new(aspect::CONCEPTS, 22, 25).unwrap(),
            MatchReport::new(aspect::RULES, 4, 5).unwrap(),
        ];
        let table = summarize(&reports);
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("Aspect"));
        assert!(
            lines[1].contains("Concepts") && lines[1].contains("22 (88%)"),
            "{table}"
        );
        assert!(lines[2].contains("Rules") && lines[2].contains("4 (80%)"));
        // Header only when empty.
        assert_eq!(summarize(&[]).lines().count(), 1);
    }

    #[test]
    fn score_queries_counts_exact_equality() {
        let table = |v: i64| ResultTable {
            columns: vec!["c".into()],
            rows: vec![vec![Some(Value::Int(v))]],
        };
        let pairs = vec![
            (Some(table(1)), table(1)),
            (Some(table(2)), table(3)),
            (None, table(4)),
        ];
        let report = score_queries(&pairs).unwrap();
        assert_eq!((report.matched, report.total, report.percent), (1, 3, 33));
    }
}
