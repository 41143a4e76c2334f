//! Rule evaluation over a process model.
//!
//! [`evaluate`] computes verdicts from CFG reachability: a before-constraint
//! is violated when the constrained activity stays reachable after removing
//! every node of the required predecessor label. [`evaluate_by_paths`] is an
//! independent oracle that decides the same rules by scanning enumerated
//! paths for label occurrences. The two must agree; the acceptance suite
//! checks them against each other on exhaustive and randomized model sets.

use std::collections::BTreeSet;
use std::fmt;

use crate::cfg::{build_cfg, Cfg, CfgPath};
use crate::model::{NodeKind, ProcessModel};
use crate::rules::{cmp_rule_ids, Evidence, Rule, RuleBody, Verdict, VerdictStatus};

/// Evaluates all rules against the model. Verdicts are ordered by rule id.
pub fn evaluate(rules: &[Rule], model: &ProcessModel) -> Vec<Verdict> {
    let cfg = build_cfg(model);
    let membership = cfg.fork_branch_membership();
    let mut verdicts: Vec<Verdict> = rules
        .iter()
        .map(|rule| evaluate_rule(rule, &cfg, &membership))
        .collect();
    verdicts.sort_by(|a, b| cmp_rule_ids(&a.rule_id, &b.rule_id));
    verdicts
}

type Membership = std::collections::BTreeMap<String, (String, usize)>;

fn evaluate_rule(rule: &Rule, cfg: &Cfg, membership: &Membership) -> Verdict {
    let (status, evidence) = match &rule.body {
        RuleBody::Before { a, b } => eval_before(cfg, a, b),
        // After(a, b) and NotBefore(a, b) are Before(b, a) by definition.
        RuleBody::After { a, b } => eval_before(cfg, b, a),
        RuleBody::NotBefore { a, b } => eval_before(cfg, b, a),
        RuleBody::AfterTrue { a, d } => eval_after_branch(cfg, a, d, true),
        RuleBody::AfterFalse { a, d } => eval_after_branch(cfg, a, d, false),
        RuleBody::Role { role, a } => eval_role(cfg, role, a),
        RuleBody::Parallel { a, b } => eval_parallel(cfg, membership, a, b),
    };
    Verdict {
        rule_id: rule.id.clone(),
        status,
        evidence,
    }
}

/// Labels that resolve to zero nodes, in argument order.
fn unresolved(cfg: &Cfg, labels: &[&str]) -> Vec<String> {
    labels
        .iter()
        .filter(|l| cfg.nodes_with_label(l).is_empty())
        .map(|l| l.to_string())
        .collect()
}

fn inapplicable(labels: Vec<String>) -> (VerdictStatus, Option<Evidence>) {
    (
        VerdictStatus::Inapplicable,
        Some(Evidence::UnresolvedLabels { labels }),
    )
}

/// Before(a, b): violated iff some b-node is reachable from start while
/// avoiding every a-node.
fn eval_before(cfg: &Cfg, a: &str, b: &str) -> (VerdictStatus, Option<Evidence>) {
    let missing = unresolved(cfg, &[a, b]);
    if !missing.is_empty() {
        return inapplicable(missing);
    }
    let blocked = cfg.nodes_with_label(a);
    let targets = cfg.nodes_with_label(b);
    let reached = cfg
        .reachable_without(&blocked, cfg.start_id())
        .expect("start is never label-indexed");
    let hit: BTreeSet<String> = targets.intersection(&reached).cloned().collect();
    if hit.is_empty() {
        return (VerdictStatus::Satisfied, None);
    }
    let path = cfg
        .path_avoiding(&blocked, cfg.start_id(), &hit)
        .expect("a reachable target has a witness path");
    (
        VerdictStatus::Violated,
        Some(Evidence::Path {
            nodes: path,
            note: format!("reaches \"{b}\" without passing \"{a}\""),
        }),
    )
}

fn guard_is_true(guard: &str) -> bool {
    matches!(guard.to_lowercase().as_str(), "yes" | "true")
}

fn guard_is_false(guard: &str) -> bool {
    matches!(guard.to_lowercase().as_str(), "no" | "false")
}

/// A decision node with classified true/false branch edges.
struct GatedDecision {
    id: String,
    true_guard: String,
    true_target: String,
    false_guard: String,
    false_target: String,
}

/// Decision nodes of label set `ld` that expose both a true- and a
/// false-guarded branch, in id order.
fn gated_decisions(cfg: &Cfg, ld: &BTreeSet<String>) -> Vec<GatedDecision> {
    let mut out = Vec::new();
    for id in ld {
        if cfg.kind_of(id) != Some(NodeKind::Decision) {
            continue;
        }
        let succ = cfg.successors(id);
        let true_edge = succ.iter().find(|(_, g)| g.is_some_and(guard_is_true));
        let false_edge = succ.iter().find(|(_, g)| g.is_some_and(guard_is_false));
        if let (Some((tt, tg)), Some((ft, fg))) = (true_edge, false_edge) {
            out.push(GatedDecision {
                id: id.clone(),
                true_guard: tg.unwrap().to_string(),
                true_target: tt.to_string(),
                false_guard: fg.unwrap().to_string(),
                false_target: ft.to_string(),
            });
        }
    }
    out
}

/// AfterTrue (`on_true_branch = true`) / AfterFalse: the gated activity must
/// be reachable from the obligated branch and unreachable from the opposite
/// branch, in both cases without re-traversing the decision.
fn eval_after_branch(
    cfg: &Cfg,
    a: &str,
    d: &str,
    on_true_branch: bool,
) -> (VerdictStatus, Option<Evidence>) {
    let missing = unresolved(cfg, &[a, d]);
    if !missing.is_empty() {
        return inapplicable(missing);
    }
    let la = cfg.nodes_with_label(a);
    let ld = cfg.nodes_with_label(d);
    let decisions = gated_decisions(cfg, &ld);
    if decisions.is_empty() {
        return (
            VerdictStatus::Inapplicable,
            Some(Evidence::NoGuardedBranch {
                decision_label: d.to_string(),
                guard: if on_true_branch {
                    "yes".into()
                } else {
                    "no".into()
                },
            }),
        );
    }

    // Nodes reachable from `from` without passing any d-labeled node.
    let branch_reach = |from: &str| -> BTreeSet<String> {
        if ld.contains(from) {
            return BTreeSet::new();
        }
        cfg.reachable_without(&ld, from)
            .expect("branch target exists")
    };

    let mut witness: Option<Evidence> = None;
    for decision in &decisions {
        let (ob_target, ob_guard, pr_target, pr_guard) = if on_true_branch {
            (
                &decision.true_target,
                &decision.true_guard,
                &decision.false_target,
                &decision.false_guard,
            )
        } else {
            (
                &decision.false_target,
                &decision.false_guard,
                &decision.true_target,
                &decision.true_guard,
            )
        };

        // Obligation: some a-node on the gated branch.
        let obliged: BTreeSet<String> =
            branch_reach(ob_target).intersection(&la).cloned().collect();
        if obliged.is_empty() {
            return (
                VerdictStatus::Violated,
                Some(Evidence::UnreachedAfterBranch {
                    decision: decision.id.clone(),
                    guard: ob_guard.clone(),
                    label: a.to_string(),
                }),
            );
        }

        // Prohibition: no a-node on the opposite branch.
        let forbidden: BTreeSet<String> =
            branch_reach(pr_target).intersection(&la).cloned().collect();
        if !forbidden.is_empty() {
            let to_decision = cfg
                .path_avoiding(
                    &BTreeSet::new(),
                    cfg.start_id(),
                    &std::iter::once(decision.id.clone()).collect(),
                )
                .expect("decision is reachable in a valid model");
            let from_branch = cfg
                .path_avoiding(&ld, pr_target, &forbidden)
                .expect("forbidden hit is reachable from the branch target");
            let mut nodes = to_decision;
            nodes.extend(from_branch);
            return (
                VerdictStatus::Violated,
                Some(Evidence::Path {
                    nodes,
                    note: format!(
                        "\"{a}\" follows the `{pr_guard}` branch of \"{d}\" without re-passing the decision"
                    ),
                }),
            );
        }

        if witness.is_none() {
            witness = Some(Evidence::BranchEdge {
                decision: decision.id.clone(),
                guard: ob_guard.clone(),
                target: ob_target.clone(),
            });
        }
    }
    (VerdictStatus::Satisfied, witness)
}

/// Role(r, a): every a-node must sit in lane r (normalized comparison).
fn eval_role(cfg: &Cfg, role: &str, a: &str) -> (VerdictStatus, Option<Evidence>) {
    let missing = unresolved(cfg, &[a]);
    if !missing.is_empty() {
        return inapplicable(missing);
    }
    let expected = crate::label::normalize_label(role);
    for node in cfg.nodes_with_label(a) {
        let lane = cfg.lane_of(&node);
        let ok = lane.is_some_and(|l| crate::label::normalize_label(l) == expected);
        if !ok {
            return (
                VerdictStatus::Violated,
                Some(Evidence::Lane {
                    node: node.clone(),
                    lane: lane.map(str::to_string),
                    expected: role.to_string(),
                }),
            );
        }
    }
    (VerdictStatus::Satisfied, None)
}

/// Parallel(a, b): some fork must place an a-node and a b-node in distinct
/// branches.
fn eval_parallel(
    cfg: &Cfg,
    membership: &Membership,
    a: &str,
    b: &str,
) -> (VerdictStatus, Option<Evidence>) {
    let missing = unresolved(cfg, &[a, b]);
    if !missing.is_empty() {
        return inapplicable(missing);
    }
    for na in cfg.nodes_with_label(a) {
        for nb in cfg.nodes_with_label(b) {
            if let (Some((fa, ia)), Some((fb, ib))) = (membership.get(&na), membership.get(&nb)) {
                if fa == fb && ia != ib {
                    return (
                        VerdictStatus::Satisfied,
                        Some(Evidence::ForkWitness {
                            fork: fa.clone(),
                            branch_a: *ia,
                            branch_b: *ib,
                        }),
                    );
                }
            }
        }
    }
    (
        VerdictStatus::Violated,
        Some(Evidence::NoFork {
            label_a: a.to_string(),
            label_b: b.to_string(),
        }),
    )
}

/// Failure modes of the path-based oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathOracleError {
    /// The oracle requires an edge budget of at least 2.
    InvalidBudget { given: usize },
    /// Some path was truncated by the budget and a rule's verdict differs
    /// between the truncated and complete views.
    BudgetInconclusive { rule_ids: Vec<String> },
}

impl fmt::Display for PathOracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathOracleError::InvalidBudget { given } => {
                write!(f, "edge budget must be at least 2, got {given}")
            }
            PathOracleError::BudgetInconclusive { rule_ids } => {
                write!(
                    f,
                    "budget-inconclusive verdicts for rules: {}",
                    rule_ids.join(", ")
                )
            }
        }
    }
}

impl std::error::Error for PathOracleError {}

/// Independent oracle: decides ordering rules by literal occurrence checks
/// over enumerated paths. Role and Parallel rules are structural and are
/// delegated to the same checks as [`evaluate`].
pub fn evaluate_by_paths(
    rules: &[Rule],
    model: &ProcessModel,
    edge_budget: usize,
) -> Result<Vec<Verdict>, PathOracleError> {
    if edge_budget < 2 {
        return Err(PathOracleError::InvalidBudget { given: edge_budget });
    }
    let cfg = build_cfg(model);
    let membership = cfg.fork_branch_membership();
    let paths = cfg.enumerate_paths(edge_budget);
    let truncated = paths.iter().any(|p| !p.ended_at_stop);
    let complete: Vec<&CfgPath> = paths.iter().filter(|p| p.ended_at_stop).collect();
    let all: Vec<&CfgPath> = paths.iter().collect();

    let mut verdicts = Vec::new();
    let mut inconclusive = Vec::new();
    for rule in rules {
        let verdict_all = path_verdict(rule, &cfg, &membership, &all);
        if truncated {
            let verdict_complete = path_verdict(rule, &cfg, &membership, &complete);
            if verdict_complete.status != verdict_all.status {
                inconclusive.push(rule.id.clone());
                continue;
            }
        }
        verdicts.push(verdict_all);
    }
    if !inconclusive.is_empty() {
        return Err(PathOracleError::BudgetInconclusive {
            rule_ids: inconclusive,
        });
    }
    verdicts.sort_by(|a, b| cmp_rule_ids(&a.rule_id, &b.rule_id));
    Ok(verdicts)
}

fn path_verdict(rule: &Rule, cfg: &Cfg, membership: &Membership, paths: &[&CfgPath]) -> Verdict {
    let (status, evidence) = match &rule.body {
        RuleBody::Before { a, b } => path_before(cfg, paths, a, b),
        RuleBody::After { a, b } => path_before(cfg, paths, b, a),
        RuleBody::NotBefore { a, b } => path_before(cfg, paths, b, a),
        RuleBody::AfterTrue { a, d } => path_after_branch(cfg, paths, a, d, true),
        RuleBody::AfterFalse { a, d } => path_after_branch(cfg, paths, a, d, false),
        // Structural rules are path-free by definition.
        RuleBody::Role { role, a } => eval_role(cfg, role, a),
        RuleBody::Parallel { a, b } => eval_parallel(cfg, membership, a, b),
    };
    Verdict {
        rule_id: rule.id.clone(),
        status,
        evidence,
    }
}

/// Path reading of Before(a, b): violated iff some path contains a b-node
/// not preceded by any a-node.
fn path_before(
    cfg: &Cfg,
    paths: &[&CfgPath],
    a: &str,
    b: &str,
) -> (VerdictStatus, Option<Evidence>) {
    let missing = unresolved(cfg, &[a, b]);
    if !missing.is_empty() {
        return inapplicable(missing);
    }
    let la = cfg.nodes_with_label(a);
    let lb = cfg.nodes_with_label(b);
    for path in paths {
        let mut seen_a = false;
        for (i, node) in path.nodes.iter().enumerate() {
            if la.contains(node) {
                seen_a = true;
            }
            if lb.contains(node) && !seen_a {
                return (
                    VerdictStatus::Violated,
                    Some(Evidence::Path {
                        nodes: path.nodes[..=i].to_vec(),
                        note: format!("path reaches \"{b}\" before any \"{a}\""),
                    }),
                );
            }
        }
    }
    (VerdictStatus::Satisfied, None)
}

/// Path reading of AfterTrue/AfterFalse: windows between a branch-edge
/// traversal and the next occurrence of the decision label.
fn path_after_branch(
    cfg: &Cfg,
    paths: &[&CfgPath],
    a: &str,
    d: &str,
    on_true_branch: bool,
) -> (VerdictStatus, Option<Evidence>) {
    let missing = unresolved(cfg, &[a, d]);
    if !missing.is_empty() {
        return inapplicable(missing);
    }
    let la = cfg.nodes_with_label(a);
    let ld = cfg.nodes_with_label(d);
    let decisions = gated_decisions(cfg, &ld);
    if decisions.is_empty() {
        return (
            VerdictStatus::Inapplicable,
            Some(Evidence::NoGuardedBranch {
                decision_label: d.to_string(),
                guard: if on_true_branch {
                    "yes".into()
                } else {
                    "no".into()
                },
            }),
        );
    }

    for decision in &decisions {
        let (ob_target, ob_guard, pr_target, pr_guard) = if on_true_branch {
            (
                &decision.true_target,
                &decision.true_guard,
                &decision.false_target,
                &decision.false_guard,
            )
        } else {
            (
                &decision.false_target,
                &decision.false_guard,
                &decision.true_target,
                &decision.true_guard,
            )
        };

        let mut obligation_met = false;
        let mut prohibition_hit: Option<Vec<String>> = None;

        for path in paths {
            let nodes = &path.nodes;
            for j in 0..nodes.len().saturating_sub(1) {
                if nodes[j] != decision.id {
                    continue;
                }
                let next = &nodes[j + 1];
                // The window runs from the branch target up to (exclusive)
                // the next d-labeled node.
                let window_has_a = |start: usize| -> Option<usize> {
                    for (k, node) in nodes.iter().enumerate().skip(start) {
                        if ld.contains(node) {
                            return None;
                        }
                        if la.contains(node) {
                            return Some(k);
                        }
                    }
                    None
                };
                if next == ob_target && window_has_a(j + 1).is_some() {
                    obligation_met = true;
                }
                if next == pr_target && prohibition_hit.is_none() {
                    if let Some(k) = window_has_a(j + 1) {
                        prohibition_hit = Some(nodes[..=k].to_vec());
                    }
                }
            }
        }

        if !obligation_met {
            return (
                VerdictStatus::Violated,
                Some(Evidence::UnreachedAfterBranch {
                    decision: decision.id.clone(),
                    guard: ob_guard.clone(),
                    label: a.to_string(),
                }),
            );
        }
        if let Some(nodes) = prohibition_hit {
            return (
                VerdictStatus::Violated,
                Some(Evidence::Path {
                    nodes,
                    note: format!(
                        "path follows the `{pr_guard}` branch of \"{d}\" and reaches \"{a}\""
                    ),
                }),
            );
        }
    }
    let first = &decisions[0];
    let (guard, target) = if on_true_branch {
        (first.true_guard.clone(), first.true_target.clone())
    } else {
        (first.false_guard.clone(), first.false_target.clone())
    };
    (
        VerdictStatus::Satisfied,
        Some(Evidence::BranchEdge {
            decision: first.id.clone(),
            guard,
            target,
        }),
    )
}

/// Checks evidence against the model it was produced from. Violations must
/// replay: paths must be connected edge sequences, claimed lanes and branch
/// assignments must match the model.
pub fn replay_evidence(evidence: &Evidence, model: &ProcessModel) -> bool {
    let cfg = build_cfg(model);
    match evidence {
        Evidence::Path { nodes, .. } => {
            !nodes.is_empty()
                && nodes.iter().all(|n| cfg.contains(n))
                && nodes
                    .windows(2)
                    .all(|w| cfg.successors(&w[0]).iter().any(|(to, _)| *to == w[1]))
        }
        Evidence::Lane { node, lane, .. } => {
            cfg.contains(node) && cfg.lane_of(node) == lane.as_deref()
        }
        Evidence::ForkWitness {
            fork,
            branch_a,
            branch_b,
        } => {
            cfg.kind_of(fork) == Some(NodeKind::Fork)
                && branch_a != branch_b
                && *branch_a < cfg.successors(fork).len()
                && *branch_b < cfg.successors(fork).len()
        }
        Evidence::BranchEdge {
            decision,
            guard,
            target,
        } => cfg
            .successors(decision)
            .iter()
            .any(|(to, g)| *to == target && *g == Some(guard.as_str())),
        Evidence::UnreachedAfterBranch {
            decision,
            guard,
            label,
        } => {
            let Some(target) = cfg
                .successors(decision)
                .iter()
                .find(|(_, g)| *g == Some(guard.as_str()))
                .map(|(to, _)| to.to_string())
            else {
                return false;
            };
            let d_label = match cfg.label_of(decision) {
                Some(l) => l.to_string(),
                None => return false,
            };
            let ld = cfg.nodes_with_label(&d_label);
            let la = cfg.nodes_with_label(label);
            if ld.contains(&target) {
                return true; // branch loops straight into the decision label
            }
            let reach = cfg.reachable_without(&ld, &target).expect("target exists");
            la.intersection(&reach).next().is_none()
        }
        Evidence::NoFork { label_a, label_b } => {
            let membership = cfg.fork_branch_membership();
            matches!(
                eval_parallel(&cfg, &membership, label_a, label_b),
                (VerdictStatus::Violated, _)
            )
        }
        Evidence::NoGuardedBranch { decision_label, .. } => {
            gated_decisions(&cfg, &cfg.nodes_with_label(decision_label)).is_empty()
        }
        Evidence::UnresolvedLabels { labels } => {
            labels.iter().all(|l| cfg.nodes_with_label(l).is_empty())
        }
    }
}

/// Renders a human-readable report: one block per rule, ordered by rule id,
/// closing with a satisfied/violated/inapplicable tally.
pub fn explain(rules: &[Rule], verdicts: &[Verdict], model: &ProcessModel) -> String {
    let mut ordered: Vec<&Verdict> = verdicts.iter().collect();
    ordered.sort_by(|a, b| cmp_rule_ids(&a.rule_id, &b.rule_id));

    let mut out = String::new();
    for verdict in &ordered {
        let rule = rules.iter().find(|r| r.id == verdict.rule_id);
        out.push_str(&format!("rule {}: {}\n", verdict.rule_id, verdict.status));
        if let Some(rule) = rule {
            if !rule.description.is_empty() {
                out.push_str(&format!("  {}\n", rule.description));
            }
            out.push_str(&format!("  constraint: {}\n", rule.body.describe()));
        }
        if let Some(evidence) = &verdict.evidence {
            out.push_str(&render_evidence(evidence, model));
        }
    }

    if verdicts.is_empty() {
        out.push_str("0 rules evaluated\n");
    } else {
        let count = |s: VerdictStatus| ordered.iter().filter(|v| v.status == s).count();
        out.push_str(&format!(
            "{} satisfied, {} violated, {} inapplicable\n",
            count(VerdictStatus::Satisfied),
            count(VerdictStatus::Violated),
            count(VerdictStatus::Inapplicable)
        ));
    }
    out
}

/// Renders a node as `lane:label` (kind in angle brackets when unlabeled).
fn render_node(model: &ProcessModel, id: &str) -> String {
    match model.node(id) {
        Some(node) => {
            let lane = node.lane.as_deref().unwrap_or("-");
            if node.label.is_empty() {
                format!("{lane}:<{}>", node.kind)
            } else {
                format!("{lane}:{}", node.label)
            }
        }
        None => id.to_string(),
    }
}

fn render_evidence(evidence: &Evidence, model: &ProcessModel) -> String {
    match evidence {
        Evidence::Path { nodes, note } => {
            let rendered: Vec<String> = nodes.iter().map(|n| render_node(model, n)).collect();
            format!("  evidence: {}\n    path: {}\n", note, rendered.join(" -> "))
        }
        Evidence::Lane { node, lane, expected } => format!(
            "  evidence: {} is in lane {}, expected \"{}\"\n",
            render_node(model, node),
            lane.as_deref().map(|l| format!("\"{l}\"")).unwrap_or_else(|| "<none>".into()),
            expected
        ),
        Evidence::ForkWitness { fork, branch_a, branch_b } => format!(
            "  witness: fork {} branches {} and {}\n",
            fork, branch_a, branch_b
        ),
        Evidence::BranchEdge { decision, guard, target } => format!(
            "  witness: branch `{}` of {} leads to {}\n",
            guard,
            render_node(model, decision),
            render_node(model, target)
        ),
        Evidence::UnreachedAfterBranch { decision, guard, label } => format!(
            "  evidence: no \"{}\" reachable from the `{}` branch of {} without re-passing the decision\n",
            label,
            guard,
            render_node(model, decision)
        ),
        Evidence::NoFork { label_a, label_b } => format!(
            "  evidence: no fork places \"{}\" and \"{}\" in distinct branches\n",
            label_a, label_b
        ),
        Evidence::NoGuardedBranch { decision_label, guard } => format!(
            "  evidence: no decision labeled \"{}\" has a `{}` branch\n",
            decision_label, guard
        ),
        Evidence::UnresolvedLabels { labels } => {
            let quoted: Vec<String> = labels.iter().map(|l| format!("\"{l}\"")).collect();
            format!("  unresolved: {}\n", quoted.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lower_to_model;
    use crate::parser::parse_activity_diagram;
    use crate::rules::parse_rules;

    fn model_of(text: &str) -> ProcessModel {
        lower_to_model(&parse_activity_diagram(text, "test").unwrap()).unwrap()
    }

    fn rule(line: &str) -> Rule {
        parse_rules(line).unwrap().remove(0)
    }

    const DIAMOND: &str = "@startuml\nstart\nif (x?) then (yes)\n:Left;\nelse (no)\n:Right;\nendif\n:Post;\nstop\n@enduml";

    #[test]
    fn before_violated_via_the_other_branch() {
        let model = model_of(DIAMOND);
        // The right-branch path misses "Left", so "Post" can occur without it.
        let verdicts = evaluate(&[rule("rule 1 : before(\"Left\",\"Post\")")], &model);
        assert_eq!(verdicts[0].status, VerdictStatus::Violated);
        assert!(replay_evidence(
            verdicts[0].evidence.as_ref().unwrap(),
            &model
        ));
    }

    #[test]
    fn before_satisfied_on_a_chain() {
        let model = model_of("@startuml\nstart\n:A;\n:B;\nstop\n@enduml");
        let verdicts = evaluate(&[rule("rule 1 : before(\"A\",\"B\")")], &model);
        assert_eq!(verdicts[0].status, VerdictStatus::Satisfied);
    }

    #[test]
    fn unknown_label_is_inapplicable_not_violated() {
        let model = model_of("@startuml\nstart\n:Develop CPU Core IP;\nstop\n@enduml");
        let verdicts = evaluate(
            &[rule(
                "rule 1 : before(\"Ghost Activity\",\"Develop CPU Core IP\")",
            )],
            &model,
        );
        assert_eq!(verdicts[0].status, VerdictStatus::Inapplicable);
        match verdicts[0].evidence.as_ref().unwrap() {
            Evidence::UnresolvedLabels { labels } => assert_eq!(labels, &["Ghost Activity"]),
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn after_is_the_dual_of_before() {
        let model = model_of(DIAMOND);
        for (a, b) in [("Left", "Post"), ("Post", "Left"), ("Left", "Right")] {
            let after = evaluate(&[rule(&format!("rule 1 : after(\"{a}\",\"{b}\")"))], &model);
            let before = evaluate(
                &[rule(&format!("rule 1 : before(\"{b}\",\"{a}\")"))],
                &model,
            );
            assert_eq!(after[0].status, before[0].status, "after({a},{b})");
        }
    }

    #[test]
    fn role_checks_every_occurrence() {
        let model = model_of("@startuml\n|Lab|\nstart\n:Test;\n|Field|\n:Test;\nstop\n@enduml");
        let verdicts = evaluate(&[rule("rule 1 : role(\"Lab\",\"Test\")")], &model);
        assert_eq!(verdicts[0].status, VerdictStatus::Violated);
        match verdicts[0].evidence.as_ref().unwrap() {
            Evidence::Lane { lane, .. } => assert_eq!(lane.as_deref(), Some("Field")),
            other => panic!("unexpected evidence {other:?}"),
        }
        assert!(replay_evidence(
            verdicts[0].evidence.as_ref().unwrap(),
            &model
        ));
    }

    #[test]
    fn parallel_needs_distinct_branches() {
        let forked =
            model_of("@startuml\nstart\nfork\n:A;\nfork again\n:B;\nend fork\nstop\n@enduml");
        let verdicts = evaluate(&[rule("rule 1 : parallel(\"A\",\"B\")")], &forked);
        assert_eq!(verdicts[0].status, VerdictStatus::Satisfied);
        assert!(matches!(
            verdicts[0].evidence,
            Some(Evidence::ForkWitness { .. })
        ));

        let sequential = model_of("@startuml\nstart\n:A;\n:B;\nstop\n@enduml");
        let verdicts = evaluate(&[rule("rule 1 : parallel(\"A\",\"B\")")], &sequential);
        assert_eq!(verdicts[0].status, VerdictStatus::Violated);
        assert!(replay_evidence(
            verdicts[0].evidence.as_ref().unwrap(),
            &model_of("@startuml\nstart\n:A;\n:B;\nstop\n@enduml")
        ));
    }

    const GATED: &str =
        "@startuml\nstart\nrepeat\n:Rework;\nrepeat while (ok?) is (yes)\n:Ship;\nstop\n@enduml";

    #[test]
    fn after_true_and_after_false_on_a_loop() {
        let model = model_of(GATED);
        let verdicts = evaluate(
            &[
                rule("rule t : after_true(\"Ship\",\"ok\")"),
                rule("rule f : after_false(\"Rework\",\"ok\")"),
            ],
            &model,
        );
        assert!(
            verdicts
                .iter()
                .all(|v| v.status == VerdictStatus::Satisfied),
            "{verdicts:?}"
        );
    }

    #[test]
    fn after_true_violated_when_gated_activity_is_on_false_branch() {
        // Ship follows the false branch here: exit guard is "no".
        let model = model_of(
            "@startuml\nstart\nrepeat\n:Rework;\nrepeat while (ok?) is (no)\n:Ship;\nstop\n@enduml",
        );
        let verdicts = evaluate(&[rule("rule t : after_true(\"Ship\",\"ok\")")], &model);
        assert_eq!(verdicts[0].status, VerdictStatus::Violated);
        assert!(replay_evidence(
            verdicts[0].evidence.as_ref().unwrap(),
            &model
        ));
    }

    #[test]
    fn after_true_inapplicable_without_yes_branch() {
        let model = model_of(
            "@startuml\nstart\nif (mode?) then (fast)\n:A;\nelse (slow)\n:B;\nendif\nstop\n@enduml",
        );
        let verdicts = evaluate(&[rule("rule t : after_true(\"A\",\"mode\")")], &model);
        assert_eq!(verdicts[0].status, VerdictStatus::Inapplicable);
    }

    #[test]
    fn path_oracle_agrees_on_small_cases() {
        for text in [DIAMOND, GATED, "@startuml\nstart\n:A;\n:B;\nstop\n@enduml"] {
            let model = model_of(text);
            let rules: Vec<Rule> = [
                "rule 1 : before(\"A\",\"B\")",
                "rule 2 : before(\"Left\",\"Post\")",
                "rule 3 : after(\"Post\",\"Right\")",
                "rule 4 : not_before(\"B\",\"A\")",
                "rule 5 : after_true(\"Ship\",\"ok\")",
            ]
            .iter()
            .map(|l| rule(l))
            .collect();
            let by_reach = evaluate(&rules, &model);
            let by_paths = evaluate_by_paths(&rules, &model, 2).unwrap();
            for (r, p) in by_reach.iter().zip(by_paths.iter()) {
                assert_eq!(r.rule_id, p.rule_id);
                assert_eq!(r.status, p.status, "rule {} on {text}", r.rule_id);
            }
        }
    }

    #[test]
    fn oracle_rejects_budget_below_two() {
        let model = model_of(DIAMOND);
        assert!(matches!(
            evaluate_by_paths(&[], &model, 1),
            Err(PathOracleError::InvalidBudget { given: 1 })
        ));
    }

    #[test]
    fn oracle_reports_budget_inconclusive_verdicts() {
        // An exitless cycle A -> B -> A beside a straight C -> stop lane.
        // Every path through B truncates, so before("C","B") is violated in
        // the all-paths view but satisfied over complete paths alone: the
        // oracle must refuse to answer rather than guess.
        use crate::model::{Edge, Node, NodeKind, ProcessModel};
        let node = |id: &str, kind: NodeKind, label: &str| Node {
            id: id.into(),
            kind,
            label: label.into(),
            lane: None,
        };
        let edge = |from: &str, to: &str| Edge {
            from: from.into(),
            to: to.into(),
            guard: None,
        };
        let model = ProcessModel {
            participants: vec![],
            nodes: vec![
                node("n1", NodeKind::Start, ""),
                node("n2", NodeKind::Activity, "A"),
                node("n3", NodeKind::Activity, "B"),
                node("n4", NodeKind::Activity, "C"),
                node("n5", NodeKind::Stop, ""),
            ],
            edges: vec![
                edge("n1", "n2"),
                edge("n2", "n3"),
                edge("n3", "n2"),
                edge("n1", "n4"),
                edge("n4", "n5"),
            ],
            artifacts: vec![],
        };
        model.validate().unwrap();

        let rules = vec![rule("rule 1 : before(\"C\",\"B\")")];
        // The reachability engine sees the violation outright.
        assert_eq!(evaluate(&rules, &model)[0].status, VerdictStatus::Violated);
        // The path oracle cannot conclude at budget 2.
        match evaluate_by_paths(&rules, &model, 2) {
            Err(PathOracleError::BudgetInconclusive { rule_ids }) => {
                assert_eq!(rule_ids, vec!["1".to_string()]);
            }
            other => panic!("expected budget-inconclusive, got {other:?}"),
        }
    }

    #[test]
    fn explain_report_footer_and_phrasing() {
        let model = model_of("@startuml\nstart\n:B;\n:A;\nstop\n@enduml");
        let rules = vec![rule("rule 14 \"Safety\" : not_before(\"A\",\"B\")")];
        // A occurs after B here, so "A must not occur before B" is satisfied;
        // flip the labels for a violation.
        let violated_rules = vec![rule("rule 14 \"Safety\" : not_before(\"B\",\"A\")")];
        let verdicts = evaluate(&violated_rules, &model);
        let report = explain(&violated_rules, &verdicts, &model);
        assert!(report.contains("must not occur before"), "{report}");
        assert!(
            report.contains("0 satisfied, 1 violated, 0 inapplicable"),
            "{report}"
        );

        let verdicts = evaluate(&rules, &model);
        let report = explain(&rules, &verdicts, &model);
        assert!(
            report.contains("1 satisfied, 0 violated, 0 inapplicable"),
            "{report}"
        );

        let empty = explain(&[], &[], &model);
        assert!(empty.contains("0 rules evaluated"), "{empty}");
    }

    #[test]
    fn every_rule_yields_exactly_one_verdict() {
        let model = model_of(DIAMOND);
        let rules: Vec<Rule> = parse_rules(
            "rule 1 : before(\"Left\",\"Post\")\nrule 2 : role(\"R\",\"Nope\")\nrule 3 : parallel(\"Left\",\"Right\")",
        )
        .unwrap();
        let verdicts = evaluate(&rules, &model);
        assert_eq!(verdicts.len(), rules.len());
        // Inapplicable and violated never coexist for one rule: one status each.
        for v in &verdicts {
            match v.status {
                VerdictStatus::Inapplicable => {
                    assert!(matches!(
                        v.evidence,
                        Some(Evidence::UnresolvedLabels { .. })
                            | Some(Evidence::NoGuardedBranch { .. })
                    ))
                }
                VerdictStatus::Violated => assert!(v.evidence.is_some()),
                VerdictStatus::Satisfied => {}
            }
        }
    }
}
