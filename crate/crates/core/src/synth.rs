//! Deterministic generators for synthetic diagrams, models, graphs and
//! queries. These back the oracle-equivalence campaigns: everything is
//! seeded, so failures reproduce exactly.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::ast::{DiagramAst, Element};
use crate::kg::{NodeData, PropertyGraph, Value};
use crate::model::{lower_to_model, ProcessModel};
use crate::rules::{Rule, RuleBody};

/// Shape parameters for random structural diagrams.
#[derive(Debug, Clone)]
pub struct DiagramGenConfig {
    /// Maximum lowered node count (start and stop included).
    pub max_nodes: usize,
    pub allow_fork: bool,
    pub allow_repeat: bool,
    /// Activity label alphabet; repetition is intentional.
    pub labels: Vec<String>,
    pub lanes: Vec<String>,
}

impl Default for DiagramGenConfig {
    fn default() -> Self {
        DiagramGenConfig {
            max_nodes: 8,
            allow_fork: true,
            allow_repeat: true,
            labels: ["A", "B", "C", "D"].map(String::from).to_vec(),
            lanes: ["L1", "L2", "L3"].map(String::from).to_vec(),
        }
    }
}

/// Generates a well-formed diagram whose lowering has at most
/// `config.max_nodes` nodes. Deterministic in the seed.
pub fn random_diagram(seed: u64, config: &DiagramGenConfig) -> DiagramAst {
    let mut rng = StdRng::seed_from_u64(seed);
    // Budget excludes start and stop.
    let mut budget = config.max_nodes.saturating_sub(2).max(1);
    let mut elements = vec![Element::StartMarker];
    if !config.lanes.is_empty() && rng.gen_bool(0.5) {
        elements.push(lane_switch(&mut rng, config));
    }
    let mut body = gen_body(&mut rng, config, &mut budget, true);
    elements.append(&mut body);
    elements.push(Element::StopMarker);
    DiagramAst {
        elements,
        source_name: format!("synth-{seed}"),
    }
}

/// Random diagram lowered to a model with at most `config.max_nodes` nodes.
/// The generator's budget is a close estimate; oversized draws re-roll
/// deterministically.
pub fn random_model(seed: u64, config: &DiagramGenConfig) -> ProcessModel {
    let mut attempt = seed;
    loop {
        let ast = random_diagram(attempt, config);
        let model = lower_to_model(&ast).expect("generated diagrams always lower");
        if model.nodes.len() <= config.max_nodes {
            return model;
        }
        attempt = attempt
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
    }
}

fn lane_switch(rng: &mut StdRng, config: &DiagramGenConfig) -> Element {
    let lane = config.lanes[rng.gen_range(0..config.lanes.len())].clone();
    Element::LaneSwitch { lane }
}

fn activity(rng: &mut StdRng, config: &DiagramGenConfig) -> Element {
    let label = config.labels[rng.gen_range(0..config.labels.len())].clone();
    Element::Activity { label }
}

/// Emits a body, decrementing `budget` by the lowered node cost of each
/// element. `top_level` guards repeat generation so loop bodies stay simple.
fn gen_body(
    rng: &mut StdRng,
    config: &DiagramGenConfig,
    budget: &mut usize,
    top_level: bool,
) -> Vec<Element> {
    let mut out = Vec::new();
    let items = rng.gen_range(1..=3);
    for _ in 0..items {
        if *budget == 0 {
            break;
        }
        if !config.lanes.is_empty() && rng.gen_bool(0.2) {
            out.push(lane_switch(rng, config));
        }
        let choice = rng.gen_range(0..100);
        if choice < 55 || *budget < 3 {
            *budget -= 1;
            out.push(activity(rng, config));
            if rng.gen_bool(0.15) {
                out.push(Element::Note {
                    text: format!("produces: Artifact{}", rng.gen_range(0..5)),
                });
            }
        } else if choice < 75 {
            // if/else: decision + merge cost 2.
            *budget -= 2;
            let then_body = gen_body(rng, config, budget, false);
            let else_body = if rng.gen_bool(0.6) {
                Some(gen_body(rng, config, budget, false))
            } else {
                None
            };
            out.push(Element::IfBlock {
                condition: format!("c{}?", rng.gen_range(0..3)),
                then_label: "yes".into(),
                else_label: else_body.as_ref().map(|_| "no".to_string()),
                then_body,
                else_body,
            });
        } else if config.allow_fork && (choice < 90 || !config.allow_repeat) && *budget >= 2 {
            // fork + join cost 2.
            *budget -= 2;
            let branches = vec![
                gen_body(rng, config, budget, false),
                gen_body(rng, config, budget, false),
            ];
            out.push(Element::ForkBlock { branches });
        } else if config.allow_repeat && top_level && *budget >= 2 {
            // decision cost 1, body at least one activity.
            *budget -= 2;
            let mut body = vec![activity(rng, config)];
            if *budget > 0 && rng.gen_bool(0.4) {
                *budget -= 1;
                body.push(activity(rng, config));
            }
            out.push(Element::RepeatBlock {
                body,
                while_condition: format!("more{}?", rng.gen_range(0..2)),
                exit_label: if rng.gen_bool(0.5) {
                    Some("yes".into())
                } else {
                    None
                },
            });
        } else if *budget >= 1 {
            *budget -= 1;
            out.push(activity(rng, config));
        }
    }
    if out
        .iter()
        .all(|e| matches!(e, Element::LaneSwitch { .. } | Element::Note { .. }))
    {
        // Bodies must lower to at least something when used as repeat bodies;
        // keep a plain activity as a floor.
        if *budget > 0 {
            *budget -= 1;
        }
        out.push(activity(rng, config));
    }
    out
}

/// Random ordering rules (before/after/not_before) over the given label
/// alphabet. Labels outside the model are legal and exercise inapplicability.
pub fn random_order_rules(seed: u64, labels: &[String], count: usize) -> Vec<Rule> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rules = Vec::new();
    for i in 0..count {
        let a = labels[rng.gen_range(0..labels.len())].clone();
        let mut b = labels[rng.gen_range(0..labels.len())].clone();
        if a == b {
            b = labels[(labels.iter().position(|l| *l == a).unwrap() + 1) % labels.len()].clone();
        }
        let body = match rng.gen_range(0..3) {
            0 => RuleBody::Before { a, b },
            1 => RuleBody::After { a, b },
            _ => RuleBody::NotBefore { a, b },
        };
        rules.push(Rule {
            id: format!("{}", i + 1),
            description: String::new(),
            body,
        });
    }
    rules
}

/// Every acyclic structural model with at most `max_nodes` lowered nodes:
/// sequences of activities (labels A/B), if/else blocks and two-branch
/// forks, recursively.
pub fn exhaustive_acyclic_models(max_nodes: usize) -> Vec<ProcessModel> {
    let budget = max_nodes.saturating_sub(2);
    let mut models = Vec::new();
    for body in enumerate_bodies(budget) {
        let mut elements = vec![Element::StartMarker];
        elements.extend(body);
        elements.push(Element::StopMarker);
        let ast = DiagramAst {
            elements,
            source_name: "exhaustive".into(),
        };
        models.push(lower_to_model(&ast).expect("enumerated diagrams lower"));
    }
    models
}

/// All bodies with lowered node cost at most `budget`.
fn enumerate_bodies(budget: usize) -> Vec<Vec<Element>> {
    let mut out = vec![Vec::new()];
    for (item, cost) in enumerate_items(budget) {
        for rest in enumerate_bodies(budget - cost) {
            let mut body = vec![item.clone()];
            body.extend(rest);
            out.push(body);
        }
    }
    out
}

/// All single elements with lowered node cost at most `budget`, paired with
/// their exact cost.
fn enumerate_items(budget: usize) -> Vec<(Element, usize)> {
    let mut out = Vec::new();
    if budget >= 1 {
        for label in ["A", "B"] {
            out.push((
                Element::Activity {
                    label: label.into(),
                },
                1,
            ));
        }
    }
    if budget >= 2 {
        let inner = budget - 2;
        // if without else
        for (then_body, then_cost) in bodies_with_cost(inner) {
            out.push((
                Element::IfBlock {
                    condition: "c?".into(),
                    then_label: "yes".into(),
                    then_body: then_body.clone(),
                    else_label: None,
                    else_body: None,
                },
                2 + then_cost,
            ));
        }
        // if with else, and forks: all two-way splits of the inner budget
        for (then_body, then_cost) in bodies_with_cost(inner) {
            for (else_body, else_cost) in bodies_with_cost(inner - then_cost) {
                out.push((
                    Element::IfBlock {
                        condition: "c?".into(),
                        then_label: "yes".into(),
                        then_body: then_body.clone(),
                        else_label: Some("no".into()),
                        else_body: Some(else_body.clone()),
                    },
                    2 + then_cost + else_cost,
                ));
                out.push((
                    Element::ForkBlock {
                        branches: vec![then_body.clone(), else_body.clone()],
                    },
                    2 + then_cost + else_cost,
                ));
            }
        }
    }
    out
}

fn bodies_with_cost(budget: usize) -> Vec<(Vec<Element>, usize)> {
    enumerate_bodies(budget)
        .into_iter()
        .map(|body| {
            let cost = body_cost(&body);
            (body, cost)
        })
        .collect()
}

fn body_cost(body: &[Element]) -> usize {
    body.iter()
        .map(|e| match e {
            Element::Activity { .. } => 1,
            Element::IfBlock {
                then_body,
                else_body,
                ..
            } => 2 + body_cost(then_body) + else_body.as_ref().map(|b| body_cost(b)).unwrap_or(0),
            Element::ForkBlock { branches } => {
                2 + branches.iter().map(|b| body_cost(b)).sum::<usize>()
            }
            Element::RepeatBlock { body, .. } => 1 + body_cost(body),
            _ => 0,
        })
        .sum()
}

/// Shape parameters for random property graphs.
#[derive(Debug, Clone)]
pub struct GraphGenConfig {
    pub max_nodes: usize,
    pub max_rels: usize,
}

impl Default for GraphGenConfig {
    fn default() -> Self {
        GraphGenConfig {
            max_nodes: 10,
            max_rels: 16,
        }
    }
}

const GEN_LABELS: [&str; 3] = ["Company", "Product", "Material"];
const GEN_TYPES: [&str; 3] = ["SUPPLIES", "DEPENDS_ON", "SHIPS_TO"];

/// Random property graph with short ids `m0..`, a few labels, `name`/`tier`
/// properties and typed relationships (self-loops and parallel edges
/// included occasionally).
pub fn random_property_graph(seed: u64, config: &GraphGenConfig) -> PropertyGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut graph = PropertyGraph::new();
    let node_count = rng.gen_range(1..=config.max_nodes.max(1));
    for i in 0..node_count {
        let mut data = NodeData::default();
        if rng.gen_bool(0.8) {
            data.labels
                .insert(GEN_LABELS[rng.gen_range(0..GEN_LABELS.len())].into());
        }
        data.props
            .insert("name".into(), Value::Text(format!("N{i}")));
        if rng.gen_bool(0.6) {
            data.props
                .insert("tier".into(), Value::Int(rng.gen_range(1..=3)));
        }
        if rng.gen_bool(0.2) {
            data.props
                .insert("active".into(), Value::Bool(rng.gen_bool(0.5)));
        }
        graph.add_node(format!("m{i}"), data);
    }
    let rel_count = rng.gen_range(0..=config.max_rels);
    for _ in 0..rel_count {
        let from = format!("m{}", rng.gen_range(0..node_count));
        let to = format!("m{}", rng.gen_range(0..node_count));
        let rel_type = GEN_TYPES[rng.gen_range(0..GEN_TYPES.len())];
        graph
            .add_rel(rel_type, &from, &to, Default::default())
            .unwrap();
    }
    graph
}

/// Random query text over the generator's label/type/property vocabulary.
/// Always parses; variables are always bound.
pub fn random_query_text(seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut text = String::from("MATCH (a");
    if rng.gen_bool(0.5) {
        text.push_str(&format!(
            ":{}",
            GEN_LABELS[rng.gen_range(0..GEN_LABELS.len())]
        ));
    }
    if rng.gen_bool(0.2) {
        text.push_str(&format!(" {{name: \"N{}\"}}", rng.gen_range(0..6)));
    }
    text.push(')');

    let hops = rng.gen_range(0..=2);
    let mut vars = vec!["a".to_string()];
    for h in 0..hops {
        let var = ["b", "c"][h];
        let typed = if rng.gen_bool(0.6) {
            format!(":{}", GEN_TYPES[rng.gen_range(0..GEN_TYPES.len())])
        } else {
            String::new()
        };
        let range = if rng.gen_bool(0.25) {
            ["*1..2", "*1..3", "*2..2"][rng.gen_range(0..3)].to_string()
        } else {
            String::new()
        };
        let left = rng.gen_bool(0.3);
        if left {
            text.push_str(&format!("<-[{typed}{range}]-"));
        } else {
            text.push_str(&format!("-[{typed}{range}]->"));
        }
        text.push_str(&format!("({var}"));
        if rng.gen_bool(0.4) {
            text.push_str(&format!(
                ":{}",
                GEN_LABELS[rng.gen_range(0..GEN_LABELS.len())]
            ));
        }
        text.push(')');
        vars.push(var.to_string());
    }

    if rng.gen_bool(0.35) {
        let var = &vars[rng.gen_range(0..vars.len())];
        let mut clause = random_cmp(&mut rng, var);
        if rng.gen_bool(0.3) {
            let var2 = &vars[rng.gen_range(0..vars.len())];
            let joiner = if rng.gen_bool(0.5) { "AND" } else { "OR" };
            clause = format!("{clause} {joiner} {}", random_cmp(&mut rng, var2));
        }
        text.push_str(&format!(" WHERE {clause}"));
    }

    let mut items = Vec::new();
    let first = &vars[rng.gen_range(0..vars.len())];
    items.push(match rng.gen_range(0..4) {
        0 => first.clone(),
        1 => format!("{first}.name"),
        2 => format!("{first}.tier"),
        _ => format!("count({first}.name)"),
    });
    if rng.gen_bool(0.4) {
        let second = &vars[rng.gen_range(0..vars.len())];
        let item = match rng.gen_range(0..3) {
            0 => second.clone(),
            1 => format!("{second}.name"),
            _ => format!("{second}.tier"),
        };
        if !items.contains(&item) {
            items.push(item);
        }
    }
    text.push_str(&format!(" RETURN {}", items.join(", ")));

    let orderable: Vec<&String> = items.iter().filter(|i| !i.starts_with("count(")).collect();
    if !orderable.is_empty() && rng.gen_bool(0.25) {
        let item = orderable[rng.gen_range(0..orderable.len())];
        text.push_str(&format!(" ORDER BY {item}"));
        if rng.gen_bool(0.5) {
            text.push_str(" DESC");
        }
    }
    if rng.gen_bool(0.25) {
        text.push_str(&format!(" LIMIT {}", rng.gen_range(1..=4)));
    }
    text
}

fn random_cmp(rng: &mut StdRng, var: &str) -> String {
    match rng.gen_range(0..4) {
        0 => format!("{var}.tier > {}", rng.gen_range(0..3)),
        1 => format!("{var}.tier < {}", rng.gen_range(1..=3)),
        2 => format!("{var}.name = \"N{}\"", rng.gen_range(0..6)),
        _ => format!("{var}.tier <> {}", rng.gen_range(1..=3)),
    }
}
