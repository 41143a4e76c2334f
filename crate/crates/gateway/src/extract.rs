//! Validated extraction loops.
//!
//! Every operation follows the same shape: render the prompt, call the
//! transport, validate the response with the deterministic parsers, and on
//! failure append the parser error as an additional user turn and retry,
//! up to `max_retries` extra attempts. No unparsed text ever crosses the
//! module boundary.

use std::time::Instant;

use chainscope_core::ast::{serialize_ast, DiagramAst};
use chainscope_core::kg::{export_script, ingest_script, parse_query, PropertyGraph, Query};
use chainscope_core::model::{lower_to_model, NodeKind, ProcessModel};
use chainscope_core::normalize_label;
use chainscope_core::parser::parse_activity_diagram;
use chainscope_core::rules::{parse_rules, Rule, RuleBody};
use chainscope_core::ParseError;

use crate::config::EndpointConfig;
use crate::error::GatewayError;
use crate::prompts::{
    render_prompt, Slots, EXAMPLE_GRAPH_MODEL, P1_PLANTUML, P2_RULES, P3_GRAPH, P4_QUERY,
};
use crate::transcript::{ParseOutcome, Transcript, TranscriptEntry};
use crate::transport::{ChatMessage, ChatRequest, ChatTransport};

/// A validated value together with the transcript that produced it.
#[derive(Debug, Clone)]
pub struct Extracted<T> {
    pub value: T,
    pub transcript: Transcript,
}

#[derive(Debug, Clone)]
pub struct ProcessExtraction {
    pub ast: DiagramAst,
    pub model: ProcessModel,
    pub transcript: Transcript,
}

#[derive(Debug, Clone)]
pub struct FormalizedRules {
    pub rules: Vec<Rule>,
    /// Labels the rules reference that resolve to nothing in the model.
    pub warnings: Vec<String>,
    pub transcript: Transcript,
}

#[derive(Debug, Clone)]
pub struct QueryGeneration {
    pub query: Query,
    /// The accepted query text as returned (fences stripped).
    pub text: String,
    pub transcript: Transcript,
}

/// Extracts a process model from a textual description (and optionally an
/// attached diagram image), updating `prior` when present.
pub fn extract_process(
    description: &str,
    image: Option<&[u8]>,
    prior: Option<&DiagramAst>,
    transport: &dyn ChatTransport,
    config: &EndpointConfig,
) -> Result<ProcessExtraction, GatewayError> {
    let mut slots = Slots::new()
        .set(
            "PlantUML activity diagram text",
            prior.map(serialize_ast).unwrap_or_default(),
        )
        .set("textual description", description);
    if let Some(bytes) = image {
        slots = slots.with_image(bytes.to_vec());
    }
    let (system, user) = render_prompt(&P1_PLANTUML, &slots)?;

    let (pair, transcript) =
        run_validated(transport, config, &system, &user, slots.image(), |text| {
            let ast = parse_activity_diagram(text, "extracted")?;
            let model =
                lower_to_model(&ast).map_err(|e| ParseError::new(1, 1, e.to_string(), ""))?;
            Ok((ast, model))
        })?;
    Ok(ProcessExtraction {
        ast: pair.0,
        model: pair.1,
        transcript,
    })
}

/// Extracts a knowledge graph from a textual description (and optionally an
/// attached diagram image), updating `prior` when present.
pub fn extract_graph(
    description: &str,
    image: Option<&[u8]>,
    prior: Option<&PropertyGraph>,
    transport: &dyn ChatTransport,
    config: &EndpointConfig,
) -> Result<Extracted<PropertyGraph>, GatewayError> {
    let mut slots = Slots::new()
        .set("example knowledge graph model", EXAMPLE_GRAPH_MODEL)
        .set(
            "Neo4j graph model",
            prior.map(export_script).unwrap_or_default(),
        )
        .set("textual description", description);
    if let Some(bytes) = image {
        slots = slots.with_image(bytes.to_vec());
    }
    let (system, user) = render_prompt(&P3_GRAPH, &slots)?;

    let (graph, transcript) =
        run_validated(transport, config, &system, &user, slots.image(), |text| {
            ingest_script(text)
        })?;
    Ok(Extracted {
        value: graph,
        transcript,
    })
}

/// Turns free-form rule text into parsed rules against the model's
/// vocabulary. Rules naming unknown labels parse with warnings; they are
/// never dropped.
pub fn formalize_rules(
    free_text: &str,
    model: &ProcessModel,
    transport: &dyn ChatTransport,
    config: &EndpointConfig,
) -> Result<FormalizedRules, GatewayError> {
    let slots = Slots::new().set("textual rules", free_text).set(
        "PlantUML activity diagram text",
        render_model_outline(model),
    );
    let (system, user) = render_prompt(&P2_RULES, &slots)?;

    let (rules, transcript) = run_validated(transport, config, &system, &user, None, parse_rules)?;
    let warnings = unresolved_labels(&rules, model);
    Ok(FormalizedRules {
        rules,
        warnings,
        transcript,
    })
}

/// Generates a query from analyst text against the graph's schema.
pub fn nl_to_query(
    user_text: &str,
    graph: &PropertyGraph,
    transport: &dyn ChatTransport,
    config: &EndpointConfig,
) -> Result<QueryGeneration, GatewayError> {
    let slots = Slots::new()
        .set("user text", user_text)
        .set("current graph schema", graph.schema_summary());
    let (system, user) = render_prompt(&P4_QUERY, &slots)?;

    let (pair, transcript) = run_validated(transport, config, &system, &user, None, |text| {
        parse_query(text).map(|q| (q, text.to_string()))
    })?;
    Ok(QueryGeneration {
        query: pair.0,
        text: pair.1,
        transcript,
    })
}

/// The retry loop. Calls the endpoint at most `max_retries + 1` times; each
/// failed validation appends the assistant turn and the parser error as a
/// user turn before retrying.
fn run_validated<T>(
    transport: &dyn ChatTransport,
    config: &EndpointConfig,
    system: &str,
    user: &str,
    image: Option<&[u8]>,
    validate: impl Fn(&str) -> Result<T, ParseError>,
) -> Result<(T, Transcript), GatewayError> {
    let mut messages = Vec::new();
    if !system.is_empty() {
        messages.push(ChatMessage::system(system));
    }
    match image {
        Some(bytes) => messages.push(ChatMessage::user_with_image(user, bytes)),
        None => messages.push(ChatMessage::user(user)),
    }

    let mut transcript = Transcript::default();
    let mut last_error: Option<ParseError> = None;
    for attempt in 0..=config.max_retries {
        let request = ChatRequest {
            model: config.model_name.clone(),
            messages: messages.clone(),
            temperature: config.temperature,
        };
        let started = Instant::now();
        let response = transport.complete(&request)?;
        let elapsed_ms = started.elapsed().as_millis();

        let cleaned = strip_code_fences(&response);
        match validate(cleaned) {
            Ok(value) => {
                transcript.push(TranscriptEntry {
                    attempt,
                    request,
                    response,
                    outcome: ParseOutcome::Ok,
                    elapsed_ms,
                });
                return Ok((value, transcript));
            }
            Err(error) => {
                transcript.push(TranscriptEntry {
                    attempt,
                    request,
                    response: response.clone(),
                    outcome: ParseOutcome::ParseError {
                        message: error.to_string(),
                    },
                    elapsed_ms,
                });
                messages.push(ChatMessage::assistant(response));
                messages.push(ChatMessage::user(error.to_string()));
                last_error = Some(error);
            }
        }
    }
    Err(GatewayError::ValidationFailed {
        attempts: config.max_retries + 1,
        last_error: last_error.expect("at least one attempt ran"),
        transcript: Box::new(transcript),
    })
}

/// Strips a single wrapping Markdown code fence, tolerating a language tag.
fn strip_code_fences(text: &str) -> &str {
    let trimmed = text.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let Some(body) = rest.split_once('\n').map(|(_, body)| body) else {
        return trimmed;
    };
    body.trim_end()
        .strip_suffix("```")
        .map(str::trim)
        .unwrap_or(trimmed)
}

/// Deterministic activity outline rendered into the rule prompt: lane
/// switches and one line per activity or decision, in node order.
fn render_model_outline(model: &ProcessModel) -> String {
    let mut out = String::new();
    let mut lane: Option<&str> = None;
    for node in &model.nodes {
        if !matches!(node.kind, NodeKind::Activity | NodeKind::Decision) {
            continue;
        }
        if node.lane.as_deref() != lane {
            if let Some(l) = node.lane.as_deref() {
                out.push_str(&format!("|{l}|\n"));
            }
            lane = node.lane.as_deref();
        }
        match node.kind {
            NodeKind::Decision => out.push_str(&format!("if ({}) then (yes)\n", node.label)),
            _ => out.push_str(&format!(":{};\n", node.label)),
        }
    }
    out
}

/// Labels referenced by rules that resolve to nothing in the model.
fn unresolved_labels(rules: &[Rule], model: &ProcessModel) -> Vec<String> {
    let activities: std::collections::BTreeSet<String> = model
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Activity | NodeKind::Decision))
        .map(|n| normalize_label(&n.label))
        .collect();
    let lanes: std::collections::BTreeSet<String> = model
        .participants
        .iter()
        .map(|p| normalize_label(p))
        .collect();

    let mut warnings = Vec::new();
    for rule in rules {
        let (labels, role): (Vec<&str>, Option<&str>) = match &rule.body {
            RuleBody::Before { a, b }
            | RuleBody::After { a, b }
            | RuleBody::NotBefore { a, b }
            | RuleBody::Parallel { a, b } => (vec![a, b], None),
            RuleBody::AfterTrue { a, d } | RuleBody::AfterFalse { a, d } => (vec![a, d], None),
            RuleBody::Role { role, a } => (vec![a], Some(role)),
        };
        for label in labels {
            if !activities.contains(&normalize_label(label)) {
                warnings.push(format!(
                    "rule {}: label \"{}\" does not match any activity in the model",
                    rule.id, label
                ));
            }
        }
        if let Some(role) = role {
            if !lanes.contains(&normalize_label(role)) {
                warnings.push(format!(
                    "rule {}: role \"{}\" does not match any participant in the model",
                    rule.id, role
                ));
            }
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::MockTransport;

    fn config(max_retries: usize) -> EndpointConfig {
        EndpointConfig {
            base_url: "http://mock".into(),
            model_name: "mock-model".into(),
            max_retries,
            ..Default::default()
        }
    }

    const GOOD_DIAGRAM: &str = "@startuml\n|Lane|\nstart\n:Do Work;\nstop\n@enduml";

    #[test]
    fn good_response_extracts_in_one_call() {
        let mock = MockTransport::new([GOOD_DIAGRAM]);
        let result = extract_process("desc", None, None, &mock, &config(3)).unwrap();
        assert_eq!(result.model.participants, vec!["Lane".to_string()]);
        assert_eq!(result.transcript.len(), 1);
        assert_eq!(mock.calls(), 1);
    }

    #[test]
    fn bad_then_good_succeeds_with_two_entries() {
        let mock = MockTransport::new(["not a diagram", GOOD_DIAGRAM]);
        let result = extract_process("desc", None, None, &mock, &config(3)).unwrap();
        assert_eq!(result.transcript.len(), 2);
        assert!(matches!(
            result.transcript.entries[0].outcome,
            ParseOutcome::ParseError { .. }
        ));
        assert!(matches!(
            result.transcript.entries[1].outcome,
            ParseOutcome::Ok
        ));
        // The retry carried the parser feedback as an extra user turn.
        assert_eq!(result.transcript.entries[1].request.messages.len(), 4);
        assert_eq!(mock.calls(), 2);
    }

    #[test]
    fn persistent_garbage_fails_after_max_retries_plus_one() {
        let mock = MockTransport::new(["x", "y", "z", "w", "never used"]);
        match extract_process("desc", None, None, &mock, &config(3)) {
            Err(GatewayError::ValidationFailed {
                attempts,
                transcript,
                ..
            }) => {
                assert_eq!(attempts, 4);
                assert_eq!(transcript.len(), 4);
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
        assert_eq!(mock.calls(), 4);
    }

    #[test]
    fn image_inputs_ride_on_the_request() {
        let mock = MockTransport::new([GOOD_DIAGRAM]);
        let png = [0x89u8, 0x50, 0x4e, 0x47];
        let result = extract_process("desc", Some(&png), None, &mock, &config(0)).unwrap();
        let request = serde_json::to_string(&result.transcript.entries[0].request).unwrap();
        assert!(request.contains("image_url"), "{request}");
        assert!(request.contains("base64"), "{request}");
    }

    #[test]
    fn code_fences_are_tolerated() {
        let fenced = format!("```plantuml\n{GOOD_DIAGRAM}\n```");
        let mock = MockTransport::new([fenced]);
        let result = extract_process("desc", None, None, &mock, &config(0)).unwrap();
        assert_eq!(result.transcript.len(), 1);
    }

    #[test]
    fn graph_extraction_retries_mirror_process() {
        let mock = MockTransport::new(["CREATE garbage (", "CREATE (a:Org {name: \"A\"})"]);
        let result = extract_graph("desc", None, None, &mock, &config(3)).unwrap();
        assert_eq!(result.value.node_count(), 1);
        assert_eq!(result.transcript.len(), 2);
    }

    #[test]
    fn rules_with_unknown_labels_warn_but_parse() {
        let ast = parse_activity_diagram(GOOD_DIAGRAM, "t").unwrap();
        let model = lower_to_model(&ast).unwrap();
        let mock = MockTransport::new([
            "rule 1 : before(\"Do Work\",\"Ghost Step\")\nrule 2 : role(\"Lane\",\"Do Work\")",
        ]);
        let result = formalize_rules("free text", &model, &mock, &config(0)).unwrap();
        assert_eq!(result.rules.len(), 2);
        assert_eq!(result.warnings.len(), 1);
        assert!(result.warnings[0].contains("Ghost Step"));
    }

    #[test]
    fn empty_rule_text_accepted() {
        let ast = parse_activity_diagram(GOOD_DIAGRAM, "t").unwrap();
        let model = lower_to_model(&ast).unwrap();
        let mock = MockTransport::new([""]);
        let result = formalize_rules("", &model, &mock, &config(0)).unwrap();
        assert!(result.rules.is_empty());
    }

    #[test]
    fn nl_query_renders_schema_and_validates() {
        let graph = ingest_script("CREATE (t:Company {name: \"TSMC\"})").unwrap();
        let mock = MockTransport::new(["MATCH (c:Company) RETURN c.name"]);
        let result = nl_to_query("list companies", &graph, &mock, &config(0)).unwrap();
        assert_eq!(result.query.return_items.len(), 1);
        // The rendered prompt carried the schema.
        let request = &result.transcript.entries[0].request;
        let user_turn = serde_json::to_string(&request.messages).unwrap();
        assert!(user_turn.contains("Company"));
    }

    #[test]
    fn invalid_queries_exhaust_retries() {
        let graph = ingest_script("CREATE (t:Company {name: \"TSMC\"})").unwrap();
        let mock = MockTransport::new(["nope", "still nope", "nah", "no"]);
        match nl_to_query("x", &graph, &mock, &config(3)) {
            Err(GatewayError::ValidationFailed { attempts, .. }) => assert_eq!(attempts, 4),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn transcripts_never_contain_the_api_key() {
        let mut cfg = config(0);
        cfg.api_key = "super-secret-key".into();
        let mock = MockTransport::new([GOOD_DIAGRAM]);
        let result = extract_process("desc", None, None, &mock, &cfg).unwrap();
        assert!(!result.transcript.to_jsonl().contains("super-secret-key"));
    }

    #[test]
    fn fixture_replay_reproduces_the_reference_model() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/riscv_process.puml"
        ))
        .unwrap();
        let mock = MockTransport::new([text.clone()]);
        let result =
            extract_process("supply chain description", None, None, &mock, &config(0)).unwrap();
        let expected =
            lower_to_model(&parse_activity_diagram(&text, "extracted").unwrap()).unwrap();
        assert_eq!(result.model, expected);
        assert_eq!(result.model.participants.len(), 8);
    }
}
