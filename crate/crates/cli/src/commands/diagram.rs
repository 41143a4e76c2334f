//! `parse`, `model` and `validate` subcommands.

use std::path::Path;

use chainscope_core::ast::Element;
use chainscope_core::engine::{evaluate, explain};
use chainscope_core::rules::{parse_rules, VerdictStatus};
use chainscope_core::{lower_to_model, parse_activity_diagram, to_canonical_json};

use crate::util::{load_model, read_file, write_output, CliError, Format};

/// Counts constructs for the parse summary.
fn walk(
    elements: &[Element],
    lanes: &mut std::collections::BTreeSet<String>,
    activities: &mut usize,
    decisions: &mut usize,
) {
    for e in elements {
        match e {
            Element::LaneSwitch { lane } => {
                lanes.insert(lane.clone());
            }
            Element::Activity { .. } => *activities += 1,
            Element::IfBlock {
                then_body,
                else_body,
                ..
            } => {
                *decisions += 1;
                walk(then_body, lanes, activities, decisions);
                if let Some(body) = else_body {
                    walk(body, lanes, activities, decisions);
                }
            }
            Element::ForkBlock { branches } => {
                for branch in branches {
                    walk(branch, lanes, activities, decisions);
                }
            }
            Element::RepeatBlock { body, .. } => {
                *decisions += 1;
                walk(body, lanes, activities, decisions);
            }
            _ => {}
        }
    }
}

pub fn parse(file: &Path, format: Format) -> Result<u8, CliError> {
    let text = read_file(file)?;
    let ast = parse_activity_diagram(&text, &file.display().to_string())
        .map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;

    let mut lanes = std::collections::BTreeSet::new();
    let (mut activities, mut decisions) = (0usize, 0usize);
    walk(&ast.elements, &mut lanes, &mut activities, &mut decisions);

    match format {
        Format::Text => {
            println!(
                "ok: {} top-level elements, {} lanes, {} activities, {} decisions",
                ast.elements.len(),
                lanes.len(),
                activities,
                decisions
            );
        }
        Format::Json => {
            let summary = serde_json::json!({
                "source": ast.source_name,
                "top_level_elements": ast.elements.len(),
                "lanes": lanes,
                "activities": activities,
                "decisions": decisions,
            });
            println!("{summary}");
        }
    }
    Ok(0)
}

pub fn model(file: &Path, output: Option<&Path>) -> Result<u8, CliError> {
    let text = read_file(file)?;
    let ast = parse_activity_diagram(&text, &file.display().to_string())
        .map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;
    let model =
        lower_to_model(&ast).map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;
    let bytes = to_canonical_json(&model);
    write_output(
        output,
        std::str::from_utf8(&bytes).expect("canonical JSON is UTF-8"),
    )?;
    Ok(0)
}

pub fn validate(model_path: &Path, rules_path: &Path, format: Format) -> Result<u8, CliError> {
    let model = load_model(model_path)?;
    let rules = parse_rules(&read_file(rules_path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", rules_path.display())))?;

    let verdicts = evaluate(&rules, &model);
    match format {
        Format::Text => print!("{}", explain(&rules, &verdicts, &model)),
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string(&verdicts).expect("verdicts serialize")
            );
        }
    }
    let violated = verdicts.iter().any(|v| v.status == VerdictStatus::Violated);
    Ok(if violated { 1 } else { 0 })
}
