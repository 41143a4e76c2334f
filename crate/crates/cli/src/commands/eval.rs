//! `eval` subcommands: score extractions against ground truth and render
//! the results table.

use std::path::Path;

use chainscope_core::eval::{
    graph_surplus, match_graph, match_process, score_queries, summarize, GraphTruth, MatchReport,
    ProcessTruth,
};
use chainscope_core::kg::{brute_force_match, execute, ingest_script, parse_query, PropertyGraph};
use chainscope_core::rules::parse_rules;

use crate::util::{load_model, read_file, CliError, Format};

fn load_graph(path: &Path) -> Result<PropertyGraph, CliError> {
    ingest_script(&read_file(path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// `node :: key` lines, `#` comments.
fn load_attr_pairs(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    read_file(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_once("::")
                .map(|(node, key)| (node.trim().to_string(), key.trim().to_string()))
                .ok_or_else(|| {
                    CliError::Parse(format!(
                        "{}: expected `node :: key`, got `{l}`",
                        path.display()
                    ))
                })
        })
        .collect()
}

fn graph_truth(
    truth: &Path,
    attrs: Option<&Path>,
) -> Result<(PropertyGraph, GraphTruth), CliError> {
    let graph = load_graph(truth)?;
    let mut derived = GraphTruth::of_graph(&graph);
    if let Some(path) = attrs {
        derived = derived.with_attributes(&load_attr_pairs(path)?);
    }
    Ok((graph, derived))
}

fn emit(reports: &[MatchReport], format: Format, extras: &[String]) -> Result<(), CliError> {
    match format {
        Format::Text => {
            for report in reports {
                println!(
                    "{}: {}/{} ({}%)",
                    report.aspect, report.matched, report.total, report.percent
                );
            }
            for line in extras {
                println!("{line}");
            }
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string(reports).expect("reports serialize")
            );
        }
    }
    Ok(())
}

pub fn graph(
    truth: &Path,
    attrs: Option<&Path>,
    extracted: &Path,
    format: Format,
) -> Result<u8, CliError> {
    let (_, truth) = graph_truth(truth, attrs)?;
    let extracted = load_graph(extracted)?;
    let reports = match_graph(&extracted, &truth).map_err(|e| CliError::Parse(e.to_string()))?;
    let surplus = graph_surplus(&extracted, &truth);
    emit(
        &reports,
        format,
        &[format!(
            "surplus concepts (informational, unscored): {surplus}"
        )],
    )?;
    Ok(0)
}

pub fn process(
    truth_model: &Path,
    truth_rules: &Path,
    extracted_model: &Path,
    extracted_rules: &Path,
    format: Format,
) -> Result<u8, CliError> {
    let truth = ProcessTruth::of_model(
        &load_model(truth_model)?,
        &parse_rules(&read_file(truth_rules)?)
            .map_err(|e| CliError::Parse(format!("{}: {e}", truth_rules.display())))?,
    );
    let model = load_model(extracted_model)?;
    let rules = parse_rules(&read_file(extracted_rules)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", extracted_rules.display())))?;
    let reports =
        match_process(&model, &rules, &truth).map_err(|e| CliError::Parse(e.to_string()))?;
    emit(&reports, format, &[])?;
    Ok(0)
}

/// Executes each candidate with the query engine and compares its table to
/// the brute-force oracle's table for the aligned reference query. A
/// candidate that fails to parse or execute is simply unmatched.
fn score_query_files(
    graph: &PropertyGraph,
    candidates: &Path,
    reference: &Path,
) -> Result<MatchReport, CliError> {
    let load_lines = |path: &Path| -> Result<Vec<String>, CliError> {
        Ok(read_file(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect())
    };
    let candidate_lines = load_lines(candidates)?;
    let reference_lines = load_lines(reference)?;
    if candidate_lines.len() != reference_lines.len() {
        return Err(CliError::Usage(format!(
            "{} candidates vs {} reference queries; the files must align line by line",
            candidate_lines.len(),
            reference_lines.len()
        )));
    }

    let mut pairs = Vec::new();
    for (candidate, reference) in candidate_lines.iter().zip(&reference_lines) {
        let oracle = parse_query(reference)
            .map_err(|e| CliError::Parse(format!("reference query `{reference}`: {e}")))?;
        let oracle_table = brute_force_match(&oracle, graph);
        let candidate_table = parse_query(candidate)
            .ok()
            .and_then(|q| execute(&q, graph).ok());
        pairs.push((candidate_table, oracle_table));
    }
    score_queries(&pairs).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn queries(
    graph_path: &Path,
    candidates: &Path,
    reference: &Path,
    format: Format,
) -> Result<u8, CliError> {
    let graph = load_graph(graph_path)?;
    let report = score_query_files(&graph, candidates, reference)?;
    let mismatch = report.matched < report.total;
    emit(std::slice::from_ref(&report), format, &[])?;
    Ok(if mismatch { 1 } else { 0 })
}

/// Runs every aspect over the bundled fixture layout:
///
/// ```text
/// <fixtures>/kg_reference.cypher
/// <fixtures>/eval/truth_attrs.txt
/// <fixtures>/eval/truth_model.json      (or a diagram)
/// <fixtures>/eval/truth_rules.rules
/// <fixtures>/eval/extracted_graph.cypher
/// <fixtures>/eval/extracted_model.json  (or a diagram)
/// <fixtures>/eval/extracted_rules.rules
/// <fixtures>/eval/queries_reference.txt
/// <fixtures>/eval/queries_candidates.txt
/// ```
pub fn all(fixtures: &Path, format: Format) -> Result<u8, CliError> {
    let eval_dir = fixtures.join("eval");
    let (reference_graph, truth) = graph_truth(
        &fixtures.join("kg_reference.cypher"),
        Some(&eval_dir.join("truth_attrs.txt")),
    )?;

    let mut reports = Vec::new();
    let extracted = load_graph(&eval_dir.join("extracted_graph.cypher"))?;
    reports.extend(match_graph(&extracted, &truth).map_err(|e| CliError::Parse(e.to_string()))?);

    let process_truth = ProcessTruth::of_model(
        &load_model(&eval_dir.join("truth_model.json"))?,
        &parse_rules(&read_file(&eval_dir.join("truth_rules.rules"))?)
            .map_err(|e| CliError::Parse(e.to_string()))?,
    );
    let extracted_model = load_model(&eval_dir.join("extracted_model.json"))?;
    let extracted_rules = parse_rules(&read_file(&eval_dir.join("extracted_rules.rules"))?)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    reports.extend(
        match_process(&extracted_model, &extracted_rules, &process_truth)
            .map_err(|e| CliError::Parse(e.to_string()))?,
    );

    let query_report = score_query_files(
        &reference_graph,
        &eval_dir.join("queries_candidates.txt"),
        &eval_dir.join("queries_reference.txt"),
    )?;
    let mismatch = query_report.matched < query_report.total;
    reports.push(query_report);

    match format {
        Format::Text => print!("{}", summarize(&reports)),
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string(&reports).expect("reports serialize")
            );
        }
    }
    Ok(if mismatch { 1 } else { 0 })
}
