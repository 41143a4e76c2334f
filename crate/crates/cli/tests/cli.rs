//! End-to-end checks of the command-line surface: exit codes, output
//! determinism and the machine-parsable error prefix.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn chainscope() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chainscope"))
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    chainscope()
        .args(args)
        .env_remove("CHAINSCOPE_BASE_URL")
        .env_remove("CHAINSCOPE_MODEL")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn parse_reports_the_reference_shape() {
    let output = run(&["parse", &path(&fixtures().join("riscv_process.puml"))]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("8 lanes"), "{text}");
    assert!(text.contains("10 activities"), "{text}");
    assert!(text.contains("1 decisions"), "{text}");
}

#[test]
fn parse_failure_exits_2_with_prefixed_error() {
    let dir = std::env::temp_dir().join("chainscope-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("missing_enduml.puml");
    std::fs::write(&bad, "@startuml\nstart\n:A;\nstop\n").unwrap();

    let output = run(&["parse", &path(&bad)]);
    assert_eq!(output.status.code(), Some(2));
    let err = stderr(&output);
    assert!(err.starts_with("error[parse]:"), "{err}");
    assert!(err.contains("@enduml"), "{err}");
}

#[test]
fn validate_reference_process_is_all_satisfied() {
    let output = run(&[
        "validate",
        "--model",
        &path(&fixtures().join("riscv_process.puml")),
        "--rules",
        &path(&fixtures().join("riscv_rules.rules")),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("14 satisfied, 0 violated, 0 inapplicable"));
}

#[test]
fn validate_exits_1_on_violation() {
    let dir = std::env::temp_dir().join("chainscope-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let diagram = dir.join("reordered.puml");
    std::fs::write(
        &diagram,
        "@startuml\nstart\n:Package and Test;\n:Fabricate Silicon Wafers;\nstop\n@enduml\n",
    )
    .unwrap();
    let rules = dir.join("one.rules");
    std::fs::write(
        &rules,
        "rule 14 : not_before(\"Package and Test\",\"Fabricate Silicon Wafers\")\n",
    )
    .unwrap();

    let output = run(&[
        "validate",
        "--model",
        &path(&diagram),
        "--rules",
        &path(&rules),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("violated"));
}

#[test]
fn model_output_is_byte_identical_across_runs() {
    let file = path(&fixtures().join("riscv_process.puml"));
    let first = run(&["model", &file]);
    let second = run(&["model", &file]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    // And it is the committed fixture (modulo the trailing newline the CLI
    // adds when printing to stdout).
    let committed = std::fs::read(fixtures().join("eval/truth_model.json")).unwrap();
    assert_eq!(
        first.stdout.strip_suffix(b"\n").unwrap_or(&first.stdout),
        &committed[..]
    );
}

#[test]
fn model_json_feeds_validate() {
    // The canonical JSON emitted by `model` is accepted back by `validate`.
    let dir = std::env::temp_dir().join("chainscope-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("handoff_model.json");
    let model = run(&["model", &path(&fixtures().join("riscv_process.puml"))]);
    std::fs::write(&json, &model.stdout).unwrap();

    let output = run(&[
        "validate",
        "--model",
        &path(&json),
        "--rules",
        &path(&fixtures().join("riscv_rules.rules")),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("14 satisfied, 0 violated, 0 inapplicable"));
}

#[test]
fn kg_query_renders_a_table() {
    let output = run(&[
        "kg",
        "query",
        &path(&fixtures().join("kg_reference.cypher")),
        "--query",
        "MATCH (c:Foundry) RETURN c.name",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("c.name"));
    assert!(text.contains("TSMC"));
    assert!(text.contains("Samsung Electronics"));

    let json = run(&[
        "kg",
        "query",
        &path(&fixtures().join("kg_reference.cypher")),
        "--query",
        "MATCH (c:Foundry) RETURN c.name",
        "--format",
        "json",
    ]);
    let value: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(value["rows"][1][0], "TSMC");
}

#[test]
fn kg_export_round_trips() {
    let file = path(&fixtures().join("kg_reference.cypher"));
    let exported = run(&["kg", "export", &file]);
    assert!(exported.status.success());

    let dir = std::env::temp_dir().join("chainscope-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let rewritten = dir.join("kg_rewritten.cypher");
    std::fs::write(&rewritten, &exported.stdout).unwrap();
    let counts = run(&["kg", "ingest", &path(&rewritten), "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&counts.stdout).unwrap();
    assert_eq!(value["nodes"], 25);
    assert_eq!(value["relationships"], 23);
    assert_eq!(value["attributes"], 8);
}

#[test]
fn trace_lists_both_fabrication_routes() {
    let output = run(&[
        "trace",
        &path(&fixtures().join("kg_reference.cypher")),
        "--from",
        "design",
        "--to",
        "oem",
        "--max-len",
        "4",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("TSMC"));
    assert!(text.contains("Samsung Electronics"));
}

#[test]
fn eval_all_emits_the_results_table_and_flags_query_mismatches() {
    let output = run(&["eval", "all", "--fixtures", &path(&fixtures())]);
    // Five candidate queries mismatch by design, so the exit code reports it.
    assert_eq!(output.status.code(), Some(1));
    let table = stdout(&output);
    assert!(
        table.contains("Concepts") && table.contains("22 (88%)"),
        "{table}"
    );
    assert!(
        table.contains("Queries") && table.contains("15 (75%)"),
        "{table}"
    );
    assert!(
        table.contains("Rules") && table.contains("4 (80%)"),
        "{table}"
    );
}

#[test]
fn eval_graph_reports_surplus_informationally() {
    let output = run(&[
        "eval",
        "graph",
        "--truth",
        &path(&fixtures().join("kg_reference.cypher")),
        "--attrs",
        &path(&fixtures().join("eval/truth_attrs.txt")),
        "--extracted",
        &path(&fixtures().join("eval/extracted_graph.cypher")),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("concepts: 22/25 (88%)"), "{text}");
    assert!(
        text.contains("surplus concepts (informational, unscored): 0"),
        "{text}"
    );
}

#[test]
fn extract_without_endpoint_config_is_a_usage_error() {
    let dir = std::env::temp_dir().join("chainscope-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let description = dir.join("description.txt");
    std::fs::write(&description, "some text").unwrap();

    let output = run(&["extract", "process", "--description", &path(&description)]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).starts_with("error[usage]:"));
}

#[test]
fn extract_against_unreachable_endpoint_exits_3() {
    let dir = std::env::temp_dir().join("chainscope-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let description = dir.join("description.txt");
    std::fs::write(&description, "some text").unwrap();

    let output = chainscope()
        .args(["extract", "process", "--description", &path(&description)])
        .env("CHAINSCOPE_BASE_URL", "http://127.0.0.1:9/v1")
        .env("CHAINSCOPE_MODEL", "m")
        .env("CHAINSCOPE_TIMEOUT_SECS", "1")
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).starts_with("error[endpoint]:"));
}

#[test]
fn repl_nl_lines_route_through_the_endpoint() {
    // An unreachable endpoint: the nl: line reports an endpoint error, the
    // loop keeps going, and plain queries still work.
    let mut child = chainscope()
        .args(["repl", &path(&fixtures().join("kg_reference.cypher"))])
        .env("CHAINSCOPE_BASE_URL", "http://127.0.0.1:9/v1")
        .env("CHAINSCOPE_MODEL", "m")
        .env("CHAINSCOPE_TIMEOUT_SECS", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("repl starts");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"nl: which foundries exist?\nMATCH (f:Foundry) RETURN f.name\nexit\n")
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    assert!(
        stderr(&output).contains("error[endpoint]:"),
        "{}",
        stderr(&output)
    );
    assert!(stdout(&output).contains("TSMC"));
}

#[test]
fn eval_json_output_is_byte_identical_across_runs() {
    let args = [
        "eval",
        "all",
        "--fixtures",
        &path(&fixtures()),
        "--format",
        "json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    let reports: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 9);
}

#[test]
fn repl_executes_queries_line_by_line() {
    let mut child = chainscope()
        .args(["repl", &path(&fixtures().join("kg_reference.cypher"))])
        .env_remove("CHAINSCOPE_BASE_URL")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("repl starts");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"MATCH (c:Foundry) RETURN c.name\nnot a query\nexit\n")
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    assert!(stdout(&output).contains("TSMC"));
    // The bad line is reported and the loop continues.
    assert!(stderr(&output).contains("error[parse]:"));
}
