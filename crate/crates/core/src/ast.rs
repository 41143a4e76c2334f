//! Syntax tree for the supported activity-diagram subset and its canonical
//! serialization.
//!
//! The subset is line oriented: `start`, `stop`/`end`, `:label;` activities,
//! `|Lane|` swimlane switches, `if (cond) then (lbl) ... else (lbl) ... endif`,
//! `fork ... fork again ... end fork`, `repeat ... repeat while (cond) is (lbl)`
//! and one-line `note right:`/`note left:` notes attached to the preceding
//! activity. Labels are stored verbatim; nothing is normalized at parse time.

use serde::{Deserialize, Serialize};

/// Parsed activity diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramAst {
    pub elements: Vec<Element>,
    pub source_name: String,
}

/// One construct of the diagram subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Element {
    /// `|Lane|` swimlane switch; applies to everything that follows.
    LaneSwitch { lane: String },
    /// `:Label;`
    Activity { label: String },
    /// `start`
    StartMarker,
    /// `stop` or `end`
    StopMarker,
    /// `if (condition) then (then_label) ... [else [(else_label)] ...] endif`
    ///
    /// `else_body` is `Some` exactly when an `else` line was present; the
    /// label inside it is optional.
    IfBlock {
        condition: String,
        then_label: String,
        then_body: Vec<Element>,
        else_label: Option<String>,
        else_body: Option<Vec<Element>>,
    },
    /// `fork ... fork again ... end fork`; always at least two branches.
    ForkBlock { branches: Vec<Vec<Element>> },
    /// `repeat ... repeat while (while_condition) [is (exit_label)]`
    RepeatBlock {
        body: Vec<Element>,
        while_condition: String,
        exit_label: Option<String>,
    },
    /// `note right: text` / `note left: text`, bound to the nearest preceding
    /// activity in the same body.
    Note { text: String },
}

/// Emits the canonical text form: LF line endings, exactly one trailing
/// newline, two-space indentation per nesting level, one construct per line.
///
/// For every accepted input `t`, `parse(serialize(parse(t)))` is structurally
/// equal to `parse(t)`.
pub fn serialize_ast(ast: &DiagramAst) -> String {
    let mut out = String::from("@startuml\n");
    write_elements(&mut out, &ast.elements, 0);
    out.push_str("@enduml\n");
    out
}

fn write_elements(out: &mut String, elements: &[Element], depth: usize) {
    for element in elements {
        write_element(out, element, depth);
    }
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn write_element(out: &mut String, element: &Element, depth: usize) {
    match element {
        Element::LaneSwitch { lane } => line(out, depth, &format!("|{lane}|")),
        Element::Activity { label } => line(out, depth, &format!(":{label};")),
        Element::StartMarker => line(out, depth, "start"),
        Element::StopMarker => line(out, depth, "stop"),
        Element::Note { text } => line(out, depth, &format!("note right: {text}")),
        Element::IfBlock {
            condition,
            then_label,
            then_body,
            else_label,
            else_body,
        } => {
            line(out, depth, &format!("if ({condition}) then ({then_label})"));
            write_elements(out, then_body, depth + 1);
            if let Some(body) = else_body {
                match else_label {
                    Some(label) => line(out, depth, &format!("else ({label})")),
                    None => line(out, depth, "else"),
                }
                write_elements(out, body, depth + 1);
            }
            line(out, depth, "endif");
        }
        Element::ForkBlock { branches } => {
            line(out, depth, "fork");
            for (i, branch) in branches.iter().enumerate() {
                if i > 0 {
                    line(out, depth, "fork again");
                }
                write_elements(out, branch, depth + 1);
            }
            line(out, depth, "end fork");
        }
        Element::RepeatBlock {
            body,
            while_condition,
            exit_label,
        } => {
            line(out, depth, "repeat");
            write_elements(out, body, depth + 1);
            match exit_label {
                Some(label) => line(
                    out,
                    depth,
                    &format!("repeat while ({while_condition}) is ({label})"),
                ),
                None => line(out, depth, &format!("repeat while ({while_condition})")),
            }
        }
    }
}
