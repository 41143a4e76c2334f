//! Ordering-constraint rules: the seven supported forms, their DSL, and the
//! verdict/evidence types produced by evaluation.
//!
//! DSL grammar, one rule per line (`#` starts a comment):
//!
//! ```text
//! rule <id> ["<description>"] : <form>
//! <form> := before("A","B") | after("A","B") | after_true("A","D")
//!         | after_false("A","D") | not_before("A","B") | role("R","A")
//!         | parallel("A","B")
//! ```

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::label::normalize_label;

/// One constraint over the process model's activity labels and lanes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub description: String,
    pub body: RuleBody,
}

/// The seven constraint forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RuleBody {
    /// Every occurrence of `b` is preceded by an occurrence of `a`.
    Before { a: String, b: String },
    /// `a` occurs only after `b`; identical to `Before(b, a)`.
    After { a: String, b: String },
    /// `a` follows the true branch of decision `d` and must not follow the
    /// false branch (before the decision is traversed again).
    AfterTrue { a: String, d: String },
    /// Symmetric to `AfterTrue`, gating on the false branch.
    AfterFalse { a: String, d: String },
    /// Prohibition phrasing of `Before(b, a)`: `a` must not occur before `b`.
    NotBefore { a: String, b: String },
    /// Every occurrence of activity `a` is performed in lane `role`.
    Role { role: String, a: String },
    /// Some fork places `a` and `b` in distinct branches.
    Parallel { a: String, b: String },
}

impl RuleBody {
    /// Key used when matching extracted rules against ground truth: the form
    /// plus normalized labels.
    pub fn normalized_key(&self) -> String {
        match self {
            RuleBody::Before { a, b } => {
                format!("before({},{})", normalize_label(a), normalize_label(b))
            }
            RuleBody::After { a, b } => {
                format!("after({},{})", normalize_label(a), normalize_label(b))
            }
            RuleBody::AfterTrue { a, d } => {
                format!("after_true({},{})", normalize_label(a), normalize_label(d))
            }
            RuleBody::AfterFalse { a, d } => {
                format!("after_false({},{})", normalize_label(a), normalize_label(d))
            }
            RuleBody::NotBefore { a, b } => {
                format!("not_before({},{})", normalize_label(a), normalize_label(b))
            }
            RuleBody::Role { role, a } => {
                format!("role({},{})", normalize_label(role), normalize_label(a))
            }
            RuleBody::Parallel { a, b } => {
                format!("parallel({},{})", normalize_label(a), normalize_label(b))
            }
        }
    }

    /// Human phrasing used in reports.
    pub fn describe(&self) -> String {
        match self {
            RuleBody::Before { a, b } => format!("\"{a}\" before \"{b}\""),
            RuleBody::After { a, b } => format!("\"{a}\" after \"{b}\""),
            RuleBody::AfterTrue { a, d } => format!("\"{a}\" after-true \"{d}\""),
            RuleBody::AfterFalse { a, d } => format!("\"{a}\" after-false \"{d}\""),
            RuleBody::NotBefore { a, b } => format!("\"{a}\" must not occur before \"{b}\""),
            RuleBody::Role { role, a } => format!("\"{a}\" is performed by \"{role}\""),
            RuleBody::Parallel { a, b } => format!("\"{a}\" parallel to \"{b}\""),
        }
    }
}

/// Renders rules back into DSL text (one rule per line).
pub fn render_rules(rules: &[Rule]) -> String {
    let mut out = String::new();
    for rule in rules {
        out.push_str(&render_rule(rule));
        out.push('\n');
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn render_rule(rule: &Rule) -> String {
    let form = match &rule.body {
        RuleBody::Before { a, b } => format!("before({},{})", quote(a), quote(b)),
        RuleBody::After { a, b } => format!("after({},{})", quote(a), quote(b)),
        RuleBody::AfterTrue { a, d } => format!("after_true({},{})", quote(a), quote(d)),
        RuleBody::AfterFalse { a, d } => format!("after_false({},{})", quote(a), quote(d)),
        RuleBody::NotBefore { a, b } => format!("not_before({},{})", quote(a), quote(b)),
        RuleBody::Role { role, a } => format!("role({},{})", quote(role), quote(a)),
        RuleBody::Parallel { a, b } => format!("parallel({},{})", quote(a), quote(b)),
    };
    if rule.description.is_empty() {
        format!("rule {} : {}", rule.id, form)
    } else {
        format!("rule {} {} : {}", rule.id, quote(&rule.description), form)
    }
}

/// Evaluation outcome of a single rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Satisfied,
    Violated,
    Inapplicable,
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictStatus::Satisfied => f.write_str("satisfied"),
            VerdictStatus::Violated => f.write_str("violated"),
            VerdictStatus::Inapplicable => f.write_str("inapplicable"),
        }
    }
}

/// Structured evidence accompanying a verdict. Violations always carry
/// evidence that can be replayed against the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// A node-id sequence that is a connected path of the model.
    Path { nodes: Vec<String>, note: String },
    /// A node sitting in the wrong lane.
    Lane {
        node: String,
        lane: Option<String>,
        expected: String,
    },
    /// Fork placing the two labels in distinct branches.
    ForkWitness {
        fork: String,
        branch_a: usize,
        branch_b: usize,
    },
    /// Decision branch edge witnessing an after-true/after-false obligation.
    BranchEdge {
        decision: String,
        guard: String,
        target: String,
    },
    /// Obligation failure: no `label` node is reachable from the branch
    /// without re-traversing the decision.
    UnreachedAfterBranch {
        decision: String,
        guard: String,
        label: String,
    },
    /// No fork has the two labels in distinct branches.
    NoFork { label_a: String, label_b: String },
    /// Decision has no branch edge with the required guard.
    NoGuardedBranch {
        decision_label: String,
        guard: String,
    },
    /// Labels that resolved to zero nodes (inapplicable verdicts).
    UnresolvedLabels { labels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule_id: String,
    pub status: VerdictStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evidence: Option<Evidence>,
}

/// Orders rule ids naturally: runs of digits compare numerically, so rule 2
/// sorts before rule 10. Deterministic for any id strings.
pub fn cmp_rule_ids(a: &str, b: &str) -> Ordering {
    let mut xa = a.chars().peekable();
    let mut xb = b.chars().peekable();
    loop {
        match (xa.peek().copied(), xb.peek().copied()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(ca), Some(cb)) => {
                if ca.is_ascii_digit() && cb.is_ascii_digit() {
                    let mut na = 0u128;
                    while let Some(c) = xa.peek().copied().filter(char::is_ascii_digit) {
                        na = na * 10 + c.to_digit(10).unwrap() as u128;
                        xa.next();
                    }
                    let mut nb = 0u128;
                    while let Some(c) = xb.peek().copied().filter(char::is_ascii_digit) {
                        nb = nb * 10 + c.to_digit(10).unwrap() as u128;
                        xb.next();
                    }
                    match na.cmp(&nb) {
                        Ordering::Equal => {}
                        other => return other,
                    }
                } else {
                    match ca.cmp(&cb) {
                        Ordering::Equal => {
                            xa.next();
                            xb.next();
                        }
                        other => return other,
                    }
                }
            }
        }
    }
}

/// Parses a rule DSL document.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, ParseError> {
    let mut rules: Vec<Rule> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw_line);
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rule = parse_rule_line(line, lineno, raw_line)?;
        if rules.iter().any(|r| r.id == rule.id) {
            return Err(ParseError::new(
                lineno,
                1,
                format!("duplicate rule id `{}`", rule.id),
                raw_line,
            ));
        }
        rules.push(rule);
    }
    Ok(rules)
}

/// Removes a `#` comment, ignoring `#` inside quoted strings.
fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_string => escaped = !escaped,
            '"' if !escaped => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => escaped = false,
        }
    }
    line
}

fn parse_rule_line(line: &str, lineno: usize, raw: &str) -> Result<Rule, ParseError> {
    let err = |msg: String| ParseError::new(lineno, 1, msg, raw);

    let rest = line
        .strip_prefix("rule")
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| {
            err("expected a line of the form `rule <id> [\"description\"] : <form>`".into())
        })?;
    let rest = rest.trim_start();

    let id_end = rest
        .find(|c: char| c.is_whitespace() || c == ':')
        .ok_or_else(|| err("expected `:` after the rule id".into()))?;
    let id = &rest[..id_end];
    if id.is_empty() {
        return Err(err("rule id must not be empty".into()));
    }
    let mut rest = rest[id_end..].trim_start();

    let description = if rest.starts_with('"') {
        let (desc, tail) =
            parse_string(rest).ok_or_else(|| err("unterminated description string".into()))?;
        rest = tail.trim_start();
        desc
    } else {
        String::new()
    };

    let rest = rest
        .strip_prefix(':')
        .ok_or_else(|| err("expected `:` before the rule form".into()))?
        .trim_start();

    let paren = rest
        .find('(')
        .ok_or_else(|| err("expected `<form>(\"...\",\"...\")`".into()))?;
    let form = rest[..paren].trim();
    let args_text = rest[paren..].trim();
    let inner = args_text
        .strip_prefix('(')
        .and_then(|s| s.trim_end().strip_suffix(')'))
        .ok_or_else(|| err("expected parenthesized rule arguments".into()))?;
    let (first, after_first) = parse_string(inner.trim_start())
        .ok_or_else(|| err("expected a quoted first argument".into()))?;
    let after_first = after_first.trim_start();
    let after_comma = after_first
        .strip_prefix(',')
        .ok_or_else(|| err("expected `,` between rule arguments".into()))?;
    let (second, tail) = parse_string(after_comma.trim_start())
        .ok_or_else(|| err("expected a quoted second argument".into()))?;
    if !tail.trim().is_empty() {
        return Err(err("unexpected text after the second argument".into()));
    }
    if first.trim().is_empty() || second.trim().is_empty() {
        return Err(err("rule labels must not be empty".into()));
    }

    let symmetric_distinct = |a: &str, b: &str| normalize_label(a) != normalize_label(b);
    let body = match form {
        "before" => RuleBody::Before {
            a: first.clone(),
            b: second.clone(),
        },
        "after" => RuleBody::After {
            a: first.clone(),
            b: second.clone(),
        },
        "after_true" => RuleBody::AfterTrue {
            a: first.clone(),
            d: second.clone(),
        },
        "after_false" => RuleBody::AfterFalse {
            a: first.clone(),
            d: second.clone(),
        },
        "not_before" => RuleBody::NotBefore {
            a: first.clone(),
            b: second.clone(),
        },
        "role" => RuleBody::Role {
            role: first.clone(),
            a: second.clone(),
        },
        "parallel" => RuleBody::Parallel {
            a: first.clone(),
            b: second.clone(),
        },
        other => return Err(err(format!("unknown rule form `{other}`"))),
    };
    if matches!(
        body,
        RuleBody::Before { .. }
            | RuleBody::After { .. }
            | RuleBody::NotBefore { .. }
            | RuleBody::Parallel { .. }
    ) && !symmetric_distinct(&first, &second)
    {
        return Err(err(format!(
            "rule arguments must differ, both are `{first}`"
        )));
    }

    Ok(Rule {
        id: id.to_string(),
        description,
        body,
    })
}

/// Parses a leading double-quoted string with `\"` and `\\` escapes.
/// Returns (content, remainder after the closing quote).
fn parse_string(s: &str) -> Option<(String, &str)> {
    let rest = s.strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = rest.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, '"')) => out.push('"'),
                Some((_, '\\')) => out.push('\\'),
                Some((_, other)) => {
                    out.push('\\');
                    out.push(other);
                }
                None => return None,
            },
            '"' => return Some((out, &rest[i + 1..])),
            other => out.push(other),
        }
    }
    None
}
