//! Line-oriented parser for the activity-diagram subset.
//!
//! The parser is total: every input yields either a [`DiagramAst`] or a
//! [`ParseError`] pointing at the offending line; nothing is skipped
//! silently. Comment lines (starting with `'`) and blank lines are ignored.

use crate::ast::{DiagramAst, Element};
use crate::error::ParseError;

/// Parses a complete `@startuml` .. `@enduml` document.
pub fn parse_activity_diagram(text: &str, source_name: &str) -> Result<DiagramAst, ParseError> {
    Parser::new(text).parse(source_name)
}

struct Parser<'a> {
    /// Raw lines with any trailing `\r` stripped; index = line number - 1.
    lines: Vec<&'a str>,
    pos: usize,
}

/// What ended a block body.
enum Terminator {
    EndUml,
    Else {
        label: Option<String>,
    },
    EndIf,
    ForkAgain,
    EndFork {
        line: usize,
    },
    RepeatWhile {
        condition: String,
        exit_label: Option<String>,
    },
    Eof,
}

/// The construct whose body is being parsed, with its opening line.
#[derive(Clone, Copy)]
enum Block {
    Top,
    If { opened: usize, in_else: bool },
    Fork { opened: usize },
    Repeat { opened: usize },
}

impl Block {
    fn expected(&self) -> &'static str {
        match self {
            Block::Top => "`@enduml`",
            Block::If { in_else: false, .. } => "`endif` (or `else`)",
            Block::If { in_else: true, .. } => "`endif`",
            Block::Fork { .. } => "`end fork` (or `fork again`)",
            Block::Repeat { .. } => "`repeat while (...)`",
        }
    }

    fn opened(&self) -> Option<usize> {
        match self {
            Block::Top => None,
            Block::If { opened, .. } | Block::Fork { opened } | Block::Repeat { opened } => {
                Some(*opened)
            }
        }
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        Parser { lines, pos: 0 }
    }

    /// Last line with content, 1-based; a trailing newline creates no line.
    fn last_line(&self) -> usize {
        self.lines
            .iter()
            .rposition(|l| !l.trim().is_empty())
            .map(|i| i + 1)
            .unwrap_or(1)
    }

    fn parse(&mut self, source_name: &str) -> Result<DiagramAst, ParseError> {
        // Leading blanks and comments are tolerated; the first significant
        // line must open the document.
        match self.next_significant() {
            Some((lineno, text)) if text.trim() == "@startuml" => {
                let _ = lineno;
            }
            Some((lineno, text)) => {
                return Err(self.err(lineno, 1, "expected `@startuml`", text));
            }
            None => {
                return Err(ParseError::new(1, 1, "expected `@startuml`", ""));
            }
        }

        let (elements, terminator) = self.parse_body(Block::Top)?;
        match terminator {
            Terminator::EndUml => {}
            Terminator::Eof => {
                let last = self.last_line();
                return Err(ParseError::new(
                    last,
                    1,
                    "missing `@enduml` at end of document",
                    self.lines.get(last - 1).copied().unwrap_or(""),
                ));
            }
            // parse_body only returns block terminators inside blocks.
            _ => unreachable!("block terminator escaped to document level"),
        }

        // Only blanks and comments may follow the closing directive.
        if let Some((lineno, text)) = self.next_significant() {
            return Err(self.err(lineno, 1, "content after `@enduml`", text));
        }

        Ok(DiagramAst {
            elements,
            source_name: source_name.to_string(),
        })
    }

    /// Next non-blank, non-comment line, consuming it. Returns (1-based line, raw text).
    fn next_significant(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.lines.len() {
            let raw = self.lines[self.pos];
            self.pos += 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('\'') {
                continue;
            }
            return Some((self.pos, raw));
        }
        None
    }

    fn err(
        &self,
        line: usize,
        column: usize,
        message: impl Into<String>,
        snippet: &str,
    ) -> ParseError {
        ParseError::new(line, column, message, snippet)
    }

    fn parse_body(&mut self, block: Block) -> Result<(Vec<Element>, Terminator), ParseError> {
        let mut elements = Vec::new();
        loop {
            let (lineno, raw) = match self.next_significant() {
                Some(x) => x,
                None => {
                    if let Some(opened) = block.opened() {
                        let last = self.last_line();
                        return Err(ParseError::new(
                            last,
                            1,
                            format!(
                                "expected {} to close the block opened at line {}, but the input ended",
                                block.expected(),
                                opened
                            ),
                            self.lines.get(last - 1).copied().unwrap_or(""),
                        ));
                    }
                    return Ok((elements, Terminator::Eof));
                }
            };
            let text = raw.trim();

            // Document and block terminators first.
            if text == "@enduml" {
                if let Some(opened) = block.opened() {
                    return Err(self.err(
                        lineno,
                        1,
                        format!(
                            "expected {} to close the block opened at line {}, found `@enduml`",
                            block.expected(),
                            opened
                        ),
                        raw,
                    ));
                }
                return Ok((elements, Terminator::EndUml));
            }
            if text == "endif" {
                if matches!(block, Block::If { .. }) {
                    return Ok((elements, Terminator::EndIf));
                }
                return Err(self.err(lineno, 1, "`endif` without an open `if` block", raw));
            }
            if text == "else" || text.starts_with("else ") || text.starts_with("else(") {
                match block {
                    Block::If { in_else: false, .. } => {
                        let rest = text["else".len()..].trim();
                        let label = if rest.is_empty() {
                            None
                        } else {
                            let (inner, tail) = parse_parenthesized(rest).ok_or_else(|| {
                                self.err(lineno, 1, "expected `else` or `else (label)`", raw)
                            })?;
                            if !tail.trim().is_empty() {
                                return Err(self.err(
                                    lineno,
                                    1,
                                    "unexpected text after `else (label)`",
                                    raw,
                                ));
                            }
                            Some(inner.to_string())
                        };
                        return Ok((elements, Terminator::Else { label }));
                    }
                    Block::If { in_else: true, .. } => {
                        return Err(self.err(lineno, 1, "duplicate `else` in `if` block", raw));
                    }
                    _ => {
                        return Err(self.err(lineno, 1, "`else` without an open `if` block", raw));
                    }
                }
            }
            if text == "end fork" || text == "endfork" {
                if matches!(block, Block::Fork { .. }) {
                    return Ok((elements, Terminator::EndFork { line: lineno }));
                }
                return Err(self.err(lineno, 1, "`end fork` without an open `fork` block", raw));
            }
            if text == "fork again" {
                if matches!(block, Block::Fork { .. }) {
                    return Ok((elements, Terminator::ForkAgain));
                }
                return Err(self.err(lineno, 1, "`fork again` without an open `fork` block", raw));
            }
            if let Some(after_keyword) = text.strip_prefix("repeat while") {
                if !matches!(block, Block::Repeat { .. }) {
                    return Err(self.err(
                        lineno,
                        1,
                        "`repeat while` without an open `repeat` block",
                        raw,
                    ));
                }
                let rest = after_keyword.trim();
                let (condition, tail) = parse_parenthesized(rest).ok_or_else(|| {
                    self.err(lineno, 1, "expected `repeat while (condition)`", raw)
                })?;
                let tail = tail.trim();
                let exit_label = if tail.is_empty() {
                    None
                } else {
                    let after_is = tail.strip_prefix("is").ok_or_else(|| {
                        self.err(
                            lineno,
                            1,
                            "expected `is (label)` after the repeat condition",
                            raw,
                        )
                    })?;
                    let (label, tail2) = parse_parenthesized(after_is.trim()).ok_or_else(|| {
                        self.err(
                            lineno,
                            1,
                            "expected `is (label)` after the repeat condition",
                            raw,
                        )
                    })?;
                    if !tail2.trim().is_empty() {
                        return Err(self.err(lineno, 1, "unexpected text after `is (label)`", raw));
                    }
                    Some(label.to_string())
                };
                return Ok((
                    elements,
                    Terminator::RepeatWhile {
                        condition: condition.to_string(),
                        exit_label,
                    },
                ));
            }

            // Ordinary constructs.
            elements.push(self.parse_element(lineno, raw, text)?);
        }
    }

    fn parse_element(
        &mut self,
        lineno: usize,
        raw: &str,
        text: &str,
    ) -> Result<Element, ParseError> {
        if text == "start" {
            return Ok(Element::StartMarker);
        }
        if text == "stop" || text == "end" {
            return Ok(Element::StopMarker);
        }
        if let Some(rest) = text.strip_prefix(':') {
            // Activity labels must close on the same line.
            let label = rest.strip_suffix(';').ok_or_else(|| {
                self.err(
                    lineno,
                    raw.len() + 1,
                    "activity label must end with `;` on the same line",
                    raw,
                )
            })?;
            return Ok(Element::Activity {
                label: label.to_string(),
            });
        }
        if let Some(rest) = text.strip_prefix('|') {
            let lane = rest
                .strip_suffix('|')
                .filter(|l| !l.is_empty() && !l.contains('|'));
            return match lane {
                Some(lane) => Ok(Element::LaneSwitch {
                    lane: lane.to_string(),
                }),
                None => Err(self.err(
                    lineno,
                    1,
                    "expected a swimlane switch of the form `|Lane|`",
                    raw,
                )),
            };
        }
        if text == "if" || text.starts_with("if ") || text.starts_with("if(") {
            return self.parse_if(lineno, raw, text);
        }
        if text == "fork" {
            return self.parse_fork(lineno);
        }
        if text == "repeat" {
            return self.parse_repeat(lineno);
        }
        if let Some(rest) = text
            .strip_prefix("note right:")
            .or_else(|| text.strip_prefix("note left:"))
        {
            let note = rest.strip_prefix(' ').unwrap_or(rest);
            return Ok(Element::Note {
                text: note.to_string(),
            });
        }
        if text.starts_with("note") {
            return Err(self.err(
                lineno,
                1,
                "only one-line `note right: ...` / `note left: ...` notes are supported",
                raw,
            ));
        }
        if let Some(idx) = text.find("->") {
            return Err(self.err(
                lineno,
                raw.find("->").unwrap_or(idx) + 1,
                "arrow syntax is not supported; flow is implicit in element order",
                raw,
            ));
        }
        Err(self.err(
            lineno,
            1,
            format!("unknown or unsupported construct `{text}`"),
            raw,
        ))
    }

    fn parse_if(&mut self, lineno: usize, raw: &str, text: &str) -> Result<Element, ParseError> {
        let rest = text["if".len()..].trim_start();
        let (condition, tail) = parse_parenthesized(rest)
            .ok_or_else(|| self.err(lineno, 1, "expected `if (condition) then (label)`", raw))?;
        let tail = tail.trim();
        let after_then = tail.strip_prefix("then").ok_or_else(|| {
            self.err(
                lineno,
                1,
                "expected `then (label)` after the if condition",
                raw,
            )
        })?;
        let (then_label, tail2) = parse_parenthesized(after_then.trim()).ok_or_else(|| {
            self.err(
                lineno,
                1,
                "expected `then (label)` after the if condition",
                raw,
            )
        })?;
        if !tail2.trim().is_empty() {
            return Err(self.err(lineno, 1, "unexpected text after `then (label)`", raw));
        }
        if condition.trim().is_empty() {
            return Err(self.err(lineno, 1, "if condition must not be empty", raw));
        }

        let (then_body, term) = self.parse_body(Block::If {
            opened: lineno,
            in_else: false,
        })?;
        let (else_label, else_body) = match term {
            Terminator::EndIf => (None, None),
            Terminator::Else { label } => {
                let (body, term2) = self.parse_body(Block::If {
                    opened: lineno,
                    in_else: true,
                })?;
                match term2 {
                    Terminator::EndIf => (label, Some(body)),
                    _ => unreachable!("else body accepts only endif"),
                }
            }
            _ => unreachable!("if body accepts only else/endif"),
        };
        Ok(Element::IfBlock {
            condition: condition.to_string(),
            then_label: then_label.to_string(),
            then_body,
            else_label,
            else_body,
        })
    }

    fn parse_fork(&mut self, opened: usize) -> Result<Element, ParseError> {
        let mut branches = Vec::new();
        loop {
            let (branch, term) = self.parse_body(Block::Fork { opened })?;
            branches.push(branch);
            match term {
                Terminator::ForkAgain => continue,
                Terminator::EndFork { line } => {
                    if branches.len() < 2 {
                        return Err(ParseError::new(
                            line,
                            1,
                            "a fork requires at least two branches (`fork again`)",
                            self.lines.get(line - 1).copied().unwrap_or(""),
                        ));
                    }
                    return Ok(Element::ForkBlock { branches });
                }
                _ => unreachable!("fork body accepts only fork again/end fork"),
            }
        }
    }

    fn parse_repeat(&mut self, opened: usize) -> Result<Element, ParseError> {
        let (body, term) = self.parse_body(Block::Repeat { opened })?;
        match term {
            Terminator::RepeatWhile {
                condition,
                exit_label,
            } => Ok(Element::RepeatBlock {
                body,
                while_condition: condition,
                exit_label,
            }),
            _ => unreachable!("repeat body accepts only repeat while"),
        }
    }
}

/// Splits `"(inner) rest"` into `("inner", " rest")`, honoring nested parens.
fn parse_parenthesized(s: &str) -> Option<(&str, &str)> {
    let rest = s.strip_prefix('(')?;
    let mut depth = 1usize;
    for (i, c) in rest.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&rest[..i], &rest[i + c.len_utf8()..]));
                }
            }
            _ => {}
        }
    }
    None
}
