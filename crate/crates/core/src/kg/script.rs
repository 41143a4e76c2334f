//! Graph-script ingestion and export.
//!
//! Supported statements, separated by newlines or `;`:
//!
//! ```text
//! CREATE (alias:Label1:Label2 {key: value, ...})
//! CREATE (alias)-[:TYPE {key: value}]->(other)
//! MERGE  (...)            // CREATE with match-on-equal-labels-and-props
//! ```
//!
//! Aliases are script-wide and become node ids, so `ingest(export(g))`
//! reproduces `g` exactly.

use std::collections::BTreeMap;

use crate::error::ParseError;

use super::graph::{NodeData, PropertyGraph, Relationship, Value};
use super::lex::{tokenize, Token, TokenKind};

/// Parses a graph script into a property graph.
pub fn ingest_script(text: &str) -> Result<PropertyGraph, ParseError> {
    let tokens = tokenize(text)?;
    let lines: Vec<&str> = text.split('\n').collect();
    let mut parser = ScriptParser {
        tokens,
        pos: 0,
        lines,
        graph: PropertyGraph::new(),
    };
    parser.run()?;
    Ok(parser.graph)
}

struct ScriptParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    lines: Vec<&'a str>,
    graph: PropertyGraph,
}

impl<'a> ScriptParser<'a> {
    fn run(&mut self) -> Result<(), ParseError> {
        loop {
            while self.eat(&TokenKind::Semicolon) {}
            if self.pos >= self.tokens.len() {
                return Ok(());
            }
            let keyword = self.expect_ident()?;
            let merge = match keyword.to_uppercase().as_str() {
                "CREATE" => false,
                "MERGE" => true,
                _ => {
                    return Err(self.err_at(self.pos - 1, "expected `CREATE` or `MERGE`"));
                }
            };
            self.statement(merge)?;
        }
    }

    fn snippet(&self, line: usize) -> &str {
        self.lines
            .get(line.saturating_sub(1))
            .copied()
            .unwrap_or("")
    }

    fn err_at(&self, token_index: usize, message: impl Into<String>) -> ParseError {
        match self.tokens.get(token_index).or_else(|| self.tokens.last()) {
            Some(t) => ParseError::new(t.line, t.col, message, self.snippet(t.line)),
            None => ParseError::new(1, 1, message, self.lines.first().copied().unwrap_or("")),
        }
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        self.err_at(self.pos, message)
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|k| k.describe())
                .unwrap_or_else(|| "end of input".into());
            Err(self.err_here(format!("expected {}, found {}", kind.describe(), found)))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(word)) => {
                let word = word.clone();
                self.pos += 1;
                Ok(word)
            }
            _ => Err(self.err_here("expected an identifier")),
        }
    }

    /// One `(alias ...)` node statement or `(a)-[:T]->(b)` relationship.
    fn statement(&mut self, merge: bool) -> Result<(), ParseError> {
        let open = self.pos;
        self.expect(TokenKind::LParen)?;
        let alias_token = self.pos;
        let alias = self.expect_ident()?;

        // Bare `(alias)` closes immediately; a following dash makes this a
        // relationship statement.
        if self.eat(&TokenKind::RParen) {
            if self.peek() == Some(&TokenKind::Dash) {
                return self.rel_statement(alias, alias_token, merge);
            }
            return self.define_node(alias, NodeData::default(), alias_token, merge);
        }

        let mut data = NodeData::default();
        while self.eat(&TokenKind::Colon) {
            let label = self.expect_ident()?;
            data.labels.insert(label);
        }
        if self.peek() == Some(&TokenKind::LBrace) {
            data.props = self.props()?;
        }
        self.expect(TokenKind::RParen)
            .map_err(|_| self.err_at(open, "unterminated node pattern"))?;
        self.define_node(alias, data, alias_token, merge)
    }

    fn define_node(
        &mut self,
        alias: String,
        data: NodeData,
        alias_token: usize,
        merge: bool,
    ) -> Result<(), ParseError> {
        if self.graph.nodes.contains_key(&alias) {
            return Err(self.err_at(alias_token, format!("duplicate alias `{alias}`")));
        }
        if merge {
            // Match on equal label set and properties.
            if self
                .graph
                .nodes
                .values()
                .any(|n| n.labels == data.labels && n.props == data.props)
            {
                // Bind nothing new: relationship statements reference nodes
                // by alias, and the matched node keeps its own alias.
                return Ok(());
            }
        }
        self.graph.nodes.insert(alias, data);
        Ok(())
    }

    fn rel_statement(
        &mut self,
        from: String,
        from_token: usize,
        merge: bool,
    ) -> Result<(), ParseError> {
        if !self.graph.nodes.contains_key(&from) {
            return Err(self.err_at(from_token, format!("unknown alias `{from}`")));
        }
        self.expect(TokenKind::Dash)?;
        self.expect(TokenKind::LBracket)?;
        // Optional relationship alias before the colon is accepted and ignored.
        if matches!(self.peek(), Some(TokenKind::Ident(_))) {
            self.pos += 1;
        }
        self.expect(TokenKind::Colon)?;
        let rel_type = self.expect_ident()?;
        let props = if self.peek() == Some(&TokenKind::LBrace) {
            self.props()?
        } else {
            BTreeMap::new()
        };
        self.expect(TokenKind::RBracket)?;
        self.expect(TokenKind::Dash)?;
        self.expect(TokenKind::Gt)?;
        self.expect(TokenKind::LParen)?;
        let to_token = self.pos;
        let to = self.expect_ident()?;
        self.expect(TokenKind::RParen)?;
        if !self.graph.nodes.contains_key(&to) {
            return Err(self.err_at(to_token, format!("unknown alias `{to}`")));
        }

        if merge {
            let exists = self.graph.rels.iter().any(|r: &Relationship| {
                r.rel_type == rel_type && r.from == from && r.to == to && r.props == props
            });
            if exists {
                return Ok(());
            }
        }
        self.graph
            .add_rel(rel_type, &from, &to, props)
            .expect("endpoints were checked");
        Ok(())
    }

    fn props(&mut self) -> Result<BTreeMap<String, Value>, ParseError> {
        self.expect(TokenKind::LBrace)?;
        let mut props = BTreeMap::new();
        if self.eat(&TokenKind::RBrace) {
            return Ok(props);
        }
        loop {
            let key = self.expect_ident()?;
            self.expect(TokenKind::Colon)?;
            let value = self.value()?;
            props.insert(key, value);
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(TokenKind::RBrace)?;
            return Ok(props);
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let value = match self.peek() {
            Some(TokenKind::Str(s)) => Value::Text(s.clone()),
            Some(TokenKind::Int(i)) => Value::Int(*i),
            Some(TokenKind::Float(x)) => Value::Float(*x),
            Some(TokenKind::Ident(w)) if w.eq_ignore_ascii_case("true") => Value::Bool(true),
            Some(TokenKind::Ident(w)) if w.eq_ignore_ascii_case("false") => Value::Bool(false),
            _ => return Err(self.err_here("expected a string, number or boolean literal")),
        };
        self.pos += 1;
        Ok(value)
    }
}

fn render_value(value: &Value) -> String {
    match value {
        Value::Text(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        Value::Int(i) => i.to_string(),
        Value::Float(x) => {
            if x.fract() == 0.0 && x.is_finite() {
                format!("{x:.1}")
            } else {
                format!("{x}")
            }
        }
        Value::Bool(b) => b.to_string(),
    }
}

fn render_props(props: &BTreeMap<String, Value>) -> String {
    if props.is_empty() {
        return String::new();
    }
    let body: Vec<String> = props
        .iter()
        .map(|(k, v)| format!("{k}: {}", render_value(v)))
        .collect();
    format!(" {{{}}}", body.join(", "))
}

/// Renders the graph back into script form: nodes by id, then relationships
/// by id. `ingest_script(export_script(g))` reproduces `g`.
pub fn export_script(graph: &PropertyGraph) -> String {
    let mut out = String::new();
    for (id, data) in &graph.nodes {
        let labels: String = data.labels.iter().map(|l| format!(":{l}")).collect();
        out.push_str(&format!(
            "CREATE ({id}{labels}{})\n",
            render_props(&data.props)
        ));
    }
    for rel in &graph.rels {
        out.push_str(&format!(
            "CREATE ({})-[:{}{}]->({})\n",
            rel.from,
            rel.rel_type,
            render_props(&rel.props),
            rel.to
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_company_nodes() {
        let graph = ingest_script(
            "CREATE (t:Company {name: \"TSMC\"})\nCREATE (s:Company {name: \"Samsung Electronics\"})",
        )
        .unwrap();
        assert_eq!(graph.node_count(), 2);
        assert_eq!(graph.rel_count(), 0);
        assert_eq!(graph.nodes["t"].name(), Some("TSMC"));
    }

    #[test]
    fn empty_script_empty_graph() {
        let graph = ingest_script("").unwrap();
        assert_eq!(graph.node_count(), 0);
        assert_eq!(graph.rel_count(), 0);
        assert_eq!(export_script(&graph), "");
    }

    #[test]
    fn relationships_reference_prior_aliases() {
        let graph = ingest_script(
            "CREATE (a:Org {name: \"A\"})\nCREATE (b:Org {name: \"B\"})\nCREATE (a)-[:SUPPLIES {volume: 10}]->(b)",
        )
        .unwrap();
        assert_eq!(graph.rel_count(), 1);
        let rel = &graph.rels[0];
        assert_eq!(rel.id, "r1");
        assert_eq!(rel.rel_type, "SUPPLIES");
        assert_eq!(rel.props["volume"], Value::Int(10));
    }

    #[test]
    fn unknown_alias_rejected() {
        let err = ingest_script("CREATE (a:Org)\nCREATE (a)-[:R]->(ghost)").unwrap_err();
        assert!(err.message.contains("unknown alias"));
        assert_eq!(err.line, 2);
    }

    #[test]
    fn duplicate_alias_rejected() {
        let err = ingest_script("CREATE (a:Org)\nCREATE (a:Org)").unwrap_err();
        assert!(err.message.contains("duplicate alias"));
    }

    #[test]
    fn merge_matches_equal_nodes_and_rels() {
        let graph = ingest_script(
            "CREATE (a:Org {name: \"A\"})\nMERGE (dup:Org {name: \"A\"})\nMERGE (b:Org {name: \"B\"})\nCREATE (a)-[:R]->(b)\nMERGE (a)-[:R]->(b)\nMERGE (a)-[:R {w: 1}]->(b)",
        )
        .unwrap();
        assert_eq!(graph.node_count(), 2, "merge matched the equal node");
        assert_eq!(
            graph.rel_count(),
            2,
            "equal rel merged, distinct props created"
        );
    }

    #[test]
    fn statements_split_on_semicolons() {
        let graph = ingest_script("CREATE (a:X); CREATE (b:Y); CREATE (a)-[:R]->(b)").unwrap();
        assert_eq!(graph.node_count(), 2);
        assert_eq!(graph.rel_count(), 1);
    }

    #[test]
    fn malformed_literal_rejected() {
        let err = ingest_script("CREATE (a:X {k: @})").unwrap_err();
        assert!(err.message.contains("unexpected character"));
    }

    #[test]
    fn export_single_node() {
        let graph = ingest_script("CREATE (solo:Thing {name: \"Only\"})").unwrap();
        assert_eq!(
            export_script(&graph),
            "CREATE (solo:Thing {name: \"Only\"})\n"
        );
    }

    #[test]
    fn export_round_trip_is_identity() {
        let script = "CREATE (a:Org:Foundry {name: \"A\", tier: 1})\nCREATE (b:Org {active: true, share: 0.5})\nCREATE (a)-[:SUPPLIES {notes: \"q\\\"x\"}]->(b)\n";
        let graph = ingest_script(script).unwrap();
        let exported = export_script(&graph);
        let again = ingest_script(&exported).unwrap();
        assert_eq!(graph, again);
        assert_eq!(export_script(&again), exported);
    }
}
