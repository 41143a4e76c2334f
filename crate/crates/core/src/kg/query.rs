//! Query AST and parser for the read-only pattern-matching subset:
//! `MATCH ... [WHERE ...] RETURN ... [ORDER BY ...] [LIMIT n]` with node
//! labels, property-equality maps, typed directed relationships and
//! variable-length ranges `*min..max` (max 8).

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::error::ParseError;

use super::graph::Value;
use super::lex::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub patterns: Vec<PathPattern>,
    pub where_clause: Option<Expr>,
    pub return_items: Vec<ReturnItem>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPattern {
    pub start: NodePattern,
    pub steps: Vec<(RelPattern, NodePattern)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodePattern {
    pub var: Option<String>,
    pub label: Option<String>,
    pub props: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `-[..]->`
    Right,
    /// `<-[..]-`
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelPattern {
    pub var: Option<String>,
    pub rel_type: Option<String>,
    pub direction: Direction,
    /// Variable-length range (min, max); `None` is a single hop.
    pub range: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueExpr {
    Var(String),
    Prop(String, String),
}

impl ValueExpr {
    pub fn render(&self) -> String {
        match self {
            ValueExpr::Var(v) => v.clone(),
            ValueExpr::Prop(v, k) => format!("{v}.{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnItem {
    pub expr: ValueExpr,
    pub count: bool,
}

impl ReturnItem {
    pub fn column_name(&self) -> String {
        if self.count {
            format!("count({})", self.expr.render())
        } else {
            self.expr.render()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderBy {
    pub item: ValueExpr,
    pub ascending: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    Gt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Prop(String, String),
    Literal(Value),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Cmp {
        lhs: Operand,
        op: CmpOp,
        rhs: Operand,
    },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

/// Parses a query, validating variable bindings and range bounds.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let tokens = tokenize(text)?;
    let lines: Vec<&str> = text.split('\n').collect();
    let mut parser = QueryParser {
        tokens,
        pos: 0,
        lines,
    };
    parser.query()
}

struct QueryParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    lines: Vec<&'a str>,
}

impl<'a> QueryParser<'a> {
    fn snippet_for(&self, token_index: usize) -> (usize, usize, &str) {
        match self.tokens.get(token_index).or_else(|| self.tokens.last()) {
            Some(t) => (
                t.line,
                t.col,
                self.lines.get(t.line - 1).copied().unwrap_or(""),
            ),
            None => (1, 1, self.lines.first().copied().unwrap_or("")),
        }
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let (line, col, snippet) = self.snippet_for(self.pos);
        ParseError::new(line, col, message, snippet)
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

    /// Case-insensitive keyword check without consuming.
    fn at_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Some(TokenKind::Ident(w)) if w.eq_ignore_ascii_case(word))
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        if self.at_keyword(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err_here("expected an identifier")),
        }
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        if !self.eat_keyword("MATCH") {
            return Err(self.err_here("expected `MATCH`"));
        }
        let mut patterns = vec![self.path_pattern()?];
        while self.eat(&TokenKind::Comma) {
            patterns.push(self.path_pattern()?);
        }

        let where_clause = if self.eat_keyword("WHERE") {
            Some(self.or_expr()?)
        } else {
            None
        };

        if !self.eat_keyword("RETURN") {
            return Err(self.err_here("expected `RETURN`"));
        }
        let mut return_items = vec![self.return_item()?];
        while self.eat(&TokenKind::Comma) {
            return_items.push(self.return_item()?);
        }

        let order_by = if self.eat_keyword("ORDER") {
            if !self.eat_keyword("BY") {
                return Err(self.err_here("expected `BY` after `ORDER`"));
            }
            let item = self.value_expr()?;
            let ascending = if self.eat_keyword("DESC") {
                false
            } else {
                self.eat_keyword("ASC");
                true
            };
            Some(OrderBy { item, ascending })
        } else {
            None
        };

        let limit = if self.eat_keyword("LIMIT") {
            match self.peek() {
                Some(TokenKind::Int(n)) if *n >= 1 => {
                    let n = *n as usize;
                    self.pos += 1;
                    Some(n)
                }
                _ => return Err(self.err_here("expected a positive integer after `LIMIT`")),
            }
        } else {
            None
        };

        if self.pos < self.tokens.len() {
            return Err(self.err_here("unexpected trailing tokens"));
        }

        let query = Query {
            patterns,
            where_clause,
            return_items,
            order_by,
            limit,
        };
        self.validate(&query)?;
        Ok(query)
    }

    fn path_pattern(&mut self) -> Result<PathPattern, ParseError> {
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        loop {
            let direction = if self.peek() == Some(&TokenKind::Dash) {
                Direction::Right
            } else if self.peek() == Some(&TokenKind::Lt) {
                Direction::Left
            } else {
                break;
            };
            let rel = self.rel_pattern(direction)?;
            let node = self.node_pattern()?;
            steps.push((rel, node));
        }
        Ok(PathPattern { start, steps })
    }

    fn node_pattern(&mut self) -> Result<NodePattern, ParseError> {
        self.expect(TokenKind::LParen)?;
        let mut pattern = NodePattern::default();
        if let Some(TokenKind::Ident(w)) = self.peek() {
            pattern.var = Some(w.clone());
            self.pos += 1;
        }
        if self.eat(&TokenKind::Colon) {
            pattern.label = Some(self.expect_ident()?);
        }
        if self.peek() == Some(&TokenKind::LBrace) {
            pattern.props = self.props()?;
        }
        self.expect(TokenKind::RParen)?;
        Ok(pattern)
    }

    /// `-[var:TYPE*min..max]->` or `<-[...]-`. The leading `<` or `-` has
    /// been peeked but not consumed.
    fn rel_pattern(&mut self, direction: Direction) -> Result<RelPattern, ParseError> {
        if direction == Direction::Left {
            self.expect(TokenKind::Lt)?;
        }
        self.expect(TokenKind::Dash)?;
        self.expect(TokenKind::LBracket)?;

        let mut rel = RelPattern {
            var: None,
            rel_type: None,
            direction,
            range: None,
        };
        if let Some(TokenKind::Ident(w)) = self.peek() {
            rel.var = Some(w.clone());
            self.pos += 1;
        }
        if self.eat(&TokenKind::Colon) {
            rel.rel_type = Some(self.expect_ident()?);
        }
        if self.eat(&TokenKind::Star) {
            let min = match self.peek() {
                Some(TokenKind::Int(n)) => {
                    let n = *n;
                    self.pos += 1;
                    Some(n)
                }
                _ => None,
            };
            let max = if self.eat(&TokenKind::DotDot) {
                match self.peek() {
                    Some(TokenKind::Int(n)) => {
                        let n = *n;
                        self.pos += 1;
                        Some(n)
                    }
                    _ => return Err(self.err_here("expected an upper bound after `..`")),
                }
            } else {
                None
            };
            let range = match (min, max) {
                (None, None) => (1, 8),
                (Some(n), None) => (n, n),
                (Some(n), Some(m)) => (n, m),
                (None, Some(m)) => (1, m),
            };
            if range.0 < 1 || range.1 < range.0 || range.1 > 8 {
                return Err(self.err_here(format!(
                    "variable-length range must satisfy 1 <= min <= max <= 8, got *{}..{}",
                    range.0, range.1
                )));
            }
            rel.range = Some((range.0 as usize, range.1 as usize));
        }
        self.expect(TokenKind::RBracket)?;
        self.expect(TokenKind::Dash)?;
        if direction == Direction::Right {
            self.expect(TokenKind::Gt)?;
        }
        Ok(rel)
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
            let value = self.literal()?;
            props.insert(key, value);
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(TokenKind::RBrace)?;
            return Ok(props);
        }
    }

    fn literal(&mut self) -> Result<Value, ParseError> {
        let value = match self.peek() {
            Some(TokenKind::Str(s)) => Value::Text(s.clone()),
            Some(TokenKind::Int(i)) => Value::Int(*i),
            Some(TokenKind::Float(x)) => Value::Float(*x),
            Some(TokenKind::Ident(w)) if w.eq_ignore_ascii_case("true") => Value::Bool(true),
            Some(TokenKind::Ident(w)) if w.eq_ignore_ascii_case("false") => Value::Bool(false),
            _ => return Err(self.err_here("expected a literal value")),
        };
        self.pos += 1;
        Ok(value)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.and_expr()?;
        while self.eat_keyword("OR") {
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.cmp_expr()?;
        while self.eat_keyword("AND") {
            let right = self.cmp_expr()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&TokenKind::LParen) {
            let inner = self.or_expr()?;
            self.expect(TokenKind::RParen)?;
            return Ok(inner);
        }
        let lhs = self.operand()?;
        let op = match self.peek() {
            Some(TokenKind::Eq) => CmpOp::Eq,
            Some(TokenKind::NotEq) => CmpOp::NotEq,
            Some(TokenKind::Lt) => CmpOp::Lt,
            Some(TokenKind::Gt) => CmpOp::Gt,
            _ => return Err(self.err_here("expected a comparison operator (=, <>, <, >)")),
        };
        self.pos += 1;
        let rhs = self.operand()?;
        Ok(Expr::Cmp { lhs, op, rhs })
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(w))
                if !w.eq_ignore_ascii_case("true") && !w.eq_ignore_ascii_case("false") =>
            {
                let var = w.clone();
                self.pos += 1;
                self.expect(TokenKind::Dot).map_err(|_| {
                    self.err_here("comparisons operate on variable properties (`var.key`)")
                })?;
                let key = self.expect_ident()?;
                Ok(Operand::Prop(var, key))
            }
            _ => Ok(Operand::Literal(self.literal()?)),
        }
    }

    fn value_expr(&mut self) -> Result<ValueExpr, ParseError> {
        let var = self.expect_ident()?;
        if self.eat(&TokenKind::Dot) {
            let key = self.expect_ident()?;
            Ok(ValueExpr::Prop(var, key))
        } else {
            Ok(ValueExpr::Var(var))
        }
    }

    fn return_item(&mut self) -> Result<ReturnItem, ParseError> {
        if self.at_keyword("COUNT") {
            self.pos += 1;
            self.expect(TokenKind::LParen)?;
            let expr = self.value_expr()?;
            self.expect(TokenKind::RParen)?;
            return Ok(ReturnItem { expr, count: true });
        }
        Ok(ReturnItem {
            expr: self.value_expr()?,
            count: false,
        })
    }

    /// Every variable referenced in WHERE/RETURN/ORDER BY must be bound in
    /// MATCH; variable-length relationship variables carry a path, not a
    /// single relationship, and cannot be used in expressions.
    fn validate(&self, query: &Query) -> Result<(), ParseError> {
        let mut node_vars: BTreeSet<&str> = BTreeSet::new();
        let mut var_length: BTreeSet<&str> = BTreeSet::new();
        let mut rel_vars: BTreeSet<&str> = BTreeSet::new();
        for pattern in &query.patterns {
            if let Some(v) = &pattern.start.var {
                node_vars.insert(v);
            }
            for (rel, node) in &pattern.steps {
                if let Some(v) = &rel.var {
                    if !rel_vars.insert(v) {
                        return Err(self.err_here(format!(
                            "relationship variable `{v}` is bound more than once"
                        )));
                    }
                    if rel.range.is_some() {
                        var_length.insert(v);
                    }
                }
                if let Some(v) = &node.var {
                    node_vars.insert(v);
                }
            }
        }
        // A name is a node variable or a relationship variable, never both.
        if let Some(clash) = node_vars.intersection(&rel_vars).next() {
            return Err(self.err_here(format!(
                "variable `{clash}` is bound to both a node and a relationship"
            )));
        }
        let bound: BTreeSet<&str> = node_vars.union(&rel_vars).copied().collect();

        let check = |expr: &ValueExpr| -> Result<(), ParseError> {
            let var = match expr {
                ValueExpr::Var(v) | ValueExpr::Prop(v, _) => v,
            };
            if !bound.contains(var.as_str()) {
                return Err(self.err_here(format!("variable `{var}` is not bound in MATCH")));
            }
            if var_length.contains(var.as_str()) {
                return Err(self.err_here(format!(
                    "variable-length relationship `{var}` cannot be used in expressions"
                )));
            }
            Ok(())
        };

        for item in &query.return_items {
            check(&item.expr)?;
        }
        if let Some(order) = &query.order_by {
            check(&order.item)?;
            if !query.return_items.iter().any(|i| i.expr == order.item) {
                return Err(self.err_here("ORDER BY item must appear in RETURN"));
            }
        }
        if let Some(expr) = &query.where_clause {
            let mut stack = vec![expr];
            while let Some(e) = stack.pop() {
                match e {
                    Expr::Cmp { lhs, rhs, .. } => {
                        for op in [lhs, rhs] {
                            if let Operand::Prop(var, _) = op {
                                if !bound.contains(var.as_str()) {
                                    return Err(self.err_here(format!(
                                        "variable `{var}` is not bound in MATCH"
                                    )));
                                }
                                if var_length.contains(var.as_str()) {
                                    return Err(self.err_here(format!(
                                        "variable-length relationship `{var}` cannot be used in expressions"
                                    )));
                                }
                            }
                        }
                    }
                    Expr::And(a, b) | Expr::Or(a, b) => {
                        stack.push(a);
                        stack.push(b);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_query() {
        let q = parse_query("MATCH (c:Company)-[:SUPPLIES]->(x) RETURN c.name").unwrap();
        assert_eq!(q.patterns.len(), 1);
        assert_eq!(q.patterns[0].steps.len(), 1);
        assert_eq!(q.return_items.len(), 1);
        assert_eq!(q.return_items[0].column_name(), "c.name");
    }

    #[test]
    fn variable_length_with_limit() {
        let q =
            parse_query("MATCH (a)-[:DEPENDS_ON*1..4]->(b:Foundry) RETURN a.name, b.name LIMIT 5")
                .unwrap();
        let (rel, node) = &q.patterns[0].steps[0];
        assert_eq!(rel.range, Some((1, 4)));
        assert_eq!(rel.rel_type.as_deref(), Some("DEPENDS_ON"));
        assert_eq!(node.label.as_deref(), Some("Foundry"));
        assert_eq!(q.limit, Some(5));
    }

    #[test]
    fn incomplete_pattern_is_an_error() {
        let err = parse_query("MATCH (a)-[r]->").unwrap_err();
        assert!(err.message.contains("expected `(`"), "{}", err.message);
    }

    #[test]
    fn left_direction_and_where() {
        let q = parse_query(
            "MATCH (w)<-[:FABRICATES]-(f) WHERE f.location = \"Taiwan\" OR f.tier > 1 RETURN f.name ORDER BY f.name DESC",
        )
        .unwrap();
        assert_eq!(q.patterns[0].steps[0].0.direction, Direction::Left);
        assert!(matches!(q.where_clause, Some(Expr::Or(_, _))));
        assert_eq!(q.order_by.as_ref().map(|o| o.ascending), Some(false));
    }

    #[test]
    fn unbound_variable_rejected() {
        let err = parse_query("MATCH (a) RETURN b.name").unwrap_err();
        assert!(err.message.contains("not bound"));
    }

    #[test]
    fn var_length_variable_not_usable_in_return() {
        let err = parse_query("MATCH (a)-[r*1..2]->(b) RETURN r.weight").unwrap_err();
        assert!(err.message.contains("variable-length"));
    }

    #[test]
    fn node_and_rel_variables_cannot_collide() {
        let err = parse_query("MATCH (a)-[a:T]->(b) RETURN a").unwrap_err();
        assert!(
            err.message.contains("both a node and a relationship"),
            "{}",
            err.message
        );
        let err = parse_query("MATCH (a)-[r:T]->(b), (r)-[:U]->(c) RETURN r").unwrap_err();
        assert!(
            err.message.contains("both a node and a relationship"),
            "{}",
            err.message
        );
    }

    #[test]
    fn order_by_must_be_returned() {
        let err = parse_query("MATCH (a) RETURN a.name ORDER BY a.tier").unwrap_err();
        assert!(err.message.contains("ORDER BY"));
    }

    #[test]
    fn range_bounds_validated() {
        assert!(parse_query("MATCH (a)-[*0..2]->(b) RETURN a").is_err());
        assert!(parse_query("MATCH (a)-[*3..2]->(b) RETURN a").is_err());
        assert!(parse_query("MATCH (a)-[*1..9]->(b) RETURN a").is_err());
        let q = parse_query("MATCH (a)-[*]->(b) RETURN a").unwrap();
        assert_eq!(q.patterns[0].steps[0].0.range, Some((1, 8)));
        let q = parse_query("MATCH (a)-[*2]->(b) RETURN a").unwrap();
        assert_eq!(q.patterns[0].steps[0].0.range, Some((2, 2)));
    }

    #[test]
    fn count_aggregate_and_props_filter() {
        let q = parse_query("MATCH (s {name: \"SoC\"})-[:INCLUDES]->(c:Component) RETURN count(c)")
            .unwrap();
        assert!(q.return_items[0].count);
        assert_eq!(q.patterns[0].start.props.len(), 1);
    }

    #[test]
    fn keywords_are_case_insensitive() {
        assert!(parse_query("match (a) return a order by a limit 2").is_ok());
    }
}
