//! Tokenizer for megamodel source text.
//!
//! Line structure is significant (one statement per line), so newlines are
//! emitted as tokens. Whitespace and `//` comments are skipped; every token
//! records its byte range so the input can be reconstructed exactly.

use std::fmt;
use std::ops::Range;

use super::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Str(String),
    Colon,
    Plus,
    Lt,
    Star,
    /// `→` or `->`
    Arrow,
    /// `↦` or `|->`
    MapsTo,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Equals,
    Newline,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::Colon => "`:`".to_string(),
            TokenKind::Plus => "`+`".to_string(),
            TokenKind::Lt => "`<`".to_string(),
            TokenKind::Star => "`*`".to_string(),
            TokenKind::Arrow => "`->`".to_string(),
            TokenKind::MapsTo => "`|->`".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::LBracket => "`[`".to_string(),
            TokenKind::RBracket => "`]`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
            TokenKind::Equals => "`=`".to_string(),
            TokenKind::Newline => "end of line".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte range of the lexeme in the input.
    pub range: Range<usize>,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn span(&self, file: &str) -> SourceSpan {
        SourceSpan { file: file.to_string(), line: self.line, column: self.column, length: self.range.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("{line}:{column}: unterminated string literal")]
    UnterminatedString { line: usize, column: usize, offset: usize },
    #[error("{line}:{column}: illegal character `{ch}`")]
    IllegalCharacter { ch: char, line: usize, column: usize, offset: usize },
}

impl LexError {
    pub fn position(&self) -> (usize, usize) {
        match *self {
            LexError::UnterminatedString { line, column, .. } | LexError::IllegalCharacter { line, column, .. } => {
                (line, column)
            }
        }
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek()?;
        self.pos += ch.len_utf8();
        if ch == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(ch)
    }
}

fn is_ident_start(ch: char) -> bool {
    ch.is_ascii_alphabetic() || ch == '_'
}

fn is_ident_continue(ch: char) -> bool {
    ch.is_ascii_alphanumeric() || ch == '_'
}

/// Tokenize `text`. Fails on the first lexical error.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { text, pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();

    while let Some(ch) = cur.peek() {
        let start = cur.pos;
        let (line, column) = (cur.line, cur.column);

        if ch == '\n' {
            cur.bump();
            tokens.push(Token { kind: TokenKind::Newline, range: start..cur.pos, line, column });
            continue;
        }
        if ch.is_whitespace() {
            cur.bump();
            continue;
        }
        if cur.rest().starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }

        let kind = if is_ident_start(ch) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            TokenKind::Ident(text[start..cur.pos].to_string())
        } else if ch == '"' || ch == '\'' {
            cur.bump();
            let body_start = cur.pos;
            loop {
                match cur.peek() {
                    Some(c) if c == ch => break,
                    Some('\n') | None => return Err(LexError::UnterminatedString { line, column, offset: start }),
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            let body = text[body_start..cur.pos].to_string();
            cur.bump();
            TokenKind::Str(body)
        } else if cur.rest().starts_with("->") {
            cur.bump();
            cur.bump();
            TokenKind::Arrow
        } else if cur.rest().starts_with("|->") {
            cur.bump();
            cur.bump();
            cur.bump();
            TokenKind::MapsTo
        } else {
            let kind = match ch {
                '→' => TokenKind::Arrow,
                '↦' => TokenKind::MapsTo,
                ':' => TokenKind::Colon,
                '+' => TokenKind::Plus,
                '<' => TokenKind::Lt,
                '*' => TokenKind::Star,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '[' => TokenKind::LBracket,
                ']' => TokenKind::RBracket,
                ',' => TokenKind::Comma,
                '=' => TokenKind::Equals,
                _ => {
                    return Err(LexError::IllegalCharacter { ch, line, column, offset: start });
                }
            };
            cur.bump();
            kind
        };
        tokens.push(Token { kind, range: start..cur.pos, line, column });
    }
    Ok(tokens)
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}
