use super::lexer::{tokenize, LexError, Token, TokenKind};
use super::{ImportItem, RawModule, RawStatement, Rename, SourceSpan, StatementKind, SyntaxError, SyntaxErrorKind};

/// Parse a whole module. Errors are collected per statement; a bad line does
/// not stop the remaining lines from being checked.
pub fn parse(text: &str, file: &str) -> Result<RawModule, Vec<SyntaxError>> {
    let tokens = match tokenize(text) {
        Ok(tokens) => tokens,
        Err(err) => return Err(vec![lex_error(err, text, file)]),
    };
    let lines = logical_lines(&tokens);
    let mut errors = Vec::new();
    let mut lines = lines.into_iter();

    let header_line = match lines.next() {
        Some(line) => line,
        None => {
            return Err(vec![SyntaxError {
                kind: SyntaxErrorKind::MissingModuleHeader,
                span: SourceSpan { file: file.to_string(), line: 1, column: 1, length: 0 },
                message: "missing module header".to_string(),
                expected: Some("`module`".to_string()),
            }])
        }
    };
    let header = match parse_header(&header_line, file) {
        Ok(header) => Some(header),
        Err(err) => {
            errors.push(err);
            None
        }
    };

    let mut statements = Vec::new();
    for line in lines {
        match parse_statement(&line, file) {
            Ok(stmt) => statements.push(stmt),
            Err(err) => errors.push(err),
        }
    }

    match header {
        Some((name, imports, header_span)) if errors.is_empty() => {
            Ok(RawModule { name, file: file.to_string(), imports, statements, header_span })
        }
        _ => Err(errors),
    }
}

fn lex_error(err: LexError, text: &str, file: &str) -> SyntaxError {
    let (line, column) = err.position();
    match err {
        LexError::UnterminatedString { offset, .. } => {
            let end = text[offset..].find('\n').map_or(text.len(), |i| offset + i);
            SyntaxError {
                kind: SyntaxErrorKind::UnterminatedString,
                span: SourceSpan { file: file.to_string(), line, column, length: end - offset },
                message: "unterminated string literal".to_string(),
                expected: Some("closing quote".to_string()),
            }
        }
        LexError::IllegalCharacter { ch, .. } => SyntaxError {
            kind: SyntaxErrorKind::IllegalCharacter,
            span: SourceSpan { file: file.to_string(), line, column, length: ch.len_utf8() },
            message: format!("illegal character `{ch}`"),
            expected: None,
        },
    }
}

/// Split the token stream into statements. A newline ends a statement unless
/// it is nested in parentheses/brackets or directly follows `=`.
fn logical_lines(tokens: &[Token]) -> Vec<Vec<Token>> {
    let mut lines = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut depth = 0usize;
    for tok in tokens {
        match tok.kind {
            TokenKind::Newline => {
                let continues = depth > 0 || matches!(current.last().map(|t| &t.kind), Some(TokenKind::Equals));
                if !continues && !current.is_empty() {
                    lines.push(std::mem::take(&mut current));
                }
            }
            TokenKind::LParen | TokenKind::LBracket => {
                depth += 1;
                current.push(tok.clone());
            }
            TokenKind::RParen | TokenKind::RBracket => {
                depth = depth.saturating_sub(1);
                current.push(tok.clone());
            }
            _ => current.push(tok.clone()),
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

fn line_span(line: &[Token], file: &str) -> SourceSpan {
    let first = &line[0];
    let last = &line[line.len() - 1];
    SourceSpan {
        file: file.to_string(),
        line: first.line,
        column: first.column,
        length: last.range.end - first.range.start,
    }
}

struct LineParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    file: &'a str,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn error_here(&self, expected: &str) -> SyntaxError {
        match self.tokens.get(self.pos) {
            Some(tok) => SyntaxError {
                kind: SyntaxErrorKind::UnexpectedToken,
                span: tok.span(self.file),
                message: format!("unexpected {}, expected {expected}", tok.kind),
                expected: Some(expected.to_string()),
            },
            None => {
                let last = &self.tokens[self.tokens.len() - 1];
                SyntaxError {
                    kind: SyntaxErrorKind::UnexpectedToken,
                    span: SourceSpan {
                        file: self.file.to_string(),
                        line: last.line,
                        column: last.column + last.range.len(),
                        length: 0,
                    },
                    message: format!("unexpected end of line, expected {expected}"),
                    expected: Some(expected.to_string()),
                }
            }
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                self.pos += 1;
                Ok(name.clone())
            }
            _ => Err(self.error_here("identifier")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(TokenKind::Ident(name)) if name == word => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error_here(&format!("`{word}`"))),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), SyntaxError> {
        if self.peek() == Some(&kind) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(&kind.describe()))
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end(&self) -> Result<(), SyntaxError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.error_here("end of line"))
        }
    }
}

type Header = (String, Vec<ImportItem>, SourceSpan);

fn parse_header(line: &[Token], file: &str) -> Result<Header, SyntaxError> {
    let mut p = LineParser { tokens: line, pos: 0, file };
    if !matches!(p.peek(), Some(TokenKind::Ident(w)) if w == "module") {
        return Err(SyntaxError {
            kind: SyntaxErrorKind::MissingModuleHeader,
            span: line[0].span(file),
            message: "missing module header".to_string(),
            expected: Some("`module`".to_string()),
        });
    }
    p.keyword("module")?;
    let name = p.ident()?;
    let mut imports = Vec::new();
    if p.peek().is_some() {
        p.keyword("import")?;
        p.expect(TokenKind::LParen)?;
        loop {
            let start = p.pos;
            let module = p.ident()?;
            let mut renames = Vec::new();
            if p.eat(&TokenKind::LBracket) {
                loop {
                    let old = p.ident()?;
                    p.expect(TokenKind::Arrow)?;
                    let new = p.ident()?;
                    renames.push(Rename { old, new });
                    if !p.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                p.expect(TokenKind::RBracket)?;
            }
            let span = line_span(&line[start..p.pos], file);
            imports.push(ImportItem { module, renames, span });
            if !p.eat(&TokenKind::Comma) {
                break;
            }
        }
        p.expect(TokenKind::RParen)?;
    }
    p.end()?;
    Ok((name, imports, line_span(line, file)))
}

fn parse_statement(line: &[Token], file: &str) -> Result<RawStatement, SyntaxError> {
    let mut p = LineParser { tokens: line, pos: 0, file };
    let first = p.ident()?;
    let kind = match p.peek() {
        Some(TokenKind::Colon) => {
            p.pos += 1;
            let ty = p.ident()?;
            if p.eat(&TokenKind::Arrow) {
                let range = p.ident()?;
                StatementKind::FuncDecl { name: first, domain: ty, range }
            } else {
                let many = p.eat(&TokenKind::Plus);
                StatementKind::EntityDecl { name: first, ty, many }
            }
        }
        Some(TokenKind::Lt) => {
            p.pos += 1;
            let left = p.ident()?;
            if p.eat(&TokenKind::Star) {
                let right = p.ident()?;
                StatementKind::RelTypeDecl { name: first, left, right }
            } else {
                StatementKind::EntityTypeDecl { name: first, supertype: left }
            }
        }
        Some(TokenKind::LParen) => {
            p.pos += 1;
            let input = p.ident()?;
            p.expect(TokenKind::RParen)?;
            if !(p.eat(&TokenKind::MapsTo) || p.eat(&TokenKind::Arrow)) {
                return Err(p.error_here("`|->`"));
            }
            let output = p.ident()?;
            StatementKind::FuncApp { function: first, input, output }
        }
        Some(TokenKind::Equals) => {
            p.pos += 1;
            match p.peek() {
                Some(TokenKind::Str(uri)) => {
                    p.pos += 1;
                    StatementKind::Binding { subject: first, uri: uri.clone() }
                }
                _ => return Err(p.error_here("string")),
            }
        }
        Some(TokenKind::Ident(_)) => {
            let predicate = p.ident()?;
            let object = p.ident()?;
            StatementKind::RelStmt { subject: first, predicate, object }
        }
        _ => return Err(p.error_here("`:`, `<`, `(`, `=` or a relationship name")),
    };
    p.end()?;
    Ok(RawStatement { kind, span: line_span(line, file) })
}
