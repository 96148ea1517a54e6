//! Indentation-aware tokenizer.
//!
//! Newlines inside `()`, `[]` and `{}` are insignificant, so preconditions and
//! argument lists may span several lines. Blank and comment-only lines never
//! affect indentation.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    FloatLiteral,
    BoolLiteral,
    Operator,
    Punctuation,
    Indent,
    Dedent,
    Newline,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Identifier => "identifier",
            TokenKind::IntLiteral => "integer literal",
            TokenKind::FloatLiteral => "float literal",
            TokenKind::BoolLiteral => "bool literal",
            TokenKind::Operator => "operator",
            TokenKind::Punctuation => "punctuation",
            TokenKind::Indent => "indent",
            TokenKind::Dedent => "dedent",
            TokenKind::Newline => "newline",
            TokenKind::Eof => "end of file",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    /// Human-readable rendering for diagnostics.
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Indent | TokenKind::Dedent | TokenKind::Newline | TokenKind::Eof => {
                self.kind.to_string()
            }
            _ => format!("`{}`", self.text),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "act", "fun", "cls", "frm", "let", "if", "else", "while", "return", "and", "or", "not",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct LexError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    indents: Vec<u32>,
    nesting: u32,
    /// Whether the current logical line has produced a token yet.
    line_has_tokens: bool,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        indents: vec![0],
        nesting: 0,
        line_has_tokens: false,
    }
    .run()
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: u32, column: u32, message: impl Into<String>) -> LexError {
        LexError {
            line,
            column,
            message: message.into(),
        }
    }

    fn push(&mut self, kind: TokenKind, text: impl Into<String>, line: u32, column: u32) {
        self.tokens.push(Token {
            kind,
            text: text.into(),
            line,
            column,
        });
        if !matches!(kind, TokenKind::Newline | TokenKind::Indent | TokenKind::Dedent) {
            self.line_has_tokens = true;
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        self.start_line()?;
        while let Some(c) = self.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                '\n' => {
                    self.bump();
                    if self.nesting == 0 {
                        if self.line_has_tokens {
                            self.push(TokenKind::Newline, "", line, col);
                            self.line_has_tokens = false;
                        }
                        self.start_line()?;
                    }
                }
                '\r' if self.peek_at(1) == Some('\n') => {
                    self.bump();
                }
                ' ' => {
                    self.bump();
                }
                '\t' => return Err(self.error(line, col, "tab characters are not allowed")),
                '#' => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                c if c.is_ascii_digit() => self.number()?,
                c if c.is_alphabetic() || c == '_' => self.word(),
                _ => self.symbol()?,
            }
        }
        let (line, col) = (self.line, self.col);
        if self.nesting > 0 {
            return Err(self.error(line, col, "unclosed bracket at end of file"));
        }
        if self.line_has_tokens {
            self.push(TokenKind::Newline, "", line, col);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokenKind::Dedent, "", line, col);
        }
        self.push(TokenKind::Eof, "", line, col);
        Ok(self.tokens)
    }

    /// Measures indentation at the start of a physical line and emits
    /// INDENT/DEDENT tokens when the line carries code.
    fn start_line(&mut self) -> Result<(), LexError> {
        loop {
            let mut width = 0u32;
            while let Some(c) = self.peek() {
                match c {
                    ' ' => {
                        width += 1;
                        self.bump();
                    }
                    '\t' => {
                        return Err(self.error(self.line, self.col, "tab characters are not allowed"))
                    }
                    '\r' => {
                        self.bump();
                    }
                    _ => break,
                }
            }
            match self.peek() {
                None => return Ok(()),
                Some('\n') => {
                    self.bump();
                    continue;
                }
                Some('#') => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                    continue;
                }
                Some(_) => {}
            }
            let current = *self.indents.last().unwrap();
            let (line, col) = (self.line, self.col);
            if width > current {
                self.indents.push(width);
                self.push(TokenKind::Indent, "", line, col);
            } else if width < current {
                while *self.indents.last().unwrap() > width {
                    self.indents.pop();
                    self.push(TokenKind::Dedent, "", line, col);
                }
                if *self.indents.last().unwrap() != width {
                    return Err(self.error(line, col, "inconsistent indentation"));
                }
            }
            return Ok(());
        }
    }

    fn number(&mut self) -> Result<(), LexError> {
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        let mut is_float = false;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') {
            is_float = true;
            self.bump();
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(self.error(line, col, "unterminated float literal"));
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            is_float = true;
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(self.error(line, col, "unterminated float exponent"));
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if self.peek().is_some_and(|c| c.is_alphabetic() || c == '_') {
            return Err(self.error(self.line, self.col, "invalid character in numeric literal"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if is_float {
            if text.parse::<f64>().is_err() {
                return Err(self.error(line, col, format!("invalid float literal `{text}`")));
            }
            self.push(TokenKind::FloatLiteral, text, line, col);
        } else {
            if text.parse::<i64>().is_err() {
                return Err(self.error(line, col, format!("integer literal `{text}` out of range")));
            }
            self.push(TokenKind::IntLiteral, text, line, col);
        }
        Ok(())
    }

    fn word(&mut self) {
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.bump();
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let kind = if text == "true" || text == "false" {
            TokenKind::BoolLiteral
        } else if KEYWORDS.contains(&text.as_str()) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.push(kind, text, line, col);
    }

    fn symbol(&mut self) -> Result<(), LexError> {
        let (line, col) = (self.line, self.col);
        let c = self.peek().unwrap();
        let two: String = [Some(c), self.peek_at(1)].iter().flatten().collect();
        if matches!(two.as_str(), "->" | "==" | "!=" | "<=" | ">=") {
            self.bump();
            self.bump();
            self.push(TokenKind::Operator, two, line, col);
            return Ok(());
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '%' | '<' | '>' | '!' | '=' | '.' => TokenKind::Operator,
            '(' | '[' | '{' => {
                self.nesting += 1;
                TokenKind::Punctuation
            }
            ')' | ']' | '}' => {
                if self.nesting == 0 {
                    return Err(self.error(line, col, format!("unbalanced `{c}`")));
                }
                self.nesting -= 1;
                TokenKind::Punctuation
            }
            ',' | ':' => TokenKind::Punctuation,
            _ => return Err(self.error(line, col, format!("illegal character `{c}`"))),
        };
        self.bump();
        self.push(kind, c.to_string(), line, col);
        Ok(())
    }
}
