//! Source text to syntax tree: tokenizer, parser and canonical printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::Module as ModuleAst;
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use pretty::pretty_print;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn position(&self) -> ast::Pos {
        match self {
            SyntaxError::Lex(e) => ast::Pos::new(e.line, e.column),
            SyntaxError::Parse(e) => ast::Pos::new(e.line, e.column),
        }
    }
}

/// Tokenizes and parses `source` in one step.
pub fn parse_source(source: &str) -> Result<ModuleAst, SyntaxError> {
    let tokens = tokenize(source)?;
    Ok(parse(&tokens)?)
}
