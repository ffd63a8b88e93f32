//! MiniC frontend: lexer, recursive-descent parser and type checker.
//!
//! MiniC is a small C-like language with `int` (fixed-width, two's
//! complement), `bool` and `void` function results, `if`/`while` control
//! flow, `assert`/`assume` statements and the nondeterministic input
//! builtins `nondet_int()`/`nondet_bool()`. There are no arrays, pointers,
//! structs, floats or strings.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod token;
pub mod typeck;

use std::fmt;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Loc {
        Loc { line, col }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("lex error at {line}:{column}: {message}")]
    Lex {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("parse error at {line}:{column}: expected {expected}, found {found}")]
    Parse {
        line: u32,
        column: u32,
        expected: String,
        found: String,
    },
    #[error("type error at {line}:{column}: {message}")]
    Type {
        line: u32,
        column: u32,
        message: String,
    },
}

/// Non-fatal frontend diagnostics (e.g. possible read-before-assignment).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub loc: Loc,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: {} (at {})", self.message, self.loc)
    }
}

/// Full pipeline: source text to type-checked AST plus warnings.
pub fn parse_program(source: &str) -> Result<(ast::Ast, Vec<Warning>), FrontendError> {
    let tokens = lexer::tokenize(source)?;
    let ast = parser::parse(&tokens)?;
    let warnings = typeck::check(&ast)?;
    Ok((ast, warnings))
}
