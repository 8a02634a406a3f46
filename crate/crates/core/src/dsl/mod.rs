//! The shape-program language: AST, text format, validation and retargeting.
//!
//! A program is an object header followed by one statement per part:
//!
//! ```text
//! # object: table
//! # category: table
//! # part_0: top
//! create_primitive(kind="cube", location=(0, 0, 0.9), rotation=(1, 0, 0, 0), scale=(1, 0.6, 0.05))
//! ```

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod retarget;
pub mod validate;

pub use ast::*;
pub use parser::{parse_program, parse_shape, parse_unvalidated};
pub use printer::{format_number, print_program, print_shape, quantize};
pub use retarget::retarget_statement;
pub use validate::{validate_program, validate_program_with, ValidateOptions};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("parse error at {0}")]
    Parse(Diagnostic),
    #[error("invalid program: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Diagnostic>),
}

impl DslError {
    /// First diagnostic, for reporting a position.
    pub fn first(&self) -> Option<&Diagnostic> {
        match self {
            DslError::Parse(d) => Some(d),
            DslError::Validation(ds) => ds.first(),
        }
    }
}
