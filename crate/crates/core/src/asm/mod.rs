//! QtASM: preprocessor, parser, emitter and optimizer.
//!
//! ```text
//! qubits 3
//! %define THETA 0.3
//! %for i = 0 to 2
//! ry($(i), THETA)      # one instruction per line
//! %endfor
//! loop:
//! meas(0, 1)
//! cif(1, 'x(2)')
//! ```

use std::fmt;

mod emit;
pub mod expr;
mod opt;
mod parse;
mod preprocess;

pub use emit::{emit, format_angle, instruction_text};
pub use opt::optimize;
pub use parse::parse_lines;
pub use preprocess::{expand, preprocess, SourceLine};

use crate::isa::Program;

#[derive(Clone, Debug, PartialEq)]
pub enum AsmErrorKind {
    MissingHeader,
    UnknownMnemonic(String),
    Arity {
        mnemonic: String,
        expected: String,
        got: usize,
    },
    QubitRange { qubit: usize, declared: usize },
    DuplicateQubit(usize),
    UndefinedLabel(String),
    DuplicateLabel(String),
    BadOperand(String),
    Expression(String),
    UnterminatedLoop,
    UnmatchedEndfor,
    BadDirective(String),
    Syntax(String),
    Program(String),
}

impl fmt::Display for AsmErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsmErrorKind::MissingHeader => write!(f, "expected `qubits N` header"),
            AsmErrorKind::UnknownMnemonic(m) => write!(f, "unknown mnemonic `{m}`"),
            AsmErrorKind::Arity {
                mnemonic,
                expected,
                got,
            } => write!(f, "`{mnemonic}` takes {expected} operands, got {got}"),
            AsmErrorKind::QubitRange { qubit, declared } => {
                write!(f, "qubit {qubit} out of range ({declared} declared)")
            }
            AsmErrorKind::DuplicateQubit(q) => write!(f, "qubit {q} repeated"),
            AsmErrorKind::UndefinedLabel(l) => write!(f, "undefined label `{l}`"),
            AsmErrorKind::DuplicateLabel(l) => write!(f, "label `{l}` defined twice"),
            AsmErrorKind::BadOperand(s) => write!(f, "bad operand: {s}"),
            AsmErrorKind::Expression(s) => write!(f, "expression: {s}"),
            AsmErrorKind::UnterminatedLoop => write!(f, "`%for` without `%endfor`"),
            AsmErrorKind::UnmatchedEndfor => write!(f, "`%endfor` without `%for`"),
            AsmErrorKind::BadDirective(s) => write!(f, "bad directive: {s}"),
            AsmErrorKind::Syntax(s) => write!(f, "syntax: {s}"),
            AsmErrorKind::Program(s) => write!(f, "{s}"),
        }
    }
}

/// A compile error at a 1-based source line and column.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct AsmError {
    pub line: usize,
    pub col: usize,
    pub kind: AsmErrorKind,
}

impl AsmError {
    pub fn new(line: usize, col: usize, kind: AsmErrorKind) -> Self {
        AsmError { line, col, kind }
    }
}

/// Preprocesses and parses QtASM source.
pub fn compile(source: &str) -> Result<Program, AsmError> {
    parse_lines(&expand(source)?)
}

/// Parses already-preprocessed text.
pub fn parse(text: &str) -> Result<Program, AsmError> {
    let lines: Vec<SourceLine> = text
        .lines()
        .enumerate()
        .map(|(i, l)| SourceLine {
            line: i + 1,
            text: l.trim_end_matches('\r').to_string(),
        })
        .collect();
    parse_lines(&lines)
}
