use thiserror::Error;

/// Errors from formula construction, substitution and grammar checks.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("index variable `{0}` has no assigned value")]
    UnboundIndexVar(String),
    #[error("grammar violation: {0}")]
    GrammarViolation(String),
    #[error("relativizer violation: {0}")]
    RelativizerViolation(String),
    #[error("negation is undefined for this connective shape")]
    NegationShape,
}

/// Errors from text parsing (formulas, sequents, scripts, machine specs).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}
