use std::path::PathBuf;

use thiserror::Error;

use crate::model::value::ValueKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("cannot compare {left} with {right}")]
    Mismatch { left: ValueKind, right: ValueKind },
    #[error("values are unordered (NaN)")]
    Unordered,
    #[error("expected a number or timestamp, found {0}")]
    NotNumeric(ValueKind),
    #[error("expected a boolean, found {0}")]
    NotBoolean(ValueKind),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
}

impl SpecError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("spec is not valid: {0}")]
    Invalid(String),
    #[error("timer filter on `{selection}` references undeclared parameter `{param}`")]
    UndeclaredParam { selection: String, param: String },
    #[error("tweening requires a key field for a discrete time domain")]
    MissingKey,
    #[error("graph verification failed: {0}")]
    Verify(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TweenError {
    #[error("duplicate key {key} in {side} keyframe")]
    DuplicateKey { key: String, side: &'static str },
    #[error("key field `{0}` missing from keyframe table")]
    MissingKey(String),
    #[error("tween fraction {0} outside [0, 1]")]
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("unknown widget `{0}`")]
    UnknownWidget(String),
    #[error("dataset field `{0}` required by the graph is missing")]
    MissingField(String),
    #[error("graph is not valid: {0}")]
    Graph(String),
    #[error("invalid widget value for `{widget}`: {message}")]
    WidgetValue { widget: String, message: String },
    #[error("negative time step {0}")]
    NegativeStep(f64),
}
