//! Execution of lowered programs.

mod env;
mod eval;
mod reference;

use std::fmt;

use thiserror::Error;

pub use env::{check_value, run_function, score_function, Environment, TraceError};
pub use reference::{reference_step, ReferenceEnv};

use crate::frontend::ast::Pos;
use crate::types::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalLimits {
    /// Statements and loop tests executed per external call.
    pub max_steps_per_resume: u64,
    pub max_call_depth: usize,
}

impl Default for EvalLimits {
    fn default() -> Self {
        Self {
            max_steps_per_resume: 1_000_000,
            max_call_depth: 256,
        }
    }
}

/// A named action with concrete arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionValue {
    pub name: String,
    pub args: Vec<Value>,
}

impl ActionValue {
    pub fn new(name: impl Into<String>, args: Vec<Value>) -> Self {
        Self {
            name: name.into(),
            args,
        }
    }
}

/// `mark(0, 2)`, the syntax shared by trace files and the CLI.
impl fmt::Display for ActionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("value {value} is outside Int<{min},{max}>")]
    Range { value: i64, min: i64, max: i64 },
    #[error("index {index} is out of bounds for length {len}")]
    IndexOutOfBounds { index: i64, len: usize },
    #[error("float {0} cannot be converted to Int")]
    Conversion(String),
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
    #[error("call depth limit of {0} exceeded")]
    CallDepth(usize),
    #[error("action `{action}` is not applicable")]
    Precondition { action: String },
    #[error("{0}")]
    Internal(String),
}

impl RuntimeErrorKind {
    /// Stable short name used in diagnostics and the serve protocol.
    pub fn name(&self) -> &'static str {
        match self {
            RuntimeErrorKind::DivisionByZero => "division-by-zero",
            RuntimeErrorKind::Overflow => "overflow",
            RuntimeErrorKind::Range { .. } => "range",
            RuntimeErrorKind::IndexOutOfBounds { .. } => "index-out-of-bounds",
            RuntimeErrorKind::Conversion(_) => "conversion",
            RuntimeErrorKind::StepLimit(_) => "step-limit",
            RuntimeErrorKind::CallDepth(_) => "call-depth",
            RuntimeErrorKind::Precondition { .. } => "precondition",
            RuntimeErrorKind::Internal(_) => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("action `{action}` is not applicable at suspension index {resume_idx}")]
    PreconditionViolated { action: String, resume_idx: i64 },
    #[error("unknown act `{0}`")]
    UnknownAct(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{name}` must be {expected}")]
    TypeMismatch {
        name: String,
        index: usize,
        expected: String,
    },
    #[error("environment is poisoned by an earlier runtime error")]
    Poisoned,
    #[error("runtime error at {0}")]
    Runtime(#[from] RuntimeError),
    #[error("{0}")]
    Path(String),
    #[error("{0}")]
    Range(String),
}

impl EnvError {
    pub fn kind(&self) -> &'static str {
        match self {
            EnvError::PreconditionViolated { .. } => "precondition",
            EnvError::UnknownAct(_)
            | EnvError::UnknownAction(_)
            | EnvError::UnknownFunction(_) => "unknown",
            EnvError::Arity { .. } => "arity",
            EnvError::TypeMismatch { .. } => "type",
            EnvError::Poisoned => "poisoned",
            EnvError::Runtime(e) => e.kind.name(),
            EnvError::Path(_) => "path",
            EnvError::Range(_) => "range",
        }
    }
}
