//! Resolved types and runtime values shared by every stage after parsing.

use std::fmt;

pub type ClassId = usize;
pub type FuncId = usize;
pub type ActId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    /// Result type of functions without `-> T`.
    Void,
    Bool,
    Int,
    Float,
    /// Inclusive range.
    Bounded { min: i64, max: i64 },
    Array(Box<Ty>, usize),
    Class(ClassId),
}

impl Ty {
    pub fn is_integer(&self) -> bool {
        matches!(self, Ty::Int | Ty::Bounded { .. })
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Ty::Bool | Ty::Int | Ty::Float | Ty::Bounded { .. })
    }

    /// Number of values in the domain of an enumerable action parameter.
    pub fn domain_size(&self) -> Option<u64> {
        match self {
            Ty::Bool => Some(2),
            Ty::Bounded { min, max } => Some((*max as i128 - *min as i128 + 1) as u64),
            _ => None,
        }
    }

    /// The `i`-th value of an enumerable domain, in ascending order
    /// (`false` before `true`).
    pub fn domain_value(&self, i: u64) -> Option<Value> {
        match self {
            Ty::Bool if i < 2 => Some(Value::Bool(i == 1)),
            Ty::Bounded { min, .. } if i < self.domain_size()? => Some(Value::Int(min + i as i64)),
            _ => None,
        }
    }
}

/// Runtime value. Classes are plain field vectors; the static type decides
/// which class a `Struct` belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Void,
    Bool(bool),
    Int(i64),
    Float(f64),
    Array(Vec<Value>),
    Struct(Vec<Value>),
}

impl Value {
    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("expected Bool, found {other:?}"),
        }
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            other => panic!("expected Int, found {other:?}"),
        }
    }

    pub fn as_float(&self) -> f64 {
        match self {
            Value::Float(v) => *v,
            other => panic!("expected Float, found {other:?}"),
        }
    }

    /// Equality that compares floats bit-for-bit, so NaN payloads and signed
    /// zeros are distinguished.
    pub fn identical(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Array(a), Value::Array(b)) | (Value::Struct(a), Value::Struct(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.identical(y))
            }
            (a, b) => a == b,
        }
    }
}

/// Compact rendering used for action arguments and return values.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Void => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Array(items) | Value::Struct(items) => {
                let open = if matches!(self, Value::Array(_)) { "[" } else { "{" };
                let close = if open == "[" { "]" } else { "}" };
                f.write_str(open)?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(close)
            }
        }
    }
}
