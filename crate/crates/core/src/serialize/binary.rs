//! Little-endian packed layout: `resume_idx` and every integer as a signed
//! 64-bit value, floats as IEEE-754 doubles, Bools as one byte, aggregates
//! field by field with no padding.

use std::sync::Arc;

use thiserror::Error;

use crate::program::Program;
use crate::runtime::Environment;
use crate::types::{ActId, Ty, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {reason}")]
pub struct DecodeError {
    pub offset: usize,
    pub reason: String,
}

pub fn to_binary(env: &Environment) -> Vec<u8> {
    let mut out = Vec::with_capacity(env.program().machines[env.act()].frame_size);
    encode(env.frame(), &mut out);
    out
}

fn encode(v: &Value, out: &mut Vec<u8>) {
    match v {
        Value::Void => {}
        Value::Bool(b) => out.push(*b as u8),
        Value::Int(n) => out.extend_from_slice(&n.to_le_bytes()),
        Value::Float(x) => out.extend_from_slice(&x.to_le_bytes()),
        Value::Array(items) | Value::Struct(items) => items.iter().for_each(|x| encode(x, out)),
    }
}

pub fn from_binary(program: &Arc<Program>, act: ActId, bytes: &[u8]) -> Result<Environment, DecodeError> {
    let expected = program.machines[act].frame_size;
    if bytes.len() != expected {
        return Err(DecodeError {
            offset: bytes.len().min(expected),
            reason: format!("expected {expected} bytes, found {}", bytes.len()),
        });
    }
    let mut d = Decoder {
        program,
        bytes,
        offset: 0,
    };
    let frame = d.value(&Ty::Class(program.module.acts[act].class))?;
    Ok(Environment::from_frame(program, act, frame).expect("decoder validated the frame"))
}

struct Decoder<'a> {
    program: &'a Program,
    bytes: &'a [u8],
    offset: usize,
}

impl Decoder<'_> {
    fn fail<T>(&self, at: usize, reason: String) -> Result<T, DecodeError> {
        Err(DecodeError { offset: at, reason })
    }

    fn word(&mut self) -> [u8; 8] {
        let w = self.bytes[self.offset..self.offset + 8].try_into().unwrap();
        self.offset += 8;
        w
    }

    fn value(&mut self, ty: &Ty) -> Result<Value, DecodeError> {
        let at = self.offset;
        Ok(match ty {
            Ty::Void => Value::Void,
            Ty::Bool => {
                let b = self.bytes[at];
                self.offset += 1;
                match b {
                    0 => Value::Bool(false),
                    1 => Value::Bool(true),
                    _ => return self.fail(at, format!("invalid Bool byte {b}")),
                }
            }
            Ty::Int => Value::Int(i64::from_le_bytes(self.word())),
            Ty::Float => Value::Float(f64::from_le_bytes(self.word())),
            Ty::Bounded { min, max } => {
                let n = i64::from_le_bytes(self.word());
                if n < *min || n > *max {
                    return self.fail(at, format!("value {n} is outside Int<{min},{max}>"));
                }
                Value::Int(n)
            }
            Ty::Array(elem, len) => {
                Value::Array((0..*len).map(|_| self.value(elem)).collect::<Result<_, _>>()?)
            }
            Ty::Class(c) => {
                let m = &self.program.module;
                let fields: Vec<Value> = m.classes[*c]
                    .fields
                    .iter()
                    .map(|f| self.value(&f.ty))
                    .collect::<Result<_, _>>()?;
                if let Some(act) = m.act_of_class(*c) {
                    let idx = fields[0].as_int();
                    let n = self.program.machines[act].points.len() as i64;
                    if idx != -1 && !(0..n).contains(&idx) {
                        return self.fail(
                            at,
                            format!("resume_idx {idx} is not -1 or a suspension index below {n}"),
                        );
                    }
                }
                Value::Struct(fields)
            }
        })
    }
}
