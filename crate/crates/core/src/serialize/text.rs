//! Readable state text: `{resume_idx: 0, board: {cells: [0, 0], ...}}`.

use std::sync::Arc;

use thiserror::Error;

use crate::program::Program;
use crate::runtime::{check_value, Environment};
use crate::types::{ActId, Ty, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("character {offset}: {message}")]
pub struct TextError {
    pub offset: usize,
    pub message: String,
}

pub fn to_text(env: &Environment) -> String {
    let m = &env.program().module;
    let mut out = String::new();
    render(m, &Ty::Class(m.acts[env.act()].class), env.frame(), &mut out);
    out
}

fn render(m: &crate::typecheck::TypedModule, ty: &Ty, v: &Value, out: &mut String) {
    match (ty, v) {
        (Ty::Class(c), Value::Struct(fields)) => {
            out.push('{');
            for (i, (f, x)) in m.classes[*c].fields.iter().zip(fields).enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&f.name);
                out.push_str(": ");
                render(m, &f.ty, x, out);
            }
            out.push('}');
        }
        (Ty::Array(elem, _), Value::Array(items)) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                render(m, elem, x, out);
            }
            out.push(']');
        }
        (_, v) => out.push_str(&v.to_string()),
    }
}

pub fn from_text(program: &Arc<Program>, act: ActId, text: &str) -> Result<Environment, TextError> {
    let mut p = Parser {
        program,
        src: text.as_bytes(),
        pos: 0,
    };
    let ty = Ty::Class(program.module.acts[act].class);
    let frame = p.value(&ty)?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.fail("unexpected text after the state");
    }
    if let Err(message) = check_value(program, &ty, &frame) {
        return Err(TextError { offset: 0, message });
    }
    Ok(Environment::from_frame(program, act, frame).expect("frame was validated"))
}

struct Parser<'a> {
    program: &'a Program,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, TextError> {
        Err(TextError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), TextError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{}`", c as char))
        }
    }

    /// A run of characters that can make up a scalar or a name.
    fn atom(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || b"_+-.".contains(&self.src[self.pos]))
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn value(&mut self, ty: &Ty) -> Result<Value, TextError> {
        match ty {
            Ty::Void => Ok(Value::Void),
            Ty::Bool => {
                let start = self.pos;
                match self.atom() {
                    "true" => Ok(Value::Bool(true)),
                    "false" => Ok(Value::Bool(false)),
                    _ => {
                        self.pos = start;
                        self.skip_ws();
                        self.fail("expected `true` or `false`")
                    }
                }
            }
            Ty::Int | Ty::Bounded { .. } => {
                let start = self.pos;
                let a = self.atom();
                match a.parse::<i64>() {
                    Ok(n) => Ok(Value::Int(n)),
                    Err(_) => {
                        self.pos = start;
                        self.skip_ws();
                        self.fail("expected an integer")
                    }
                }
            }
            Ty::Float => {
                let start = self.pos;
                let a = self.atom();
                match a.parse::<f64>() {
                    Ok(x) => Ok(Value::Float(x)),
                    Err(_) => {
                        self.pos = start;
                        self.skip_ws();
                        self.fail("expected a float")
                    }
                }
            }
            Ty::Array(elem, len) => {
                self.expect(b'[')?;
                let mut items = Vec::with_capacity(*len);
                for i in 0..*len {
                    if i > 0 {
                        self.expect(b',')?;
                    }
                    items.push(self.value(elem)?);
                }
                self.expect(b']')?;
                Ok(Value::Array(items))
            }
            Ty::Class(c) => {
                self.expect(b'{')?;
                let class = self.program.module.class(*c);
                let mut fields = Vec::with_capacity(class.fields.len());
                for (i, f) in class.fields.iter().enumerate() {
                    if i > 0 {
                        self.expect(b',')?;
                    }
                    let start = self.pos;
                    if self.atom() != f.name {
                        self.pos = start;
                        self.skip_ws();
                        return self.fail(format!("expected field `{}`", f.name));
                    }
                    self.expect(b':')?;
                    fields.push(self.value(&f.ty)?);
                }
                self.expect(b'}')?;
                Ok(Value::Struct(fields))
            }
        }
    }
}
