//! Observation tensors: a flat float encoding of a frame.
//!
//! Bools take one float, bounded integers a one-hot group, unbounded
//! integers and floats their raw value. The `resume_idx` of every act frame
//! is a one-hot group with one slot per suspension point plus a final
//! "finished" slot.

use std::ops::Range;

use crate::program::Program;
use crate::runtime::Environment;
use crate::types::{ActId, Ty, Value};

/// Floats needed to encode a value of `ty`.
pub fn value_tensor_width(program: &Program, ty: &Ty) -> usize {
    let m = &program.module;
    match ty {
        Ty::Void => 0,
        Ty::Bool | Ty::Int | Ty::Float => 1,
        Ty::Bounded { min, max } => (max - min + 1) as usize,
        Ty::Array(elem, len) => value_tensor_width(program, elem) * len,
        Ty::Class(c) => {
            let fields = &m.classes[*c].fields;
            match m.act_of_class(*c) {
                Some(act) => {
                    program.machines[act].points.len()
                        + 1
                        + fields[1..]
                            .iter()
                            .map(|f| value_tensor_width(program, &f.ty))
                            .sum::<usize>()
                }
                None => fields.iter().map(|f| value_tensor_width(program, &f.ty)).sum(),
            }
        }
    }
}

pub fn tensor_size(program: &Program, act: ActId) -> usize {
    value_tensor_width(program, &Ty::Class(program.module.acts[act].class))
}

/// The observer is accepted for interface compatibility; the default
/// encoding shows every observer the whole state.
pub fn observation_tensor(env: &Environment, _observer: usize) -> Vec<f64> {
    let program = env.program();
    let mut out = Vec::with_capacity(tensor_size(program, env.act()));
    let ty = Ty::Class(program.module.acts[env.act()].class);
    encode(program, &ty, env.frame(), &mut out, &mut |_| {});
    out
}

/// Position of a one-hot group within a tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotGroup(pub Range<usize>);

impl OneHotGroup {
    /// Ranges of every one-hot group of an act's tensor, in order.
    pub fn all(env: &Environment) -> Vec<OneHotGroup> {
        let program = env.program();
        let ty = Ty::Class(program.module.acts[env.act()].class);
        let mut groups = Vec::new();
        let mut sink = Vec::new();
        encode(program, &ty, env.frame(), &mut sink, &mut |r| groups.push(OneHotGroup(r)));
        groups
    }
}

fn one_hot(out: &mut Vec<f64>, width: usize, hot: usize, group: &mut dyn FnMut(Range<usize>)) {
    let start = out.len();
    out.extend((0..width).map(|i| if i == hot { 1.0 } else { 0.0 }));
    group(start..out.len());
}

fn encode(program: &Program, ty: &Ty, v: &Value, out: &mut Vec<f64>, group: &mut dyn FnMut(Range<usize>)) {
    let m = &program.module;
    match (ty, v) {
        (Ty::Bool, Value::Bool(b)) => out.push(if *b { 1.0 } else { 0.0 }),
        (Ty::Int, Value::Int(n)) => out.push(*n as f64),
        (Ty::Float, Value::Float(x)) => out.push(*x),
        (Ty::Bounded { min, max }, Value::Int(n)) => {
            one_hot(out, (max - min + 1) as usize, (n - min) as usize, group)
        }
        (Ty::Array(elem, _), Value::Array(items)) => {
            items.iter().for_each(|x| encode(program, elem, x, out, group))
        }
        (Ty::Class(c), Value::Struct(fields)) => {
            let info = &m.classes[*c];
            let mut rest = info.fields.iter().zip(fields);
            if let Some(act) = m.act_of_class(*c) {
                let n = program.machines[act].points.len();
                let idx = fields[0].as_int();
                let hot = if idx < 0 { n } else { idx as usize };
                one_hot(out, n + 1, hot, group);
                rest.next();
            }
            for (f, x) in rest {
                encode(program, &f.ty, x, out, group);
            }
        }
        (t, v) => unreachable!("value {v:?} does not match {t:?}"),
    }
}
