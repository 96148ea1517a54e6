//! Machine-readable description of a program's classes and acts, for
//! bindings generated outside this crate.

use serde::Serialize;

use crate::lowering::{byte_size, class_layout};
use crate::program::Program;
use crate::serialize::tensor_size;
use crate::typecheck::{ClassOrigin, MethodKind};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Idl {
    pub classes: Vec<ClassIdl>,
    pub acts: Vec<ActIdl>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassIdl {
    pub name: String,
    /// `declared`, or the act the class was synthesized from.
    pub origin: String,
    pub size: usize,
    pub fields: Vec<FieldIdl>,
    pub methods: Vec<MethodIdl>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FieldIdl {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub offset: usize,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MethodIdl {
    pub name: String,
    pub kind: &'static str,
    pub params: Vec<ParamIdl>,
    pub returns: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ParamIdl {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ActIdl {
    pub name: String,
    pub class: String,
    pub frame_size: usize,
    pub tensor_size: usize,
    pub suspension_points: Vec<PointIdl>,
    /// Index in this list is the action's table index.
    pub action_table: Vec<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PointIdl {
    pub index: usize,
    pub action: String,
    pub params: Vec<ParamIdl>,
}

pub fn describe(program: &Program) -> Idl {
    let m = &program.module;
    let classes = m
        .classes
        .iter()
        .enumerate()
        .map(|(id, c)| ClassIdl {
            name: c.name.clone(),
            origin: match c.origin {
                ClassOrigin::Declared => "declared".into(),
                ClassOrigin::Synthesized(act) => format!("act {}", m.acts[act].name),
            },
            size: byte_size(m, &crate::types::Ty::Class(id)),
            fields: class_layout(m, id)
                .into_iter()
                .map(|e| FieldIdl {
                    size: byte_size(m, &e.ty),
                    ty: m.type_name(&e.ty),
                    name: e.name,
                    offset: e.offset,
                })
                .collect(),
            methods: c
                .methods
                .iter()
                .map(|s| MethodIdl {
                    name: s.name.clone(),
                    kind: match s.kind {
                        MethodKind::CanPredicate => "can",
                        MethodKind::ActionApply => "action",
                        MethodKind::IsDone => "is_done",
                        MethodKind::UserFunction => "function",
                    },
                    params: params(program, &s.params),
                    returns: m.type_name(&s.ret),
                })
                .collect(),
        })
        .collect();
    let acts = m
        .acts
        .iter()
        .enumerate()
        .map(|(id, a)| {
            let machine = program.machine(id);
            ActIdl {
                name: a.name.clone(),
                class: m.classes[a.class].name.clone(),
                frame_size: machine.frame_size,
                tensor_size: tensor_size(program, id),
                suspension_points: a
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| PointIdl {
                        index: i,
                        action: p.name.clone(),
                        params: p
                            .params
                            .iter()
                            .map(|q| ParamIdl {
                                name: q.name.clone(),
                                ty: m.type_name(&q.ty),
                            })
                            .collect(),
                    })
                    .collect(),
                action_table: program.action_table(id).iter().map(|a| a.to_string()).collect(),
            }
        })
        .collect();
    Idl { classes, acts }
}

fn params(program: &Program, ps: &[(String, crate::types::Ty)]) -> Vec<ParamIdl> {
    ps.iter()
        .map(|(n, t)| ParamIdl {
            name: n.clone(),
            ty: program.module.type_name(t),
        })
        .collect()
}

/// Pretty JSON with keys in declaration order, which is fixed.
pub fn to_json(program: &Program) -> String {
    serde_json::to_string_pretty(&describe(program)).expect("idl serializes")
}
