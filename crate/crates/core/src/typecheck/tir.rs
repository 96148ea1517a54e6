//! Typed intermediate representation produced by the type checker.
//!
//! Names are resolved to slots, field indices and ids; every expression
//! carries its [`Ty`].

use std::collections::HashMap;

use crate::frontend::ast::{BinaryOp, Pos, UnaryOp};
use crate::types::{ActId, ClassId, FuncId, Ty, Value};

#[derive(Debug, Clone)]
pub struct TypedModule {
    pub classes: Vec<ClassInfo>,
    pub functions: Vec<FuncInfo>,
    pub acts: Vec<ActInfo>,
    /// Acts in dependency order: callees before callers.
    pub action_order: Vec<ActId>,
    pub(crate) globals: HashMap<String, Global>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Global {
    Function(FuncId),
    Act(ActId),
    Class(ClassId),
}

impl TypedModule {
    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn act_by_name(&self, name: &str) -> Option<ActId> {
        match self.globals.get(name) {
            Some(Global::Act(id)) => Some(*id),
            _ => None,
        }
    }

    /// Free (non-method) function by name.
    pub fn function_by_name(&self, name: &str) -> Option<FuncId> {
        match self.globals.get(name) {
            Some(Global::Function(id)) => Some(*id),
            _ => None,
        }
    }

    pub fn class(&self, id: ClassId) -> &ClassInfo {
        &self.classes[id]
    }

    /// Act whose synthesized class is `class`, if any.
    pub fn act_of_class(&self, class: ClassId) -> Option<ActId> {
        match self.classes[class].origin {
            ClassOrigin::Synthesized(act) => Some(act),
            ClassOrigin::Declared => None,
        }
    }

    /// Renders a type using class names.
    pub fn type_name(&self, ty: &Ty) -> String {
        match ty {
            Ty::Void => "Void".into(),
            Ty::Bool => "Bool".into(),
            Ty::Int => "Int".into(),
            Ty::Float => "Float".into(),
            Ty::Bounded { min, max } => format!("Int<{min},{max}>"),
            Ty::Array(elem, len) => format!("{}[{len}]", self.type_name(elem)),
            Ty::Class(id) => self.classes[*id].name.clone(),
        }
    }

    /// Zero value of a type: integers clamp 0 into their range, Bools are
    /// false, aggregates are filled recursively.
    pub fn default_value(&self, ty: &Ty) -> Value {
        match ty {
            Ty::Void => Value::Void,
            Ty::Bool => Value::Bool(false),
            Ty::Int => Value::Int(0),
            Ty::Float => Value::Float(0.0),
            Ty::Bounded { min, max } => Value::Int(0.clamp(*min, *max)),
            Ty::Array(elem, len) => Value::Array(vec![self.default_value(elem); *len]),
            Ty::Class(id) => Value::Struct(
                self.classes[*id]
                    .fields
                    .iter()
                    .map(|f| self.default_value(&f.ty))
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassOrigin {
    Declared,
    Synthesized(ActId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldInfo {
    pub name: String,
    pub ty: Ty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    CanPredicate,
    ActionApply,
    IsDone,
    UserFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSig {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub kind: MethodKind,
    /// Implementing function for user methods.
    pub func: Option<FuncId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    pub name: String,
    pub fields: Vec<FieldInfo>,
    pub origin: ClassOrigin,
    pub methods: Vec<MethodSig>,
    pub pos: Pos,
}

impl ClassInfo {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodSig> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct FuncInfo {
    pub name: String,
    /// Parameters occupy slots `0..params.len()`.
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub body: Vec<TStmt>,
    pub n_slots: usize,
    /// Receiver class for methods.
    pub self_class: Option<ClassId>,
    /// Whether calling this method may write through `self`.
    pub mutates_self: bool,
    pub pos: Pos,
}

/// One distinct action name of an act, possibly shared by several
/// suspension points with the same signature.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSig {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub points: Vec<usize>,
}

impl ActionSig {
    /// Size of the Cartesian product of the parameter domains.
    pub fn domain_size(&self) -> u64 {
        self.params
            .iter()
            .map(|(_, t)| t.domain_size().unwrap_or(0))
            .product()
    }

    /// The `i`-th argument tuple, first parameter most significant.
    pub fn domain_args(&self, mut i: u64) -> Vec<Value> {
        let mut args = vec![Value::Void; self.params.len()];
        for (slot, (_, ty)) in args.iter_mut().zip(&self.params).rev() {
            let n = ty.domain_size().unwrap_or(1);
            *slot = ty.domain_value(i % n).expect("enumerable parameter");
            i /= n;
        }
        args
    }
}

#[derive(Debug, Clone)]
pub struct PointParam {
    pub name: String,
    pub ty: Ty,
    pub slot: usize,
}

/// A typed action statement.
#[derive(Debug, Clone)]
pub struct PointInfo {
    pub name: String,
    /// Index into [`ActInfo::actions`].
    pub action: usize,
    pub params: Vec<PointParam>,
    pub preconditions: Vec<TExpr>,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct ActInfo {
    pub name: String,
    pub class: ClassId,
    /// Constructor parameters; stored in frame fields `1..=params.len()`.
    pub params: Vec<(String, Ty)>,
    pub body: Vec<TStmt>,
    pub n_slots: usize,
    /// Suspension points in lexical order.
    pub points: Vec<PointInfo>,
    pub actions: Vec<ActionSig>,
    pub pos: Pos,
}

impl ActInfo {
    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct TStmt {
    pub kind: TStmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub enum TStmtKind {
    Let {
        slot: usize,
        init: TExpr,
    },
    /// `frm` declaration: (re)initializes a frame field.
    FrameInit {
        field: usize,
        init: TExpr,
    },
    Assign {
        place: TPlace,
        value: TExpr,
    },
    If {
        cond: TExpr,
        then_body: Vec<TStmt>,
        else_body: Vec<TStmt>,
    },
    While {
        cond: TExpr,
        body: Vec<TStmt>,
    },
    Return(Option<TExpr>),
    /// Suspension at the given point index.
    Action(usize),
    Expr(TExpr),
}

#[derive(Debug, Clone)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: Ty,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    BoolToInt,
    IntToFloat,
    FloatToInt,
    /// Runtime check that an integer lies in `[min, max]`.
    CheckRange { min: i64, max: i64 },
}

#[derive(Debug, Clone)]
pub enum TExprKind {
    Lit(Value),
    Read(TPlace),
    /// Field of a non-place value.
    Field(Box<TExpr>, usize),
    /// Element of a non-place array value.
    Index(Box<TExpr>, Box<TExpr>),
    Unary(UnaryOp, Box<TExpr>),
    Binary(BinaryOp, Box<TExpr>, Box<TExpr>),
    Convert(Conversion, Box<TExpr>),
    Call(FuncId, Vec<TExpr>),
    /// Free constructor generated for an act.
    Construct(ActId, Vec<TExpr>),
    Method {
        recv: Receiver,
        func: FuncId,
        args: Vec<TExpr>,
    },
    CanApply {
        recv: Receiver,
        act: ActId,
        action: usize,
        args: Vec<TExpr>,
    },
    Apply {
        recv: Receiver,
        act: ActId,
        action: usize,
        args: Vec<TExpr>,
    },
    IsDone(Receiver),
}

#[derive(Debug, Clone)]
pub enum Receiver {
    Place(TPlace),
    Value(Box<TExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceRoot {
    Local(usize),
    /// The method receiver, or the frame inside an act body.
    This,
}

#[derive(Debug, Clone)]
pub enum Projection {
    Field(usize),
    Index { index: TExpr, len: usize },
}

#[derive(Debug, Clone)]
pub struct TPlace {
    pub root: PlaceRoot,
    pub projections: Vec<Projection>,
}
