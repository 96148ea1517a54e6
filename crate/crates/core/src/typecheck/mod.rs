//! Name resolution, type checking and environment-class synthesis.
//!
//! Checking proceeds in fixed phases so the result is deterministic:
//! declared classes, then one synthesized class per act (in source order),
//! then function and method signatures, then act bodies in dependency
//! order, then function and method bodies.

mod body;
mod order;
mod purity;
pub mod tir;

use std::collections::HashMap;

use thiserror::Error;

pub use order::{order_actions, ActionCycleError};
pub use tir::*;

use crate::frontend::ast::{self, ActDecl, Item, Module, Pos, StmtKind, TypeExpr, TypeKind};
use crate::types::{ActId, ClassId, Ty};

/// Name of the generated frame field holding the pending suspension index.
pub const RESUME_FIELD: &str = "resume_idx";

const BUILTINS: &[&str] = &["float", "int"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct TypeError {
    pub pos: Pos,
    pub message: String,
}

impl TypeError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("{0}")]
    Type(#[from] TypeError),
    #[error("{0}")]
    Cycle(#[from] ActionCycleError),
}

impl CheckError {
    pub fn position(&self) -> Pos {
        match self {
            CheckError::Type(e) => e.pos,
            CheckError::Cycle(e) => e.pos,
        }
    }
}

pub(crate) type TResult<T> = Result<T, TypeError>;

/// Type checks a parsed module and synthesizes one class per act.
pub fn typecheck(module: &Module) -> Result<TypedModule, CheckError> {
    let mut cx = Checker::new();
    cx.declare_globals(module)?;
    cx.resolve_class_fields(module)?;
    cx.declare_functions(module)?;
    for (act_id, act) in module.actions().enumerate() {
        cx.declare_act_signature(act_id, act)?;
    }
    let ordered = order_actions(module)?;
    let act_ids: HashMap<&str, ActId> = module
        .actions()
        .enumerate()
        .map(|(i, a)| (a.name.name.as_str(), i))
        .collect();
    for act in ordered {
        let id = act_ids[act.name.name.as_str()];
        cx.module.action_order.push(id);
        synthesize_class(&mut cx, id, act)?;
    }
    cx.check_function_bodies(module)?;
    cx.check_class_containment()?;
    purity::analyze(&mut cx.module)?;
    Ok(cx.module)
}

/// Checks the body of `act`, appending its `frm` variables to the generated
/// class and recording its suspension points. The act's header (constructor
/// parameters and action signatures) must already be declared.
fn synthesize_class(cx: &mut Checker, act_id: ActId, act: &ActDecl) -> TResult<()> {
    let mut bx = body::BodyChecker::for_act(cx, act_id);
    let stmts = bx.check_block(&act.body)?;
    let n_slots = bx.n_slots();
    let info = &mut cx.module.acts[act_id];
    info.body = stmts;
    info.n_slots = n_slots;
    if info.points.is_empty() {
        return Err(TypeError::new(
            act.pos,
            format!(
                "act `{}` has no action statement; it would never suspend",
                act.name.name
            ),
        ));
    }
    Ok(())
}

pub(crate) struct Checker {
    pub(crate) module: TypedModule,
    /// Implementing function of each method, keyed by (class, name).
    pub(crate) methods: HashMap<(ClassId, String), tir::MethodSig>,
}

impl Checker {
    fn new() -> Self {
        Self {
            module: TypedModule {
                classes: Vec::new(),
                functions: Vec::new(),
                acts: Vec::new(),
                action_order: Vec::new(),
                globals: HashMap::new(),
            },
            methods: HashMap::new(),
        }
    }

    fn declare_globals(&mut self, module: &Module) -> TResult<()> {
        let mut seen: HashMap<String, Pos> = HashMap::new();
        let mut claim = |name: &ast::Ident| -> TResult<()> {
            if BUILTINS.contains(&name.name.as_str()) {
                return Err(TypeError::new(
                    name.pos,
                    format!("`{}` is a built-in function", name.name),
                ));
            }
            if let Some(prev) = seen.insert(name.name.clone(), name.pos) {
                return Err(TypeError::new(
                    name.pos,
                    format!("`{}` is already defined at {prev}", name.name),
                ));
            }
            Ok(())
        };
        for item in &module.items {
            claim(item.name())?;
            if let Item::Action(a) = item {
                claim(&a.class_name)?;
            }
        }
        // Declared classes get the lowest ids, synthesized ones follow.
        for c in module.classes() {
            let id = self.module.classes.len();
            self.module.classes.push(ClassInfo {
                name: c.name.name.clone(),
                fields: Vec::new(),
                origin: ClassOrigin::Declared,
                methods: Vec::new(),
                pos: c.pos,
            });
            self.module.globals.insert(c.name.name.clone(), Global::Class(id));
        }
        for (act_id, a) in module.actions().enumerate() {
            let id = self.module.classes.len();
            self.module.classes.push(ClassInfo {
                name: a.class_name.name.clone(),
                fields: vec![FieldInfo {
                    name: RESUME_FIELD.into(),
                    ty: Ty::Int,
                }],
                origin: ClassOrigin::Synthesized(act_id),
                methods: Vec::new(),
                pos: a.class_name.pos,
            });
            self.module
                .globals
                .insert(a.class_name.name.clone(), Global::Class(id));
            self.module.globals.insert(a.name.name.clone(), Global::Act(act_id));
            self.module.acts.push(ActInfo {
                name: a.name.name.clone(),
                class: id,
                params: Vec::new(),
                body: Vec::new(),
                n_slots: 0,
                points: Vec::new(),
                actions: Vec::new(),
                pos: a.pos,
            });
        }
        Ok(())
    }

    pub(crate) fn resolve_type(&self, t: &TypeExpr) -> TResult<Ty> {
        Ok(match &t.kind {
            TypeKind::Bool => Ty::Bool,
            TypeKind::Int => Ty::Int,
            TypeKind::Float => Ty::Float,
            TypeKind::BoundedInt { min, max } => {
                if min > max {
                    return Err(TypeError::new(
                        t.pos,
                        format!("empty integer range Int<{min},{max}>"),
                    ));
                }
                Ty::Bounded {
                    min: *min,
                    max: *max,
                }
            }
            TypeKind::Array { elem, len } => {
                if *len == 0 {
                    return Err(TypeError::new(t.pos, "array length must be at least 1"));
                }
                Ty::Array(Box::new(self.resolve_type(elem)?), *len as usize)
            }
            TypeKind::Named(n) => match self.module.globals.get(n) {
                Some(Global::Class(id)) => Ty::Class(*id),
                _ => return Err(TypeError::new(t.pos, format!("unknown type `{n}`"))),
            },
        })
    }

    fn resolve_params(&self, params: &[ast::Param]) -> TResult<Vec<(String, Ty)>> {
        let mut out: Vec<(String, Ty)> = Vec::new();
        for p in params {
            if out.iter().any(|(n, _)| *n == p.name.name) {
                return Err(TypeError::new(
                    p.name.pos,
                    format!("duplicate parameter `{}`", p.name.name),
                ));
            }
            out.push((p.name.name.clone(), self.resolve_type(&p.ty)?));
        }
        Ok(out)
    }

    fn resolve_class_fields(&mut self, module: &Module) -> TResult<()> {
        for (id, c) in module.classes().enumerate() {
            let fields = self.resolve_params(&c.fields)?;
            self.module.classes[id].fields = fields
                .into_iter()
                .map(|(name, ty)| FieldInfo { name, ty })
                .collect();
        }
        Ok(())
    }

    /// Allocates ids and signatures for free functions and methods.
    fn declare_functions(&mut self, module: &Module) -> TResult<()> {
        for f in module.functions() {
            let id = self.declare_function(f, None)?;
            self.module
                .globals
                .insert(f.name.name.clone(), Global::Function(id));
        }
        for (class_id, c) in module.classes().enumerate() {
            for m in &c.methods {
                if c.fields.iter().any(|fd| fd.name.name == m.name.name)
                    || self.methods.contains_key(&(class_id, m.name.name.clone()))
                {
                    return Err(TypeError::new(
                        m.name.pos,
                        format!("`{}` is already a member of `{}`", m.name.name, c.name.name),
                    ));
                }
                let id = self.declare_function(m, Some(class_id))?;
                let f = &self.module.functions[id];
                let sig = MethodSig {
                    name: f.name.clone(),
                    params: f.params.clone(),
                    ret: f.ret.clone(),
                    kind: MethodKind::UserFunction,
                    func: Some(id),
                };
                self.module.classes[class_id].methods.push(sig.clone());
                self.methods.insert((class_id, m.name.name.clone()), sig);
            }
        }
        Ok(())
    }

    fn declare_function(&mut self, f: &ast::FuncDecl, self_class: Option<ClassId>) -> TResult<usize> {
        let params = self.resolve_params(&f.params)?;
        let ret = match &f.ret {
            Some(t) => self.resolve_type(t)?,
            None => Ty::Void,
        };
        self.module.functions.push(FuncInfo {
            name: f.name.name.clone(),
            params,
            ret,
            body: Vec::new(),
            n_slots: 0,
            self_class,
            mutates_self: false,
            pos: f.pos,
        });
        Ok(self.module.functions.len() - 1)
    }

    /// Constructor parameters, action signatures and generated methods of
    /// an act's class. Frame variables are added later with the body.
    fn declare_act_signature(&mut self, act_id: ActId, act: &ActDecl) -> TResult<()> {
        let params = self.resolve_params(&act.params)?;
        let class_id = self.module.acts[act_id].class;
        for (name, ty) in &params {
            if name == RESUME_FIELD {
                return Err(TypeError::new(act.pos, "`resume_idx` is a reserved name"));
            }
            if *ty == Ty::Void {
                return Err(TypeError::new(act.pos, "act parameters cannot be Void"));
            }
            self.module.classes[class_id].fields.push(FieldInfo {
                name: name.clone(),
                ty: ty.clone(),
            });
        }
        self.module.acts[act_id].params = params;

        let mut actions: Vec<ActionSig> = Vec::new();
        let mut point_index = 0usize;
        let mut error = None;
        visit_action_stmts(&act.body, &mut |stmt_pos, a| {
            if error.is_some() {
                return;
            }
            let result = (|| -> TResult<()> {
                let params = self.resolve_params(&a.params)?;
                for (p, (name, ty)) in a.params.iter().zip(&params) {
                    if ty.domain_size().is_none() {
                        return Err(TypeError::new(
                            p.ty.pos,
                            format!(
                                "action parameter `{name}` must be Bool or a bounded Int<min,max> so actions can be enumerated, found {}",
                                self.module.type_name(ty)
                            ),
                        ));
                    }
                }
                match actions.iter_mut().find(|s| s.name == a.name.name) {
                    Some(sig) => {
                        let same = sig.params.len() == params.len()
                            && sig.params.iter().zip(&params).all(|(x, y)| x.1 == y.1);
                        if !same {
                            return Err(TypeError::new(
                                stmt_pos,
                                format!(
                                    "action `{}` is declared again with a different signature",
                                    a.name.name
                                ),
                            ));
                        }
                        sig.points.push(point_index);
                    }
                    None => actions.push(ActionSig {
                        name: a.name.name.clone(),
                        params,
                        points: vec![point_index],
                    }),
                }
                Ok(())
            })();
            if let Err(e) = result {
                error = Some(e);
            }
            point_index += 1;
        });
        if let Some(e) = error {
            return Err(e);
        }

        let mut methods = Vec::new();
        for sig in &actions {
            if sig.name == "is_done" || sig.name.starts_with("can_") {
                return Err(TypeError::new(
                    act.pos,
                    format!("action name `{}` clashes with a generated method", sig.name),
                ));
            }
            methods.push(MethodSig {
                name: format!("can_{}", sig.name),
                params: sig.params.clone(),
                ret: Ty::Bool,
                kind: MethodKind::CanPredicate,
                func: None,
            });
            methods.push(MethodSig {
                name: sig.name.clone(),
                params: sig.params.clone(),
                ret: Ty::Void,
                kind: MethodKind::ActionApply,
                func: None,
            });
        }
        methods.push(MethodSig {
            name: "is_done".into(),
            params: Vec::new(),
            ret: Ty::Bool,
            kind: MethodKind::IsDone,
            func: None,
        });
        self.module.classes[class_id].methods = methods;
        self.module.acts[act_id].actions = actions;
        Ok(())
    }

    fn check_function_bodies(&mut self, module: &Module) -> TResult<()> {
        let decls: Vec<&ast::FuncDecl> = module
            .functions()
            .chain(module.classes().flat_map(|c| c.methods.iter()))
            .collect();
        for (id, decl) in decls.into_iter().enumerate() {
            let mut bx = body::BodyChecker::for_function(self, id);
            let stmts = bx.check_block(&decl.body)?;
            let n_slots = bx.n_slots();
            let f = &mut self.module.functions[id];
            if f.ret != Ty::Void && !body::definitely_returns(&decl.body) {
                return Err(TypeError::new(
                    decl.pos,
                    format!("function `{}` may finish without returning a value", f.name),
                ));
            }
            f.body = stmts;
            f.n_slots = n_slots;
        }
        Ok(())
    }

    /// Rejects classes that contain themselves, which would make frames
    /// unbounded.
    fn check_class_containment(&self) -> TResult<()> {
        fn contains(m: &TypedModule, ty: &Ty, target: ClassId, depth: usize) -> bool {
            match ty {
                Ty::Array(e, _) => contains(m, e, target, depth),
                Ty::Class(id) if *id == target => true,
                Ty::Class(id) if depth < m.classes.len() => m.classes[*id]
                    .fields
                    .iter()
                    .any(|f| contains(m, &f.ty, target, depth + 1)),
                _ => false,
            }
        }
        for (id, c) in self.module.classes.iter().enumerate() {
            if c.fields.iter().any(|f| contains(&self.module, &f.ty, id, 0)) {
                return Err(TypeError::new(
                    c.pos,
                    format!("class `{}` contains itself; frames must have a fixed size", c.name),
                ));
            }
        }
        Ok(())
    }
}

/// Calls `f` on every action statement in lexical order.
pub(crate) fn visit_action_stmts(body: &[ast::Stmt], f: &mut dyn FnMut(Pos, &ast::ActionStmt)) {
    for s in body {
        match &s.kind {
            StmtKind::Action(a) => f(s.pos, a),
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                visit_action_stmts(then_body, f);
                visit_action_stmts(else_body, f);
            }
            StmtKind::While { body, .. } => visit_action_stmts(body, f),
            _ => {}
        }
    }
}
