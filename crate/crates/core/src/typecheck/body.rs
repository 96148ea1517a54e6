//! Statement and expression checking for function, method and act bodies.

use super::tir::*;
use super::{Checker, TResult, TypeError, RESUME_FIELD};
use crate::frontend::ast::{self, BinaryOp, Expr, ExprKind, Pos, Stmt, StmtKind, UnaryOp};
use crate::types::{ActId, ClassId, FuncId, Ty, Value};

#[derive(Debug, Clone, Copy)]
enum BindingKind {
    Local(usize),
    Frame(usize),
}

#[derive(Debug, Clone)]
struct Binding {
    name: String,
    kind: BindingKind,
    ty: Ty,
    /// Set for locals once a suspension point may separate them from a use.
    dead: bool,
}

enum Mode {
    Function {
        ret: Ty,
        self_class: Option<ClassId>,
    },
    Act {
        id: ActId,
        class: ClassId,
    },
}

pub(crate) struct BodyChecker<'c> {
    cx: &'c mut Checker,
    mode: Mode,
    scopes: Vec<Vec<Binding>>,
    n_slots: usize,
}

impl<'c> BodyChecker<'c> {
    pub(crate) fn for_function(cx: &'c mut Checker, id: FuncId) -> Self {
        let f = &cx.module.functions[id];
        let params: Vec<Binding> = f
            .params
            .iter()
            .enumerate()
            .map(|(i, (name, ty))| Binding {
                name: name.clone(),
                kind: BindingKind::Local(i),
                ty: ty.clone(),
                dead: false,
            })
            .collect();
        let mode = Mode::Function {
            ret: f.ret.clone(),
            self_class: f.self_class,
        };
        let n_slots = params.len();
        Self {
            cx,
            mode,
            scopes: vec![params],
            n_slots,
        }
    }

    pub(crate) fn for_act(cx: &'c mut Checker, id: ActId) -> Self {
        let act = &cx.module.acts[id];
        let params = act
            .params
            .iter()
            .enumerate()
            .map(|(i, (name, ty))| Binding {
                name: name.clone(),
                kind: BindingKind::Frame(i + 1),
                ty: ty.clone(),
                dead: false,
            })
            .collect();
        let class = act.class;
        Self {
            cx,
            mode: Mode::Act { id, class },
            scopes: vec![params],
            n_slots: 0,
        }
    }

    pub(crate) fn n_slots(&self) -> usize {
        self.n_slots
    }

    fn alloc_slot(&mut self) -> usize {
        self.n_slots += 1;
        self.n_slots - 1
    }

    fn type_name(&self, ty: &Ty) -> String {
        self.cx.module.type_name(ty)
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|b| b.name == name)
    }

    fn bind(&mut self, name: &str, kind: BindingKind, ty: Ty) {
        self.scopes.last_mut().unwrap().push(Binding {
            name: name.to_string(),
            kind,
            ty,
            dead: false,
        });
    }

    /// Locals do not survive a suspension; only frame fields do.
    fn mark_locals_dead(&mut self) {
        for b in self.scopes.iter_mut().flatten() {
            if matches!(b.kind, BindingKind::Local(_)) {
                b.dead = true;
            }
        }
    }

    pub(crate) fn check_block(&mut self, body: &[Stmt]) -> TResult<Vec<TStmt>> {
        self.scopes.push(Vec::new());
        let out = body.iter().map(|s| self.stmt(s)).collect();
        self.scopes.pop();
        out
    }

    fn stmt(&mut self, s: &Stmt) -> TResult<TStmt> {
        let kind = match &s.kind {
            StmtKind::Let { name, ty, init } => {
                let (ty, init) = self.declaration(s.pos, ty.as_ref(), init.as_ref())?;
                let slot = self.alloc_slot();
                self.bind(&name.name, BindingKind::Local(slot), ty);
                TStmtKind::Let { slot, init }
            }
            StmtKind::Frm { name, ty, init } => {
                let Mode::Act { class, .. } = self.mode else {
                    return Err(TypeError::new(
                        s.pos,
                        "`frm` variables are only allowed inside an act",
                    ));
                };
                let (ty, init) = self.declaration(s.pos, ty.as_ref(), init.as_ref())?;
                let info = &mut self.cx.module.classes[class];
                if info.field_index(&name.name).is_some() {
                    return Err(TypeError::new(
                        name.pos,
                        format!("`{}` is already a field of `{}`", name.name, info.name),
                    ));
                }
                info.fields.push(FieldInfo {
                    name: name.name.clone(),
                    ty: ty.clone(),
                });
                let field = info.fields.len() - 1;
                self.bind(&name.name, BindingKind::Frame(field), ty);
                TStmtKind::FrameInit { field, init }
            }
            StmtKind::Assign { target, value } => {
                if let ExprKind::Field { base, field } = &target.kind {
                    if field.name == RESUME_FIELD {
                        let b = self.expr(base)?;
                        if let Ty::Class(c) = b.ty {
                            if self.cx.module.act_of_class(c).is_some() {
                                return Err(TypeError::new(
                                    field.pos,
                                    "`resume_idx` is maintained by the runtime and cannot be assigned",
                                ));
                            }
                        }
                    }
                }
                let t = self.expr(target)?;
                let TExprKind::Read(place) = t.kind else {
                    return Err(TypeError::new(target.pos, "cannot assign to this expression"));
                };
                let value = self.expr(value)?;
                let value = self.coerce(value, &t.ty)?;
                TStmtKind::Assign { place, value }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let cond = self.condition(cond)?;
                let then_body = self.check_block(then_body)?;
                let else_body = self.check_block(else_body)?;
                TStmtKind::If {
                    cond,
                    then_body,
                    else_body,
                }
            }
            StmtKind::While { cond, body } => {
                if matches!(self.mode, Mode::Act { .. }) && contains_action(body) {
                    self.mark_locals_dead();
                }
                let cond = self.condition(cond)?;
                let body = self.check_block(body)?;
                TStmtKind::While { cond, body }
            }
            StmtKind::Return(value) => match (&self.mode, value) {
                (Mode::Act { .. }, None) => TStmtKind::Return(None),
                (Mode::Act { .. }, Some(e)) => {
                    return Err(TypeError::new(e.pos, "`return` inside an act takes no value"))
                }
                (Mode::Function { ret, .. }, None) => {
                    if *ret != Ty::Void {
                        return Err(TypeError::new(
                            s.pos,
                            format!("missing return value of type {}", self.type_name(ret)),
                        ));
                    }
                    TStmtKind::Return(None)
                }
                (Mode::Function { ret, .. }, Some(e)) => {
                    let ret = ret.clone();
                    if ret == Ty::Void {
                        return Err(TypeError::new(e.pos, "function does not return a value"));
                    }
                    let v = self.expr(e)?;
                    TStmtKind::Return(Some(self.coerce(v, &ret)?))
                }
            },
            StmtKind::Action(a) => self.action(s.pos, a)?,
            StmtKind::Expr(e) => TStmtKind::Expr(self.expr(e)?),
        };
        Ok(TStmt { kind, pos: s.pos })
    }

    /// Shared handling of `let`/`frm`: explicit type, initializer, or both.
    fn declaration(
        &mut self,
        pos: Pos,
        ty: Option<&ast::TypeExpr>,
        init: Option<&Expr>,
    ) -> TResult<(Ty, TExpr)> {
        let declared = ty.map(|t| self.cx.resolve_type(t)).transpose()?;
        match (declared, init) {
            (Some(ty), Some(e)) => {
                let v = self.expr(e)?;
                let v = self.coerce(v, &ty)?;
                Ok((ty, v))
            }
            (Some(ty), None) => {
                let lit = TExpr {
                    kind: TExprKind::Lit(self.cx.module.default_value(&ty)),
                    ty: ty.clone(),
                    pos,
                };
                Ok((ty, lit))
            }
            (None, Some(e)) => {
                let v = self.expr(e)?;
                if v.ty == Ty::Void {
                    return Err(TypeError::new(e.pos, "expression has no value"));
                }
                Ok((v.ty.clone(), v))
            }
            (None, None) => unreachable!("parser requires a type or an initializer"),
        }
    }

    fn action(&mut self, pos: Pos, a: &ast::ActionStmt) -> TResult<TStmtKind> {
        let Mode::Act { id, .. } = self.mode else {
            return Err(TypeError::new(
                pos,
                "action statements are only allowed inside an act",
            ));
        };
        self.mark_locals_dead();
        let action = self.cx.module.acts[id]
            .action_index(&a.name.name)
            .expect("signature pass registered every action");
        let sig_params = self.cx.module.acts[id].actions[action].params.clone();
        let mut params = Vec::new();
        for (p, (_, ty)) in a.params.iter().zip(sig_params) {
            params.push(PointParam {
                name: p.name.name.clone(),
                ty,
                slot: self.alloc_slot(),
            });
        }
        self.scopes.push(Vec::new());
        for p in &params {
            self.bind(&p.name, BindingKind::Local(p.slot), p.ty.clone());
        }
        let mut preconditions = Vec::new();
        for e in &a.preconditions {
            let c = self.expr(e)?;
            if c.ty != Ty::Bool {
                return Err(TypeError::new(
                    e.pos,
                    format!("precondition must be Bool, found {}", self.type_name(&c.ty)),
                ));
            }
            preconditions.push(c);
        }
        self.scopes.pop();
        for p in &params {
            self.bind(&p.name, BindingKind::Local(p.slot), p.ty.clone());
        }
        let act = &mut self.cx.module.acts[id];
        act.points.push(PointInfo {
            name: a.name.name.clone(),
            action,
            params,
            preconditions,
            pos,
        });
        Ok(TStmtKind::Action(act.points.len() - 1))
    }

    fn condition(&mut self, e: &Expr) -> TResult<TExpr> {
        let c = self.expr(e)?;
        if c.ty != Ty::Bool {
            return Err(TypeError::new(
                e.pos,
                format!("condition must be Bool, found {}", self.type_name(&c.ty)),
            ));
        }
        Ok(c)
    }

    /// Implicit conversion into `to` for assignments, arguments and returns.
    fn coerce(&self, e: TExpr, to: &Ty) -> TResult<TExpr> {
        if e.ty == *to {
            return Ok(e);
        }
        let pos = e.pos;
        match (&e.ty, to) {
            (Ty::Bounded { .. }, Ty::Int) => Ok(TExpr { ty: Ty::Int, ..e }),
            (Ty::Bool, Ty::Int) => Ok(TExpr {
                kind: TExprKind::Convert(Conversion::BoolToInt, Box::new(e)),
                ty: Ty::Int,
                pos,
            }),
            (from, Ty::Bounded { min, max }) if from.is_integer() => {
                let (min, max) = (*min, *max);
                if let TExprKind::Lit(Value::Int(v)) = e.kind {
                    if v < min || v > max {
                        return Err(TypeError::new(
                            pos,
                            format!("value {v} is outside Int<{min},{max}>"),
                        ));
                    }
                    return Ok(TExpr { ty: to.clone(), ..e });
                }
                if let Ty::Bounded { min: a, max: b } = from {
                    if *a >= min && *b <= max {
                        return Ok(TExpr { ty: to.clone(), ..e });
                    }
                }
                Ok(TExpr {
                    kind: TExprKind::Convert(Conversion::CheckRange { min, max }, Box::new(e)),
                    ty: to.clone(),
                    pos,
                })
            }
            (from, to) => Err(TypeError::new(
                pos,
                format!(
                    "expected {}, found {}",
                    self.type_name(to),
                    self.type_name(from)
                ),
            )),
        }
    }

    fn expr(&mut self, e: &Expr) -> TResult<TExpr> {
        let pos = e.pos;
        let (kind, ty) = match &e.kind {
            ExprKind::Int(v) => (TExprKind::Lit(Value::Int(*v)), Ty::Int),
            ExprKind::Float(v) => (TExprKind::Lit(Value::Float(*v)), Ty::Float),
            ExprKind::Bool(b) => (TExprKind::Lit(Value::Bool(*b)), Ty::Bool),
            ExprKind::Ident(name) => return self.ident(name, pos),
            ExprKind::Field { base, field } => {
                let b = self.expr(base)?;
                let Ty::Class(c) = b.ty else {
                    return Err(TypeError::new(
                        field.pos,
                        format!("type {} has no fields", self.type_name(&b.ty)),
                    ));
                };
                let class = &self.cx.module.classes[c];
                let Some(idx) = class.field_index(&field.name) else {
                    return Err(TypeError::new(
                        field.pos,
                        format!("class `{}` has no field `{}`", class.name, field.name),
                    ));
                };
                let ty = class.fields[idx].ty.clone();
                let kind = match b.kind {
                    TExprKind::Read(mut place) => {
                        place.projections.push(Projection::Field(idx));
                        TExprKind::Read(place)
                    }
                    _ => TExprKind::Field(Box::new(b), idx),
                };
                (kind, ty)
            }
            ExprKind::Index { base, index } => {
                let b = self.expr(base)?;
                let Ty::Array(elem, len) = b.ty.clone() else {
                    return Err(TypeError::new(
                        pos,
                        format!("type {} cannot be indexed", self.type_name(&b.ty)),
                    ));
                };
                let i = self.expr(index)?;
                if !i.ty.is_integer() {
                    return Err(TypeError::new(
                        index.pos,
                        format!("array index must be Int, found {}", self.type_name(&i.ty)),
                    ));
                }
                let kind = match b.kind {
                    TExprKind::Read(mut place) => {
                        place.projections.push(Projection::Index { index: i, len });
                        TExprKind::Read(place)
                    }
                    _ => TExprKind::Index(Box::new(b), Box::new(i)),
                };
                (kind, *elem)
            }
            ExprKind::Call { callee, args } => return self.call(callee, args, pos),
            ExprKind::MethodCall {
                receiver,
                method,
                args,
            } => return self.method_call(receiver, method, args, pos),
            ExprKind::Unary { op, operand } => {
                let v = self.expr(operand)?;
                match (op, &v.ty) {
                    (UnaryOp::Not, Ty::Bool) => (TExprKind::Unary(*op, Box::new(v)), Ty::Bool),
                    (UnaryOp::Neg, t) if t.is_integer() => match v.kind {
                        TExprKind::Lit(Value::Int(n)) => {
                            let n = n.checked_neg().ok_or_else(|| {
                                TypeError::new(pos, "integer literal overflows")
                            })?;
                            (TExprKind::Lit(Value::Int(n)), Ty::Int)
                        }
                        _ => (TExprKind::Unary(*op, Box::new(v)), Ty::Int),
                    },
                    (UnaryOp::Neg, Ty::Float) => (TExprKind::Unary(*op, Box::new(v)), Ty::Float),
                    (op, t) => {
                        let sym = if *op == UnaryOp::Not { "!" } else { "-" };
                        return Err(TypeError::new(
                            pos,
                            format!("operator `{sym}` cannot be applied to {}", self.type_name(t)),
                        ));
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs)?;
                let r = self.expr(rhs)?;
                let ty = self.binary_type(*op, &l.ty, &r.ty).ok_or_else(|| {
                    TypeError::new(
                        pos,
                        format!(
                            "operator `{}` cannot be applied to {} and {}",
                            op.symbol(),
                            self.type_name(&l.ty),
                            self.type_name(&r.ty)
                        ),
                    )
                })?;
                (TExprKind::Binary(*op, Box::new(l), Box::new(r)), ty)
            }
        };
        Ok(TExpr { kind, ty, pos })
    }

    fn binary_type(&self, op: BinaryOp, l: &Ty, r: &Ty) -> Option<Ty> {
        use BinaryOp::*;
        match op {
            Add | Sub | Mul | Div | Rem => {
                if l.is_integer() && r.is_integer() {
                    Some(Ty::Int)
                } else if *l == Ty::Float && *r == Ty::Float {
                    Some(Ty::Float)
                } else {
                    None
                }
            }
            Lt | Le | Gt | Ge => ((l.is_integer() && r.is_integer())
                || (*l == Ty::Float && *r == Ty::Float))
                .then_some(Ty::Bool),
            Eq | Ne => ((l.is_integer() && r.is_integer()) || (l == r && *l != Ty::Void))
                .then_some(Ty::Bool),
            And | Or => (*l == Ty::Bool && *r == Ty::Bool).then_some(Ty::Bool),
        }
    }

    fn ident(&mut self, name: &str, pos: Pos) -> TResult<TExpr> {
        if name == "self" {
            return match self.mode {
                Mode::Function {
                    self_class: Some(c),
                    ..
                } => Ok(TExpr {
                    kind: TExprKind::Read(TPlace {
                        root: PlaceRoot::This,
                        projections: Vec::new(),
                    }),
                    ty: Ty::Class(c),
                    pos,
                }),
                _ => Err(TypeError::new(pos, "`self` is only available inside methods")),
            };
        }
        let Some(b) = self.lookup(name) else {
            return Err(TypeError::new(pos, format!("undefined name `{name}`")));
        };
        if b.dead {
            return Err(TypeError::new(
                pos,
                format!(
                    "`{name}` does not survive the suspension point before this use; declare it with `frm`"
                ),
            ));
        }
        let place = match b.kind {
            BindingKind::Local(slot) => TPlace {
                root: PlaceRoot::Local(slot),
                projections: Vec::new(),
            },
            BindingKind::Frame(field) => TPlace {
                root: PlaceRoot::This,
                projections: vec![Projection::Field(field)],
            },
        };
        Ok(TExpr {
            kind: TExprKind::Read(place),
            ty: b.ty.clone(),
            pos,
        })
    }

    fn args(&mut self, args: &[Expr], params: &[(String, Ty)], what: &str, pos: Pos) -> TResult<Vec<TExpr>> {
        if args.len() != params.len() {
            return Err(TypeError::new(
                pos,
                format!(
                    "{what} expects {} argument(s), found {}",
                    params.len(),
                    args.len()
                ),
            ));
        }
        args.iter()
            .zip(params)
            .map(|(a, (_, ty))| {
                let v = self.expr(a)?;
                self.coerce(v, ty)
            })
            .collect()
    }

    fn call(&mut self, callee: &ast::Ident, args: &[Expr], pos: Pos) -> TResult<TExpr> {
        let name = callee.name.as_str();
        if name == "float" || name == "int" {
            if args.len() != 1 {
                return Err(TypeError::new(pos, format!("`{name}` expects 1 argument")));
            }
            let v = self.expr(&args[0])?;
            let conv = |c, e: TExpr, ty: Ty| TExpr {
                kind: TExprKind::Convert(c, Box::new(e)),
                ty,
                pos,
            };
            return Ok(match (name, v.ty.clone()) {
                ("float", Ty::Float) | ("int", Ty::Int) => v,
                ("float", t) if t.is_integer() => conv(Conversion::IntToFloat, v, Ty::Float),
                ("float", Ty::Bool) => conv(
                    Conversion::IntToFloat,
                    conv(Conversion::BoolToInt, v, Ty::Int),
                    Ty::Float,
                ),
                ("int", Ty::Bounded { .. }) => TExpr { ty: Ty::Int, ..v },
                ("int", Ty::Float) => conv(Conversion::FloatToInt, v, Ty::Int),
                ("int", Ty::Bool) => conv(Conversion::BoolToInt, v, Ty::Int),
                (_, t) => {
                    return Err(TypeError::new(
                        pos,
                        format!("`{name}` cannot convert {}", self.type_name(&t)),
                    ))
                }
            });
        }
        match self.cx.module.globals.get(name).copied() {
            Some(Global::Function(id)) => {
                let f = &self.cx.module.functions[id];
                let (params, ret) = (f.params.clone(), f.ret.clone());
                let args = self.args(args, &params, &format!("function `{name}`"), pos)?;
                Ok(TExpr {
                    kind: TExprKind::Call(id, args),
                    ty: ret,
                    pos,
                })
            }
            Some(Global::Act(id)) => {
                let act = &self.cx.module.acts[id];
                let (params, class) = (act.params.clone(), act.class);
                let args = self.args(args, &params, &format!("act `{name}`"), pos)?;
                Ok(TExpr {
                    kind: TExprKind::Construct(id, args),
                    ty: Ty::Class(class),
                    pos,
                })
            }
            Some(Global::Class(_)) => Err(TypeError::new(
                pos,
                format!("class `{name}` cannot be called; declare a variable with `let x : {name}`"),
            )),
            None => Err(TypeError::new(pos, format!("undefined function `{name}`"))),
        }
    }

    fn method_call(
        &mut self,
        receiver: &Expr,
        method: &ast::Ident,
        args: &[Expr],
        pos: Pos,
    ) -> TResult<TExpr> {
        let r = self.expr(receiver)?;
        let Ty::Class(class) = r.ty else {
            return Err(TypeError::new(
                method.pos,
                format!("type {} has no methods", self.type_name(&r.ty)),
            ));
        };
        let recv = match r.kind {
            TExprKind::Read(place) => Receiver::Place(place),
            _ => Receiver::Value(Box::new(r)),
        };
        let info = &self.cx.module.classes[class];
        let Some(sig) = info.method(&method.name).cloned() else {
            return Err(TypeError::new(
                method.pos,
                format!("class `{}` has no method `{}`", info.name, method.name),
            ));
        };
        let what = format!("method `{}`", method.name);
        if sig.kind == MethodKind::UserFunction {
            let args = self.args(args, &sig.params, &what, pos)?;
            return Ok(TExpr {
                kind: TExprKind::Method {
                    recv,
                    func: sig.func.expect("user methods have a body"),
                    args,
                },
                ty: sig.ret,
                pos,
            });
        }
        let act = self
            .cx
            .module
            .act_of_class(class)
            .expect("generated methods belong to synthesized classes");
        if sig.kind == MethodKind::IsDone {
            if !args.is_empty() {
                return Err(TypeError::new(pos, "`is_done` takes no arguments"));
            }
            return Ok(TExpr {
                kind: TExprKind::IsDone(recv),
                ty: Ty::Bool,
                pos,
            });
        }
        // Action arguments are range-checked by the runtime precondition
        // test, so only the kind of each argument is fixed here.
        if args.len() != sig.params.len() {
            return Err(TypeError::new(
                pos,
                format!(
                    "{what} expects {} argument(s), found {}",
                    sig.params.len(),
                    args.len()
                ),
            ));
        }
        let mut targs = Vec::new();
        for (a, (_, ty)) in args.iter().zip(&sig.params) {
            let v = self.expr(a)?;
            let v = match ty {
                Ty::Bounded { .. } if v.ty.is_integer() => TExpr { ty: Ty::Int, ..v },
                _ => self.coerce(v, ty)?,
            };
            targs.push(v);
        }
        let action_name = match sig.kind {
            MethodKind::CanPredicate => sig.name.strip_prefix("can_").unwrap_or(&sig.name),
            _ => &sig.name,
        };
        let action = self.cx.module.acts[act]
            .action_index(action_name)
            .expect("generated method names an action");
        let kind = if sig.kind == MethodKind::CanPredicate {
            TExprKind::CanApply {
                recv,
                act,
                action,
                args: targs,
            }
        } else {
            TExprKind::Apply {
                recv,
                act,
                action,
                args: targs,
            }
        };
        Ok(TExpr {
            kind,
            ty: sig.ret,
            pos,
        })
    }
}

fn contains_action(body: &[Stmt]) -> bool {
    let mut found = false;
    super::visit_action_stmts(body, &mut |_, _| found = true);
    found
}

/// Whether every path through `body` ends in `return`.
pub(crate) fn definitely_returns(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If {
            then_body,
            else_body,
            ..
        } => definitely_returns(then_body) && definitely_returns(else_body),
        StmtKind::While { cond, .. } => matches!(cond.kind, ExprKind::Bool(true)),
        _ => false,
    })
}
