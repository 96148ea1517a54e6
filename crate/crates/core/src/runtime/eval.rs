//! Tree-walking evaluation of typed statements and expressions, plus the
//! block stepper for lowered acts.

use super::{EvalLimits, RuntimeError, RuntimeErrorKind};
use crate::frontend::ast::{BinaryOp, Pos, UnaryOp};
use crate::lowering::{BlockId, Terminator};
use crate::program::Program;
use crate::typecheck::*;
use crate::types::{ActId, FuncId, Ty, Value};

pub(crate) type R<T> = Result<T, RuntimeError>;

pub(crate) type Locals = Vec<Value>;

type Steps = Vec<Step>;

fn err<T>(kind: RuntimeErrorKind, pos: Pos) -> R<T> {
    Err(RuntimeError { kind, pos })
}

/// The value `self` refers to: a method receiver or an act frame.
pub(crate) enum This<'a> {
    None,
    Mut(&'a mut Value),
    Shared(&'a Value),
}

impl This<'_> {
    fn get(&self) -> &Value {
        match self {
            This::Mut(v) => v,
            This::Shared(v) => v,
            This::None => unreachable!("`self` outside a method"),
        }
    }

    fn get_mut(&mut self, pos: Pos) -> R<&mut Value> {
        match self {
            This::Mut(v) => Ok(v),
            _ => err(
                RuntimeErrorKind::Internal("write through a read-only receiver".into()),
                pos,
            ),
        }
    }
}

pub(crate) fn resume_idx(frame: &Value) -> i64 {
    match frame {
        Value::Struct(fields) => fields[0].as_int(),
        other => panic!("frame is not a struct: {other:?}"),
    }
}

fn set_resume_idx(frame: &mut Value, idx: i64) {
    if let Value::Struct(fields) = frame {
        fields[0] = Value::Int(idx);
    }
}

enum Flow {
    Normal,
    Return(Value),
}

#[derive(Clone, Copy)]
enum Step {
    Field(usize),
    Index(usize),
}

pub(crate) struct Interp<'p> {
    pub(crate) prog: &'p Program,
    limits: EvalLimits,
    steps: u64,
    depth: usize,
}

impl<'p> Interp<'p> {
    pub(crate) fn new(prog: &'p Program) -> Self {
        Self {
            prog,
            limits: prog.limits,
            steps: 0,
            depth: 0,
        }
    }

    fn m(&self) -> &'p TypedModule {
        &self.prog.module
    }

    pub(crate) fn tick(&mut self, pos: Pos) -> R<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps_per_resume {
            return err(
                RuntimeErrorKind::StepLimit(self.limits.max_steps_per_resume),
                pos,
            );
        }
        Ok(())
    }

    fn enter(&mut self, pos: Pos) -> R<()> {
        self.depth += 1;
        if self.depth > self.limits.max_call_depth {
            return err(RuntimeErrorKind::CallDepth(self.limits.max_call_depth), pos);
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    // ---- functions ---------------------------------------------------

    pub(crate) fn call(&mut self, f: FuncId, args: Locals, this: This<'_>, pos: Pos) -> R<Value> {
        self.enter(pos)?;
        let info = &self.m().functions[f];
        let mut locals = args;
        locals.resize(info.n_slots.max(locals.len()), Value::Void);
        let mut this = this;
        let flow = self.block(&info.body, &mut locals, &mut this);
        self.leave();
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Void),
        }
    }

    fn block(&mut self, body: &[TStmt], locals: &mut [Value], this: &mut This<'_>) -> R<Flow> {
        for s in body {
            self.tick(s.pos)?;
            match &s.kind {
                TStmtKind::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    let branch = if self.eval(cond, locals, this)?.as_bool() {
                        then_body
                    } else {
                        else_body
                    };
                    if let Flow::Return(v) = self.block(branch, locals, this)? {
                        return Ok(Flow::Return(v));
                    }
                }
                TStmtKind::While { cond, body } => {
                    while self.eval(cond, locals, this)?.as_bool() {
                        if let Flow::Return(v) = self.block(body, locals, this)? {
                            return Ok(Flow::Return(v));
                        }
                        self.tick(s.pos)?;
                    }
                }
                TStmtKind::Return(e) => {
                    let v = match e {
                        Some(e) => self.eval(e, locals, this)?,
                        None => Value::Void,
                    };
                    return Ok(Flow::Return(v));
                }
                TStmtKind::Action(_) => {
                    return err(
                        RuntimeErrorKind::Internal("action statement outside an act".into()),
                        s.pos,
                    )
                }
                _ => self.simple(s, locals, this)?,
            }
        }
        Ok(Flow::Normal)
    }

    /// Executes a statement without control flow.
    pub(crate) fn simple(&mut self, s: &TStmt, locals: &mut [Value], this: &mut This<'_>) -> R<()> {
        match &s.kind {
            TStmtKind::Let { slot, init } => {
                locals[*slot] = self.eval(init, locals, this)?;
            }
            TStmtKind::FrameInit { field, init } => {
                let v = self.eval(init, locals, this)?;
                match this.get_mut(s.pos)? {
                    Value::Struct(fields) => fields[*field] = v,
                    _ => unreachable!("frame is a struct"),
                }
            }
            TStmtKind::Assign { place, value } => {
                let v = self.eval(value, locals, this)?;
                let steps = self.steps_of(place, locals, this)?;
                *place_mut(place.root, &steps, locals, this, s.pos)? = v;
            }
            TStmtKind::Expr(e) => {
                self.eval(e, locals, this)?;
            }
            _ => unreachable!("control flow statement in straight-line code"),
        }
        Ok(())
    }

    // ---- places ------------------------------------------------------

    fn steps_of(&mut self, place: &TPlace, locals: &mut [Value], this: &mut This<'_>) -> R<Steps> {
        let mut out = Steps::with_capacity(place.projections.len());
        for p in &place.projections {
            out.push(match p {
                Projection::Field(i) => Step::Field(*i),
                Projection::Index { index, len } => {
                    let i = self.eval(index, locals, this)?.as_int();
                    Step::Index(check_index(i, *len, index.pos)?)
                }
            });
        }
        Ok(out)
    }

    fn read(&mut self, place: &TPlace, locals: &mut [Value], this: &mut This<'_>) -> R<Value> {
        // Field-only paths need no evaluation.
        if place
            .projections
            .iter()
            .all(|p| matches!(p, Projection::Field(_)))
        {
            let mut v = root_ref(place.root, locals, this);
            for p in &place.projections {
                if let Projection::Field(i) = p {
                    v = child(v, Step::Field(*i));
                }
            }
            return Ok(v.clone());
        }
        let steps = self.steps_of(place, locals, this)?;
        let mut v = root_ref(place.root, locals, this);
        for s in steps {
            v = child(v, s);
        }
        Ok(v.clone())
    }

    // ---- expressions -------------------------------------------------

    pub(crate) fn eval(&mut self, e: &TExpr, locals: &mut [Value], this: &mut This<'_>) -> R<Value> {
        match &e.kind {
            TExprKind::Lit(v) => Ok(v.clone()),
            TExprKind::Read(place) => self.read(place, locals, this),
            TExprKind::Field(base, i) => match self.eval(base, locals, this)? {
                Value::Struct(mut fields) => Ok(fields.swap_remove(*i)),
                _ => unreachable!("field of a non-struct"),
            },
            TExprKind::Index(base, index) => {
                let b = self.eval(base, locals, this)?;
                let i = self.eval(index, locals, this)?.as_int();
                match b {
                    Value::Array(mut items) => {
                        let i = check_index(i, items.len(), index.pos)?;
                        Ok(items.swap_remove(i))
                    }
                    _ => unreachable!("index of a non-array"),
                }
            }
            TExprKind::Unary(op, operand) => {
                let v = self.eval(operand, locals, this)?;
                match (op, v) {
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnaryOp::Neg, Value::Int(n)) => n
                        .checked_neg()
                        .map(Value::Int)
                        .ok_or(RuntimeError {
                            kind: RuntimeErrorKind::Overflow,
                            pos: e.pos,
                        }),
                    (UnaryOp::Neg, Value::Float(x)) => Ok(Value::Float(-x)),
                    (_, v) => unreachable!("ill-typed unary operand {v:?}"),
                }
            }
            TExprKind::Binary(op, lhs, rhs) => self.binary(*op, lhs, rhs, e.pos, locals, this),
            TExprKind::Convert(conv, inner) => {
                let v = self.eval(inner, locals, this)?;
                convert(*conv, v, e.pos)
            }
            TExprKind::Call(f, args) => {
                let args = self.eval_all(args, locals, this)?;
                self.call(*f, args, This::None, e.pos)
            }
            TExprKind::Construct(act, args) => {
                let args = self.eval_all(args, locals, this)?;
                self.construct(*act, args, e.pos)
            }
            TExprKind::Method { recv, func, args } => {
                let args = self.eval_all(args, locals, this)?;
                match recv {
                    Receiver::Value(v) => {
                        let mut tmp = self.eval(v, locals, this)?;
                        self.call(*func, args, This::Mut(&mut tmp), e.pos)
                    }
                    Receiver::Place(place) => {
                        let steps = self.steps_of(place, locals, this)?;
                        if self.m().functions[*func].mutates_self {
                            let target = place_mut(place.root, &steps, locals, this, e.pos)?;
                            self.call(*func, args, This::Mut(target), e.pos)
                        } else {
                            let target = place_ref(place.root, &steps, locals, this);
                            self.call(*func, args, This::Shared(target), e.pos)
                        }
                    }
                }
            }
            TExprKind::CanApply {
                recv,
                act,
                action,
                args,
            } => {
                let args = self.eval_all(args, locals, this)?;
                let ok = match recv {
                    Receiver::Value(v) => {
                        let frame = self.eval(v, locals, this)?;
                        self.can_apply(*act, &frame, *action, &args, e.pos)?
                    }
                    Receiver::Place(place) => {
                        let steps = self.steps_of(place, locals, this)?;
                        let frame = place_ref(place.root, &steps, locals, this);
                        self.can_apply(*act, frame, *action, &args, e.pos)?
                    }
                };
                Ok(Value::Bool(ok))
            }
            TExprKind::Apply {
                recv,
                act,
                action,
                args,
            } => {
                let args = self.eval_all(args, locals, this)?;
                match recv {
                    Receiver::Value(v) => {
                        let mut frame = self.eval(v, locals, this)?;
                        self.apply(*act, &mut frame, *action, &args, e.pos)?;
                    }
                    Receiver::Place(place) => {
                        let steps = self.steps_of(place, locals, this)?;
                        let frame = place_mut(place.root, &steps, locals, this, e.pos)?;
                        self.apply(*act, frame, *action, &args, e.pos)?;
                    }
                }
                Ok(Value::Void)
            }
            TExprKind::IsDone(recv) => {
                let done = match recv {
                    Receiver::Value(v) => resume_idx(&self.eval(v, locals, this)?) == -1,
                    Receiver::Place(place) => {
                        let steps = self.steps_of(place, locals, this)?;
                        resume_idx(place_ref(place.root, &steps, locals, this)) == -1
                    }
                };
                Ok(Value::Bool(done))
            }
        }
    }

    fn eval_all(&mut self, args: &[TExpr], locals: &mut [Value], this: &mut This<'_>) -> R<Locals> {
        args.iter().map(|a| self.eval(a, locals, this)).collect()
    }

    fn binary(
        &mut self,
        op: BinaryOp,
        lhs: &TExpr,
        rhs: &TExpr,
        pos: Pos,
        locals: &mut [Value],
        this: &mut This<'_>,
    ) -> R<Value> {
        use BinaryOp::*;
        let l = self.eval(lhs, locals, this)?;
        match op {
            And if !l.as_bool() => return Ok(Value::Bool(false)),
            Or if l.as_bool() => return Ok(Value::Bool(true)),
            And | Or => return self.eval(rhs, locals, this),
            _ => {}
        }
        let r = self.eval(rhs, locals, this)?;
        let overflow = || RuntimeError {
            kind: RuntimeErrorKind::Overflow,
            pos,
        };
        Ok(match (l, r) {
            (Value::Int(a), Value::Int(b)) => match op {
                Add => Value::Int(a.checked_add(b).ok_or_else(overflow)?),
                Sub => Value::Int(a.checked_sub(b).ok_or_else(overflow)?),
                Mul => Value::Int(a.checked_mul(b).ok_or_else(overflow)?),
                Div | Rem if b == 0 => return err(RuntimeErrorKind::DivisionByZero, pos),
                Div => Value::Int(a.checked_div(b).ok_or_else(overflow)?),
                Rem => Value::Int(a.checked_rem(b).ok_or_else(overflow)?),
                Lt => Value::Bool(a < b),
                Le => Value::Bool(a <= b),
                Gt => Value::Bool(a > b),
                Ge => Value::Bool(a >= b),
                Eq => Value::Bool(a == b),
                Ne => Value::Bool(a != b),
                And | Or => unreachable!(),
            },
            (Value::Float(a), Value::Float(b)) => match op {
                Add => Value::Float(a + b),
                Sub => Value::Float(a - b),
                Mul => Value::Float(a * b),
                Div => Value::Float(a / b),
                Rem => Value::Float(a % b),
                Lt => Value::Bool(a < b),
                Le => Value::Bool(a <= b),
                Gt => Value::Bool(a > b),
                Ge => Value::Bool(a >= b),
                Eq => Value::Bool(a == b),
                Ne => Value::Bool(a != b),
                And | Or => unreachable!(),
            },
            (a, b) => match op {
                Eq => Value::Bool(a == b),
                Ne => Value::Bool(a != b),
                _ => unreachable!("ill-typed operands {a:?} {op:?} {b:?}"),
            },
        })
    }

    // ---- acts --------------------------------------------------------

    /// Builds a frame for `act` and runs its prologue.
    pub(crate) fn construct(&mut self, act: ActId, args: Locals, pos: Pos) -> R<Value> {
        let m = self.m();
        let info = &m.acts[act];
        let mut frame = m.default_value(&Ty::Class(info.class));
        if let Value::Struct(fields) = &mut frame {
            for (i, a) in args.into_iter().enumerate() {
                fields[i + 1] = a;
            }
        }
        let machine = &self.prog.machines[act];
        let locals: Locals = vec![Value::Void; machine.n_slots];
        self.enter(pos)?;
        let r = self.run(act, &mut frame, machine.prologue, locals);
        self.leave();
        r?;
        Ok(frame)
    }

    /// Runs blocks from `start` until a suspension or the end of the act.
    pub(crate) fn run(&mut self, act: ActId, frame: &mut Value, start: BlockId, mut locals: Locals) -> R<()> {
        let machine = &self.prog.machines[act];
        let mut this = This::Mut(frame);
        let mut b = start;
        loop {
            let block = &machine.blocks[b];
            for s in &block.stmts {
                self.tick(s.pos)?;
                self.simple(s, &mut locals, &mut this)?;
            }
            match &block.term {
                Terminator::Jump(t) => b = *t,
                Terminator::Branch {
                    cond,
                    then_block,
                    else_block,
                } => {
                    self.tick(cond.pos)?;
                    b = if self.eval(cond, &mut locals, &mut this)?.as_bool() {
                        *then_block
                    } else {
                        *else_block
                    };
                }
                Terminator::Suspend(p) => {
                    set_resume_idx(this.get_mut(Pos::default())?, *p as i64);
                    return Ok(());
                }
                Terminator::Finish => {
                    set_resume_idx(this.get_mut(Pos::default())?, -1);
                    return Ok(());
                }
            }
        }
    }

    /// Locals for resuming at `point` with `args` bound to its parameters.
    fn point_locals(&self, act: ActId, point: usize, args: &[Value]) -> Locals {
        let machine = &self.prog.machines[act];
        let mut locals: Locals = vec![Value::Void; machine.n_slots];
        for (p, a) in machine.points[point].params.iter().zip(args) {
            locals[p.slot] = a.clone();
        }
        locals
    }

    /// Whether the pending point of `frame` is named by `action` and its
    /// preconditions hold. Arguments outside their declared range are
    /// simply not applicable.
    pub(crate) fn can_apply(&mut self, act: ActId, frame: &Value, action: usize, args: &[Value], pos: Pos) -> R<bool> {
        let idx = resume_idx(frame);
        let machine = &self.prog.machines[act];
        if idx < 0 || idx as usize >= machine.points.len() {
            return Ok(false);
        }
        let point = &machine.points[idx as usize];
        if point.action != action {
            return Ok(false);
        }
        for (p, a) in point.params.iter().zip(args) {
            if let (Ty::Bounded { min, max }, Value::Int(v)) = (&p.ty, a) {
                if v < min || v > max {
                    return Ok(false);
                }
            }
        }
        let mut locals = self.point_locals(act, idx as usize, args);
        let mut this = This::Shared(frame);
        self.enter(pos)?;
        let mut ok = true;
        for c in &point.preconditions {
            match self.eval(c, &mut locals, &mut this) {
                Ok(v) if v.as_bool() => {}
                Ok(_) => {
                    ok = false;
                    break;
                }
                Err(e) => {
                    self.leave();
                    return Err(e);
                }
            }
        }
        self.leave();
        Ok(ok)
    }

    /// Checks then resumes. A failed check is reported as an error without
    /// touching the frame.
    pub(crate) fn apply(&mut self, act: ActId, frame: &mut Value, action: usize, args: &[Value], pos: Pos) -> R<()> {
        if !self.can_apply(act, frame, action, args, pos)? {
            let name = self.m().acts[act].actions[action].name.clone();
            return err(RuntimeErrorKind::Precondition { action: name }, pos);
        }
        let point = resume_idx(frame) as usize;
        let locals = self.point_locals(act, point, args);
        let start = self.prog.machines[act].points[point].resume_block;
        self.enter(pos)?;
        let r = self.run(act, frame, start, locals);
        self.leave();
        r
    }
}

fn check_index(i: i64, len: usize, pos: Pos) -> R<usize> {
    if i < 0 || i as u64 >= len as u64 {
        return err(RuntimeErrorKind::IndexOutOfBounds { index: i, len }, pos);
    }
    Ok(i as usize)
}

pub(crate) fn convert(conv: Conversion, v: Value, pos: Pos) -> R<Value> {
    Ok(match (conv, v) {
        (Conversion::BoolToInt, Value::Bool(b)) => Value::Int(b as i64),
        (Conversion::IntToFloat, Value::Int(n)) => Value::Float(n as f64),
        (Conversion::FloatToInt, Value::Float(x)) => {
            // Truncation toward zero; values that do not fit are errors.
            if !(-(2f64.powi(63))..2f64.powi(63)).contains(&x) {
                return err(RuntimeErrorKind::Conversion(format!("{x:?}")), pos);
            }
            Value::Int(x as i64)
        }
        (Conversion::CheckRange { min, max }, Value::Int(n)) => {
            if n < min || n > max {
                return err(RuntimeErrorKind::Range { value: n, min, max }, pos);
            }
            Value::Int(n)
        }
        (c, v) => unreachable!("ill-typed conversion {c:?} of {v:?}"),
    })
}

fn root_ref<'x>(root: PlaceRoot, locals: &'x [Value], this: &'x This<'_>) -> &'x Value {
    match root {
        PlaceRoot::Local(slot) => &locals[slot],
        PlaceRoot::This => this.get(),
    }
}

fn child(v: &Value, s: Step) -> &Value {
    match (v, s) {
        (Value::Struct(f), Step::Field(i)) => &f[i],
        (Value::Array(items), Step::Index(i)) => &items[i],
        (v, _) => unreachable!("ill-typed projection of {v:?}"),
    }
}

fn place_ref<'x>(root: PlaceRoot, steps: &[Step], locals: &'x [Value], this: &'x This<'_>) -> &'x Value {
    steps
        .iter()
        .fold(root_ref(root, locals, this), |v, s| child(v, *s))
}

fn place_mut<'x>(
    root: PlaceRoot,
    steps: &[Step],
    locals: &'x mut [Value],
    this: &'x mut This<'_>,
    pos: Pos,
) -> R<&'x mut Value> {
    let mut v = match root {
        PlaceRoot::Local(slot) => &mut locals[slot],
        PlaceRoot::This => this.get_mut(pos)?,
    };
    for s in steps {
        v = match (v, s) {
            (Value::Struct(f), Step::Field(i)) => &mut f[*i],
            (Value::Array(items), Step::Index(i)) => &mut items[*i],
            (v, _) => unreachable!("ill-typed projection of {v:?}"),
        };
    }
    Ok(v)
}
