//! Reference interpreter that runs an act's typed body directly, keeping an
//! explicit stack of pending continuations instead of lowered blocks. It
//! serves as the oracle for the lowering.

use super::eval::{resume_idx, Interp, This};
use super::{ActionValue, EnvError, RuntimeError, TraceError};
use crate::program::Program;
use crate::typecheck::{TExpr, TStmt, TStmtKind};
use crate::types::{ActId, Ty, Value};

#[derive(Debug, Clone)]
enum Cont<'p> {
    /// Remaining statements of a block.
    Seq(&'p [TStmt], usize),
    /// A loop whose condition is tested next.
    Loop(&'p TExpr, &'p [TStmt]),
}

pub struct ReferenceEnv<'p> {
    prog: &'p Program,
    act: ActId,
    frame: Value,
    stack: Vec<Cont<'p>>,
}

impl<'p> ReferenceEnv<'p> {
    pub fn new(prog: &'p Program, act: ActId, args: &[Value]) -> Result<Self, EnvError> {
        let info = &prog.module.acts[act];
        let mut frame = prog.module.default_value(&Ty::Class(info.class));
        if let Value::Struct(fields) = &mut frame {
            for (i, a) in args.iter().enumerate() {
                fields[i + 1] = a.clone();
            }
        }
        let mut env = Self {
            prog,
            act,
            frame,
            stack: vec![Cont::Seq(&info.body, 0)],
        };
        env.run(vec![Value::Void; info.n_slots])?;
        Ok(env)
    }

    pub fn frame(&self) -> &Value {
        &self.frame
    }

    pub fn is_done(&self) -> bool {
        resume_idx(&self.frame) == -1
    }

    /// Checks the pending action statement against `action` using the
    /// typed preconditions, not the machine's copy.
    pub fn can_apply(&self, action: &ActionValue) -> Result<bool, EnvError> {
        let idx = resume_idx(&self.frame);
        if idx < 0 {
            return Ok(false);
        }
        let point = &self.prog.module.acts[self.act].points[idx as usize];
        if point.name != action.name || point.params.len() != action.args.len() {
            return Ok(false);
        }
        let mut locals = vec![Value::Void; self.prog.module.acts[self.act].n_slots];
        for (i, (p, a)) in point.params.iter().zip(&action.args).enumerate() {
            match (&p.ty, a) {
                (Ty::Bounded { min, max }, Value::Int(v)) if v < min || v > max => return Ok(false),
                (Ty::Bounded { .. }, Value::Int(_)) | (Ty::Bool, Value::Bool(_)) => {}
                _ => {
                    return Err(EnvError::TypeMismatch {
                        name: action.name.clone(),
                        index: i,
                        expected: self.prog.module.type_name(&p.ty),
                    })
                }
            }
            locals[p.slot] = a.clone();
        }
        let mut interp = Interp::new(self.prog);
        let mut this = This::Shared(&self.frame);
        for c in &point.preconditions {
            if !interp.eval(c, &mut locals, &mut this)?.as_bool() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn apply(&mut self, action: &ActionValue) -> Result<(), EnvError> {
        if !self.can_apply(action)? {
            return Err(EnvError::PreconditionViolated {
                action: action.name.clone(),
                resume_idx: resume_idx(&self.frame),
            });
        }
        let info = &self.prog.module.acts[self.act];
        let point = &info.points[resume_idx(&self.frame) as usize];
        let mut locals = vec![Value::Void; info.n_slots];
        for (p, a) in point.params.iter().zip(&action.args) {
            locals[p.slot] = a.clone();
        }
        Ok(self.run(locals)?)
    }

    /// Pops continuations until an action statement or the end of the act.
    fn run(&mut self, mut locals: Vec<Value>) -> Result<(), RuntimeError> {
        let mut interp = Interp::new(self.prog);
        let mut this = This::Mut(&mut self.frame);
        while let Some(top) = self.stack.last_mut() {
            match top {
                Cont::Seq(stmts, i) => {
                    let stmts: &'p [TStmt] = stmts;
                    let Some(s) = stmts.get(*i) else {
                        self.stack.pop();
                        continue;
                    };
                    *i += 1;
                    interp.tick(s.pos)?;
                    match &s.kind {
                        TStmtKind::If {
                            cond,
                            then_body,
                            else_body,
                        } => {
                            let taken = interp.eval(cond, &mut locals, &mut this)?.as_bool();
                            let body = if taken { then_body } else { else_body };
                            self.stack.push(Cont::Seq(body, 0));
                        }
                        TStmtKind::While { cond, body } => {
                            self.stack.push(Cont::Loop(cond, body));
                        }
                        TStmtKind::Return(_) => self.stack.clear(),
                        TStmtKind::Action(p) => {
                            set_idx(&mut this, *p as i64);
                            return Ok(());
                        }
                        _ => interp.simple(s, &mut locals, &mut this)?,
                    }
                }
                Cont::Loop(cond, body) => {
                    let (cond, body): (&'p TExpr, &'p [TStmt]) = (cond, body);
                    interp.tick(cond.pos)?;
                    if interp.eval(cond, &mut locals, &mut this)?.as_bool() {
                        self.stack.push(Cont::Seq(body, 0));
                    } else {
                        self.stack.pop();
                    }
                }
            }
        }
        set_idx(&mut this, -1);
        Ok(())
    }
}

fn set_idx(this: &mut This<'_>, idx: i64) {
    if let This::Mut(Value::Struct(fields)) = this {
        fields[0] = Value::Int(idx);
    }
}

/// Runs `trace` on a fresh instance of `act_name` and returns the frame
/// after construction and after every action.
pub fn reference_step(
    prog: &Program,
    act_name: &str,
    args: &[Value],
    trace: &[ActionValue],
) -> Result<Vec<Value>, TraceError> {
    let act = prog.act(act_name).ok_or_else(|| TraceError {
        at: 0,
        error: EnvError::UnknownAct(act_name.into()),
    })?;
    let mut env = ReferenceEnv::new(prog, act, args).map_err(|error| TraceError { at: 0, error })?;
    let mut snapshots = vec![env.frame().clone()];
    for (at, a) in trace.iter().enumerate() {
        env.apply(a).map_err(|error| TraceError { at, error })?;
        snapshots.push(env.frame().clone());
    }
    Ok(snapshots)
}
