//! Environment instances: the external stepping interface of an act.

use std::sync::Arc;

use super::eval::{resume_idx, Interp};
use super::{ActionValue, EnvError};
use crate::frontend::ast::Pos;
use crate::program::Program;
use crate::typecheck::RESUME_FIELD;
use crate::types::{ActId, Ty, Value};

#[derive(Debug, Clone)]
pub struct Environment {
    program: Arc<Program>,
    act: ActId,
    frame: Value,
    poisoned: bool,
}

/// Failure while replaying a trace; `at` is the number of actions that
/// were applied before it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {at}: {error}")]
pub struct TraceError {
    pub at: usize,
    pub error: EnvError,
}

impl Environment {
    /// Constructs the act and runs it to its first suspension point.
    pub fn new(program: &Arc<Program>, act_name: &str, args: &[Value]) -> Result<Self, EnvError> {
        let act = program
            .act(act_name)
            .ok_or_else(|| EnvError::UnknownAct(act_name.into()))?;
        Self::with_act(program, act, args)
    }

    pub fn with_act(program: &Arc<Program>, act: ActId, args: &[Value]) -> Result<Self, EnvError> {
        let info = &program.module.acts[act];
        check_args(program, &info.name, &info.params, args)?;
        let frame = Interp::new(program).construct(act, args.to_vec(), info.pos)?;
        Ok(Self {
            program: Arc::clone(program),
            act,
            frame,
            poisoned: false,
        })
    }

    /// Wraps an existing frame after validating it against the act's class.
    pub fn from_frame(program: &Arc<Program>, act: ActId, frame: Value) -> Result<Self, EnvError> {
        let class = program.module.acts[act].class;
        check_value(program, &Ty::Class(class), &frame).map_err(EnvError::Range)?;
        Ok(Self {
            program: Arc::clone(program),
            act,
            frame,
            poisoned: false,
        })
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn act(&self) -> ActId {
        self.act
    }

    pub fn act_name(&self) -> &str {
        &self.program.module.acts[self.act].name
    }

    pub fn frame(&self) -> &Value {
        &self.frame
    }

    pub fn resume_idx(&self) -> i64 {
        resume_idx(&self.frame)
    }

    pub fn is_done(&self) -> bool {
        self.resume_idx() == -1
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned
    }

    fn live(&self) -> Result<(), EnvError> {
        if self.poisoned {
            Err(EnvError::Poisoned)
        } else {
            Ok(())
        }
    }

    /// Index of the action signature named by `action`, after checking
    /// arity and argument kinds.
    fn resolve(&self, action: &ActionValue) -> Result<usize, EnvError> {
        let info = &self.program.module.acts[self.act];
        let idx = info
            .action_index(&action.name)
            .ok_or_else(|| EnvError::UnknownAction(action.name.clone()))?;
        let sig = &info.actions[idx];
        if sig.params.len() != action.args.len() {
            return Err(EnvError::Arity {
                name: action.name.clone(),
                expected: sig.params.len(),
                found: action.args.len(),
            });
        }
        for (i, ((_, ty), v)) in sig.params.iter().zip(&action.args).enumerate() {
            let ok = matches!((ty, v), (Ty::Bool, Value::Bool(_)) | (Ty::Bounded { .. }, Value::Int(_)));
            if !ok {
                return Err(EnvError::TypeMismatch {
                    name: action.name.clone(),
                    index: i,
                    expected: self.program.module.type_name(ty),
                });
            }
        }
        Ok(idx)
    }

    pub fn can_apply(&self, action: &ActionValue) -> Result<bool, EnvError> {
        self.live()?;
        let idx = self.resolve(action)?;
        Ok(Interp::new(&self.program).can_apply(self.act, &self.frame, idx, &action.args, Pos::default())?)
    }

    /// Applies `action`. A rejected action leaves the frame untouched; a
    /// runtime error poisons the instance.
    pub fn apply(&mut self, action: &ActionValue) -> Result<(), EnvError> {
        self.live()?;
        let idx = self.resolve(action)?;
        let mut interp = Interp::new(&self.program);
        match interp.can_apply(self.act, &self.frame, idx, &action.args, Pos::default()) {
            Ok(true) => {}
            Ok(false) => {
                return Err(EnvError::PreconditionViolated {
                    action: action.name.clone(),
                    resume_idx: self.resume_idx(),
                })
            }
            Err(e) => return Err(e.into()),
        }
        let mut interp = Interp::new(&self.program);
        match interp.apply(self.act, &mut self.frame, idx, &action.args, Pos::default()) {
            Ok(()) => Ok(()),
            Err(e) => {
                self.poisoned = true;
                Err(e.into())
            }
        }
    }

    /// Applicable actions in table order.
    pub fn legal_actions(&self) -> Result<Vec<ActionValue>, EnvError> {
        self.live()?;
        let idx = self.resume_idx();
        if idx < 0 {
            return Ok(Vec::new());
        }
        let info = &self.program.module.acts[self.act];
        let point = &info.points[idx as usize];
        let sig = &info.actions[point.action];
        let mut interp = Interp::new(&self.program);
        let mut out = Vec::new();
        for i in 0..sig.domain_size() {
            let args = sig.domain_args(i);
            if interp.can_apply(self.act, &self.frame, point.action, &args, Pos::default())? {
                out.push(ActionValue::new(&sig.name, args));
            }
            interp = Interp::new(&self.program);
        }
        Ok(out)
    }

    pub fn get_field(&self, path: &str) -> Result<Value, EnvError> {
        Ok(self.walk(path)?.clone())
    }

    pub fn set_field(&mut self, path: &str, value: Value) -> Result<(), EnvError> {
        self.live()?;
        let steps = parse_path(path)?;
        let ty = self.type_at(&steps, path)?;
        check_value(&self.program, &ty, &value).map_err(EnvError::Range)?;
        // `resume_idx` fields of act frames only accept -1 or a point index.
        if let Some((last, parent)) = steps.split_last() {
            if *last == PathStep::Field(RESUME_FIELD.into()) {
                let parent_ty = self.type_at(parent, path)?;
                if let Ty::Class(c) = parent_ty {
                    if let Some(act) = self.program.module.act_of_class(c) {
                        let n = self.program.machines[act].points.len() as i64;
                        let v = value.as_int();
                        if v != -1 && !(0..n).contains(&v) {
                            return Err(EnvError::Range(format!(
                                "resume_idx must be -1 or a suspension index below {n}, found {v}"
                            )));
                        }
                    }
                }
            }
        }
        let mut indices = Vec::with_capacity(steps.len());
        let mut t = Ty::Class(self.program.module.acts[self.act].class);
        for s in &steps {
            let (next_t, i) = self.step_index(&t, s, path)?;
            indices.push(i);
            t = next_t;
        }
        let mut v = &mut self.frame;
        for i in indices {
            v = match v {
                Value::Struct(f) | Value::Array(f) => &mut f[i],
                _ => unreachable!(),
            };
        }
        *v = value;
        Ok(())
    }

    fn step_index(&self, ty: &Ty, step: &PathStep, path: &str) -> Result<(Ty, usize), EnvError> {
        let m = &self.program.module;
        match (ty, step) {
            (Ty::Class(c), PathStep::Field(name)) => {
                let class = m.class(*c);
                let i = class.field_index(name).ok_or_else(|| {
                    EnvError::Path(format!("`{path}`: class `{}` has no field `{name}`", class.name))
                })?;
                Ok((class.fields[i].ty.clone(), i))
            }
            (Ty::Array(elem, len), PathStep::Index(i)) => {
                if *i >= *len {
                    return Err(EnvError::Path(format!(
                        "`{path}`: index {i} is out of bounds for length {len}"
                    )));
                }
                Ok(((**elem).clone(), *i))
            }
            (t, _) => Err(EnvError::Path(format!(
                "`{path}`: cannot step into {}",
                m.type_name(t)
            ))),
        }
    }

    fn type_at(&self, steps: &[PathStep], path: &str) -> Result<Ty, EnvError> {
        let mut t = Ty::Class(self.program.module.acts[self.act].class);
        for s in steps {
            t = self.step_index(&t, s, path)?.0;
        }
        Ok(t)
    }

    fn walk(&self, path: &str) -> Result<&Value, EnvError> {
        let steps = parse_path(path)?;
        let mut v = &self.frame;
        let mut t = Ty::Class(self.program.module.acts[self.act].class);
        for s in &steps {
            let (next_t, i) = self.step_index(&t, s, path)?;
            v = match v {
                Value::Struct(f) | Value::Array(f) => &f[i],
                _ => unreachable!(),
            };
            t = next_t;
        }
        Ok(v)
    }

    /// Applies every action in order, stopping at the first failure.
    pub fn replay(&mut self, trace: &[ActionValue]) -> Result<(), TraceError> {
        for (at, a) in trace.iter().enumerate() {
            self.apply(a).map_err(|error| TraceError { at, error })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PathStep {
    Field(String),
    Index(usize),
}

/// `board.cells[4]` into field and index steps.
fn parse_path(path: &str) -> Result<Vec<PathStep>, EnvError> {
    let bad = || EnvError::Path(format!("malformed path `{path}`"));
    let mut steps = Vec::new();
    for segment in path.split('.') {
        let (name, mut rest) = match segment.find('[') {
            Some(i) => segment.split_at(i),
            None => (segment, ""),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad());
        }
        steps.push(PathStep::Field(name.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            let i = rest[1..close].trim().parse().map_err(|_| bad())?;
            steps.push(PathStep::Index(i));
            rest = &rest[close + 1..];
        }
    }
    Ok(steps)
}

/// Checks that `v` is a well-formed value of `ty`: matching shape, integers
/// within their bounds and act frames at a valid suspension index.
pub fn check_value(program: &Program, ty: &Ty, v: &Value) -> Result<(), String> {
    let m = &program.module;
    match (ty, v) {
        (Ty::Bool, Value::Bool(_)) | (Ty::Int, Value::Int(_)) | (Ty::Float, Value::Float(_)) => Ok(()),
        (Ty::Bounded { min, max }, Value::Int(x)) => {
            if x < min || x > max {
                Err(format!("value {x} is outside Int<{min},{max}>"))
            } else {
                Ok(())
            }
        }
        (Ty::Array(elem, len), Value::Array(items)) => {
            if items.len() != *len {
                return Err(format!("expected {len} elements, found {}", items.len()));
            }
            items.iter().try_for_each(|x| check_value(program, elem, x))
        }
        (Ty::Class(c), Value::Struct(fields)) => {
            let class = m.class(*c);
            if fields.len() != class.fields.len() {
                return Err(format!(
                    "`{}` has {} fields, found {}",
                    class.name,
                    class.fields.len(),
                    fields.len()
                ));
            }
            for (f, x) in class.fields.iter().zip(fields) {
                check_value(program, &f.ty, x).map_err(|e| format!("{}: {e}", f.name))?;
            }
            if let Some(act) = m.act_of_class(*c) {
                let idx = fields[0].as_int();
                let n = program.machines[act].points.len() as i64;
                if idx != -1 && !(0..n).contains(&idx) {
                    return Err(format!("resume_idx {idx} is not -1 or a suspension index below {n}"));
                }
            }
            Ok(())
        }
        (t, v) => Err(format!("expected {}, found {v}", m.type_name(t))),
    }
}

fn check_args(program: &Program, name: &str, params: &[(String, Ty)], args: &[Value]) -> Result<(), EnvError> {
    if params.len() != args.len() {
        return Err(EnvError::Arity {
            name: name.into(),
            expected: params.len(),
            found: args.len(),
        });
    }
    for (i, ((_, ty), v)) in params.iter().zip(args).enumerate() {
        if check_value(program, ty, v).is_err() {
            return Err(EnvError::TypeMismatch {
                name: name.into(),
                index: i,
                expected: program.module.type_name(ty),
            });
        }
    }
    Ok(())
}

/// Calls a free function under the program's evaluation limits.
pub fn run_function(program: &Program, name: &str, args: &[Value]) -> Result<Value, EnvError> {
    let id = program
        .module
        .function_by_name(name)
        .ok_or_else(|| EnvError::UnknownFunction(name.into()))?;
    let f = &program.module.functions[id];
    check_args(program, name, &f.params, args)?;
    Ok(Interp::new(program).call(id, args.to_vec(), super::eval::This::None, f.pos)?)
}

/// The optional `fun score(<ActClass> g, Int<0,1> player) -> Float`
/// convention that reports a player's result.
pub fn score_function(program: &Program, act: ActId) -> Option<crate::types::FuncId> {
    let id = program.module.function_by_name("score")?;
    let f = &program.module.functions[id];
    let class = program.module.acts[act].class;
    let shape_ok = f.params.len() == 2
        && f.params[0].1 == Ty::Class(class)
        && f.params[1].1.is_integer()
        && f.ret == Ty::Float;
    shape_ok.then_some(id)
}

impl Environment {
    /// Result of `score(self, player)`, if the program defines it for this
    /// act.
    pub fn score(&self, player: i64) -> Option<Result<f64, EnvError>> {
        score_function(&self.program, self.act)?;
        Some(
            run_function(&self.program, "score", &[self.frame.clone(), Value::Int(player)])
                .map(|v| v.as_float()),
        )
    }
}
