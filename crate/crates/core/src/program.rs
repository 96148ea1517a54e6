//! The compilation driver and the immutable program shared by all
//! environment instances.

use thiserror::Error;

use crate::frontend::{self, ast::Pos, SyntaxError};
use crate::lowering::{build_afg, lower_action, ActionFlowGraph, ActionMachine};
use crate::runtime::{ActionValue, EvalLimits};
use crate::typecheck::{self, CheckError, TypedModule};
use crate::types::{ActId, Ty, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Check(#[from] CheckError),
}

impl CompileError {
    pub fn position(&self) -> Pos {
        match self {
            CompileError::Syntax(e) => e.position(),
            CompileError::Check(e) => e.position(),
        }
    }

    /// The message without its position prefix.
    pub fn message(&self) -> String {
        match self {
            CompileError::Syntax(SyntaxError::Lex(e)) => e.message.clone(),
            CompileError::Syntax(SyntaxError::Parse(e)) => {
                format!("expected {}, found {}", e.expected, e.found)
            }
            CompileError::Check(CheckError::Type(e)) => e.message.clone(),
            CompileError::Check(CheckError::Cycle(e)) => e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub pos: Pos,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Program {
    pub module: TypedModule,
    /// One machine per act, indexed by act id.
    pub machines: Vec<ActionMachine>,
    pub warnings: Vec<Warning>,
    pub limits: EvalLimits,
}

pub fn compile(source: &str) -> Result<Program, CompileError> {
    let ast = frontend::parse_source(source)?;
    let module = typecheck::typecheck(&ast)?;
    Ok(Program::from_module(module))
}

impl Program {
    pub fn from_module(module: TypedModule) -> Self {
        let machines: Vec<ActionMachine> = (0..module.acts.len())
            .map(|id| lower_action(&module, id))
            .collect();
        let mut warnings = Vec::new();
        for m in &machines {
            for &p in &m.dead_points {
                let point = &m.points[p];
                warnings.push(Warning {
                    pos: point.pos,
                    message: format!(
                        "action `{}` in act `{}` can never be reached",
                        point.action_name, m.name
                    ),
                });
            }
        }
        Program {
            module,
            machines,
            warnings,
            limits: EvalLimits::default(),
        }
    }

    pub fn act(&self, name: &str) -> Option<ActId> {
        self.module.act_by_name(name)
    }

    pub fn machine(&self, act: ActId) -> &ActionMachine {
        &self.machines[act]
    }

    pub fn afg(&self, act: ActId) -> ActionFlowGraph {
        build_afg(&self.machines[act])
    }

    /// The act to use when none is named: `play` if present, else the last
    /// one in dependency order, which no other act uses.
    pub fn default_act(&self) -> Option<ActId> {
        self.act("play")
            .or_else(|| self.module.action_order.last().copied())
    }

    /// Number of entries in the action table of `act`.
    pub fn action_table_size(&self, act: ActId) -> u64 {
        self.module.acts[act]
            .actions
            .iter()
            .map(|a| a.domain_size())
            .sum()
    }

    /// Every action of `act` with every argument tuple: signatures in order
    /// of first appearance, arguments in lexicographic order with the
    /// first parameter most significant.
    pub fn action_table(&self, act: ActId) -> Vec<ActionValue> {
        let mut table = Vec::new();
        for sig in &self.module.acts[act].actions {
            for i in 0..sig.domain_size() {
                table.push(ActionValue::new(&sig.name, sig.domain_args(i)));
            }
        }
        table
    }

    /// Position of `action` in the action table, if it names an action of
    /// `act` with in-domain arguments.
    pub fn table_index(&self, act: ActId, action: &ActionValue) -> Option<u64> {
        let mut base = 0;
        for sig in &self.module.acts[act].actions {
            if sig.name == action.name {
                if sig.params.len() != action.args.len() {
                    return None;
                }
                let mut index = 0u64;
                for ((_, ty), v) in sig.params.iter().zip(&action.args) {
                    let n = ty.domain_size()?;
                    let offset = match (ty, v) {
                        (Ty::Bool, Value::Bool(b)) => *b as u64,
                        (Ty::Bounded { min, max }, Value::Int(x))
                            if x >= min && x <= max =>
                        {
                            (x - min) as u64
                        }
                        _ => return None,
                    };
                    index = index * n + offset;
                }
                return Some(base + index);
            }
            base += sig.domain_size();
        }
        None
    }

    /// The action at `index` in the table of `act`.
    pub fn table_action(&self, act: ActId, mut index: u64) -> Option<ActionValue> {
        for sig in &self.module.acts[act].actions {
            let n = sig.domain_size();
            if index < n {
                return Some(ActionValue::new(&sig.name, sig.domain_args(index)));
            }
            index -= n;
        }
        None
    }
}
