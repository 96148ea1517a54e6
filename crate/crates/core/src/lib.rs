//! Compiler and runtime for a small coroutine language whose `act`
//! declarations become inspectable, serializable state machines.

pub mod frontend;
pub mod lowering;
pub mod program;
pub mod runtime;
pub mod serialize;
pub mod tools;
pub mod typecheck;
pub mod types;

pub use program::{compile, CompileError, Program, Warning};
pub use runtime::{ActionValue, EnvError, Environment, EvalLimits, RuntimeError};
pub use types::{Ty, Value};
