//! Action traces: one `name(arg, ...)` per line, `#` comments.

use thiserror::Error;

use crate::program::Program;
use crate::runtime::ActionValue;
use crate::types::{ActId, Ty, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

pub fn print_trace(act_name: &str, trace: &[ActionValue]) -> String {
    let mut out = format!("# act {act_name}\n");
    for a in trace {
        out.push_str(&a.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_trace(program: &Program, act: ActId, text: &str) -> Result<Vec<ActionValue>, TraceParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let code = line.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let a = parse_action(program, act, code).map_err(|message| TraceParseError {
            line: line_no,
            message,
        })?;
        out.push(a);
    }
    Ok(out)
}

/// Parses `mark(0, 2)` and checks the name, arity and argument domains of
/// `act`. Preconditions are not checked.
pub fn parse_action(program: &Program, act: ActId, text: &str) -> Result<ActionValue, String> {
    let text = text.trim();
    let open = text.find('(').ok_or("expected `(`")?;
    if !text.ends_with(')') {
        return Err("expected `)` at the end of the action".into());
    }
    let name = text[..open].trim();
    let inner = text[open + 1..text.len() - 1].trim();
    let info = &program.module.acts[act];
    let sig = info
        .actions
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| format!("act `{}` has no action `{name}`", info.name))?;
    let raw: Vec<&str> = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };
    if raw.len() != sig.params.len() {
        return Err(format!(
            "`{name}` expects {} argument(s), found {}",
            sig.params.len(),
            raw.len()
        ));
    }
    let mut args = Vec::with_capacity(raw.len());
    for (r, (pname, ty)) in raw.iter().zip(&sig.params) {
        let v = match ty {
            Ty::Bool => match *r {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                _ => return Err(format!("`{pname}` must be `true` or `false`, found `{r}`")),
            },
            Ty::Bounded { min, max } => {
                let n: i64 = r
                    .parse()
                    .map_err(|_| format!("`{pname}` must be an integer, found `{r}`"))?;
                if n < *min || n > *max {
                    return Err(format!("`{pname}` = {n} is outside Int<{min},{max}>"));
                }
                Value::Int(n)
            }
            _ => unreachable!("action parameters are enumerable"),
        };
        args.push(v);
    }
    Ok(ActionValue::new(name, args))
}
