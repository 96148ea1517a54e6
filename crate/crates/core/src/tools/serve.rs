//! Line-delimited JSON session over one environment instance.
//!
//! Every request line yields exactly one response line. Failures answer
//! `{"ok":false,"error":{"kind":..,"message":..}}` and never end the
//! session; only `quit` (or end of input) does.

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::program::Program;
use crate::runtime::{ActionValue, EnvError, Environment};
use crate::serialize::{observation_tensor, tensor_size, to_text};
use crate::types::{ActId, Value};

#[derive(Debug, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case", deny_unknown_fields)]
enum Request {
    Reset,
    Legal,
    Step {
        #[serde(default)]
        action: Option<ActionJson>,
        #[serde(default)]
        index: Option<i64>,
    },
    State,
    Tensor {
        #[serde(default)]
        observer: usize,
    },
    IsDone,
    Score {
        player: i64,
    },
    Describe,
    Quit,
}

#[derive(Debug, Deserialize)]
struct ActionJson {
    name: String,
    #[serde(default)]
    args: Vec<Json>,
}

type Reply = Result<Json, (String, String)>;

fn protocol(message: impl Into<String>) -> (String, String) {
    ("protocol".into(), message.into())
}

fn env_err(e: EnvError) -> (String, String) {
    (e.kind().into(), e.to_string())
}

pub struct Session {
    program: Arc<Program>,
    act: ActId,
    env: Environment,
    table: Vec<ActionValue>,
}

impl Session {
    pub fn new(program: Arc<Program>, act: ActId) -> Result<Self, EnvError> {
        let env = Environment::with_act(&program, act, &[])?;
        let table = program.action_table(act);
        Ok(Self {
            program,
            act,
            env,
            table,
        })
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    /// Handles one request line. The flag is true after `quit`.
    pub fn handle_line(&mut self, line: &str) -> (String, bool) {
        let (reply, quit) = match serde_json::from_str::<Request>(line) {
            Ok(Request::Quit) => (Ok(json!({})), true),
            Ok(req) => (self.handle(req), false),
            Err(e) => (Err(protocol(format!("malformed request: {e}"))), false),
        };
        let out = match reply {
            Ok(mut body) => {
                body["ok"] = Json::Bool(true);
                body
            }
            Err((kind, message)) => json!({"ok": false, "error": {"kind": kind, "message": message}}),
        };
        (out.to_string(), quit)
    }

    fn handle(&mut self, req: Request) -> Reply {
        match req {
            Request::Reset => {
                self.env = Environment::with_act(&self.program, self.act, &[]).map_err(env_err)?;
                self.status()
            }
            Request::Legal => {
                let legal = self.env.legal_actions().map_err(env_err)?;
                let actions: Vec<Json> = legal.iter().map(action_json).collect();
                let indices: Vec<u64> = legal
                    .iter()
                    .filter_map(|a| self.program.table_index(self.act, a))
                    .collect();
                Ok(json!({"actions": actions, "indices": indices}))
            }
            Request::Step { action, index } => {
                let action = match (action, index) {
                    (Some(a), None) => ActionValue::new(a.name, a.args.iter().map(json_value).collect::<Result<_, _>>()?),
                    (None, Some(i)) => usize::try_from(i)
                        .ok()
                        .and_then(|i| self.table.get(i))
                        .cloned()
                        .ok_or_else(|| {
                            protocol(format!("action index {i} is outside the table of size {}", self.table.len()))
                        })?,
                    _ => return Err(protocol("step needs exactly one of `action` or `index`")),
                };
                self.env.apply(&action).map_err(env_err)?;
                self.status()
            }
            Request::State => Ok(json!({"state": to_text(&self.env), "resume_idx": self.env.resume_idx()})),
            Request::Tensor { observer } => Ok(json!({"tensor": observation_tensor(&self.env, observer)})),
            Request::IsDone => Ok(json!({"is_done": self.env.is_done()})),
            Request::Score { player } => match self.env.score(player) {
                None => Err(("unknown".into(), "program defines no score function for this act".into())),
                Some(r) => Ok(json!({"score": r.map_err(env_err)?})),
            },
            Request::Describe => Ok(json!({
                "act": self.env.act_name(),
                "tensor_size": tensor_size(&self.program, self.act),
                "action_table": self.table.iter().map(action_json).collect::<Vec<_>>(),
            })),
            Request::Quit => unreachable!("handled by handle_line"),
        }
    }

    fn status(&self) -> Reply {
        let legal = if self.env.is_done() {
            0
        } else {
            self.env.legal_actions().map_err(env_err)?.len()
        };
        Ok(json!({"is_done": self.env.is_done(), "legal_count": legal}))
    }
}

fn action_json(a: &ActionValue) -> Json {
    json!({"name": a.name, "args": a.args.iter().map(value_json).collect::<Vec<_>>()})
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Void => Json::Null,
        Value::Bool(b) => json!(b),
        Value::Int(i) => json!(i),
        Value::Float(f) => json!(f),
        Value::Array(xs) | Value::Struct(xs) => Json::Array(xs.iter().map(value_json).collect()),
    }
}

fn json_value(j: &Json) -> Result<Value, (String, String)> {
    match j {
        Json::Bool(b) => Ok(Value::Bool(*b)),
        Json::Number(n) => n
            .as_i64()
            .map(Value::Int)
            .or_else(|| n.as_f64().map(Value::Float))
            .ok_or_else(|| protocol(format!("number {n} is out of range"))),
        other => Err(protocol(format!("unsupported action argument {other}"))),
    }
}

/// Runs a session until `quit` or end of input.
pub fn serve(session: &mut Session, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        let (reply, quit) = session.handle_line(&line);
        writeln!(output, "{reply}")?;
        output.flush()?;
        if quit {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> Session {
        let p = Arc::new(crate::compile(include_str!("../../../../corpus/tictactoe.rb1")).unwrap());
        let act = p.act("play").unwrap();
        Session::new(p, act).unwrap()
    }

    fn ask(s: &mut Session, line: &str) -> Json {
        serde_json::from_str(&s.handle_line(line).0).unwrap()
    }

    #[test]
    fn reset_reports_opening_moves() {
        let mut s = session();
        assert_eq!(ask(&mut s, r#"{"cmd":"reset"}"#), json!({"ok":true,"is_done":false,"legal_count":9}));
    }

    #[test]
    fn errors_keep_the_session() {
        let mut s = session();
        let r = ask(&mut s, "not json");
        assert_eq!(r["error"]["kind"], "protocol");
        let r = ask(&mut s, r#"{"cmd":"step","index":99}"#);
        assert_eq!(r["error"]["kind"], "protocol");
        let before = to_text(s.env());
        ask(&mut s, r#"{"cmd":"step","index":4}"#);
        let mid = to_text(s.env());
        assert_ne!(before, mid);
        let r = ask(&mut s, r#"{"cmd":"step","action":{"name":"mark","args":[1,1]}}"#);
        assert_eq!(r["error"]["kind"], "precondition");
        assert_eq!(to_text(s.env()), mid);
        let r = ask(&mut s, r#"{"cmd":"legal"}"#);
        assert_eq!(r["actions"].as_array().unwrap().len(), 8);
        assert_eq!(ask(&mut s, r#"{"cmd":"is_done"}"#)["is_done"], false);
    }

    #[test]
    fn quit_ends_the_loop() {
        let mut s = session();
        let input = b"{\"cmd\":\"is_done\"}\n{\"cmd\":\"quit\"}\n{\"cmd\":\"reset\"}\n";
        let mut out = Vec::new();
        serve(&mut s, &input[..], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 2);
    }

    #[test]
    fn tensor_and_score() {
        let mut s = session();
        let r = ask(&mut s, r#"{"cmd":"tensor","observer":0}"#);
        assert_eq!(r["tensor"].as_array().unwrap().len(), 31);
        let r = ask(&mut s, r#"{"cmd":"score","player":0}"#);
        assert_eq!(r["score"], 0.0);
    }
}
