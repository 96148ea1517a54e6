//! Random playouts with per-step consistency checks.
//!
//! Each trace starts from a fresh instance and repeatedly applies an action
//! chosen uniformly from `legal_actions` until the act finishes or the step
//! budget runs out. Every step checks that the chosen action passes
//! `can_apply`, that apply agrees, that the state survives a binary and a
//! text round trip, and that the transition is an edge of the act's flow
//! graph.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use super::rng::TraceRng;
use crate::lowering::ActionFlowGraph;
use crate::program::Program;
use crate::runtime::{ActionValue, Environment};
use crate::serialize::{from_binary, from_text, print_trace, to_binary, to_text};
use crate::types::ActId;

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub act: ActId,
    pub seed: u64,
    pub traces: u64,
    pub max_steps: u64,
    /// Round-trip every intermediate state through both state formats.
    pub check_serialization: bool,
    /// Where failing traces are written; `None` keeps them in memory only.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    pub workers: usize,
}

impl FuzzConfig {
    pub fn new(act: ActId, seed: u64, traces: u64) -> Self {
        Self {
            act,
            seed,
            traces,
            max_steps: 1000,
            check_serialization: true,
            out_dir: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzFailure {
    pub trace_index: u64,
    /// Zero-based index of the failing action within the trace.
    pub step: usize,
    pub kind: String,
    pub message: String,
    /// The trace up to and including the failing action.
    pub trace: Vec<String>,
    pub trace_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FuzzReport {
    pub seed: u64,
    pub traces_run: u64,
    pub steps_total: u64,
    /// `done`, `truncated`, `stuck`, or with a score function `draw`,
    /// `win:<player>` and `loss`.
    pub terminal_counts: BTreeMap<String, u64>,
    pub failures: Vec<FuzzFailure>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn count(&self, label: &str) -> u64 {
        self.terminal_counts.get(label).copied().unwrap_or(0)
    }
}

/// One playout's result.
struct Playout {
    steps: u64,
    label: String,
    failure: Option<(usize, String, String)>,
    trace: Vec<ActionValue>,
}

pub fn fuzz(program: &Arc<Program>, config: &FuzzConfig) -> FuzzReport {
    let afg = program.afg(config.act);
    let workers = config.workers.max(1) as u64;
    let chunk = config.traces.div_ceil(workers).max(1);
    let mut playouts: Vec<(u64, Playout)> = Vec::with_capacity(config.traces as usize);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let afg = &afg;
                let start = (w * chunk).min(config.traces);
                let end = ((w + 1) * chunk).min(config.traces);
                s.spawn(move || {
                    (start..end)
                        .map(|i| (i, playout(program, config, afg, i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            playouts.extend(h.join().expect("fuzz worker panicked"));
        }
    });

    let act_name = &program.module.acts[config.act].name;
    let mut report = FuzzReport {
        seed: config.seed,
        ..Default::default()
    };
    for (i, p) in playouts {
        report.traces_run += 1;
        report.steps_total += p.steps;
        *report.terminal_counts.entry(p.label).or_default() += 1;
        if let Some((step, kind, message)) = p.failure {
            let mut trace_file = None;
            if let Some(dir) = &config.out_dir {
                let path = dir.join(format!("{act_name}-seed{}-trace{i}.rbtrace", config.seed));
                let mut text = print_trace(act_name, &p.trace);
                text.push_str(&format!("# {kind} at step {step}: {message}\n"));
                if std::fs::create_dir_all(dir).is_ok() && std::fs::write(&path, text).is_ok() {
                    trace_file = Some(path);
                }
            }
            report.failures.push(FuzzFailure {
                trace_index: i,
                step,
                kind,
                message,
                trace: p.trace.iter().map(|a| a.to_string()).collect(),
                trace_file,
            });
        }
    }
    report
}

fn playout(program: &Arc<Program>, config: &FuzzConfig, afg: &ActionFlowGraph, index: u64) -> Playout {
    let mut rng = TraceRng::for_trace(config.seed, index);
    let mut trace = Vec::new();
    let fail = |trace: Vec<ActionValue>, step: usize, kind: &str, message: String| Playout {
        steps: step as u64,
        label: "failed".into(),
        failure: Some((step, kind.to_string(), message)),
        trace,
    };
    let mut env = match Environment::with_act(program, config.act, &[]) {
        Ok(env) => env,
        Err(e) => return fail(trace, 0, e.kind(), e.to_string()),
    };
    let mut prev: Option<usize> = None;
    let mut steps = 0usize;
    while !env.is_done() && (steps as u64) < config.max_steps {
        let legal = match env.legal_actions() {
            Ok(l) => l,
            Err(e) => return fail(trace, steps, e.kind(), e.to_string()),
        };
        if legal.is_empty() {
            return Playout {
                steps: steps as u64,
                label: "stuck".into(),
                failure: None,
                trace,
            };
        }
        let action = legal[rng.below(legal.len())].clone();
        trace.push(action.clone());
        let point = env.resume_idx() as usize;
        let edge_ok = match prev {
            None => afg.entry.contains(&point),
            Some(p) => afg.has_edge(p, point),
        };
        if !edge_ok {
            let from = prev.map_or("start".to_string(), |p| p.to_string());
            return fail(trace, steps, "afg", format!("transition {from} -> {point} is not in the flow graph"));
        }
        match env.can_apply(&action) {
            Ok(true) => {}
            Ok(false) => {
                return fail(trace, steps, "check-apply", format!("listed action {action} fails can_apply"))
            }
            Err(e) => return fail(trace, steps, e.kind(), e.to_string()),
        }
        if let Err(e) = env.apply(&action) {
            return fail(trace, steps, e.kind(), e.to_string());
        }
        if config.check_serialization {
            if let Some(msg) = round_trip_problem(program, &env) {
                return fail(trace, steps, "serialization", msg);
            }
        }
        prev = Some(point);
        steps += 1;
    }
    if env.is_done() {
        if let Some(p) = prev {
            if !afg.exit.contains(&p) {
                return fail(trace, steps.saturating_sub(1), "afg", format!("finished after point {p}, which is not an exit"));
            }
        }
    }
    let label = if !env.is_done() {
        "truncated".to_string()
    } else {
        match outcome_label(&env) {
            Ok(l) => l,
            Err(e) => return fail(trace, steps, e.kind(), e.to_string()),
        }
    };
    Playout {
        steps: steps as u64,
        label,
        failure: None,
        trace,
    }
}

fn round_trip_problem(program: &Arc<Program>, env: &Environment) -> Option<String> {
    let bytes = to_binary(env);
    match from_binary(program, env.act(), &bytes) {
        Ok(back) if back.frame().identical(env.frame()) => {}
        Ok(_) => return Some("binary round trip changed the state".into()),
        Err(e) => return Some(format!("binary decode failed: {e}")),
    }
    let text = to_text(env);
    match from_text(program, env.act(), &text) {
        Ok(back) if back.frame().identical(env.frame()) => None,
        Ok(_) => Some("text round trip changed the state".into()),
        Err(e) => Some(format!("text parse failed: {e}")),
    }
}

/// Terminal label of a finished instance.
pub fn outcome_label(env: &Environment) -> Result<String, crate::runtime::EnvError> {
    let Some(first) = env.score(0) else {
        return Ok("done".into());
    };
    let scores = [first?, env.score(1).expect("score exists")?];
    if let Some(p) = scores.iter().position(|s| *s > 0.0) {
        return Ok(format!("win:{p}"));
    }
    if scores.iter().all(|s| *s == 0.0) {
        Ok("draw".into())
    } else {
        Ok("loss".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn program() -> Arc<Program> {
        Arc::new(crate::compile(include_str!("../../../../corpus/tictactoe.rb1")).unwrap())
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let p = program();
        let act = p.act("play").unwrap();
        let mut cfg = FuzzConfig::new(act, 7, 200);
        let a = fuzz(&p, &cfg);
        cfg.workers = 3;
        let b = fuzz(&p, &cfg);
        assert!(a.passed(), "{:?}", a.failures);
        assert_eq!(a, b);
        assert_eq!(a.traces_run, 200);
        let total: u64 = a.terminal_counts.values().sum();
        assert_eq!(total, 200);
        assert_eq!(a.count("truncated"), 0);
    }

    #[test]
    fn step_budget_truncates() {
        let p = program();
        let mut cfg = FuzzConfig::new(p.act("play").unwrap(), 1, 10);
        cfg.max_steps = 2;
        let r = fuzz(&p, &cfg);
        assert_eq!(r.count("truncated"), 10);
        assert_eq!(r.steps_total, 20);
    }
}
