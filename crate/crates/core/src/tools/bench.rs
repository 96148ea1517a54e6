//! Timed random playouts.
//!
//! Traces are generated up front as indices into the act's action table so
//! that the timed loop only instantiates and applies. With `action_log` on,
//! every applied action is also cloned into a per-trace log, which is the
//! overhead the comparison is meant to show.

use std::sync::Arc;
use std::time::{Duration, Instant};

use super::rng::TraceRng;
use crate::program::Program;
use crate::runtime::{ActionValue, EnvError, Environment};
use crate::types::ActId;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub act: ActId,
    pub seed: u64,
    pub traces: u64,
    pub max_steps: u64,
    pub action_log: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub traces: u64,
    pub steps: u64,
    pub total: Duration,
    pub action_log: bool,
    pub table_size: u64,
}

impl BenchReport {
    pub fn mean_per_trace(&self) -> Duration {
        if self.traces == 0 {
            Duration::ZERO
        } else {
            self.total / self.traces as u32
        }
    }
}

/// Index traces for `traces` random playouts.
pub fn generate_traces(program: &Arc<Program>, config: &BenchConfig) -> Result<Vec<Vec<u64>>, EnvError> {
    (0..config.traces)
        .map(|i| {
            let mut rng = TraceRng::for_trace(config.seed, i);
            let mut env = Environment::with_act(program, config.act, &[])?;
            let mut out = Vec::new();
            while !env.is_done() && (out.len() as u64) < config.max_steps {
                let legal = env.legal_actions()?;
                if legal.is_empty() {
                    break;
                }
                let a = &legal[rng.below(legal.len())];
                out.push(program.table_index(config.act, a).expect("legal action is in the table"));
                env.apply(a)?;
            }
            Ok(out)
        })
        .collect()
}

/// Instantiates and plays one index trace. With `action_log` the
/// instance carries its own list of applied actions, freed with it.
fn play_trace(
    program: &Arc<Program>,
    act: ActId,
    table: &[ActionValue],
    trace: &[u64],
    action_log: bool,
) -> Result<(), EnvError> {
    let mut env = Environment::with_act(program, act, &[])?;
    let mut log = Vec::new();
    for &idx in trace {
        let a = &table[idx as usize];
        env.apply(a)?;
        if action_log {
            log.push(a.clone());
        }
    }
    std::hint::black_box((&env, &log));
    Ok(())
}

/// Replays pre-generated traces and times only instantiation and apply.
pub fn run_traces(
    program: &Arc<Program>,
    act: ActId,
    table: &[ActionValue],
    traces: &[Vec<u64>],
    action_log: bool,
) -> Result<BenchReport, EnvError> {
    let start = Instant::now();
    for t in traces {
        play_trace(program, act, table, t, action_log)?;
    }
    let total = start.elapsed();
    Ok(BenchReport {
        traces: traces.len() as u64,
        steps: traces.iter().map(|t| t.len() as u64).sum(),
        total,
        action_log,
        table_size: table.len() as u64,
    })
}

pub fn bench(program: &Arc<Program>, config: &BenchConfig) -> Result<BenchReport, EnvError> {
    let traces = generate_traces(program, config)?;
    let table = program.action_table(config.act);
    run_traces(program, config.act, &table, &traces, config.action_log)
}

/// Totals with the log off and on, each the sum over traces of the median
/// of `repeats` timings of that trace. Every trace is played in both modes
/// back to back, alternating which goes first, so drift in machine speed
/// hits both sides alike and a stall only spoils one sample.
pub fn compare_logging(
    program: &Arc<Program>,
    config: &BenchConfig,
    repeats: usize,
) -> Result<(Duration, Duration), EnvError> {
    let traces = generate_traces(program, config)?;
    let table = program.action_table(config.act);
    let mut samples = vec![[Vec::with_capacity(repeats), Vec::with_capacity(repeats)]; traces.len()];
    for r in 0..repeats {
        for (i, t) in traces.iter().enumerate() {
            for k in 0..2 {
                let log = (i + r + k) % 2 == 1;
                let start = Instant::now();
                play_trace(program, config.act, &table, t, log)?;
                samples[i][log as usize].push(start.elapsed());
            }
        }
    }
    let mut totals = [Duration::ZERO; 2];
    for s in samples {
        for (total, runs) in totals.iter_mut().zip(s) {
            *total += median(runs);
        }
    }
    Ok((totals[0], totals[1]))
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v.get(v.len() / 2).copied().unwrap_or_default()
}
