//! Shared setup for the criterion benchmarks in `benches/`.

use std::path::PathBuf;
use std::sync::Arc;

use rb1_core::tools::bench::{generate_traces, BenchConfig};
use rb1_core::types::ActId;
use rb1_core::{compile, ActionValue, Program};

pub const GAMES: [&str; 3] = ["tictactoe.rb1", "connect4.rb1", "catch.rb1"];

/// A compiled corpus game with pre-generated index traces.
pub struct Workload {
    pub name: &'static str,
    pub program: Arc<Program>,
    pub act: ActId,
    pub table: Vec<ActionValue>,
    pub traces: Vec<Vec<u64>>,
}

pub fn corpus_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file)
}

pub fn workload(file: &'static str, traces: u64, seed: u64) -> Workload {
    let source = std::fs::read_to_string(corpus_path(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
    let program = Arc::new(compile(&source).unwrap_or_else(|e| panic!("{file}: {e}")));
    let act = program.default_act().expect("corpus game declares an act");
    let config = BenchConfig {
        act,
        seed,
        traces,
        max_steps: 10_000,
        action_log: false,
    };
    let traces = generate_traces(&program, &config).expect("corpus playouts run");
    Workload {
        name: file.trim_end_matches(".rb1"),
        table: program.action_table(act),
        program,
        act,
        traces,
    }
}
