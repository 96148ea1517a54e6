//! Hand-written game models that share no code with the compiler. Tests
//! compare compiled programs against them move by move.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rb1_core::{compile, ActionValue, Environment, Program, Value};

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn source(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn program(file: &str) -> Arc<Program> {
    Arc::new(compile(&source(file)).unwrap_or_else(|e| panic!("{file}: {e}")))
}

pub fn action(name: &str, args: &[i64]) -> ActionValue {
    ActionValue::new(name, args.iter().map(|&a| Value::Int(a)).collect())
}

pub trait Oracle: Clone {
    /// Corpus file the model describes.
    const FILE: &'static str;
    fn new() -> Self;
    /// Legal moves in action-table order.
    fn legal(&self) -> Vec<ActionValue>;
    fn apply(&mut self, a: &ActionValue);
    fn is_done(&self) -> bool;
    /// `win:<p>`, `draw` or `loss`, once done.
    fn outcome(&self) -> String;
    /// Expected `get_field` results.
    fn fields(&self) -> Vec<(String, i64)>;
    fn resume_idx(&self) -> i64;

    /// Asserts that `env` shows exactly this model's state.
    fn assert_matches(&self, env: &Environment) {
        assert_eq!(env.resume_idx(), self.resume_idx(), "resume_idx");
        for (path, want) in self.fields() {
            assert_eq!(env.get_field(&path).unwrap(), Value::Int(want), "field {path}");
        }
    }
}

fn int_arg(a: &ActionValue, i: usize) -> i64 {
    match a.args[i] {
        Value::Int(v) => v,
        ref other => panic!("non-int argument {other:?}"),
    }
}

// ---- Tic-Tac-Toe ----------------------------------------------------------

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Clone, Debug, Default)]
pub struct TicTacToe {
    /// Indexed x * 3 + y; 0 empty, 1 and 2 players.
    pub cells: [u8; 9],
    pub player: u8,
    pub winner: Option<u8>,
}

impl TicTacToe {
    fn full(&self) -> bool {
        self.cells.iter().all(|&c| c != 0)
    }

    /// Number of complete nine-move games with no line, by exhaustive
    /// search over move orders.
    pub fn drawn_sequences() -> u64 {
        fn go(g: &TicTacToe) -> u64 {
            if g.is_done() {
                return (g.winner.is_none()) as u64;
            }
            g.legal()
                .iter()
                .map(|a| {
                    let mut n = g.clone();
                    n.apply(a);
                    go(&n)
                })
                .sum()
        }
        go(&TicTacToe::new())
    }
}

impl Oracle for TicTacToe {
    const FILE: &'static str = "tictactoe.rb1";

    fn new() -> Self {
        Self::default()
    }

    fn legal(&self) -> Vec<ActionValue> {
        if self.is_done() {
            return Vec::new();
        }
        (0..9)
            .filter(|&i| self.cells[i] == 0)
            .map(|i| action("mark", &[i as i64 / 3, i as i64 % 3]))
            .collect()
    }

    fn apply(&mut self, a: &ActionValue) {
        let i = (int_arg(a, 0) * 3 + int_arg(a, 1)) as usize;
        assert_eq!(self.cells[i], 0, "oracle asked to mark a taken cell");
        self.cells[i] = self.player + 1;
        let c = &self.cells;
        if LINES.iter().any(|l| c[l[0]] != 0 && c[l[0]] == c[l[1]] && c[l[0]] == c[l[2]]) {
            self.winner = Some(self.player);
        } else {
            self.player = 1 - self.player;
        }
    }

    fn is_done(&self) -> bool {
        self.winner.is_some() || self.full()
    }

    fn outcome(&self) -> String {
        match self.winner {
            Some(p) => format!("win:{p}"),
            None => "draw".into(),
        }
    }

    fn fields(&self) -> Vec<(String, i64)> {
        let mut out: Vec<_> = (0..9)
            .map(|i| (format!("board.cells[{i}]"), self.cells[i] as i64))
            .collect();
        out.push(("board.current_player".into(), self.player as i64));
        out
    }

    fn resume_idx(&self) -> i64 {
        if self.is_done() {
            -1
        } else {
            0
        }
    }
}

// ---- Connect Four ---------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct ConnectFour {
    /// `grid[col][row]`, row 0 at the bottom.
    pub grid: [[u8; 6]; 7],
    pub heights: [u8; 7],
    pub player: u8,
    pub winner: Option<u8>,
}

impl ConnectFour {
    fn get(&self, c: i32, r: i32) -> u8 {
        if (0..7).contains(&c) && (0..6).contains(&r) {
            self.grid[c as usize][r as usize]
        } else {
            0
        }
    }

    /// Scans the whole grid for four in a row.
    fn has_four(&self, v: u8) -> bool {
        for c in 0..7 {
            for r in 0..6 {
                for (dc, dr) in [(1, 0), (0, 1), (1, 1), (1, -1)] {
                    if (0..4).all(|k| self.get(c + k * dc, r + k * dr) == v) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

impl Oracle for ConnectFour {
    const FILE: &'static str = "connect4.rb1";

    fn new() -> Self {
        Self::default()
    }

    fn legal(&self) -> Vec<ActionValue> {
        if self.is_done() {
            return Vec::new();
        }
        (0..7)
            .filter(|&c| self.heights[c] < 6)
            .map(|c| action("drop", &[c as i64]))
            .collect()
    }

    fn apply(&mut self, a: &ActionValue) {
        let c = int_arg(a, 0) as usize;
        let r = self.heights[c] as usize;
        assert!(r < 6, "oracle asked to drop into a full column");
        self.grid[c][r] = self.player + 1;
        self.heights[c] += 1;
        if self.has_four(self.player + 1) {
            self.winner = Some(self.player);
        } else {
            self.player = 1 - self.player;
        }
    }

    fn is_done(&self) -> bool {
        self.winner.is_some() || self.heights.iter().all(|&h| h == 6)
    }

    fn outcome(&self) -> String {
        match self.winner {
            Some(p) => format!("win:{p}"),
            None => "draw".into(),
        }
    }

    fn fields(&self) -> Vec<(String, i64)> {
        let mut out = Vec::new();
        for c in 0..7 {
            for r in 0..6 {
                out.push((format!("grid.cells[{}]", c * 6 + r), self.grid[c][r] as i64));
            }
            out.push((format!("grid.heights[{c}]"), self.heights[c] as i64));
        }
        out.push(("grid.current_player".into(), self.player as i64));
        out.push(("grid.winner".into(), self.winner.map_or(0, |p| p as i64 + 1)));
        out
    }

    fn resume_idx(&self) -> i64 {
        if self.is_done() {
            -1
        } else {
            0
        }
    }
}

// ---- Catch ----------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct Catch {
    pub dropped: bool,
    pub ball_col: i64,
    pub ball_row: i64,
    pub paddle: i64,
}

impl Oracle for Catch {
    const FILE: &'static str = "catch.rb1";

    fn new() -> Self {
        Self::default()
    }

    fn legal(&self) -> Vec<ActionValue> {
        if !self.dropped {
            (0..5).map(|c| action("drop", &[c])).collect()
        } else if self.is_done() {
            Vec::new()
        } else {
            (0..3).map(|d| action("move", &[d])).collect()
        }
    }

    fn apply(&mut self, a: &ActionValue) {
        if a.name == "drop" {
            assert!(!self.dropped);
            self.dropped = true;
            self.ball_col = int_arg(a, 0);
            self.ball_row = 0;
            self.paddle = 2;
        } else {
            assert!(self.dropped && !self.is_done());
            self.paddle = (self.paddle + int_arg(a, 0) - 1).clamp(0, 4);
            self.ball_row += 1;
        }
    }

    fn is_done(&self) -> bool {
        self.dropped && self.ball_row == 9
    }

    fn outcome(&self) -> String {
        if self.ball_col == self.paddle {
            "win:0".into()
        } else {
            "loss".into()
        }
    }

    fn fields(&self) -> Vec<(String, i64)> {
        vec![
            ("ball_col".into(), self.ball_col),
            ("ball_row".into(), self.ball_row),
            ("paddle".into(), self.paddle),
        ]
    }

    fn resume_idx(&self) -> i64 {
        match (self.dropped, self.is_done()) {
            (false, _) => 0,
            (true, false) => 1,
            (true, true) => -1,
        }
    }
}

/// Tiny deterministic generator for choosing oracle moves, independent of
/// the crate's own trace generator.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn below(&mut self, n: usize) -> usize {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 33) % n as u64) as usize
    }
}
