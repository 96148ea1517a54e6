use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file)
}

fn rb1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rb1")).args(args).output().unwrap()
}

fn rb1_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rb1"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const DIVIDES: &str = "act play() -> Div:\n  frm d = 0\n  act pick(Int<0,2> x)\n  d = 10 / x\n  act again()\n";

#[test]
fn check_accepts_corpus_and_reports_diagnostics() {
    for game in ["tictactoe.rb1", "connect4.rb1", "catch.rb1", "action_chain.rb1", "composed.rb1"] {
        let o = rb1(&["check", path(&corpus(game))]);
        assert_eq!(o.status.code(), Some(0), "{game}: {}", stderr(&o));
        assert!(stdout(&o).ends_with(": ok\n"));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.rb1", "fun f() -> Int:\n  return nope\n");
    let o = rb1(&["check", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o), format!("{}:2:10: error: undefined name `nope`\n", bad.display()));
}

#[test]
fn mutual_recursion_is_rejected() {
    let o = rb1(&["check", path(&corpus("mutual_acts.rb1"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error"), "{}", stderr(&o));
}

#[test]
fn run_prints_result_and_exits_two_on_runtime_error() {
    let o = rb1(&["run", path(&corpus("tictactoe.rb1"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");

    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.rb1",
        "fun twice(Int x) -> Int:\n  return x * 2\n\nfun main() -> Int:\n  return 1 / 0\n",
    );
    let o = rb1(&["run", path(&f), "--fun", "twice", "--arg", "21"]);
    assert_eq!(stdout(&o), "42\n");
    let o = rb1(&["run", path(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[division-by-zero]"), "{}", stderr(&o));
}

#[test]
fn graph_writes_expected_dot() {
    let expected: toml::Value = toml::from_str(&std::fs::read_to_string(corpus("tictactoe.expected")).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ttt.dot");
    let o = rb1(&["graph", path(&corpus("tictactoe.rb1")), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), expected["dot"].as_str().unwrap());
    assert_eq!(stdout(&rb1(&["graph", path(&corpus("tictactoe.rb1"))])), expected["dot"].as_str().unwrap());
}

#[test]
fn fuzz_passes_corpus_and_saves_failing_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fails");
    for game in ["tictactoe.rb1", "connect4.rb1", "catch.rb1"] {
        let o = rb1(&["fuzz", path(&corpus(game)), "--traces", "200", "--out-dir", path(&out)]);
        assert_eq!(o.status.code(), Some(0), "{game}: {}", stdout(&o));
        assert!(stdout(&o).contains("failures 0"));
    }
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());

    let prog = write(dir.path(), "div.rb1", DIVIDES);
    let o = rb1(&["fuzz", path(&prog), "--traces", "50", "--seed", "3", "--out-dir", path(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let saved: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!saved.is_empty());
    for f in &saved {
        let name = f.file_name().unwrap().to_str().unwrap();
        assert!(name.starts_with("play-seed3-trace") && name.ends_with(".rbtrace"), "{name}");
        // The saved trace reproduces the failure.
        let r = rb1(&["replay", path(&prog), path(f)]);
        assert_eq!(r.status.code(), Some(2), "{}", stderr(&r));
        assert!(stderr(&r).contains("division"), "{}", stderr(&r));
    }
}

#[test]
fn fuzz_is_deterministic_across_workers() {
    let ttt = corpus("tictactoe.rb1");
    let one = rb1(&["fuzz", path(&ttt), "--traces", "300", "--seed", "9", "--workers", "1"]);
    let four = rb1(&["fuzz", path(&ttt), "--traces", "300", "--seed", "9", "--workers", "4"]);
    assert_eq!(stdout(&one), stdout(&four));
}

#[test]
fn bench_reports_all_games() {
    for game in ["tictactoe.rb1", "connect4.rb1", "catch.rb1"] {
        for log in ["off", "on"] {
            let o = rb1(&["bench", path(&corpus(game)), "--traces", "1024", "--action-log", log]);
            assert_eq!(o.status.code(), Some(0), "{game}: {}", stderr(&o));
            let text = stdout(&o);
            assert!(text.contains("traces: 1024"), "{text}");
            assert!(text.contains(&format!("action_log: {log}")), "{text}");
            assert!(text.contains("total_us: "), "{text}");
        }
    }
    let o = rb1(&["bench", path(&corpus("catch.rb1")), "--traces", "64", "--action-log", "both", "--repeats", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("action_log_on_total_us: "));
}

#[test]
fn replay_prints_states_and_reports_failing_step() {
    let ttt = corpus("tictactoe.rb1");
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.rbtrace", "");
    let o = rb1(&["replay", path(&ttt), path(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "{resume_idx: 0, board: {cells: [0, 0, 0, 0, 0, 0, 0, 0, 0], current_player: 0}}\n"
    );

    let win = write(
        dir.path(),
        "win.rbtrace",
        "# act play\nmark(0, 0)\nmark(1, 0)\nmark(1, 1)\nmark(2, 0)\nmark(2, 2)\n",
    );
    let o = rb1(&["replay", path(&ttt), path(&win)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("{resume_idx: -1,"), "{}", stdout(&o));

    let bad = write(dir.path(), "bad.rbtrace", "mark(0, 0)\nmark(1, 1)\nmark(0, 0)\n");
    let o = rb1(&["replay", path(&ttt), path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: step 2 `mark(0, 0)`"), "{}", stderr(&o));
    assert!(stdout(&o).contains("cells: [1, 0, 0, 0, 2, 0, 0, 0, 0]"), "{}", stdout(&o));

    let garbled = write(dir.path(), "garbled.rbtrace", "mark(0, 0)\nmark(9)\n");
    let o = rb1(&["replay", path(&ttt), path(&garbled)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn idl_is_json_matching_sizes() {
    for (game, size) in [("tictactoe.rb1", 88), ("connect4.rb1", 416), ("catch.rb1", 32)] {
        let o = rb1(&["idl", path(&corpus(game))]);
        assert_eq!(o.status.code(), Some(0));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let act = &v["acts"][0];
        assert_eq!(act["name"], "play");
        let class = v["classes"].as_array().unwrap().iter().find(|c| c["name"] == act["class"]).unwrap();
        assert_eq!(class["size"], size, "{game}");
    }
}

#[test]
fn serve_session() {
    let ttt = corpus("tictactoe.rb1");
    // Winning line for the first player, by table index (x * 3 + y).
    let input = [
        r#"{"cmd":"reset"}"#,
        r#"{"cmd":"step","index":0}"#,
        r#"{"cmd":"step","index":99}"#,
        "this is not json",
        r#"{"cmd":"step","index":0}"#,
        r#"{"cmd":"step","index":3}"#,
        r#"{"cmd":"step","index":4}"#,
        r#"{"cmd":"step","index":6}"#,
        r#"{"cmd":"step","action":{"name":"mark","args":[2,2]}}"#,
        r#"{"cmd":"is_done"}"#,
        r#"{"cmd":"score","player":0}"#,
        r#"{"cmd":"quit"}"#,
        r#"{"cmd":"reset"}"#,
    ]
    .join("\n");
    let o = rb1_stdin(&["serve", path(&ttt)], &input);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 12, "quit ends the session");
    assert_eq!(lines[0], serde_json::json!({"ok": true, "is_done": false, "legal_count": 9}));
    assert_eq!(lines[1]["legal_count"], 8);
    assert_eq!(lines[2]["error"]["kind"], "protocol");
    assert_eq!(lines[3]["error"]["kind"], "protocol");
    assert_eq!(lines[4]["error"]["kind"], "precondition");
    for l in &lines[5..8] {
        assert_eq!(l["ok"], true, "{l}");
    }
    assert_eq!(lines[8]["is_done"], true, "{}", lines[8]);
    assert_eq!(lines[9]["is_done"], true);
    assert_eq!(lines[10]["score"], 1.0, "{}", lines[10]);
    assert_eq!(lines[11], serde_json::json!({"ok": true}));
}

#[test]
fn missing_file_and_unknown_act_exit_two() {
    assert_eq!(rb1(&["check", "/nonexistent/x.rb1"]).status.code(), Some(2));
    let o = rb1(&["graph", path(&corpus("tictactoe.rb1")), "--act", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no act named `nope`"));
}
