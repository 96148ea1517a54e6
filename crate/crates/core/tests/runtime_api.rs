mod oracles;

use std::sync::Arc;

use oracles::{action, program};
use rb1_core::runtime::{reference_step, run_function};
use rb1_core::{compile, ActionValue, EnvError, Environment, Value};

fn ttt() -> Environment {
    Environment::new(&program("tictactoe.rb1"), "play", &[]).unwrap()
}

#[test]
fn ttt_main_returns_one() {
    let p = program("tictactoe.rb1");
    assert_eq!(run_function(&p, "main", &[]).unwrap(), Value::Int(1));
}

#[test]
fn ttt_main_moves_by_hand_finish() {
    let mut env = ttt();
    for (x, y) in [(0, 0), (1, 0), (1, 1), (2, 0), (2, 2)] {
        assert!(!env.is_done());
        env.apply(&action("mark", &[x, y])).unwrap();
    }
    assert!(env.is_done());
    assert_eq!(env.resume_idx(), -1);
    assert!(env.legal_actions().unwrap().is_empty());
    assert_eq!(env.score(0).unwrap().unwrap(), 1.0);
    assert_eq!(env.score(1).unwrap().unwrap(), -1.0);
}

#[test]
fn out_of_range_argument_is_not_applicable() {
    let env = ttt();
    assert!(!env.can_apply(&action("mark", &[3, 0])).unwrap());
    assert!(!env.can_apply(&action("mark", &[-1, 0])).unwrap());
    assert!(env.can_apply(&action("mark", &[2, 2])).unwrap());
}

#[test]
fn malformed_actions_are_errors() {
    let env = ttt();
    let wrong_kind = ActionValue::new("mark", vec![Value::Bool(true), Value::Int(0)]);
    assert!(matches!(env.can_apply(&wrong_kind), Err(EnvError::TypeMismatch { index: 0, .. })));
    assert!(matches!(env.can_apply(&action("mark", &[0])), Err(EnvError::Arity { .. })));
    assert!(matches!(env.can_apply(&action("jump", &[])), Err(EnvError::UnknownAction(_))));
}

#[test]
fn rejected_apply_changes_nothing() {
    let mut env = ttt();
    env.apply(&action("mark", &[1, 1])).unwrap();
    let before = env.frame().clone();
    let err = env.apply(&action("mark", &[1, 1])).unwrap_err();
    assert_eq!(err.kind(), "precondition");
    assert!(env.frame().identical(&before));
    assert!(!env.is_poisoned());
}

#[test]
fn field_paths() {
    let mut env = ttt();
    env.apply(&action("mark", &[1, 1])).unwrap();
    assert_eq!(env.get_field("board.cells[4]").unwrap(), Value::Int(1));
    assert_eq!(env.get_field("board.current_player").unwrap(), Value::Int(1));
    assert_eq!(env.get_field("resume_idx").unwrap(), Value::Int(0));
    assert_eq!(env.get_field("board.cells[9]").unwrap_err().kind(), "path");
    assert_eq!(env.get_field("board.nope").unwrap_err().kind(), "path");

    env.set_field("board.cells[0]", Value::Int(2)).unwrap();
    assert!(!env.can_apply(&action("mark", &[0, 0])).unwrap());
    assert_eq!(env.set_field("board.cells[0]", Value::Int(3)).unwrap_err().kind(), "range");
    assert_eq!(env.set_field("resume_idx", Value::Int(7)).unwrap_err().kind(), "range");
    assert_eq!(env.set_field("board.current_player", Value::Bool(true)).unwrap_err().kind(), "range");
}

#[test]
fn functions_run_directly() {
    let p = compile(
        "fun factorial(Int n) -> Int:\n  if n <= 1:\n    return 1\n  return n * factorial(n - 1)\n\n\
         fun identity(Int x) -> Int:\n  return x\n\n\
         fun boom() -> Int:\n  return 1 / 0\n",
    )
    .unwrap();
    assert_eq!(run_function(&p, "factorial", &[Value::Int(10)]).unwrap(), Value::Int(3628800));
    assert_eq!(run_function(&p, "identity", &[Value::Int(42)]).unwrap(), Value::Int(42));
    assert_eq!(run_function(&p, "boom", &[]).unwrap_err().kind(), "division-by-zero");
    assert_eq!(run_function(&p, "factorial", &[Value::Int(21)]).unwrap_err().kind(), "overflow");
    assert_eq!(run_function(&p, "missing", &[]).unwrap_err().kind(), "unknown");
}

#[test]
fn runaway_recursion_is_bounded() {
    let p = compile("fun f(Int n) -> Int:\n  return f(n + 1)\n").unwrap();
    assert_eq!(run_function(&p, "f", &[Value::Int(0)]).unwrap_err().kind(), "call-depth");
}

#[test]
fn runtime_error_poisons() {
    let src = "act play() -> Div:\n  frm d = 0\n  act pick(Int<0,2> x)\n  d = 10 / x\n  act again()\n";
    let p = Arc::new(compile(src).unwrap());
    let mut env = Environment::new(&p, "play", &[]).unwrap();
    let e = env.apply(&action("pick", &[0])).unwrap_err();
    assert_eq!(e.kind(), "division-by-zero");
    assert!(env.is_poisoned());
    assert!(matches!(env.legal_actions(), Err(EnvError::Poisoned)));
    assert!(matches!(env.apply(&action("again", &[])), Err(EnvError::Poisoned)));
}

#[test]
fn replay_reports_failing_step() {
    let mut env = ttt();
    let trace = [action("mark", &[0, 0]), action("mark", &[1, 1]), action("mark", &[0, 0])];
    let err = env.replay(&trace).unwrap_err();
    assert_eq!(err.at, 2);
    assert_eq!(err.error.kind(), "precondition");
}

#[test]
fn reference_snapshots_follow_the_trace() {
    let p = program("tictactoe.rb1");
    let trace = [action("mark", &[0, 0]), action("mark", &[1, 1])];
    let snaps = reference_step(&p, "play", &[], &trace).unwrap();
    assert_eq!(snaps.len(), 3);
    let mut env = Environment::new(&p, "play", &[]).unwrap();
    assert!(env.frame().identical(&snaps[0]));
    for (a, s) in trace.iter().zip(&snaps[1..]) {
        env.apply(a).unwrap();
        assert!(env.frame().identical(s));
    }
}

#[test]
fn nested_acts_compose() {
    let p = program("composed.rb1");
    let act = p.default_act().unwrap();
    assert_eq!(p.module.acts[act].name, "outer");
    let mut env = Environment::with_act(&p, act, &[]).unwrap();
    let mut steps = 0;
    while !env.is_done() {
        let legal = env.legal_actions().unwrap();
        assert!(!legal.is_empty());
        env.apply(&legal[legal.len() - 1]).unwrap();
        steps += 1;
        assert!(steps < 100);
    }
    // Two rounds of reaching 3 with the largest steps: 2 + 1 each.
    assert_eq!(steps, 4);
}
