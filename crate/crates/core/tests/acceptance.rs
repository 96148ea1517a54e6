//! One line per acceptance criterion, with its wall-clock time against the
//! budget. Runs without the libtest harness so the lines always print.

mod oracles;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use oracles::{action, program, Catch, ConnectFour, Oracle, TicTacToe};
use rb1_core::runtime::{run_function, ReferenceEnv};
use rb1_core::serialize::{from_binary, from_text, observation_tensor, tensor_size, to_binary, to_text, OneHotGroup};
use rb1_core::tools::bench::{bench, compare_logging, BenchConfig};
use rb1_core::tools::fuzz::{fuzz, outcome_label, FuzzConfig};
use rb1_core::tools::rng::TraceRng;
use rb1_core::typecheck::CheckError;
use rb1_core::{compile, CompileError, Environment, Program, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

type Criterion = (&'static str, u64, fn() -> Outcome);

const GAMES: [&str; 3] = ["tictactoe.rb1", "connect4.rb1", "catch.rb1"];

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("tic-tac-toe end-to-end", 1, ttt_main),
        ("mutual-recursion gate", 1, mutual_recursion),
        ("check/apply agreement", 30, check_apply_agreement),
        ("oracle equivalence", 60, oracle_equivalence),
        ("serialization", 30, serialization),
        ("action flow graphs", 60, action_flow_graphs),
        ("draw rate", 60, draw_rate),
        ("benchmark methodology", 60, benchmark),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (tag, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "{tag} [{}] {name}: {detail} ({:.2}s, budget {budget}s)",
            i + 1,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ttt_main() -> Outcome {
    let p = program("tictactoe.rb1");
    let printed = run_function(&p, "main", &[]).map_err(|e| e.to_string())?.to_string();
    ensure!(printed == "1", "main printed {printed}");
    let mut env = Environment::new(&p, "play", &[]).map_err(|e| e.to_string())?;
    for (x, y) in [(0, 0), (1, 0), (1, 1), (2, 0), (2, 2)] {
        env.apply(&action("mark", &[x, y])).map_err(|e| e.to_string())?;
    }
    ensure!(env.is_done(), "game not finished after five marks");
    Ok("main prints 1, is_done true".into())
}

fn mutual_recursion() -> Outcome {
    match compile(&oracles::source("mutual_acts.rb1")) {
        Err(CompileError::Check(CheckError::Cycle(c))) => {
            ensure!(c.cycle == ["game_1", "game_2"], "cycle {:?}", c.cycle);
        }
        Err(e) => return Err(format!("wrong error: {e}")),
        Ok(_) => return Err("mutually recursive acts compiled".into()),
    }
    let p = compile(&oracles::source("composed.rb1")).map_err(|e| e.to_string())?;
    let order: Vec<&str> = p.module.action_order.iter().map(|&a| p.module.acts[a].name.as_str()).collect();
    ensure!(order == ["inner", "outer"], "order {order:?}");
    Ok("cycle [game_1, game_2] rejected; inner/outer composition compiles".into())
}

/// Every table action is offered to `can_apply` and then to `apply` on a
/// copy; the two must agree and rejections must leave the frame alone.
fn check_apply_agreement() -> Outcome {
    const STEPS: u64 = 10_000;
    let mut checked = 0u64;
    for file in GAMES {
        let p = program(file);
        let act = p.default_act().unwrap();
        let table = p.action_table(act);
        let mut rng = TraceRng::new(3);
        let mut env = Environment::with_act(&p, act, &[]).unwrap();
        for _ in 0..STEPS {
            if env.is_done() {
                env = Environment::with_act(&p, act, &[]).unwrap();
            }
            for a in &table {
                let ok = env.can_apply(a).map_err(|e| e.to_string())?;
                let mut copy = env.clone();
                match copy.apply(a) {
                    Ok(()) => ensure!(ok, "{file}: {a} applied but can_apply said no"),
                    Err(e) => {
                        ensure!(!ok, "{file}: {a} passed can_apply but apply failed: {e}");
                        ensure!(e.kind() == "precondition", "{file}: {a}: {e}");
                        ensure!(copy.frame().identical(env.frame()), "{file}: rejected {a} changed the frame");
                    }
                }
                checked += 1;
            }
            let legal = env.legal_actions().unwrap();
            env.apply(&legal[rng.below(legal.len())]).unwrap();
        }
    }
    Ok(format!("{} steps, {checked} can_apply/apply pairs agree", STEPS * 3))
}

fn equivalence<O: Oracle>(traces: u64) -> Result<u64, String> {
    let p = program(O::FILE);
    let act = p.act("play").unwrap();
    let mut steps = 0;
    for i in 0..traces {
        let mut rng = TraceRng::for_trace(11, i);
        let mut env = Environment::with_act(&p, act, &[]).unwrap();
        let mut reference = ReferenceEnv::new(&p, act, &[]).unwrap();
        let mut oracle = O::new();
        loop {
            ensure!(env.frame().identical(reference.frame()), "{}: trace {i}: machine and reference differ", O::FILE);
            ensure!(env.resume_idx() == oracle.resume_idx(), "{}: trace {i}: resume_idx", O::FILE);
            for (path, want) in oracle.fields() {
                let got = env.get_field(&path).map_err(|e| e.to_string())?;
                ensure!(got == Value::Int(want), "{}: trace {i}: {path} = {got}, oracle {want}", O::FILE);
            }
            let legal = env.legal_actions().unwrap();
            ensure!(legal == oracle.legal(), "{}: trace {i}: legal actions differ", O::FILE);
            ensure!(env.is_done() == oracle.is_done(), "{}: trace {i}: is_done differs", O::FILE);
            if legal.is_empty() {
                break;
            }
            let a = &legal[rng.below(legal.len())];
            env.apply(a).unwrap();
            reference.apply(a).map_err(|e| e.to_string())?;
            oracle.apply(a);
            steps += 1;
        }
        let label = outcome_label(&env).map_err(|e| e.to_string())?;
        ensure!(label == oracle.outcome(), "{}: trace {i}: outcome {label}, oracle {}", O::FILE, oracle.outcome());
    }
    Ok(steps)
}

fn oracle_equivalence() -> Outcome {
    let steps = equivalence::<TicTacToe>(1000)? + equivalence::<ConnectFour>(1000)? + equivalence::<Catch>(1000)?;
    Ok(format!("3000 traces, {steps} steps identical across machine, reference and oracle"))
}

fn sample_states(p: &Arc<Program>, n: u64) -> Vec<Environment> {
    let act = p.default_act().unwrap();
    (0..n)
        .map(|i| {
            let mut rng = TraceRng::for_trace(5, i);
            let mut env = Environment::with_act(p, act, &[]).unwrap();
            let depth = rng.below(45);
            for _ in 0..depth {
                let legal = env.legal_actions().unwrap();
                if legal.is_empty() {
                    break;
                }
                env.apply(&legal[rng.below(legal.len())]).unwrap();
            }
            env
        })
        .collect()
}

fn serialization() -> Outcome {
    for file in GAMES {
        let p = program(file);
        let act = p.default_act().unwrap();
        let size = tensor_size(&p, act);
        let first = sample_states(&p, 1000);
        let second = sample_states(&program(file), 1000);
        for (env, twin) in first.iter().zip(&second) {
            let bin = to_binary(env);
            ensure!(bin == to_binary(twin), "{file}: binary differs between runs");
            let back = from_binary(&p, act, &bin).map_err(|e| e.to_string())?;
            ensure!(back.frame().identical(env.frame()), "{file}: binary round trip");
            let back = from_text(&p, act, &to_text(env)).map_err(|e| e.to_string())?;
            ensure!(back.frame().identical(env.frame()), "{file}: text round trip");
            let t = observation_tensor(env, 0);
            ensure!(t.len() == size, "{file}: tensor length {} != {size}", t.len());
            for OneHotGroup(r) in OneHotGroup::all(env) {
                let sum: f64 = t[r.clone()].iter().sum();
                ensure!(sum == 1.0, "{file}: one-hot group {r:?} sums to {sum}");
            }
        }
    }
    Ok("3000 states round-trip; binary stable; tensors constant; one-hot groups sum to 1".into())
}

fn action_flow_graphs() -> Outcome {
    let p = program("tictactoe.rb1");
    let g = p.afg(p.act("play").unwrap());
    ensure!(g.nodes.len() == 1 && g.nodes[0].action == "mark", "nodes {:?}", g.nodes);
    ensure!(g.edges == BTreeSet::from([(0, 0)]), "edges {:?}", g.edges);
    ensure!(g.entry == BTreeSet::from([0]) && g.exit == BTreeSet::from([0]), "entry/exit");

    // Reference chain graph, nodes numbered from zero.
    let figure = BTreeSet::from([(0, 1), (1, 2), (2, 3), (3, 1), (2, 1)]);
    let p = program("action_chain.rb1");
    let g = p.afg(p.act("play").unwrap());
    ensure!(g.edges == figure, "chain edges {:?}", g.edges);
    ensure!(g.entry == BTreeSet::from([0]) && g.exit == BTreeSet::from([0, 3]), "chain entry/exit");

    let mut transitions = 0;
    for (file, traces) in [
        ("tictactoe.rb1", 5000),
        ("connect4.rb1", 2000),
        ("catch.rb1", 3000),
        ("action_chain.rb1", 1000),
    ] {
        let p = program(file);
        let mut cfg = FuzzConfig::new(p.default_act().unwrap(), 17, traces);
        cfg.check_serialization = false;
        cfg.max_steps = 50;
        let r = fuzz(&p, &cfg);
        ensure!(r.passed(), "{file}: {:?}", r.failures.first());
        transitions += r.steps_total;
    }
    ensure!(transitions >= 100_000, "only {transitions} transitions");
    Ok(format!("TTT single self-loop; chain matches reference graph; {transitions} transitions conform"))
}

fn draw_rate() -> Outcome {
    let expected = TicTacToe::drawn_sequences() as f64 / 362_880.0;
    let p = program("tictactoe.rb1");
    let mut cfg = FuzzConfig::new(p.act("play").unwrap(), 2024, 100_000);
    cfg.check_serialization = false;
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let r = fuzz(&p, &cfg);
    ensure!(r.passed(), "{:?}", r.failures.first());
    let rate = r.count("draw") as f64 / r.traces_run as f64;
    ensure!((rate - expected).abs() <= 0.01, "draw rate {rate:.4}, expected {expected:.4}");
    Ok(format!("draw rate {rate:.4} vs exhaustive {expected:.4}"))
}

fn benchmark() -> Outcome {
    let mut lines = Vec::new();
    for file in GAMES {
        let p = program(file);
        let mut cfg = BenchConfig {
            act: p.default_act().unwrap(),
            seed: 1,
            traces: 1024,
            max_steps: 10_000,
            action_log: false,
        };
        let single = bench(&p, &cfg).map_err(|e| e.to_string())?;
        ensure!(single.traces == 1024, "{file}: ran {} traces", single.traces);
        if file == "tictactoe.rb1" {
            ensure!(single.total <= Duration::from_secs(5), "TTT took {:?}", single.total);
        }
        cfg.action_log = true;
        let (off, on) = compare_logging(&p, &cfg, 5).map_err(|e| e.to_string())?;
        ensure!(on >= off, "{file}: log on {on:?} < log off {off:?}");
        lines.push(format!("{file} off {:.1}ms on {:.1}ms", ms(off), ms(on)));
    }
    Ok(lines.join("; "))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}
