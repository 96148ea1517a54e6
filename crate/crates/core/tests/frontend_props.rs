mod oracles;

use proptest::prelude::*;
use rb1_core::frontend::{parse_source, pretty_print};
use rb1_core::runtime::run_function;
use rb1_core::{compile, Value};

fn int_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..20).prop_map(|n| n.to_string()),
        Just("a".to_string()),
        Just("b".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "%"]), inner.clone())
                .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
            inner.clone().prop_map(|e| format!("-{e}")),
            (inner.clone(), inner.clone(), inner)
                .prop_map(|(c, t, e)| format!("pick({c} < {t}, {t}, {e})")),
        ]
    })
}

fn program_for(e: &str) -> String {
    format!(
        "fun pick(Bool c, Int x, Int y) -> Int:\n  if c:\n    return x\n  return y\n\n\
         fun f(Int a, Int b) -> Int:\n  return {e}\n"
    )
}

fn outcome(src: &str, a: i64, b: i64) -> Result<Value, String> {
    let p = compile(src).unwrap();
    run_function(&p, "f", &[Value::Int(a), Value::Int(b)]).map_err(|e| e.kind().to_string())
}

proptest! {
    #[test]
    fn pretty_print_preserves_meaning(e in int_expr(), a in -5i64..5, b in -5i64..5) {
        let src = program_for(&e);
        let printed = pretty_print(&parse_source(&src).unwrap());
        let again = pretty_print(&parse_source(&printed).unwrap());
        prop_assert_eq!(&printed, &again);
        prop_assert_eq!(outcome(&src, a, b), outcome(&printed, a, b));
    }
}

#[test]
fn corpus_pretty_print_is_a_fixed_point() {
    for f in ["tictactoe", "connect4", "catch", "action_chain", "composed", "mutual_acts"] {
        let src = oracles::source(&format!("{f}.rb1"));
        let once = pretty_print(&parse_source(&src).unwrap());
        let twice = pretty_print(&parse_source(&once).unwrap());
        assert_eq!(once, twice, "{f}");
    }
}

#[test]
fn pretty_printed_games_behave_identically() {
    for f in ["tictactoe", "connect4", "catch"] {
        let src = oracles::source(&format!("{f}.rb1"));
        let a = compile(&src).unwrap();
        let b = compile(&pretty_print(&parse_source(&src).unwrap())).unwrap();
        let act = a.act("play").unwrap();
        assert_eq!(a.action_table(act), b.action_table(act));
        assert_eq!(a.afg(act), b.afg(act));
    }
}
