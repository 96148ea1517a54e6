mod oracles;

use oracles::{program, Catch, ConnectFour, Oracle, TicTacToe};
use proptest::prelude::*;
use rb1_core::runtime::ReferenceEnv;
use rb1_core::tools::fuzz::outcome_label;
use rb1_core::Environment;

/// Plays the moves picked by `choices` on the compiled act, the reference
/// interpreter and the oracle, comparing all three after every step.
fn walk<O: Oracle>(choices: &[usize]) {
    let p = program(O::FILE);
    let act = p.act("play").unwrap();
    let mut env = Environment::with_act(&p, act, &[]).unwrap();
    let mut reference = ReferenceEnv::new(&p, act, &[]).unwrap();
    let mut oracle = O::new();
    oracle.assert_matches(&env);
    for &c in choices {
        let legal = env.legal_actions().unwrap();
        assert_eq!(legal, oracle.legal());
        if legal.is_empty() {
            break;
        }
        let a = &legal[c % legal.len()];
        assert!(reference.can_apply(a).unwrap());
        env.apply(a).unwrap();
        reference.apply(a).unwrap();
        oracle.apply(a);
        oracle.assert_matches(&env);
        assert!(env.frame().identical(reference.frame()));
        assert_eq!(env.is_done(), oracle.is_done());
    }
    if env.is_done() {
        assert_eq!(outcome_label(&env).unwrap(), oracle.outcome());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tictactoe_matches_oracle(choices in prop::collection::vec(0usize..9, 0..10)) {
        walk::<TicTacToe>(&choices);
    }

    #[test]
    fn connect4_matches_oracle(choices in prop::collection::vec(0usize..7, 0..43)) {
        walk::<ConnectFour>(&choices);
    }

    #[test]
    fn catch_matches_oracle(choices in prop::collection::vec(0usize..5, 0..11)) {
        walk::<Catch>(&choices);
    }
}

#[test]
fn vertical_connect_four_win() {
    walk::<ConnectFour>(&[0, 1, 0, 1, 0, 1, 0]);
    let p = program("connect4.rb1");
    let mut env = Environment::new(&p, "play", &[]).unwrap();
    for c in [0, 1, 0, 1, 0, 1, 0] {
        env.apply(&oracles::action("drop", &[c])).unwrap();
    }
    assert!(env.is_done());
    assert_eq!(outcome_label(&env).unwrap(), "win:0");
}

#[test]
fn catch_by_tracking_the_ball() {
    let p = program("catch.rb1");
    let mut env = Environment::new(&p, "play", &[]).unwrap();
    env.apply(&oracles::action("drop", &[4])).unwrap();
    for _ in 0..9 {
        env.apply(&oracles::action("move", &[2])).unwrap();
    }
    assert!(env.is_done());
    assert_eq!(outcome_label(&env).unwrap(), "win:0");
}
