use std::time::Instant;

use dsynth::fixtures;
use dsynth::solvers::delay::{delay_game, lift_spec, solve_delay};

#[test]
fn delay_one_verdicts() {
    let form = fixtures::delay1_form();
    let expected = [("same", true), ("react", false), ("lagged", true), ("unsat", false), ("evenr", false)];
    for ((name, text), (ename, win)) in fixtures::DELAY_SPECS.iter().zip(expected) {
        assert_eq!(*name, ename);
        let spec = fixtures::delay_spec(text);
        let t = Instant::now();
        let got = solve_delay(&form, &spec).unwrap();
        eprintln!("{name}: {:?} nodes in {:?}", got.as_ref().map(|c| c.strategy.len()), t.elapsed());
        assert_eq!(got.is_some(), win, "{name}");
    }
}

#[test]
fn reaction_is_possible_without_delay() {
    let form = fixtures::delay1_form();
    let zero = delay_game(&form.base, 0).unwrap();
    let react = form.unlift_spec(&fixtures::delay_spec(fixtures::DELAY_REACT_SPEC));
    let got = solve_delay(&zero, &lift_spec(&zero, &react)).unwrap();
    assert!(got.is_some());
}
