//! Named instances shipped with the crate.

use crate::annotation::{AnnotatedStrategy, Label};
use crate::game::{GameSpec, ParityTreeAutomaton};
use crate::io::format::{parse_game, parse_spec, GameFile};
use crate::solvers::delay::DelayForm;
use crate::strategy::DecisionStructure;

pub const BLIND_GAME: &str = include_str!("../fixtures/blind.game");
pub const FULL_GAME: &str = include_str!("../fixtures/full.game");
pub const DMASK_GAME: &str = include_str!("../fixtures/dmask.game");
pub const EVENR_OBSERVER_GAME: &str = include_str!("../fixtures/evenr_observer.game");
pub const PARITY_OBSERVER_GAME: &str = include_str!("../fixtures/parity_observer.game");
pub const DELAY1_GAME: &str = include_str!("../fixtures/delay1.game");

pub const SAFE_SPEC: &str = include_str!("../fixtures/safe.spec");
pub const EVENR_SPEC: &str = include_str!("../fixtures/evenr.spec");
pub const STEER_SPEC: &str = include_str!("../fixtures/steer.spec");
pub const INVERTED_SAFE_SPEC: &str = include_str!("../fixtures/inverted_safe.spec");
pub const ALTERNATE_SPEC: &str = include_str!("../fixtures/alternate.spec");

pub const DELAY_SAME_SPEC: &str = include_str!("../fixtures/delay_same.spec");
pub const DELAY_REACT_SPEC: &str = include_str!("../fixtures/delay_react.spec");
pub const DELAY_LAGGED_SPEC: &str = include_str!("../fixtures/delay_lagged.spec");
pub const DELAY_UNSAT_SPEC: &str = include_str!("../fixtures/delay_unsat.spec");
pub const DELAY_EVENR_SPEC: &str = include_str!("../fixtures/delay_evenr.spec");

/// One-player game files by name.
pub const ONE_PLAYER_GAMES: [(&str, &str); 5] = [
    ("blind", BLIND_GAME),
    ("full", FULL_GAME),
    ("dmask", DMASK_GAME),
    ("evenr_observer", EVENR_OBSERVER_GAME),
    ("parity_observer", PARITY_OBSERVER_GAME),
];

/// One-player specification files by name.
pub const ONE_PLAYER_SPECS: [(&str, &str); 5] = [
    ("safe", SAFE_SPEC),
    ("evenr", EVENR_SPEC),
    ("steer", STEER_SPEC),
    ("inverted_safe", INVERTED_SAFE_SPEC),
    ("alternate", ALTERNATE_SPEC),
];

/// Delay specifications by name, written over base directions.
pub const DELAY_SPECS: [(&str, &str); 5] = [
    ("same", DELAY_SAME_SPEC),
    ("react", DELAY_REACT_SPEC),
    ("lagged", DELAY_LAGGED_SPEC),
    ("unsat", DELAY_UNSAT_SPEC),
    ("evenr", DELAY_EVENR_SPEC),
];

pub fn game_file(text: &str) -> GameFile {
    parse_game(text).unwrap_or_else(|d| panic!("fixture does not parse: {d:?}"))
}

fn spec_for(file: &GameFile, text: &str) -> ParityTreeAutomaton {
    parse_spec(text, file).unwrap_or_else(|d| panic!("fixture spec does not parse: {d:?}"))
}

pub fn blind_game() -> GameSpec {
    game_file(BLIND_GAME).game
}

pub fn full_game() -> GameSpec {
    game_file(FULL_GAME).game
}

pub fn dmask_game() -> GameSpec {
    game_file(DMASK_GAME).game
}

pub fn evenr_observer_game() -> GameSpec {
    game_file(EVENR_OBSERVER_GAME).game
}

pub fn parity_observer_game() -> GameSpec {
    game_file(PARITY_OBSERVER_GAME).game
}

pub fn delay1_form() -> DelayForm {
    game_file(DELAY1_GAME).delay.expect("delay fixture")
}

pub fn delay1_game() -> GameSpec {
    delay1_form().game
}

fn one_player_spec(text: &str) -> ParityTreeAutomaton {
    spec_for(&game_file(BLIND_GAME), text)
}

pub fn safe_spec() -> ParityTreeAutomaton {
    one_player_spec(SAFE_SPEC)
}

pub fn evenr_spec() -> ParityTreeAutomaton {
    one_player_spec(EVENR_SPEC)
}

pub fn steer_spec() -> ParityTreeAutomaton {
    one_player_spec(STEER_SPEC)
}

pub fn inverted_safe_spec() -> ParityTreeAutomaton {
    one_player_spec(INVERTED_SAFE_SPEC)
}

pub fn alternate_spec() -> ParityTreeAutomaton {
    one_player_spec(ALTERNATE_SPEC)
}

/// Lifted delay specification for the one-round delay game.
pub fn delay_spec(text: &str) -> ParityTreeAutomaton {
    spec_for(&game_file(DELAY1_GAME), text)
}

pub fn delay_same_spec() -> ParityTreeAutomaton {
    delay_spec(DELAY_SAME_SPEC)
}

/// Delay specifications over base directions.
pub fn delay_base_specs() -> Vec<ParityTreeAutomaton> {
    let form = delay1_form();
    DELAY_SPECS.iter().map(|(_, t)| form.unlift_spec(&delay_spec(t))).collect()
}

/// The two-node witness for the steerable specification on the fully
/// observed game: `x` plays b and moves to `y`; `y` plays a, returning to
/// `x` on l and staying on r.
pub fn steer_witness() -> (GameSpec, ParityTreeAutomaton, AnnotatedStrategy) {
    let g = full_game();
    let spec = steer_spec();
    let a = g.profile_of(&[0]);
    let b = g.profile_of(&[1]);
    let mut s = DecisionStructure::new(vec![b, a], vec![vec![1, 1], vec![0, 1]], 0);
    s.names = vec!["x".into(), "y".into()];
    let ql = spec.states.iter().position(|x| x == "ql").unwrap();
    let qr = spec.states.iter().position(|x| x == "qr").unwrap();
    let labels = vec![Label { observers: vec![0], spec: ql }, Label { observers: vec![0], spec: qr }];
    (g, spec, AnnotatedStrategy { strategy: s, labels })
}
