//! Game model: moves, histories, Mealy observation machines and parity tree
//! automata used as specifications.
//!
//! Actions, directions and machine states are stored as indices into declared
//! name tables. Action profiles are encoded as a single index in lexicographic
//! order over the players (player 0 most significant), and a move `(a, d)` is
//! encoded as `profile * |D| + d`, which enumerates Γ in the canonical order
//! `(a⁰, …, aⁿ⁻¹, d)`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub type StateId = usize;

/// Errors raised while operating on well-formed games.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("move {index} of the history uses action profile {profile}, but only {count} profiles exist")]
    BadProfile { index: usize, profile: usize, count: usize },
    #[error("move {index} of the history uses direction {direction}, but only {count} directions exist")]
    BadDirection { index: usize, direction: usize, count: usize },
    #[error("machine has no transition for state {state} on move {mv}")]
    MissingTransition { state: StateId, mv: usize },
}

/// A single round: joint action profile followed by Nature's direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub profile: usize,
    pub direction: usize,
}

impl Move {
    pub fn new(profile: usize, direction: usize) -> Self {
        Move { profile, direction }
    }
}

/// A finite sequence of moves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History(pub Vec<Move>);

impl History {
    pub fn empty() -> Self {
        History(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn moves(&self) -> &[Move] {
        &self.0
    }

    pub fn push(&mut self, mv: Move) {
        self.0.push(mv);
    }

    pub fn extended(&self, mv: Move) -> History {
        let mut h = self.clone();
        h.push(mv);
        h
    }
}

impl From<Vec<Move>> for History {
    fn from(moves: Vec<Move>) -> Self {
        History(moves)
    }
}

/// Deterministic Mealy machine reading moves and emitting observations.
///
/// The transition table is indexed by `state * moves + move`; `None` entries
/// only exist in machines that have not passed validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyMachine {
    pub states: Vec<String>,
    pub initial: StateId,
    pub outputs: Vec<String>,
    pub moves: usize,
    pub table: Vec<Option<(StateId, usize)>>,
}

impl MealyMachine {
    /// Machine with all transitions undefined.
    pub fn empty(states: Vec<String>, initial: StateId, outputs: Vec<String>, moves: usize) -> Self {
        let table = vec![None; states.len() * moves];
        MealyMachine { states, initial, outputs, moves, table }
    }

    /// Builds a total machine from a step function.
    pub fn from_fn(
        states: Vec<String>,
        initial: StateId,
        outputs: Vec<String>,
        moves: usize,
        mut step: impl FnMut(StateId, usize) -> (StateId, usize),
    ) -> Self {
        let mut m = Self::empty(states, initial, outputs, moves);
        for q in 0..m.states.len() {
            for mv in 0..moves {
                m.table[q * moves + mv] = Some(step(q, mv));
            }
        }
        m
    }

    pub fn set(&mut self, state: StateId, mv: usize, target: StateId, output: usize) {
        self.table[state * self.moves + mv] = Some((target, output));
    }

    pub fn try_step(&self, state: StateId, mv: usize) -> Option<(StateId, usize)> {
        self.table.get(state * self.moves + mv).copied().flatten()
    }

    /// Successor state and observation. Panics on machines that failed
    /// validation.
    pub fn step(&self, state: StateId, mv: usize) -> (StateId, usize) {
        self.try_step(state, mv)
            .unwrap_or_else(|| panic!("incomplete Mealy machine: state {state}, move {mv}"))
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Same machine with states permuted by `perm` (old index -> new index).
    pub fn renamed(&self, perm: &[StateId]) -> MealyMachine {
        let n = self.states.len();
        let mut states = vec![String::new(); n];
        for (old, &new) in perm.iter().enumerate() {
            states[new] = self.states[old].clone();
        }
        let mut m = MealyMachine::empty(states, perm[self.initial], self.outputs.clone(), self.moves);
        for q in 0..n {
            for mv in 0..self.moves {
                if let Some((t, b)) = self.try_step(q, mv) {
                    m.set(perm[q], mv, perm[t], b);
                }
            }
        }
        m
    }
}

/// The state sequence and observation sequence of a machine on a history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub states: Vec<StateId>,
    pub observations: Vec<usize>,
}

/// Nondeterministic parity tree automaton. Transition tuples are indexed by
/// direction; several tuples for one `(state, profile)` key express
/// nondeterminism, and a missing key means the automaton has no move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityTreeAutomaton {
    pub states: Vec<String>,
    pub initial: StateId,
    pub priorities: Vec<u32>,
    pub transitions: BTreeMap<(StateId, usize), Vec<Vec<StateId>>>,
    /// Declared observable: priorities depend only on the observation history
    /// of a single player.
    pub observable: bool,
}

impl ParityTreeAutomaton {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn priority(&self, q: StateId) -> u32 {
        self.priorities[q]
    }

    /// Number `r` of priorities in use, i.e. the length of measure tuples.
    pub fn priority_count(&self) -> usize {
        self.priorities.iter().copied().max().map_or(1, |m| m as usize + 1)
    }

    pub fn options(&self, q: StateId, profile: usize) -> &[Vec<StateId>] {
        self.transitions.get(&(q, profile)).map_or(&[], |v| v.as_slice())
    }

    pub fn add_transition(&mut self, q: StateId, profile: usize, tuple: Vec<StateId>) {
        let entry = self.transitions.entry((q, profile)).or_default();
        if !entry.contains(&tuple) {
            entry.push(tuple);
            entry.sort();
        }
    }

    /// At most one tuple per `(state, profile)`.
    pub fn is_deterministic(&self) -> bool {
        self.transitions.values().all(|v| v.len() <= 1)
    }

    /// Maps priorities onto a contiguous range starting at 0 or 1, preserving
    /// order and parity. Adjacent priorities of equal parity are merged.
    pub fn renormalize(&mut self) {
        let mut distinct: Vec<u32> = self.priorities.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let mut map = BTreeMap::new();
        let mut prev: Option<(u32, u32)> = None;
        for p in distinct {
            let out = match prev {
                None => p % 2,
                Some((pp, po)) if pp % 2 == p % 2 => po,
                Some((_, po)) => po + 1,
            };
            map.insert(p, out);
            prev = Some((p, out));
        }
        for p in &mut self.priorities {
            *p = map[p];
        }
    }
}

/// A validation finding with a stable machine-readable code.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    NoPlayers,
    EmptyActions { player: usize },
    EmptyDirections,
    ObserverCountMismatch { expected: usize, found: usize },
    ObserverMoveCount { player: usize, expected: usize, found: usize },
    InitialOutOfRange { player: usize },
    IncompleteTransition { player: usize, state: StateId, mv: usize },
    TargetOutOfRange { player: usize, state: StateId, mv: usize },
    OutputOutOfRange { player: usize, state: StateId, mv: usize },
    SpecNoStates,
    SpecInitialOutOfRange,
    SpecPriorityCount { expected: usize, found: usize },
    SpecProfileOutOfRange { state: StateId, profile: usize },
    SpecStateOutOfRange { state: StateId, profile: usize },
    SpecTupleArity { state: StateId, profile: usize, expected: usize, found: usize },
}

impl Diagnostic {
    pub fn code(&self) -> &'static str {
        match self {
            Diagnostic::NoPlayers => "NoPlayers",
            Diagnostic::EmptyActions { .. } => "EmptyActions",
            Diagnostic::EmptyDirections => "EmptyDirections",
            Diagnostic::ObserverCountMismatch { .. } => "ObserverCountMismatch",
            Diagnostic::ObserverMoveCount { .. } => "ObserverMoveCount",
            Diagnostic::InitialOutOfRange { .. } => "InitialOutOfRange",
            Diagnostic::IncompleteTransition { .. } => "IncompleteTransition",
            Diagnostic::TargetOutOfRange { .. } => "TargetOutOfRange",
            Diagnostic::OutputOutOfRange { .. } => "OutputOutOfRange",
            Diagnostic::SpecNoStates => "SpecNoStates",
            Diagnostic::SpecInitialOutOfRange => "SpecInitialOutOfRange",
            Diagnostic::SpecPriorityCount { .. } => "SpecPriorityCount",
            Diagnostic::SpecProfileOutOfRange { .. } => "SpecProfileOutOfRange",
            Diagnostic::SpecStateOutOfRange { .. } => "SpecStateOutOfRange",
            Diagnostic::SpecTupleArity { .. } => "SpecTupleArity",
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())?;
        match self {
            Diagnostic::EmptyActions { player } | Diagnostic::InitialOutOfRange { player } => {
                write!(f, " player={player}")
            }
            Diagnostic::ObserverCountMismatch { expected, found } => {
                write!(f, " expected={expected} found={found}")
            }
            Diagnostic::ObserverMoveCount { player, expected, found } => {
                write!(f, " player={player} expected={expected} found={found}")
            }
            Diagnostic::IncompleteTransition { player, state, mv }
            | Diagnostic::TargetOutOfRange { player, state, mv }
            | Diagnostic::OutputOutOfRange { player, state, mv } => {
                write!(f, " player={player} state={state} move={mv}")
            }
            Diagnostic::SpecPriorityCount { expected, found } => {
                write!(f, " expected={expected} found={found}")
            }
            Diagnostic::SpecProfileOutOfRange { state, profile }
            | Diagnostic::SpecStateOutOfRange { state, profile } => {
                write!(f, " state={state} profile={profile}")
            }
            Diagnostic::SpecTupleArity { state, profile, expected, found } => {
                write!(f, " state={state} profile={profile} expected={expected} found={found}")
            }
            _ => Ok(()),
        }
    }
}

/// Team size, action alphabets, directions and one observer per player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameSpec {
    pub actions: Vec<Vec<String>>,
    pub directions: Vec<String>,
    pub observers: Vec<MealyMachine>,
}

impl GameSpec {
    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn num_directions(&self) -> usize {
        self.directions.len()
    }

    pub fn profile_count(&self) -> usize {
        self.actions.iter().map(Vec::len).product()
    }

    /// |Γ|
    pub fn move_count(&self) -> usize {
        self.profile_count() * self.num_directions()
    }

    pub fn move_index(&self, mv: Move) -> usize {
        mv.profile * self.num_directions() + mv.direction
    }

    pub fn move_at(&self, index: usize) -> Move {
        let nd = self.num_directions();
        Move::new(index / nd, index % nd)
    }

    fn stride(&self, player: usize) -> usize {
        self.actions[player + 1..].iter().map(Vec::len).product()
    }

    /// Component of player `player` in an encoded profile.
    pub fn action_of(&self, profile: usize, player: usize) -> usize {
        (profile / self.stride(player)) % self.actions[player].len()
    }

    pub fn profile_actions(&self, profile: usize) -> Vec<usize> {
        (0..self.players()).map(|i| self.action_of(profile, i)).collect()
    }

    pub fn profile_of(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .zip(&self.actions)
            .fold(0, |acc, (&a, alphabet)| acc * alphabet.len() + a)
    }

    pub fn profile_name(&self, profile: usize) -> String {
        self.profile_actions(profile)
            .iter()
            .enumerate()
            .map(|(i, &a)| self.actions[i][a].as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn move_name(&self, mv: Move) -> String {
        format!("({},{})", self.profile_name(mv.profile), self.directions[mv.direction])
    }

    pub fn history_name(&self, h: &History) -> String {
        if h.is_empty() {
            return "ε".to_string();
        }
        h.moves().iter().map(|&m| self.move_name(m)).collect::<String>()
    }

    pub fn check_history(&self, history: &History) -> Result<(), GameError> {
        let pc = self.profile_count();
        let nd = self.num_directions();
        for (index, mv) in history.moves().iter().enumerate() {
            if mv.profile >= pc {
                return Err(GameError::BadProfile { index, profile: mv.profile, count: pc });
            }
            if mv.direction >= nd {
                return Err(GameError::BadDirection { index, direction: mv.direction, count: nd });
            }
        }
        Ok(())
    }

    /// All type invariants of the game; empty iff well-formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.actions.is_empty() {
            out.push(Diagnostic::NoPlayers);
        }
        for (player, a) in self.actions.iter().enumerate() {
            if a.is_empty() {
                out.push(Diagnostic::EmptyActions { player });
            }
        }
        if self.directions.is_empty() {
            out.push(Diagnostic::EmptyDirections);
        }
        if self.observers.len() != self.actions.len() {
            out.push(Diagnostic::ObserverCountMismatch {
                expected: self.actions.len(),
                found: self.observers.len(),
            });
        }
        let moves = self.move_count();
        for (player, m) in self.observers.iter().enumerate() {
            if m.moves != moves {
                out.push(Diagnostic::ObserverMoveCount { player, expected: moves, found: m.moves });
                continue;
            }
            if m.initial >= m.states.len() {
                out.push(Diagnostic::InitialOutOfRange { player });
            }
            for state in 0..m.states.len() {
                for mv in 0..moves {
                    match m.try_step(state, mv) {
                        None => out.push(Diagnostic::IncompleteTransition { player, state, mv }),
                        Some((t, b)) => {
                            if t >= m.states.len() {
                                out.push(Diagnostic::TargetOutOfRange { player, state, mv });
                            }
                            if b >= m.outputs.len() {
                                out.push(Diagnostic::OutputOutOfRange { player, state, mv });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Invariants of a specification relative to this game.
    pub fn validate_spec(&self, spec: &ParityTreeAutomaton) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = spec.states.len();
        if n == 0 {
            out.push(Diagnostic::SpecNoStates);
        }
        if spec.initial >= n {
            out.push(Diagnostic::SpecInitialOutOfRange);
        }
        if spec.priorities.len() != n {
            out.push(Diagnostic::SpecPriorityCount { expected: n, found: spec.priorities.len() });
        }
        let pc = self.profile_count();
        let nd = self.num_directions();
        for (&(state, profile), tuples) in &spec.transitions {
            if state >= n {
                out.push(Diagnostic::SpecStateOutOfRange { state, profile });
            }
            if profile >= pc {
                out.push(Diagnostic::SpecProfileOutOfRange { state, profile });
            }
            for t in tuples {
                if t.len() != nd {
                    out.push(Diagnostic::SpecTupleArity { state, profile, expected: nd, found: t.len() });
                } else if t.iter().any(|&q| q >= n) {
                    out.push(Diagnostic::SpecStateOutOfRange { state, profile });
                }
            }
        }
        out
    }
}

/// Runs `machine` on `history`: states `q₀…q_ℓ` and observations `b₀…b_{ℓ−1}`.
pub fn run_mealy(game: &GameSpec, machine: &MealyMachine, history: &History) -> Result<Run, GameError> {
    game.check_history(history)?;
    let mut q = machine.initial;
    let mut states = Vec::with_capacity(history.len() + 1);
    let mut observations = Vec::with_capacity(history.len());
    states.push(q);
    for &mv in history.moves() {
        let idx = game.move_index(mv);
        let (next, b) = machine
            .try_step(q, idx)
            .ok_or(GameError::MissingTransition { state: q, mv: idx })?;
        observations.push(b);
        q = next;
        states.push(q);
    }
    Ok(Run { states, observations })
}

/// `τ ∼ τ′` for the player observing through `machine`.
pub fn indistinguishable(
    game: &GameSpec,
    machine: &MealyMachine,
    a: &History,
    b: &History,
) -> Result<bool, GameError> {
    let ra = run_mealy(game, machine, a)?;
    let rb = run_mealy(game, machine, b)?;
    Ok(ra.observations == rb.observations)
}

/// Validates a game; the list is empty iff all invariants hold.
pub fn validate_game(game: &GameSpec) -> Vec<Diagnostic> {
    game.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn mv(game: &GameSpec, a: &str, d: &str) -> Move {
        let ai = game.actions[0].iter().position(|x| x == a).unwrap();
        let di = game.directions.iter().position(|x| x == d).unwrap();
        Move::new(game.profile_of(&[ai]), di)
    }

    #[test]
    fn blind_run_is_constant() {
        let g = fixtures::blind_game();
        let h = History(vec![mv(&g, "a", "l"), mv(&g, "b", "r")]);
        let run = run_mealy(&g, &g.observers[0], &h).unwrap();
        assert_eq!(run.states, vec![0, 0, 0]);
        assert_eq!(run.observations, vec![0, 0]);
    }

    #[test]
    fn empty_history_run() {
        let g = fixtures::full_game();
        let run = run_mealy(&g, &g.observers[0], &History::empty()).unwrap();
        assert_eq!(run.states, vec![g.observers[0].initial]);
        assert!(run.observations.is_empty());
    }

    #[test]
    fn evenr_observer_toggles_back() {
        let g = fixtures::evenr_observer_game();
        let m = &g.observers[0];
        let h = History(vec![mv(&g, "a", "r"), mv(&g, "a", "r")]);
        let run = run_mealy(&g, m, &h).unwrap();
        // independent simulation: the machine toggles on every r
        let mut q = m.initial;
        for step in h.moves() {
            q = m.step(q, g.move_index(*step)).0;
        }
        assert_eq!(*run.states.last().unwrap(), q);
        assert_eq!(q, m.initial);
        assert_ne!(run.states[1], m.initial);
    }

    #[test]
    fn malformed_move_names_index() {
        let g = fixtures::blind_game();
        let h = History(vec![Move::new(0, 0), Move::new(0, 7)]);
        let err = run_mealy(&g, &g.observers[0], &h).unwrap_err();
        assert_eq!(err, GameError::BadDirection { index: 1, direction: 7, count: 2 });
        let h = History(vec![Move::new(9, 0)]);
        assert!(matches!(
            run_mealy(&g, &g.observers[0], &h),
            Err(GameError::BadProfile { index: 0, .. })
        ));
    }

    #[test]
    fn indistinguishability_examples() {
        let g = fixtures::blind_game();
        let t1 = History(vec![mv(&g, "a", "l")]);
        let t2 = History(vec![mv(&g, "b", "r")]);
        assert!(indistinguishable(&g, &g.observers[0], &t1, &t2).unwrap());

        let g = fixtures::full_game();
        let t1 = History(vec![mv(&g, "a", "l")]);
        let t2 = History(vec![mv(&g, "a", "r")]);
        assert!(!indistinguishable(&g, &g.observers[0], &t1, &t2).unwrap());

        let g = fixtures::dmask_game();
        let t1 = History(vec![mv(&g, "a", "l"), mv(&g, "b", "l")]);
        let t2 = History(vec![mv(&g, "a", "r"), mv(&g, "b", "r")]);
        assert!(indistinguishable(&g, &g.observers[0], &t1, &t2).unwrap());
        let t3 = History(vec![mv(&g, "a", "r"), mv(&g, "a", "r")]);
        assert!(!indistinguishable(&g, &g.observers[0], &t1, &t3).unwrap());
    }

    #[test]
    fn different_lengths_never_related() {
        let g = fixtures::blind_game();
        let t1 = History(vec![mv(&g, "a", "l")]);
        let t2 = History(vec![mv(&g, "a", "l"), mv(&g, "a", "l")]);
        assert!(!indistinguishable(&g, &g.observers[0], &t1, &t2).unwrap());
    }

    #[test]
    fn validate_examples() {
        assert!(validate_game(&fixtures::full_game()).is_empty());

        let mut g = fixtures::full_game();
        g.observers[0].table[3] = None;
        let d = validate_game(&g);
        assert_eq!(d, vec![Diagnostic::IncompleteTransition { player: 0, state: 0, mv: 3 }]);

        let mut g = fixtures::delay1_game();
        g.observers.pop();
        let d = validate_game(&g);
        assert_eq!(d, vec![Diagnostic::ObserverCountMismatch { expected: 2, found: 1 }]);
        assert_eq!(d[0].code(), "ObserverCountMismatch");
    }

    #[test]
    fn profile_encoding_is_lexicographic() {
        let g = fixtures::delay1_game();
        let mut seen = Vec::new();
        for p in 0..g.profile_count() {
            let acts = g.profile_actions(p);
            assert_eq!(g.profile_of(&acts), p);
            seen.push(acts);
        }
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
        for idx in 0..g.move_count() {
            assert_eq!(g.move_index(g.move_at(idx)), idx);
        }
    }

    #[test]
    fn renormalize_preserves_parity_and_order() {
        let mut spec = fixtures::safe_spec();
        spec.priorities = vec![4, 7];
        spec.renormalize();
        assert_eq!(spec.priorities, vec![0, 1]);
        spec.priorities = vec![3, 5];
        spec.renormalize();
        assert_eq!(spec.priorities, vec![1, 1]);
        spec.priorities = vec![2, 9];
        spec.renormalize();
        assert_eq!(spec.priorities, vec![0, 1]);
    }
}
