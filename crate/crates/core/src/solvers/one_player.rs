//! One-player synthesis against Nature.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::oracle::{brute_force_oracle, OracleError};
use super::parity::{solve_parity, Owner, ParityArena};
use super::{certify, Certificate};
use crate::game::{GameSpec, Move, ParityTreeAutomaton, StateId};
use crate::strategy::DecisionStructure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Knowledge-set construction; requires a deterministic automaton whose
    /// priority is determined by the player's observations.
    Observable,
    /// Enumeration of strategies up to the given number of nodes.
    General { max_nodes: usize },
    /// `Observable` when the automaton is declared observable and
    /// deterministic, `General` otherwise.
    Auto { max_nodes: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Winning(Box<Certificate>),
    Losing,
    /// No winning strategy with at most `bound` nodes.
    Unknown { bound: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OnePlayerError {
    #[error("the game has {0} players, expected one")]
    NotOnePlayer(usize),
    #[error("the automaton is nondeterministic at state {state} for profile {profile}")]
    NotDeterministic { state: StateId, profile: usize },
    #[error("knowledge set {knowledge} mixes priorities {priorities:?}")]
    NotObservable { knowledge: String, priorities: Vec<u32> },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("the extracted strategy failed certification")]
    Uncertified,
}

pub fn solve_one_player(game: &GameSpec, spec: &ParityTreeAutomaton, mode: Mode) -> Result<Outcome, OnePlayerError> {
    if game.players() != 1 {
        return Err(OnePlayerError::NotOnePlayer(game.players()));
    }
    match mode {
        Mode::Observable => solve_observable(game, spec),
        Mode::General { max_nodes } => solve_general(game, spec, max_nodes),
        Mode::Auto { max_nodes } => {
            if spec.observable && spec.is_deterministic() {
                solve_observable(game, spec)
            } else {
                solve_general(game, spec, max_nodes)
            }
        }
    }
}

fn solve_general(game: &GameSpec, spec: &ParityTreeAutomaton, max_nodes: usize) -> Result<Outcome, OnePlayerError> {
    Ok(match brute_force_oracle(game, spec, max_nodes, super::oracle::DEFAULT_BUDGET)? {
        Some(c) => Outcome::Winning(Box::new(c)),
        None => Outcome::Unknown { bound: max_nodes },
    })
}

type Knowledge = Vec<(StateId, StateId)>;

/// The knowledge-set parity game: Even positions are sets of (observer,
/// automaton) state pairs consistent with the observations, Odd positions
/// pair such a set with the chosen profile and branch on the next output.
pub struct KnowledgeArena {
    pub arena: ParityArena,
    /// Knowledge set of each Even position.
    pub knowledge: BTreeMap<usize, Knowledge>,
    index: HashMap<Knowledge, usize>,
    /// For Odd position `(K, a)`: the profile.
    pub profile: HashMap<usize, usize>,
    /// Successor of an Odd position on an output.
    pub on_output: HashMap<(usize, usize), usize>,
}

impl KnowledgeArena {
    pub fn build(game: &GameSpec, spec: &ParityTreeAutomaton) -> Result<KnowledgeArena, OnePlayerError> {
        for (&(q, p), opts) in &spec.transitions {
            if opts.len() > 1 {
                return Err(OnePlayerError::NotDeterministic { state: q, profile: p });
            }
        }
        let obs = &game.observers[0];
        let mut arena = ParityArena::new();
        let lose = arena.add_position("lose", Owner::Odd, 1);
        arena.add_move(lose, lose);
        let mut ka = KnowledgeArena { arena, knowledge: BTreeMap::new(), index: HashMap::new(), profile: HashMap::new(), on_output: HashMap::new() };
        let start = vec![(obs.initial, spec.initial)];
        let root = ka.intern(game, spec, start)?;
        ka.arena.initial = root;
        let mut stack = vec![root];
        while let Some(pos) = stack.pop() {
            let k = ka.knowledge[&pos].clone();
            let prio = ka.arena.priority[pos];
            for a in 0..game.profile_count() {
                let choice = ka.arena.add_position(format!("{}|{}", ka.arena.names[pos], game.profile_name(a)), Owner::Odd, prio);
                ka.profile.insert(choice, a);
                ka.arena.add_move(pos, choice);
                let mut by_output: BTreeMap<usize, BTreeSet<(StateId, StateId)>> = BTreeMap::new();
                let mut stuck = false;
                for &(q, s) in &k {
                    let Some(tuple) = spec.options(s, a).first() else {
                        stuck = true;
                        break;
                    };
                    for (d, &t) in tuple.iter().enumerate() {
                        let (q2, o) = obs.step(q, game.move_index(Move::new(a, d)));
                        by_output.entry(o).or_default().insert((q2, t));
                    }
                }
                if stuck {
                    ka.arena.add_move(choice, lose);
                    continue;
                }
                for (o, set) in by_output {
                    let set: Knowledge = set.into_iter().collect();
                    let fresh = !ka.index.contains_key(&set);
                    let next = ka.intern(game, spec, set)?;
                    ka.arena.add_move(choice, next);
                    ka.on_output.insert((choice, o), next);
                    if fresh {
                        stack.push(next);
                    }
                }
            }
        }
        Ok(ka)
    }

    fn intern(&mut self, game: &GameSpec, spec: &ParityTreeAutomaton, k: Knowledge) -> Result<usize, OnePlayerError> {
        if let Some(&i) = self.index.get(&k) {
            return Ok(i);
        }
        let name = format!(
            "{{{}}}",
            k.iter()
                .map(|&(q, s)| format!("{}.{}", game.observers[0].states[q], spec.states[s]))
                .collect::<Vec<_>>()
                .join(",")
        );
        let prios: BTreeSet<u32> = k.iter().map(|&(_, s)| spec.priority(s)).collect();
        if prios.len() > 1 {
            return Err(OnePlayerError::NotObservable { knowledge: name, priorities: prios.into_iter().collect() });
        }
        let p = *prios.iter().next().expect("knowledge sets are nonempty");
        let i = self.arena.add_position(name, Owner::Even, p);
        self.index.insert(k.clone(), i);
        self.knowledge.insert(i, k);
        Ok(i)
    }

    pub fn knowledge_positions(&self) -> usize {
        self.knowledge.len()
    }
}

fn solve_observable(game: &GameSpec, spec: &ParityTreeAutomaton) -> Result<Outcome, OnePlayerError> {
    let ka = KnowledgeArena::build(game, spec)?;
    let sol = solve_parity(&ka.arena);
    if !sol.initial_won(&ka.arena) {
        return Ok(Outcome::Losing);
    }
    // nodes: (knowledge position, observer state, automaton state)
    let obs = &game.observers[0];
    let action = |pos: usize| ka.profile[&sol.strategy[pos].expect("winning Even positions have a move")];
    let start = (ka.arena.initial, obs.initial, spec.initial);
    let mut ids: HashMap<(usize, StateId, StateId), usize> = HashMap::from([(start, 0)]);
    let mut order = vec![start];
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (pos, q, s) = order[i];
        let a = action(pos);
        let tuple = &spec.options(s, a)[0];
        let mut row = Vec::with_capacity(tuple.len());
        for (d, &t) in tuple.iter().enumerate() {
            let (q2, o) = obs.step(q, game.move_index(Move::new(a, d)));
            let next_pos = ka.on_output[&(sol.strategy[pos].unwrap(), o)];
            let key = (next_pos, q2, t);
            let id = *ids.entry(key).or_insert_with(|| {
                order.push(key);
                order.len() - 1
            });
            row.push(id);
        }
        edges.push(row);
        i += 1;
    }
    let choice = order.iter().map(|&(pos, _, _)| action(pos)).collect();
    let mut strategy = DecisionStructure::new(choice, edges, 0);
    strategy.names = order
        .iter()
        .map(|&(pos, q, s)| format!("{}@{}.{}", ka.arena.names[pos], obs.states[q], spec.states[s]))
        .collect();
    let cert = certify(&strategy.minimized(), game, spec).ok_or(OnePlayerError::Uncertified)?;
    Ok(Outcome::Winning(Box::new(cert)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn outcome(game: &GameSpec, spec: &ParityTreeAutomaton) -> Outcome {
        solve_one_player(game, spec, Mode::Auto { max_nodes: 3 }).unwrap()
    }

    #[test]
    fn safe_everywhere() {
        for g in [fixtures::blind_game(), fixtures::full_game(), fixtures::dmask_game()] {
            match outcome(&g, &fixtures::safe_spec()) {
                Outcome::Winning(c) => assert_eq!(c.strategy.len(), 1),
                o => panic!("{o:?}"),
            }
        }
    }

    #[test]
    fn alternate_needs_two_nodes() {
        let g = fixtures::parity_observer_game();
        match outcome(&g, &fixtures::alternate_spec()) {
            Outcome::Winning(c) => assert!(c.strategy.len() >= 2),
            o => panic!("{o:?}"),
        }
        assert_eq!(outcome(&fixtures::blind_game(), &fixtures::inverted_safe_spec()), Outcome::Losing);
    }

    #[test]
    fn not_one_player() {
        let g = fixtures::delay1_game();
        let spec = fixtures::delay_same_spec();
        assert!(matches!(solve_one_player(&g, &spec, Mode::Observable), Err(OnePlayerError::NotOnePlayer(2))));
    }

    #[test]
    fn mixed_priorities_are_rejected() {
        let g = fixtures::blind_game();
        assert!(matches!(
            solve_one_player(&g, &fixtures::evenr_spec(), Mode::Observable),
            Err(OnePlayerError::NotObservable { .. })
        ));
        assert_eq!(
            solve_one_player(&g, &fixtures::evenr_spec(), Mode::General { max_nodes: 2 }).unwrap(),
            Outcome::Unknown { bound: 2 }
        );
    }
}
