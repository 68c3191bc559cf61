//! Seeded generators for games, automata, strategies and retraction maps.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annotation::{AnnotatedStrategy, Label};
use crate::game::{GameSpec, MealyMachine, Move, ParityTreeAutomaton, StateId};
use crate::retraction::NodeMap;
use crate::solvers::one_player::KnowledgeArena;
use crate::strategy::DecisionStructure;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameShape {
    pub players: usize,
    pub actions: usize,
    pub directions: usize,
    pub observer_states: usize,
    pub outputs: usize,
}

impl Default for GameShape {
    fn default() -> Self {
        GameShape { players: 1, actions: 2, directions: 2, observer_states: 2, outputs: 2 }
    }
}

pub fn random_game<R: Rng>(rng: &mut R, shape: GameShape) -> GameSpec {
    let actions: Vec<Vec<String>> =
        (0..shape.players).map(|_| (0..shape.actions).map(|a| ((b'a' + a as u8) as char).to_string()).collect()).collect();
    let directions = names("d", shape.directions);
    let moves = actions.iter().map(Vec::len).product::<usize>() * shape.directions;
    let observers = (0..shape.players)
        .map(|_| {
            MealyMachine::from_fn(names("q", shape.observer_states), 0, names("o", shape.outputs), moves, |_, _| {
                (rng.gen_range(0..shape.observer_states), rng.gen_range(0..shape.outputs))
            })
        })
        .collect();
    GameSpec { actions, directions, observers }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpecShape {
    pub states: usize,
    /// Priorities are drawn from `0..priorities`.
    pub priorities: u32,
    /// Tuples per `(state, profile)`; 0 lets a key be missing at random.
    pub min_options: usize,
    pub max_options: usize,
}

impl Default for SpecShape {
    fn default() -> Self {
        SpecShape { states: 3, priorities: 3, min_options: 1, max_options: 1 }
    }
}

pub fn random_spec<R: Rng>(rng: &mut R, game: &GameSpec, shape: SpecShape) -> ParityTreeAutomaton {
    let mut spec = ParityTreeAutomaton {
        states: names("s", shape.states),
        initial: 0,
        priorities: (0..shape.states).map(|_| rng.gen_range(0..shape.priorities)).collect(),
        transitions: Default::default(),
        observable: false,
    };
    for q in 0..shape.states {
        for p in 0..game.profile_count() {
            for _ in 0..rng.gen_range(shape.min_options..=shape.max_options) {
                let tuple = (0..game.num_directions()).map(|_| rng.gen_range(0..shape.states)).collect();
                spec.add_transition(q, p, tuple);
            }
        }
    }
    spec
}

/// Structure with every node reachable from node 0: node `i > 0` is first
/// entered from a random earlier node, all other edges are random.
pub fn random_structure<R: Rng>(rng: &mut R, profiles: usize, directions: usize, nodes: usize) -> DecisionStructure {
    let mut edges: Vec<Vec<Option<usize>>> = vec![vec![None; directions]; nodes];
    for i in 1..nodes {
        let free: Vec<(usize, usize)> =
            (0..i).flat_map(|j| (0..directions).map(move |d| (j, d))).filter(|&(j, d)| edges[j][d].is_none()).collect();
        if let Some(&(j, d)) = free.choose(rng) {
            edges[j][d] = Some(i);
        }
    }
    let edges = edges.into_iter().map(|row| row.into_iter().map(|e| e.unwrap_or_else(|| rng.gen_range(0..nodes))).collect()).collect();
    let choice = (0..nodes).map(|_| rng.gen_range(0..profiles)).collect();
    let (s, _) = DecisionStructure::new(choice, edges, 0).pruned();
    s
}

/// Product of a random structure with the observers and a run that picks a
/// random tuple at each product node. The result is a valid annotation, or
/// `None` if it would exceed `max_nodes` nodes or the automaton gets stuck.
pub fn random_annotated<R: Rng>(
    rng: &mut R,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    structure_nodes: usize,
    max_nodes: usize,
) -> Option<AnnotatedStrategy> {
    let s = random_structure(rng, game.profile_count(), game.num_directions(), structure_nodes);
    annotate_randomly(rng, &s, game, spec, max_nodes)
}

pub fn annotate_randomly<R: Rng>(
    rng: &mut R,
    s: &DecisionStructure,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    max_nodes: usize,
) -> Option<AnnotatedStrategy> {
    let init = Label::initial(game, spec);
    let mut ids: HashMap<(usize, Label), usize> = HashMap::from([((s.initial, init.clone()), 0)]);
    let mut order = vec![(s.initial, init)];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (v, label) = order[i].clone();
        let opts = spec.options(label.spec, s.choice[v]);
        let tuple = opts.choose(rng)?;
        let mut row = Vec::with_capacity(game.num_directions());
        for (d, &target) in tuple.iter().enumerate() {
            let mv = game.move_index(Move::new(s.choice[v], d));
            let observers = label.observers.iter().zip(&game.observers).map(|(&q, m)| m.step(q, mv).0).collect();
            let key = (s.succ(v, d), Label { observers, spec: target });
            let id = match ids.get(&key) {
                Some(&id) => id,
                None => {
                    if order.len() == max_nodes {
                        return None;
                    }
                    ids.insert(key.clone(), order.len());
                    order.push(key);
                    order.len() - 1
                }
            };
            row.push(id);
        }
        edges.push(row);
        i += 1;
    }
    let choice = order.iter().map(|(v, _)| s.choice[*v]).collect();
    let labels = order.into_iter().map(|(_, l)| l).collect();
    Some(AnnotatedStrategy { strategy: DecisionStructure::new(choice, edges, 0), labels })
}

/// Identity except for up to `changes` nodes, each sent to a random other
/// node carrying the same label. Validity is left to the caller.
pub fn random_retraction<R: Rng>(rng: &mut R, a: &AnnotatedStrategy, changes: usize) -> NodeMap {
    let n = a.len();
    let mut h: NodeMap = (0..n).collect();
    let mut by_label: HashMap<&Label, Vec<usize>> = HashMap::new();
    for (v, l) in a.labels.iter().enumerate() {
        by_label.entry(l).or_default().push(v);
    }
    for _ in 0..changes {
        let v = rng.gen_range(0..n);
        let peers = &by_label[&a.labels[v]];
        if peers.len() > 1 {
            h[v] = *peers.choose(rng).expect("nonempty");
        }
    }
    h
}

/// A single-player instance with `|A| ≤ 2`, `|D| ≤ 2`, at most 3 observer
/// states, at most 3 automaton states and priorities below 3. The automaton
/// is deterministic and may lack transitions. It is flagged observable but
/// need not be; see [`random_observable_instance`].
pub fn random_one_player_instance<R: Rng>(rng: &mut R) -> (GameSpec, ParityTreeAutomaton) {
    let shape = GameShape {
        players: 1,
        actions: rng.gen_range(1..=2),
        directions: rng.gen_range(1..=2),
        observer_states: rng.gen_range(1..=3),
        outputs: rng.gen_range(1..=3),
    };
    let game = random_game(rng, shape);
    let spec_shape = SpecShape { states: rng.gen_range(1..=3), priorities: 3, min_options: 0, max_options: 1 };
    let mut spec = random_spec(rng, &game, spec_shape);
    // keep most keys present so that instances are not trivially losing
    for q in 0..spec.num_states() {
        for p in 0..game.profile_count() {
            if spec.options(q, p).is_empty() && rng.gen_bool(0.7) {
                let tuple = (0..game.num_directions()).map(|_| rng.gen_range(0..spec.num_states())).collect();
                spec.add_transition(q, p, tuple);
            }
        }
    }
    spec.observable = true;
    (game, spec)
}

/// [`random_one_player_instance`] redrawn until the automaton priority is
/// determined by the player's knowledge along every play.
pub fn random_observable_instance<R: Rng>(rng: &mut R) -> (GameSpec, ParityTreeAutomaton) {
    loop {
        let (game, spec) = random_one_player_instance(rng);
        if KnowledgeArena::build(&game, &spec).is_ok() {
            return (game, spec);
        }
    }
}

/// State of `spec` named `name`.
pub fn state(spec: &ParityTreeAutomaton, name: &str) -> Option<StateId> {
    spec.states.iter().position(|s| s == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::check_annotation;

    #[test]
    fn same_seed_same_output() {
        let a = random_game(&mut seeded(7), GameShape::default());
        let b = random_game(&mut seeded(7), GameShape::default());
        assert_eq!(a, b);
        assert!(a.validate().is_empty());
    }

    #[test]
    fn random_annotations_are_valid() {
        let mut rng = seeded(3);
        let mut made = 0;
        for _ in 0..50 {
            let g = random_game(&mut rng, GameShape::default());
            let spec = random_spec(&mut rng, &g, SpecShape { max_options: 2, ..SpecShape::default() });
            if let Some(a) = random_annotated(&mut rng, &g, &spec, 4, 30) {
                assert_eq!(check_annotation(&a, &g, &spec), Ok(()));
                assert!(a.len() <= 30);
                made += 1;
            }
        }
        assert!(made > 10);
    }
}
