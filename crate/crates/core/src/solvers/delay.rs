//! Coordination games with bounded observation lags.
//!
//! A delay form extends a base game's directions `D` to `D × {0..k}ⁿ`: besides
//! the base direction, Nature picks a lag for every player. Each player's
//! observer buffers the full moves (lags included) not yet delivered; after a
//! move with lag `ℓ` for player `i`, only the newest `min(ℓ, buffered + 1)`
//! moves stay buffered and the older ones are delivered as one batch. Every
//! move is therefore delivered in order within `k` rounds, and two histories
//! that differ more than `k` moves back are distinguishable by everyone.
//!
//! Specifications are written over base directions and lifted by ignoring
//! the lag component.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;

use thiserror::Error;

use crate::game::{GameSpec, MealyMachine, Move, ParityTreeAutomaton, StateId};
use crate::solvers::parity::{solve_parity, Owner, ParityArena};
use crate::solvers::oracle::{certify_fast, enumerate_structures, forgetful, OracleError};
use crate::solvers::{certify, Certificate};
use crate::strategy::{DecisionStructure, NodeId};

pub const MAX_DELAY: usize = 3;
const MAX_TABLE: usize = 1 << 22;
const MAX_PLANS: usize = 1 << 16;
const MAX_POSITIONS: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DelayError {
    #[error("delay {k} is out of range (at most {max})")]
    DelayOutOfRange { k: usize, max: usize },
    #[error("the game is not in delay form")]
    NotDelayForm,
    #[error("{what} would need {size} entries (limit {limit})")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("the extracted strategy failed certification")]
    Uncertified,
}

/// A delay-form game: the base game (without observers), the lag bound and
/// the generated game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayForm {
    pub k: usize,
    pub base: GameSpec,
    pub game: GameSpec,
}

impl DelayForm {
    /// Directions and alphabets of the delay form, without observer tables.
    pub fn describe(base: &GameSpec, k: usize) -> Result<DelayForm, DelayError> {
        if k > MAX_DELAY {
            return Err(DelayError::DelayOutOfRange { k, max: MAX_DELAY });
        }
        let n = base.players();
        let combos = (k + 1).pow(n as u32);
        let mut directions = Vec::with_capacity(base.num_directions() * combos);
        for d in &base.directions {
            for c in 0..combos {
                let lags: Vec<String> = lag_digits(c, n, k).iter().map(usize::to_string).collect();
                directions.push(format!("{d}/{}", lags.join(".")));
            }
        }
        let base = GameSpec { actions: base.actions.clone(), directions: base.directions.clone(), observers: Vec::new() };
        let game = GameSpec { actions: base.actions.clone(), directions, observers: Vec::new() };
        Ok(DelayForm { k, base, game })
    }

    fn combos(&self) -> usize {
        (self.k + 1).pow(self.base.players() as u32)
    }

    pub fn base_direction(&self, d: usize) -> usize {
        d / self.combos()
    }

    pub fn lag(&self, d: usize, player: usize) -> usize {
        lag_digits(d % self.combos(), self.base.players(), self.k)[player]
    }

    /// One observation step for `player`: the buffer of undelivered moves
    /// (delay-form move indices) and a move give the new buffer and the batch
    /// delivered now.
    pub fn observe(&self, player: usize, buffer: &[u32], mv: usize) -> (Vec<u32>, Vec<u32>) {
        let d = self.game.move_at(mv).direction;
        let lag = self.lag(d, player);
        let mut pending = buffer.to_vec();
        pending.push(mv as u32);
        let keep = lag.min(pending.len());
        let split = pending.len() - keep;
        let kept = pending[split..].to_vec();
        pending.truncate(split);
        (kept, pending)
    }

    pub fn unlift_spec(&self, spec: &ParityTreeAutomaton) -> ParityTreeAutomaton {
        let combos = self.combos();
        let mut out = ParityTreeAutomaton { transitions: BTreeMap::new(), ..spec.clone() };
        for (&(q, p), tuples) in &spec.transitions {
            for t in tuples {
                let base: Vec<StateId> = (0..self.base.num_directions()).map(|d| t[d * combos]).collect();
                out.add_transition(q, p, base);
            }
        }
        out
    }
}

fn lag_digits(mut c: usize, n: usize, k: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for i in (0..n).rev() {
        digits[i] = c % (k + 1);
        c /= k + 1;
    }
    digits
}

/// Builds the delay form of `base` with generated observer machines.
pub fn delay_game(base: &GameSpec, k: usize) -> Result<DelayForm, DelayError> {
    let mut form = DelayForm::describe(base, k)?;
    let moves = form.game.move_count();
    let count = |len: usize| (0..=len).map(|l| moves.saturating_pow(l as u32)).fold(0usize, usize::saturating_add);
    let states = count(k);
    let outputs = count(k + 1);
    if states.saturating_mul(moves) > MAX_TABLE || outputs > MAX_TABLE {
        return Err(DelayError::TooLarge {
            what: "observer table",
            size: states.saturating_mul(moves).max(outputs),
            limit: MAX_TABLE,
        });
    }
    let seqs = |max_len: usize| -> Vec<Vec<u32>> {
        let mut all = vec![Vec::new()];
        let mut layer: Vec<Vec<u32>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * moves);
            for s in &layer {
                for m in 0..moves as u32 {
                    let mut t = s.clone();
                    t.push(m);
                    next.push(t);
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all
    };
    let state_seqs = seqs(k);
    let output_seqs = seqs(k + 1);
    let state_id: HashMap<&[u32], usize> = state_seqs.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let output_id: HashMap<&[u32], usize> = output_seqs.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let name = |s: &[u32]| -> String {
        if s.is_empty() {
            "-".to_string()
        } else {
            s.iter()
                .map(|&m| {
                    let mv = form.game.move_at(m as usize);
                    format!("{}:{}", form.game.profile_name(mv.profile), form.game.directions[mv.direction])
                })
                .collect::<Vec<_>>()
                .join(";")
        }
    };
    let state_names: Vec<String> = state_seqs.iter().map(|s| name(s)).collect();
    let output_names: Vec<String> = output_seqs.iter().map(|s| name(s)).collect();
    let mut observers = Vec::with_capacity(base.players());
    for player in 0..base.players() {
        let m = MealyMachine::from_fn(state_names.clone(), 0, output_names.clone(), moves, |q, mv| {
            let (buf, out) = form.observe(player, &state_seqs[q], mv);
            (state_id[buf.as_slice()], output_id[out.as_slice()])
        });
        observers.push(m);
    }
    form.game.observers = observers;
    Ok(form)
}

/// Lifts a specification over base directions to the delay form.
pub fn lift_spec(form: &DelayForm, spec: &ParityTreeAutomaton) -> ParityTreeAutomaton {
    let nd = form.game.num_directions();
    let mut out = ParityTreeAutomaton { transitions: BTreeMap::new(), ..spec.clone() };
    for (&(q, p), tuples) in &spec.transitions {
        for t in tuples {
            out.add_transition(q, p, (0..nd).map(|d| t[form.base_direction(d)]).collect());
        }
    }
    out
}

/// Structure over base directions lifted to the delay form: every lag
/// variant of a base direction leads to the same node.
pub fn lift_structure(form: &DelayForm, s: &DecisionStructure) -> DecisionStructure {
    let nd = form.game.num_directions();
    DecisionStructure {
        edges: s.edges.iter().map(|row| (0..nd).map(|d| row[form.base_direction(d)]).collect()).collect(),
        ..s.clone()
    }
}

/// First certified winner among lifted base-direction structures with at
/// most `bound` nodes, in canonical order. Not exhaustive over delay-form
/// structures, so only a found strategy is conclusive.
pub fn lag_oblivious_search(
    form: &DelayForm,
    spec: &ParityTreeAutomaton,
    bound: usize,
    budget: u64,
) -> Result<Option<Certificate>, OracleError> {
    let blind = forgetful(&form.game);
    let mut count = 0u64;
    for m in 1..=bound {
        let found = enumerate_structures(form.game.profile_count(), form.base.num_directions(), m, |s| {
            count += 1;
            if count > budget {
                return ControlFlow::Break(None);
            }
            match certify_fast(&lift_structure(form, s), &form.game, &blind, spec) {
                Some(c) => ControlFlow::Break(Some(c)),
                None => ControlFlow::Continue(()),
            }
        });
        match found {
            ControlFlow::Break(Some(c)) => return Ok(Some(c)),
            ControlFlow::Break(None) => return Err(OracleError::BudgetExceeded { count: count - 1 }),
            ControlFlow::Continue(()) => {}
        }
    }
    Ok(None)
}

/// Arena for perfect-information play: the team picks a profile, the
/// automaton a transition, Nature a direction.
pub fn perfect_information_arena(game: &GameSpec, spec: &ParityTreeAutomaton) -> ParityArena {
    let mut arena = ParityArena::new();
    let team: Vec<usize> = (0..spec.num_states())
        .map(|q| arena.add_position(format!("t{}", spec.states[q]), Owner::Even, spec.priority(q)))
        .collect();
    arena.initial = team[spec.initial];
    for q in 0..spec.num_states() {
        for p in 0..game.profile_count() {
            let a = arena.add_position(format!("a{}.{p}", spec.states[q]), Owner::Even, spec.priority(q));
            arena.add_move(team[q], a);
            for (i, t) in spec.options(q, p).iter().enumerate() {
                let b = arena.add_position(format!("b{}.{p}.{i}", spec.states[q]), Owner::Odd, spec.priority(q));
                arena.add_move(a, b);
                for &s in t {
                    arena.add_move(b, team[s]);
                }
            }
        }
    }
    arena
}

type Window = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct TeamKey {
    spec: StateId,
    observers: Vec<StateId>,
    windows: Vec<Window>,
}

enum Kind {
    Team { key: TeamKey, plans: Vec<(Vec<usize>, usize)> },
    Automaton { key: TeamKey },
    Nature { tuple: Vec<StateId> },
}

/// Knowledge arena of a delay game. Team positions hold the specification
/// and observer states `k` rounds back (common knowledge) and the possible
/// windows of recent moves. The team commits a plan mapping each player's
/// private view of the window to an action; once the window exceeds `k`
/// moves, the automaton picks a transition for the oldest node and Nature
/// resolves its direction.
pub struct DelayArena {
    pub arena: ParityArena,
    kinds: Vec<Kind>,
    team_index: HashMap<TeamKey, usize>,
}

impl DelayArena {
    pub fn build(form: &DelayForm, spec: &ParityTreeAutomaton) -> Result<DelayArena, DelayError> {
        if form.game.observers.len() != form.game.players() {
            return Err(DelayError::NotDelayForm);
        }
        let game = &form.game;
        let nd = game.num_directions();
        let mut arena = ParityArena::new();
        let mut kinds = Vec::new();
        let mut team_index: HashMap<TeamKey, usize> = HashMap::new();
        let mut auto_index: HashMap<TeamKey, usize> = HashMap::new();
        let start = TeamKey {
            spec: spec.initial,
            observers: game.observers.iter().map(|m| m.initial).collect(),
            windows: vec![Vec::new()],
        };
        let mut work = vec![];
        let add_team = |key: TeamKey,
                        arena: &mut ParityArena,
                        kinds: &mut Vec<Kind>,
                        team_index: &mut HashMap<TeamKey, usize>,
                        work: &mut Vec<usize>|
         -> usize {
            if let Some(&id) = team_index.get(&key) {
                return id;
            }
            let id = arena.add_position(format!("team{}", arena.len()), Owner::Even, spec.priority(key.spec));
            kinds.push(Kind::Team { key: key.clone(), plans: Vec::new() });
            team_index.insert(key, id);
            work.push(id);
            id
        };
        arena.initial = add_team(start, &mut arena, &mut kinds, &mut team_index, &mut work);
        while let Some(tid) = work.pop() {
            if arena.len() > MAX_POSITIONS {
                return Err(DelayError::TooLarge { what: "delay arena", size: arena.len(), limit: MAX_POSITIONS });
            }
            let Kind::Team { key, .. } = &kinds[tid] else { unreachable!() };
            let key = key.clone();
            // private views: observer outputs over each window
            let mut classes: Vec<Vec<usize>> = Vec::with_capacity(game.players());
            let mut class_count = Vec::with_capacity(game.players());
            for (i, m) in game.observers.iter().enumerate() {
                let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
                let mut row = Vec::with_capacity(key.windows.len());
                for w in &key.windows {
                    let mut q = key.observers[i];
                    let mut view = Vec::with_capacity(w.len());
                    for &mv in w {
                        let (q2, b) = m.step(q, mv as usize);
                        view.push(b);
                        q = q2;
                    }
                    let next = ids.len();
                    row.push(*ids.entry(view).or_insert(next));
                }
                class_count.push(ids.len());
                classes.push(row);
            }
            let mut total: usize = 1;
            for (i, &c) in class_count.iter().enumerate() {
                total = total.saturating_mul(game.actions[i].len().saturating_pow(c as u32));
            }
            if total > MAX_PLANS {
                return Err(DelayError::TooLarge { what: "plans per team position", size: total, limit: MAX_PLANS });
            }
            let mut plans = Vec::with_capacity(total);
            for code in 0..total {
                // decode mixed-radix: player-major, class-minor
                let mut rest = code;
                let mut choice: Vec<Vec<usize>> = Vec::with_capacity(game.players());
                for (i, &c) in class_count.iter().enumerate() {
                    let a = game.actions[i].len();
                    let mut row = Vec::with_capacity(c);
                    for _ in 0..c {
                        row.push(rest % a);
                        rest /= a;
                    }
                    choice.push(row);
                }
                let profiles: Vec<usize> = (0..key.windows.len())
                    .map(|w| {
                        let acts: Vec<usize> = (0..game.players()).map(|i| choice[i][classes[i][w]]).collect();
                        game.profile_of(&acts)
                    })
                    .collect();
                let mut grown: Vec<Window> = Vec::with_capacity(key.windows.len() * nd);
                for (w, &p) in key.windows.iter().zip(&profiles) {
                    for d in 0..nd {
                        let mut x = w.clone();
                        x.push(game.move_index(Move::new(p, d)) as u32);
                        grown.push(x);
                    }
                }
                grown.sort();
                let next_key = TeamKey { spec: key.spec, observers: key.observers.clone(), windows: grown };
                let target = if next_key.windows[0].len() <= form.k {
                    add_team(next_key, &mut arena, &mut kinds, &mut team_index, &mut work)
                } else if let Some(&a) = auto_index.get(&next_key) {
                    a
                } else {
                    let a = arena.add_position(format!("auto{}", arena.len()), Owner::Even, spec.priority(key.spec));
                    kinds.push(Kind::Automaton { key: next_key.clone() });
                    auto_index.insert(next_key.clone(), a);
                    let first_profile = game.move_at(next_key.windows[0][0] as usize).profile;
                    for tuple in spec.options(key.spec, first_profile) {
                        let b = arena.add_position(format!("nature{}", arena.len()), Owner::Odd, spec.priority(key.spec));
                        kinds.push(Kind::Nature { tuple: tuple.clone() });
                        arena.add_move(a, b);
                        let mut by_first: BTreeMap<u32, Vec<Window>> = BTreeMap::new();
                        for w in &next_key.windows {
                            by_first.entry(w[0]).or_default().push(w[1..].to_vec());
                        }
                        for (m, tails) in by_first {
                            let mv = game.move_at(m as usize);
                            let observers = game
                                .observers
                                .iter()
                                .zip(&key.observers)
                                .map(|(o, &q)| o.step(q, m as usize).0)
                                .collect();
                            let tk = TeamKey { spec: tuple[mv.direction], observers, windows: tails };
                            let t = add_team(tk, &mut arena, &mut kinds, &mut team_index, &mut work);
                            arena.add_move(b, t);
                        }
                    }
                    a
                };
                arena.add_move(tid, target);
                plans.push((profiles, target));
            }
            if let Kind::Team { plans: slot, .. } = &mut kinds[tid] {
                *slot = plans;
            }
        }
        Ok(DelayArena { arena, kinds, team_index })
    }

    pub fn team_positions(&self) -> usize {
        self.team_index.len()
    }

    /// Strategy induced by a positional choice of the team and automaton:
    /// nodes are pairs of a team position and a window.
    fn extract(&self, form: &DelayForm, choice: &[Option<usize>]) -> DecisionStructure {
        let game = &form.game;
        let nd = game.num_directions();
        let mut index: HashMap<(usize, Window), NodeId> = HashMap::new();
        let mut nodes: Vec<(usize, Window)> = vec![(self.arena.initial, Vec::new())];
        index.insert((self.arena.initial, Vec::new()), 0);
        let mut profile = Vec::new();
        let mut edges = Vec::new();
        let mut i = 0;
        while i < nodes.len() {
            let (tid, w) = nodes[i].clone();
            let Kind::Team { key, plans } = &self.kinds[tid] else { unreachable!() };
            let target = choice[tid].expect("team positions on the winning path have a choice");
            let (profiles, _) = plans.iter().find(|(_, t)| *t == target).expect("chosen target is a plan");
            let widx = key.windows.binary_search(&w).expect("window belongs to its position");
            let p = profiles[widx];
            profile.push(p);
            let mut row = Vec::with_capacity(nd);
            for d in 0..nd {
                let mut grown = w.clone();
                grown.push(game.move_index(Move::new(p, d)) as u32);
                let next = match &self.kinds[target] {
                    Kind::Team { .. } => (target, grown),
                    Kind::Automaton { .. } => {
                        let b = choice[target].expect("automaton positions on the winning path have a choice");
                        let Kind::Nature { tuple, .. } = &self.kinds[b] else { unreachable!() };
                        let m = grown[0];
                        let mv = game.move_at(m as usize);
                        let observers = game
                            .observers
                            .iter()
                            .zip(&key.observers)
                            .map(|(o, &q)| o.step(q, m as usize).0)
                            .collect::<Vec<_>>();
                        let tails: Vec<Window> = {
                            let Kind::Automaton { key: ak } = &self.kinds[target] else { unreachable!() };
                            ak.windows.iter().filter(|x| x[0] == m).map(|x| x[1..].to_vec()).collect()
                        };
                        let tk = TeamKey { spec: tuple[mv.direction], observers, windows: tails };
                        (self.team_index[&tk], grown[1..].to_vec())
                    }
                    Kind::Nature { .. } => unreachable!(),
                };
                let id = *index.entry(next.clone()).or_insert_with(|| {
                    nodes.push(next);
                    nodes.len() - 1
                });
                row.push(id);
            }
            edges.push(row);
            i += 1;
        }
        let mut s = DecisionStructure::new(profile, edges, 0);
        s.names = (0..s.len()).map(|v| format!("w{v}")).collect();
        s
    }
}

/// Solves a delay game. `Some` carries a certified finite joint strategy.
pub fn solve_delay(form: &DelayForm, spec: &ParityTreeAutomaton) -> Result<Option<Certificate>, DelayError> {
    let da = DelayArena::build(form, spec)?;
    let sol = solve_parity(&da.arena);
    if !sol.initial_won(&da.arena) {
        return Ok(None);
    }
    let s = da.extract(form, &sol.strategy).minimized();
    certify(&s, &form.game, spec).map(Some).ok_or(DelayError::Uncertified)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn delay_one_alphabet_sizes() {
        let g = fixtures::delay1_game();
        assert_eq!(g.num_directions(), 8);
        assert_eq!(g.move_count(), 32);
        assert_eq!(g.observers[0].num_states(), 33);
        assert!(g.validate().is_empty());
    }

    #[test]
    fn out_of_range() {
        let base = fixtures::delay1_form().base;
        assert_eq!(delay_game(&base, 4).unwrap_err(), DelayError::DelayOutOfRange { k: 4, max: 3 });
    }

    #[test]
    fn moves_are_delivered_within_k_rounds() {
        let form = fixtures::delay1_form();
        let g = &form.game;
        for player in 0..2 {
            let mut buf: Vec<u32> = Vec::new();
            let mut delivered = Vec::new();
            let mut made = Vec::new();
            for t in 0..20usize {
                let mv = (t * 7 + player) % g.move_count();
                made.push(mv as u32);
                let (b, out) = form.observe(player, &buf, mv);
                delivered.extend(out);
                buf = b;
                assert!(buf.len() <= form.k);
                assert_eq!(delivered[..], made[..delivered.len()]);
                assert!(delivered.len() + form.k >= made.len());
            }
        }
    }

    #[test]
    fn lift_round_trip() {
        let form = fixtures::delay1_form();
        let spec = fixtures::delay_same_spec();
        assert_eq!(lift_spec(&form, &form.unlift_spec(&spec)), spec);
    }

    #[test]
    fn zero_delay_matches_perfect_information() {
        let base = fixtures::delay1_form().base;
        let form = delay_game(&base, 0).unwrap();
        for base_spec in fixtures::delay_base_specs() {
            let spec = lift_spec(&form, &base_spec);
            let direct = solve_parity(&perfect_information_arena(&base, &base_spec));
            let got = solve_delay(&form, &spec).unwrap();
            assert_eq!(got.is_some(), direct.initial_won(&perfect_information_arena(&base, &base_spec)));
        }
    }
}
