//! Exhaustive search over small decision structures.

use std::ops::ControlFlow;

use thiserror::Error;

use super::{certify, Certificate};
use crate::annotation::find_witness_annotation;
use crate::game::{GameSpec, MealyMachine, ParityTreeAutomaton};
use crate::strategy::DecisionStructure;

pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("candidate budget exhausted after {count} structures")]
    BudgetExceeded { count: u64 },
}

/// Number of structures with exactly `nodes` nodes that
/// [`enumerate_structures`] visits, saturating.
pub fn structure_count(profiles: usize, directions: usize, nodes: usize) -> u64 {
    let mut total: u64 = 0;
    let _ = enumerate_shapes(directions, nodes, &mut |_| {
        total = total.saturating_add(1);
        ControlFlow::<()>::Continue(())
    });
    total.saturating_mul((profiles as u64).saturating_pow(nodes as u32))
}

/// Visits edge tables of structures with exactly `nodes` nodes, all reachable
/// from node 0, numbered in order of first appearance when edges are read
/// node by node, direction by direction. Every rooted structure is
/// isomorphic to exactly one of them.
fn enumerate_shapes<B>(
    directions: usize,
    nodes: usize,
    visit: &mut impl FnMut(&[usize]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    fn rec<B>(
        flat: &mut Vec<usize>,
        seen: usize,
        directions: usize,
        nodes: usize,
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        let p = flat.len();
        if p == directions * nodes {
            return if seen == nodes { visit(flat) } else { ControlFlow::Continue(()) };
        }
        if p / directions >= seen {
            return ControlFlow::Continue(());
        }
        let limit = (seen + 1).min(nodes);
        for t in 0..limit {
            flat.push(t);
            rec(flat, seen.max(t + 1), directions, nodes, visit)?;
            flat.pop();
        }
        ControlFlow::Continue(())
    }
    rec(&mut Vec::with_capacity(directions * nodes), 1, directions, nodes, visit)
}

/// Visits every canonical structure with exactly `nodes` nodes and every
/// assignment of profiles to them.
pub fn enumerate_structures<B>(
    profiles: usize,
    directions: usize,
    nodes: usize,
    mut visit: impl FnMut(&DecisionStructure) -> ControlFlow<B>,
) -> ControlFlow<B> {
    enumerate_shapes(directions, nodes, &mut |flat| {
        let edges: Vec<Vec<usize>> = flat.chunks(directions).map(<[usize]>::to_vec).collect();
        let mut choice = vec![0; nodes];
        loop {
            visit(&DecisionStructure::new(choice.clone(), edges.clone(), 0))?;
            let mut i = 0;
            while i < nodes && choice[i] + 1 == profiles {
                choice[i] = 0;
                i += 1;
            }
            if i == nodes {
                return ControlFlow::Continue(());
            }
            choice[i] += 1;
        }
    })
}

/// The game with every observer replaced by a one-state machine. Structures
/// that win against it win the tree condition; uniformity is checked apart.
pub fn forgetful(game: &GameSpec) -> GameSpec {
    let moves = game.move_count();
    let blank = MealyMachine::from_fn(vec!["_".into()], 0, vec!["_".into()], moves, |_, _| (0, 0));
    GameSpec { observers: vec![blank; game.players()], ..game.clone() }
}

/// Certifies `s` after a quick acceptance test on the forgetful game.
pub fn certify_fast(s: &DecisionStructure, game: &GameSpec, blind: &GameSpec, spec: &ParityTreeAutomaton) -> Option<Certificate> {
    find_witness_annotation(s, blind, spec)?;
    certify(s, game, spec)
}

/// Smallest certified winning strategy with at most `bound` nodes, or `None`
/// if there is none. Fails once more than `budget` candidates were tried.
pub fn brute_force_oracle(
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    bound: usize,
    budget: u64,
) -> Result<Option<Certificate>, OracleError> {
    let blind = forgetful(game);
    let mut count = 0u64;
    for m in 1..=bound {
        let found = enumerate_structures(game.profile_count(), game.num_directions(), m, |s| {
            count += 1;
            if count > budget {
                return ControlFlow::Break(None);
            }
            match certify_fast(s, game, &blind, spec) {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn shape_counts() {
        // one node: single self-loop table
        assert_eq!(structure_count(1, 2, 1), 1);
        // two nodes, two directions: node 0 must reach 1
        let mut n = 0;
        let _ = enumerate_structures(1, 2, 2, |_| {
            n += 1;
            ControlFlow::<()>::Continue(())
        });
        assert_eq!(n, 12);
        assert_eq!(structure_count(2, 2, 2), 48);
    }

    #[test]
    fn enumerated_structures_are_reachable_and_distinct() {
        let mut all = Vec::new();
        let _ = enumerate_structures(2, 2, 3, |s| {
            assert!(s.reachable().iter().all(|&r| r));
            all.push((s.choice.clone(), s.edges.clone()));
            ControlFlow::<()>::Continue(())
        });
        let before = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), before);
    }

    #[test]
    fn oracle_on_fixtures() {
        let safe = brute_force_oracle(&fixtures::blind_game(), &fixtures::safe_spec(), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(safe.unwrap().strategy.len(), 1);
        let steer = brute_force_oracle(&fixtures::full_game(), &fixtures::steer_spec(), 3, DEFAULT_BUDGET).unwrap();
        // constant b already steers into qr forever
        assert_eq!(steer.unwrap().strategy.len(), 1);
        let evenr = brute_force_oracle(&fixtures::blind_game(), &fixtures::evenr_spec(), 3, DEFAULT_BUDGET).unwrap();
        assert!(evenr.is_none());
    }

    #[test]
    fn budget_is_reported() {
        let r = brute_force_oracle(&fixtures::blind_game(), &fixtures::evenr_spec(), 3, 10);
        assert_eq!(r, Err(OracleError::BudgetExceeded { count: 10 }));
    }
}
