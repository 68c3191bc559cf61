//! D-state growth on the tree of all histories.

use std::collections::HashMap;

use crate::annotation::Label;
use crate::dstates::{classify_dstates, DState, DEFAULT_NODE_BUDGET};
use crate::game::{GameSpec, StateId};

pub const DEFAULT_TREE_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub depth: usize,
    pub nodes: usize,
    pub dstates: usize,
    pub max_size: usize,
    /// Isomorphism classes among the d-states of depth at most `depth`;
    /// `None` once a d-state is too large to compare.
    pub classes: Option<usize>,
}

/// Rows for depths `0..=depth` of the tree of all histories, stopping early
/// when the next level would exceed `node_budget` nodes. Nodes are labelled
/// by their observer states; two same-depth nodes are related for a player
/// iff that player's observations agree along them.
pub fn diagnose_growth(game: &GameSpec, depth: usize, node_budget: usize) -> Vec<GrowthRow> {
    let n = game.players();
    let mut layer: Vec<(Vec<StateId>, Vec<u32>)> =
        vec![(game.observers.iter().map(|m| m.initial).collect(), vec![0; n])];
    let mut rows = Vec::new();
    let mut all: Vec<DState> = Vec::new();
    let mut comparable = true;
    for level in 0..=depth {
        if level > 0 {
            if layer.len().saturating_mul(game.move_count()) > node_budget {
                break;
            }
            let mut ids: Vec<HashMap<(u32, usize), u32>> = (0..n).map(|_| HashMap::new()).collect();
            let mut next = Vec::with_capacity(layer.len() * game.move_count());
            for (states, classes) in &layer {
                for mv in 0..game.move_count() {
                    let mut ns = Vec::with_capacity(n);
                    let mut nc = Vec::with_capacity(n);
                    for i in 0..n {
                        let (q, o) = game.observers[i].step(states[i], mv);
                        let fresh = ids[i].len() as u32;
                        nc.push(*ids[i].entry((classes[i], o)).or_insert(fresh));
                        ns.push(q);
                    }
                    next.push((ns, nc));
                }
            }
            layer = next;
        }
        let components = components(&layer, n);
        let max_size = components.iter().map(Vec::len).max().unwrap_or(0);
        if comparable && max_size <= DEFAULT_NODE_BUDGET {
            for c in &components {
                all.push(level_dstate(&layer, c, n));
            }
        } else {
            comparable = false;
        }
        let classes = if comparable { classify_dstates(all.clone()).ok().map(|r| r.index()) } else { None };
        rows.push(GrowthRow { depth: level, nodes: layer.len(), dstates: components.len(), max_size, classes });
    }
    rows
}

fn components(layer: &[(Vec<StateId>, Vec<u32>)], players: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..layer.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..players {
        let mut first: HashMap<u32, usize> = HashMap::new();
        for (x, (_, c)) in layer.iter().enumerate() {
            if let Some(&y) = first.get(&c[i]) {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a.max(b)] = a.min(b);
            } else {
                first.insert(c[i], x);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for x in 0..layer.len() {
        let r = find(&mut parent, x);
        groups.entry(r).or_default().push(x);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

fn level_dstate(layer: &[(Vec<StateId>, Vec<u32>)], members: &[usize], players: usize) -> DState {
    let m = members.len();
    DState {
        nodes: (0..m).collect(),
        labels: members.iter().map(|&x| Label { observers: layer[x].0.clone(), spec: 0 }).collect(),
        choice: vec![0; m],
        frontier: vec![false; m],
        relations: (0..players)
            .map(|i| {
                members
                    .iter()
                    .map(|&x| members.iter().map(|&y| layer[x].1[i] == layer[y].1[i]).collect())
                    .collect()
            })
            .collect(),
        internal: vec![Vec::new(); m],
        exits: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn full_observation_keeps_singletons() {
        let rows = diagnose_growth(&fixtures::full_game(), 4, DEFAULT_TREE_BUDGET);
        assert!(rows.iter().all(|r| r.max_size == 1));
        assert_eq!(rows.len(), 5);
    }

    #[test]
    fn blind_merges_each_level() {
        let g = fixtures::blind_game();
        let rows = diagnose_growth(&g, 3, DEFAULT_TREE_BUDGET);
        for r in &rows {
            assert_eq!(r.dstates, 1);
            assert_eq!(r.max_size, g.move_count().pow(r.depth as u32));
        }
        // each level is its own class
        assert_eq!(rows[2].classes, Some(3));
    }

    #[test]
    fn delay_game_stays_within_one_window() {
        let g = fixtures::delay1_game();
        let rows = diagnose_growth(&g, 6, 1 << 21);
        assert!(rows.len() >= 4);
        for r in &rows {
            assert!(r.max_size <= g.move_count(), "{r:?}");
        }
    }
}
