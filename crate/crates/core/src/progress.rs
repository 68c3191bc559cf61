//! Parity progress measures on annotated strategies.

use std::cmp::Ordering;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::annotation::{find_witness_annotation, AnnotatedStrategy};
use crate::game::{GameSpec, ParityTreeAutomaton};
use crate::strategy::{unravel, DecisionStructure, NodeId};

/// One measure tuple per node, of length `spec.priority_count()`.
pub type ProgressMeasure = Vec<Vec<u32>>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("tuples of length {left} and {right} cannot be compared at priority {priority}")]
    LengthMismatch { left: usize, right: usize, priority: usize },
    #[error("{expected} measure tuples expected, found {found}")]
    NodeCount { expected: usize, found: usize },
    #[error("edge {node} -{direction}-> {target} violates the condition for priority {priority}")]
    Violation { node: NodeId, direction: usize, target: NodeId, priority: u32 },
}

/// Lexicographic comparison of the length-`k+1` prefixes.
pub fn compare_lex(x: &[u32], y: &[u32], k: usize) -> Result<Ordering, MeasureError> {
    if x.len() != y.len() || k >= x.len() {
        return Err(MeasureError::LengthMismatch { left: x.len(), right: y.len(), priority: k });
    }
    Ok(x[..=k].cmp(&y[..=k]))
}

/// Whether an edge from a node of priority `p` with measure `mu_u` into a node
/// with measure `mu_v` respects the progress condition.
pub fn edge_ok(mu_u: &[u32], mu_v: &[u32], p: u32) -> Result<bool, MeasureError> {
    let o = compare_lex(mu_u, mu_v, p as usize)?;
    Ok(if p.is_multiple_of(2) { o != Ordering::Less } else { o == Ordering::Greater })
}

/// Checks every edge leaving a reachable non-frontier node, in node order.
pub fn check_measure(
    a: &AnnotatedStrategy,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
) -> Result<(), MeasureError> {
    let s = &a.strategy;
    if mu.len() != s.len() {
        return Err(MeasureError::NodeCount { expected: s.len(), found: mu.len() });
    }
    let reach = s.reachable();
    for u in 0..s.len() {
        if !reach[u] || s.is_frontier(u) {
            continue;
        }
        let p = a.priority(spec, u);
        for (d, &v) in s.edges[u].iter().enumerate() {
            if !edge_ok(&mu[u], &mu[v], p)? {
                return Err(MeasureError::Violation { node: u, direction: d, target: v, priority: p });
            }
        }
    }
    Ok(())
}

/// Least progress measure, or `None` when some reachable cycle has an odd
/// least priority.
///
/// For odd `k`, the `k`-th component counts the largest number of priority-`k`
/// nodes on a path staying within priorities `≥ k`. Strongly connected
/// components of that subgraph are processed sinks first; a component holding
/// a priority-`k` node on a cycle makes the count unbounded. Even components
/// are zero; unreachable nodes get the zero tuple.
pub fn compute_measure(a: &AnnotatedStrategy, spec: &ParityTreeAutomaton) -> Option<ProgressMeasure> {
    let s = &a.strategy;
    let n = s.len();
    let r = spec.priority_count();
    let reach = s.reachable();
    let prio: Vec<u32> = (0..n).map(|v| a.priority(spec, v)).collect();
    let succ = |v: NodeId| -> &[NodeId] { if s.is_frontier(v) { &[] } else { &s.edges[v] } };
    let mut mu = vec![vec![0u32; r]; n];
    for k in (1..r).step_by(2) {
        let k32 = k as u32;
        let mut g: DiGraph<NodeId, ()> = DiGraph::new();
        let mut idx = vec![None; n];
        for v in 0..n {
            if reach[v] && prio[v] >= k32 {
                idx[v] = Some(g.add_node(v));
            }
        }
        for v in 0..n {
            let Some(iv) = idx[v] else { continue };
            for &w in succ(v) {
                if let Some(iw) = idx[w] {
                    g.update_edge(iv, iw, ());
                }
            }
        }
        let mut comp_of = vec![usize::MAX; n];
        let sccs = tarjan_scc(&g);
        for (c, comp) in sccs.iter().enumerate() {
            for &i in comp {
                comp_of[g[i]] = c;
            }
        }
        // tarjan_scc yields components in reverse topological order
        for (c, comp) in sccs.iter().enumerate() {
            let nodes: Vec<NodeId> = comp.iter().map(|&i| g[i]).collect();
            let cyclic = nodes.len() > 1 || succ(nodes[0]).contains(&nodes[0]);
            let has_k = nodes.iter().any(|&v| prio[v] == k32);
            if cyclic && has_k {
                return None;
            }
            let mut exit_max = 0;
            for &v in &nodes {
                for &w in succ(v) {
                    if idx[w].is_some() && comp_of[w] != c {
                        exit_max = exit_max.max(mu[w][k]);
                    }
                }
            }
            for &v in &nodes {
                mu[v][k] = exit_max + u32::from(prio[v] == k32);
            }
        }
    }
    Some(mu)
}

/// The depth-bounded unravelling of `s`, labelled by a witness annotation,
/// with the measure of that finite witness copied to every copy of a node.
/// Copies of one node get equal tuples, unlike [`compute_measure`] on the
/// tree itself, whose values shrink towards the cut.
pub fn measured_tree(
    s: &DecisionStructure,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    depth: usize,
) -> Option<(AnnotatedStrategy, ProgressMeasure)> {
    let refined = find_witness_annotation(s, game, spec)?;
    let mu = compute_measure(&refined, spec)?;
    let u = unravel(&refined.strategy, game, depth);
    let plain = unravel(s, game, depth);
    let labels = u.origin.iter().map(|&v| refined.labels[v].clone()).collect();
    let measure = u.origin.iter().map(|&v| mu[v].clone()).collect();
    Some((AnnotatedStrategy { strategy: plain.tree, labels }, measure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{is_witness, Label};
    use crate::fixtures;
    use crate::strategy::DecisionStructure;

    fn chain_spec() -> ParityTreeAutomaton {
        // two states with priorities 1 and 0, arbitrary transitions
        let mut spec = fixtures::safe_spec();
        spec.priorities = vec![1, 0];
        spec
    }

    fn annotated(edges: Vec<Vec<NodeId>>, states: Vec<usize>) -> AnnotatedStrategy {
        let n = edges.len();
        AnnotatedStrategy {
            strategy: DecisionStructure::new(vec![0; n], edges, 0),
            labels: states.into_iter().map(|q| Label { observers: vec![0], spec: q }).collect(),
        }
    }

    #[test]
    fn compare_lex_examples() {
        assert_eq!(compare_lex(&[1, 5], &[1, 3], 0), Ok(Ordering::Equal));
        assert_eq!(compare_lex(&[1, 5], &[1, 3], 1), Ok(Ordering::Greater));
        assert_eq!(compare_lex(&[0, 9, 0], &[1, 0, 0], 2), Ok(Ordering::Less));
        assert!(compare_lex(&[0, 1], &[0], 0).is_err());
        assert!(compare_lex(&[0, 1], &[0, 1], 2).is_err());
    }

    #[test]
    fn check_measure_examples() {
        let spec = fixtures::safe_spec();
        let loop0 = annotated(vec![vec![0, 0]], vec![0]);
        assert_eq!(check_measure(&loop0, &spec, &[vec![0, 0]]), Ok(()));
        let loop1 = annotated(vec![vec![0, 0]], vec![1]);
        assert!(matches!(
            check_measure(&loop1, &spec, &[vec![0, 3]]),
            Err(MeasureError::Violation { node: 0, priority: 1, .. })
        ));
        // u (priority 1) -> v (priority 0), v loops
        let spec = chain_spec();
        let chain = annotated(vec![vec![1, 1], vec![1, 1]], vec![0, 1]);
        assert_eq!(check_measure(&chain, &spec, &[vec![0, 1], vec![0, 0]]), Ok(()));
        assert!(check_measure(&chain, &spec, &[vec![0, 0], vec![0, 0]]).is_err());
    }

    #[test]
    fn compute_measure_examples() {
        let spec = fixtures::safe_spec();
        let loop0 = annotated(vec![vec![0, 0]], vec![0]);
        assert_eq!(compute_measure(&loop0, &spec), Some(vec![vec![0, 0]]));
        let bad = annotated(vec![vec![1, 1], vec![1, 1]], vec![0, 1]);
        assert_eq!(compute_measure(&bad, &spec), None);

        let (_, spec, w) = fixtures::steer_witness();
        let mu = compute_measure(&w, &spec).unwrap();
        let zero_node = (0..w.len()).find(|&v| w.priority(&spec, v) == 0).unwrap();
        assert_eq!(mu[zero_node][1], 0);
        assert_eq!(check_measure(&w, &spec, &mu), Ok(()));
    }

    #[test]
    fn agrees_with_is_witness_on_small_graphs() {
        let spec = chain_spec();
        // all 2-node graphs over one direction pair and both labellings
        for e in 0..16usize {
            let edges = vec![vec![e & 1, (e >> 1) & 1], vec![(e >> 2) & 1, (e >> 3) & 1]];
            for lab in 0..4usize {
                let a = annotated(edges.clone(), vec![lab & 1, (lab >> 1) & 1]);
                let m = compute_measure(&a, &spec);
                assert_eq!(m.is_some(), is_witness(&a, &spec).is_ok());
                if let Some(m) = m {
                    assert_eq!(check_measure(&a, &spec, &m), Ok(()));
                }
            }
        }
    }

    #[test]
    fn measured_tree_is_a_progress_measure() {
        let (g, spec, w) = fixtures::steer_witness();
        let (tree, mu) = measured_tree(&w.strategy, &g, &spec, 4).unwrap();
        assert_eq!(check_measure(&tree, &spec, &mu), Ok(()));
        assert_eq!(tree.len(), 31);
    }
}
