//! Annotated strategies: node labels with observer states and a run of the
//! specification automaton, the local annotation conditions, the parity
//! acceptance check on finite graphs, and constructive witness search through
//! the acceptance parity game.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::game::{GameSpec, History, Move, ParityTreeAutomaton, StateId};
use crate::solvers::parity::{solve_parity, Owner, ParityArena};
use crate::strategy::{unravel, DecisionStructure, NodeId};

/// Observer-state profile and specification state attached to a node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub observers: Vec<StateId>,
    pub spec: StateId,
}

impl Label {
    pub fn initial(game: &GameSpec, spec: &ParityTreeAutomaton) -> Label {
        Label { observers: game.observers.iter().map(|m| m.initial).collect(), spec: spec.initial }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedStrategy {
    pub strategy: DecisionStructure,
    pub labels: Vec<Label>,
}

impl AnnotatedStrategy {
    pub fn priority(&self, spec: &ParityTreeAutomaton, v: NodeId) -> u32 {
        spec.priority(self.labels[v].spec)
    }

    pub fn len(&self) -> usize {
        self.strategy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategy.is_empty()
    }

    /// Induced annotated structure on `keep` (closed under edges).
    pub fn restrict(&self, keep: &[NodeId]) -> AnnotatedStrategy {
        AnnotatedStrategy {
            strategy: self.strategy.restrict(keep),
            labels: keep.iter().map(|&v| self.labels[v].clone()).collect(),
        }
    }

    pub fn renamed(&self, perm: &[NodeId]) -> AnnotatedStrategy {
        let mut labels = self.labels.clone();
        for (v, l) in self.labels.iter().enumerate() {
            labels[perm[v]] = l.clone();
        }
        AnnotatedStrategy { strategy: self.strategy.renamed(perm), labels }
    }
}

/// Failures of the annotation conditions, or labels that do not fit the game.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("{expected} labels expected, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("node {node}: label has {found} observer states, expected {expected}")]
    LabelArity { node: NodeId, expected: usize, found: usize },
    #[error("node {node}: observer {player} has no state {state}")]
    UnknownObserverState { node: NodeId, player: usize, state: StateId },
    #[error("node {node}: specification has no state {state}")]
    UnknownSpecState { node: NodeId, state: StateId },
    #[error("initial node is not labelled with the initial states")]
    InitialLabel { expected: Label, found: Label },
    #[error("edge {node} -{direction}-> {target}: observer {player} should move to state {expected}, label says {found}")]
    Mealy {
        node: NodeId,
        direction: usize,
        target: NodeId,
        player: usize,
        expected: StateId,
        found: StateId,
        history: History,
    },
    #[error("node {node}: ({spec_state}, {profile}, {successors:?}) is not a transition of the specification")]
    Run { node: NodeId, spec_state: StateId, profile: usize, successors: Vec<StateId> },
}

impl AnnotationError {
    /// True for violated annotation conditions, false for malformed labels.
    pub fn is_violation(&self) -> bool {
        matches!(
            self,
            AnnotationError::InitialLabel { .. } | AnnotationError::Mealy { .. } | AnnotationError::Run { .. }
        )
    }
}

fn validate_labels(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
) -> Result<(), AnnotationError> {
    if a.labels.len() != a.strategy.len() {
        return Err(AnnotationError::LabelCount { expected: a.strategy.len(), found: a.labels.len() });
    }
    for (node, l) in a.labels.iter().enumerate() {
        if l.observers.len() != game.players() {
            return Err(AnnotationError::LabelArity { node, expected: game.players(), found: l.observers.len() });
        }
        for (player, &state) in l.observers.iter().enumerate() {
            if state >= game.observers[player].num_states() {
                return Err(AnnotationError::UnknownObserverState { node, player, state });
            }
        }
        if l.spec >= spec.num_states() {
            return Err(AnnotationError::UnknownSpecState { node, state: l.spec });
        }
    }
    Ok(())
}

/// Checks the initial label, observer consistency along every reachable edge,
/// and that the specification labels form a run. Frontier nodes are exempt
/// from the edge conditions.
pub fn check_annotation(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
) -> Result<(), AnnotationError> {
    validate_labels(a, game, spec)?;
    let s = &a.strategy;
    let expected = Label::initial(game, spec);
    if a.labels[s.initial] != expected {
        return Err(AnnotationError::InitialLabel { expected, found: a.labels[s.initial].clone() });
    }
    let access = s.access_histories();
    for v in s.bfs_order() {
        if s.is_frontier(v) {
            continue;
        }
        let lv = &a.labels[v];
        for d in 0..game.num_directions() {
            let w = s.succ(v, d);
            let mv = Move::new(s.choice[v], d);
            let idx = game.move_index(mv);
            for (player, m) in game.observers.iter().enumerate() {
                let (q, _) = m.step(lv.observers[player], idx);
                if a.labels[w].observers[player] != q {
                    let history = access[v].clone().unwrap_or_default().extended(mv);
                    return Err(AnnotationError::Mealy {
                        node: v,
                        direction: d,
                        target: w,
                        player,
                        expected: q,
                        found: a.labels[w].observers[player],
                        history,
                    });
                }
            }
        }
        let successors: Vec<StateId> = s.edges[v].iter().map(|&w| a.labels[w].spec).collect();
        if !spec.options(lv.spec, s.choice[v]).contains(&successors) {
            return Err(AnnotationError::Run {
                node: v,
                spec_state: lv.spec,
                profile: s.choice[v],
                successors,
            });
        }
    }
    Ok(())
}

/// A reachable cycle whose least priority is odd: `stem` leads from the
/// initial node to `cycle[0]`, and `cycle` returns to `cycle[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<NodeId>,
    pub cycle: Vec<NodeId>,
    pub priority: u32,
}

impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stem {:?} cycle {:?} (priority {})", self.stem, self.cycle, self.priority)
    }
}

fn bfs_path(
    from: &[NodeId],
    to: NodeId,
    succ: impl Fn(NodeId) -> Vec<NodeId>,
    allowed: impl Fn(NodeId) -> bool,
) -> Option<Vec<NodeId>> {
    let mut parent: HashMap<NodeId, Option<NodeId>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in from {
        if allowed(s) && !parent.contains_key(&s) {
            parent.insert(s, None);
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![v];
            let mut cur = v;
            while let Some(Some(p)) = parent.get(&cur) {
                path.push(*p);
                cur = *p;
            }
            path.reverse();
            return Some(path);
        }
        for w in succ(v) {
            if allowed(w) && !parent.contains_key(&w) {
                parent.insert(w, Some(v));
                queue.push_back(w);
            }
        }
    }
    None
}

/// The annotation describes an accepting run iff no reachable cycle has an
/// odd least priority. For each odd `k`, the subgraph of priorities `≥ k` is
/// decomposed into strongly connected components; a component holding a
/// priority-`k` node and an edge yields a counterexample lasso.
pub fn is_witness(a: &AnnotatedStrategy, spec: &ParityTreeAutomaton) -> Result<(), Lasso> {
    let s = &a.strategy;
    let reach = s.reachable();
    let succ = |v: NodeId| -> Vec<NodeId> {
        if s.is_frontier(v) { Vec::new() } else { s.edges[v].clone() }
    };
    let prio: Vec<u32> = (0..s.len()).map(|v| a.priority(spec, v)).collect();
    let max = prio.iter().copied().max().unwrap_or(0);
    let mut k = 1;
    while k <= max {
        let mut g: DiGraph<NodeId, ()> = DiGraph::new();
        let mut idx = vec![None; s.len()];
        for v in 0..s.len() {
            if reach[v] && prio[v] >= k {
                idx[v] = Some(g.add_node(v));
            }
        }
        for v in 0..s.len() {
            let Some(iv) = idx[v] else { continue };
            for w in succ(v) {
                if let Some(iw) = idx[w] {
                    g.update_edge(iv, iw, ());
                }
            }
        }
        let mut best: Option<NodeId> = None;
        for comp in tarjan_scc(&g) {
            let nodes: Vec<NodeId> = comp.iter().map(|&i| g[i]).collect();
            let nontrivial = nodes.len() > 1 || succ(nodes[0]).contains(&nodes[0]);
            if !nontrivial {
                continue;
            }
            if let Some(&x) = nodes.iter().filter(|&&v| prio[v] == k).min() {
                best = Some(best.map_or(x, |b: NodeId| b.min(x)));
            }
        }
        if let Some(x) = best {
            let comp_ok = |w: NodeId| idx[w].is_some();
            let in_scc = {
                // nodes that can reach x inside the ≥k subgraph and are reachable from x
                let fwd = bfs_reach(x, &succ, &comp_ok);
                move |w: NodeId| fwd.contains(&w)
            };
            let cycle_tail = bfs_path(&succ(x), x, succ, |w| comp_ok(w) && in_scc(w))
                .expect("x lies on a cycle");
            let mut cycle = vec![x];
            cycle.extend(cycle_tail.into_iter().take_while(|&w| w != x));
            let stem_path = bfs_path(&[s.initial], x, succ, |_| true).expect("x is reachable");
            let stem = stem_path[..stem_path.len() - 1].to_vec();
            return Err(Lasso { stem, cycle, priority: k });
        }
        k += 2;
    }
    Ok(())
}

fn bfs_reach(
    from: NodeId,
    succ: &impl Fn(NodeId) -> Vec<NodeId>,
    allowed: &impl Fn(NodeId) -> bool,
) -> std::collections::HashSet<NodeId> {
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::from([from]);
    seen.insert(from);
    while let Some(v) = queue.pop_front() {
        for w in succ(v) {
            if allowed(w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Product node: structure node plus observer-state profile.
type ProductNode = (NodeId, Vec<StateId>);

/// Searches for an annotation of (a refinement of) `s` describing an
/// accepting run of `spec`.
///
/// The structure is synchronized with the observers, and the acceptance game
/// is solved: the automaton picks a transition tuple at every
/// `(product node, specification state)`, the pathfinder picks a direction.
/// A positional winning choice of the automaton labels the refined structure.
/// Frontier nodes accept unconditionally.
pub fn find_witness_annotation(
    s: &DecisionStructure,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
) -> Option<AnnotatedStrategy> {
    let nd = game.num_directions();
    // synchronized product with the observers
    let start: ProductNode = (s.initial, game.observers.iter().map(|m| m.initial).collect());
    let mut pindex: HashMap<ProductNode, usize> = HashMap::new();
    let mut pnodes: Vec<ProductNode> = vec![start.clone()];
    pindex.insert(start, 0);
    let mut psucc: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < pnodes.len() {
        let (v, qs) = pnodes[i].clone();
        let mut row = Vec::with_capacity(nd);
        for d in 0..nd {
            let next: ProductNode = if s.is_frontier(v) {
                (v, qs.clone())
            } else {
                let idx = game.move_index(Move::new(s.choice[v], d));
                (
                    s.succ(v, d),
                    qs.iter().zip(&game.observers).map(|(&q, m)| m.step(q, idx).0).collect(),
                )
            };
            let id = *pindex.entry(next.clone()).or_insert_with(|| {
                pnodes.push(next);
                pnodes.len() - 1
            });
            row.push(id);
        }
        psucc.push(row);
        i += 1;
    }

    // acceptance game, built on the fly from (product node, spec state)
    let mut arena = ParityArena::new();
    let accept = arena.add_position("accept", Owner::Even, 0);
    arena.add_move(accept, accept);
    let mut apos: BTreeMap<(usize, StateId), usize> = BTreeMap::new();
    let mut bpos: Vec<(usize, StateId, usize)> = Vec::new();
    let mut bindex: HashMap<usize, usize> = HashMap::new();
    let mut work = VecDeque::new();
    let root = arena.add_position("a0", Owner::Even, spec.priority(spec.initial));
    arena.initial = root;
    apos.insert((0, spec.initial), root);
    work.push_back((0usize, spec.initial));
    while let Some((p, q)) = work.pop_front() {
        let a_id = apos[&(p, q)];
        let v = pnodes[p].0;
        if s.is_frontier(v) {
            arena.add_move(a_id, accept);
            continue;
        }
        for (t_idx, tuple) in spec.options(q, s.choice[v]).iter().enumerate() {
            let b_id = arena.add_position(format!("b{p}.{q}.{t_idx}"), Owner::Odd, spec.priority(q));
            bpos.push((p, q, t_idx));
            bindex.insert(b_id, bpos.len() - 1);
            arena.add_move(a_id, b_id);
            for d in 0..nd {
                let key = (psucc[p][d], tuple[d]);
                let target = match apos.get(&key) {
                    Some(&t) => t,
                    None => {
                        let t = arena.add_position(format!("a{}.{}", key.0, key.1), Owner::Even, spec.priority(key.1));
                        apos.insert(key, t);
                        work.push_back(key);
                        t
                    }
                };
                arena.add_move(b_id, target);
            }
        }
    }
    let sol = solve_parity(&arena);
    if !sol.initial_won(&arena) {
        return None;
    }

    // refined structure: reachable (product node, spec state) pairs under the
    // automaton's positional choice
    let chosen_tuple = |p: usize, q: StateId| -> Option<&Vec<StateId>> {
        let a_id = apos[&(p, q)];
        let b_id = sol.strategy[a_id]?;
        let &(_, _, t) = bindex.get(&b_id)?.pipe(|&i| &bpos[i]);
        Some(&spec.options(q, s.choice[pnodes[p].0])[t])
    };
    let mut nodes: Vec<(usize, StateId)> = vec![(0, spec.initial)];
    let mut nindex: HashMap<(usize, StateId), usize> = HashMap::new();
    nindex.insert((0, spec.initial), 0);
    let mut edges: Vec<Vec<NodeId>> = Vec::new();
    let mut j = 0;
    while j < nodes.len() {
        let (p, q) = nodes[j];
        let v = pnodes[p].0;
        let mut row = Vec::with_capacity(nd);
        if s.is_frontier(v) {
            row = vec![j; nd];
        } else {
            let tuple = chosen_tuple(p, q).expect("winning automaton positions have a choice").clone();
            for d in 0..nd {
                let key = (psucc[p][d], tuple[d]);
                let id = *nindex.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    nodes.len() - 1
                });
                row.push(id);
            }
        }
        edges.push(row);
        j += 1;
    }
    let names = nodes
        .iter()
        .map(|&(p, q)| {
            let (v, qs) = &pnodes[p];
            let mut n = s.names[*v].clone();
            for (i, &x) in qs.iter().enumerate() {
                n.push('~');
                n.push_str(&game.observers[i].states[x]);
            }
            n.push('~');
            n.push_str(&spec.states[q]);
            n
        })
        .collect();
    let strategy = DecisionStructure {
        names,
        choice: nodes.iter().map(|&(p, _)| s.choice[pnodes[p].0]).collect(),
        edges,
        initial: 0,
        frontier: nodes.iter().map(|&(p, _)| s.is_frontier(pnodes[p].0)).collect(),
    };
    let labels = nodes
        .iter()
        .map(|&(p, q)| Label { observers: pnodes[p].1.clone(), spec: q })
        .collect();
    let annotated = AnnotatedStrategy { strategy, labels };
    debug_assert!(check_annotation(&annotated, game, spec).is_ok());
    debug_assert!(is_witness(&annotated, spec).is_ok());
    Some(annotated)
}

trait Pipe: Sized {
    fn pipe<R>(self, f: impl FnOnce(Self) -> R) -> R {
        f(self)
    }
}
impl<T> Pipe for T {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no witness annotation exists for this strategy")]
pub struct NoWitness;

/// Labels the depth-bounded unravelling of `s` with a witnessing run, pushed
/// down from the refined product.
pub fn annotate_tree(
    s: &DecisionStructure,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    depth: usize,
) -> Result<AnnotatedStrategy, NoWitness> {
    let refined = find_witness_annotation(s, game, spec).ok_or(NoWitness)?;
    let u = unravel(&refined.strategy, game, depth);
    let plain = unravel(s, game, depth);
    let labels = u.origin.iter().map(|&v| refined.labels[v].clone()).collect();
    Ok(AnnotatedStrategy { strategy: plain.tree, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::run_mealy;

    fn prof(game: &GameSpec, a: &str) -> usize {
        game.profile_of(&[game.actions[0].iter().position(|x| x == a).unwrap()])
    }

    fn state(spec: &ParityTreeAutomaton, name: &str) -> StateId {
        spec.states.iter().position(|x| x == name).unwrap()
    }

    fn constant_safe() -> (GameSpec, ParityTreeAutomaton, AnnotatedStrategy) {
        let g = fixtures::blind_game();
        let spec = fixtures::safe_spec();
        let s = DecisionStructure::constant(prof(&g, "a"), 2);
        let a = AnnotatedStrategy { strategy: s, labels: vec![Label::initial(&g, &spec)] };
        (g, spec, a)
    }

    #[test]
    fn constant_safe_annotation_ok() {
        let (g, spec, a) = constant_safe();
        assert_eq!(check_annotation(&a, &g, &spec), Ok(()));
        assert_eq!(is_witness(&a, &spec), Ok(()));
    }

    #[test]
    fn initial_label_mismatch() {
        let (g, spec, mut a) = constant_safe();
        a.labels[0].spec = state(&spec, "bad");
        assert!(matches!(check_annotation(&a, &g, &spec), Err(AnnotationError::InitialLabel { .. })));
    }

    #[test]
    fn unknown_state_is_validation_error() {
        let (g, spec, mut a) = constant_safe();
        a.labels[0].spec = 9;
        let e = check_annotation(&a, &g, &spec).unwrap_err();
        assert!(!e.is_violation());
    }

    #[test]
    fn mealy_violation_with_witness_history() {
        // one node reached both before and after an r-move: the toggling
        // observer is in different states, so no single label fits
        let g = fixtures::evenr_observer_game();
        let spec = fixtures::safe_spec();
        let s = DecisionStructure::constant(prof(&g, "a"), 2);
        let a = AnnotatedStrategy { strategy: s, labels: vec![Label::initial(&g, &spec)] };
        let err = check_annotation(&a, &g, &spec).unwrap_err();
        let AnnotationError::Mealy { history, expected, found, .. } = err else { panic!("{err:?}") };
        let run = run_mealy(&g, &g.observers[0], &history).unwrap();
        assert_eq!(*run.states.last().unwrap(), expected);
        assert_ne!(expected, found);
    }

    #[test]
    fn absorbing_bad_is_rejected_with_lasso() {
        let g = fixtures::blind_game();
        let spec = fixtures::safe_spec();
        let s = DecisionStructure::new(vec![prof(&g, "b"), prof(&g, "b")], vec![vec![1, 1], vec![1, 1]], 0);
        let init = Label::initial(&g, &spec);
        let bad = Label { observers: init.observers.clone(), spec: state(&spec, "bad") };
        let a = AnnotatedStrategy { strategy: s, labels: vec![init, bad] };
        assert_eq!(check_annotation(&a, &g, &spec), Ok(()));
        let lasso = is_witness(&a, &spec).unwrap_err();
        assert_eq!(lasso.stem, vec![0]);
        assert_eq!(lasso.cycle, vec![1]);
        assert_eq!(lasso.priority, 1);
    }

    #[test]
    fn steer_two_node_witness() {
        let (g, spec, a) = fixtures::steer_witness();
        assert_eq!(check_annotation(&a, &g, &spec), Ok(()));
        assert_eq!(is_witness(&a, &spec), Ok(()));
        // the alternating cycle exists and has least priority 0
        let pri: Vec<u32> = (0..a.len()).map(|v| a.priority(&spec, v)).collect();
        assert_eq!(pri, vec![1, 0]);
    }

    #[test]
    fn find_witness_examples() {
        let g = fixtures::dmask_game();
        let spec = fixtures::safe_spec();
        let w = find_witness_annotation(&DecisionStructure::constant(prof(&g, "a"), 2), &g, &spec).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.labels[0].spec, state(&spec, "s"));
        assert!(find_witness_annotation(&DecisionStructure::constant(prof(&g, "b"), 2), &g, &spec).is_none());

        // Nature controls r under the direction-driven condition
        let spec = fixtures::evenr_spec();
        let s = DecisionStructure::new(vec![prof(&g, "a"), prof(&g, "b")], vec![vec![1, 0], vec![0, 1]], 0);
        assert!(find_witness_annotation(&s, &g, &spec).is_none());
    }

    /// Brute force over all choices of transition tuples per product node.
    #[test]
    fn find_witness_matches_brute_force_on_steer() {
        let g = fixtures::dmask_game();
        let spec = fixtures::steer_spec();
        let a = prof(&g, "a");
        let b = prof(&g, "b");
        for s in [
            DecisionStructure::new(vec![a, a], vec![vec![1, 0], vec![0, 1]], 0),
            DecisionStructure::new(vec![b, a], vec![vec![1, 1], vec![0, 1]], 0),
            DecisionStructure::new(vec![a, b], vec![vec![1, 1], vec![0, 0]], 0),
            DecisionStructure::constant(a, 2),
            DecisionStructure::constant(b, 2),
        ] {
            let found = find_witness_annotation(&s, &g, &spec).is_some();
            let brute = brute_force_annotation(&s, &g, &spec, 3);
            assert_eq!(found, brute, "{s:?}");
        }
    }

    /// Tries every labelling of the unravelling-equivalent refinements with
    /// up to `copies` spec states per structure node.
    fn brute_force_annotation(
        s: &DecisionStructure,
        g: &GameSpec,
        spec: &ParityTreeAutomaton,
        _copies: usize,
    ) -> bool {
        // refine by the full product with all spec states and enumerate every
        // labelling function on (node, spec state) pairs
        let n = s.len();
        let qn = spec.num_states();
        let nodes: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..qn).map(move |q| (v, q))).collect();
        let options: Vec<Vec<Vec<StateId>>> = nodes
            .iter()
            .map(|&(v, q)| spec.options(q, s.choice[v]).to_vec())
            .collect();
        let mut choice = vec![0usize; nodes.len()];
        loop {
            if options.iter().all(|o| !o.is_empty()) {
                // build the structure over (v, q)
                let idx = |v: usize, q: usize| v * qn + q;
                let edges: Vec<Vec<NodeId>> = nodes
                    .iter()
                    .enumerate()
                    .map(|(i, &(v, _))| {
                        let t = &options[i][choice[i]];
                        (0..g.num_directions()).map(|d| idx(s.succ(v, d), t[d])).collect()
                    })
                    .collect();
                let st = DecisionStructure::new(
                    nodes.iter().map(|&(v, _)| s.choice[v]).collect(),
                    edges,
                    idx(s.initial, spec.initial),
                );
                let labels = nodes
                    .iter()
                    .map(|&(_, q)| Label { observers: vec![0; g.players()], spec: q })
                    .collect();
                let ann = AnnotatedStrategy { strategy: st, labels };
                if is_witness(&ann, spec).is_ok() {
                    return true;
                }
            }
            // next choice vector
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return false;
                }
                let len = options[k].len().max(1);
                choice[k] += 1;
                if choice[k] < len {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn annotate_tree_examples() {
        let g = fixtures::dmask_game();
        let spec = fixtures::safe_spec();
        let c = DecisionStructure::constant(prof(&g, "a"), 2);
        let t = annotate_tree(&c, &g, &spec, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.labels[0], Label::initial(&g, &spec));
        let t = annotate_tree(&c, &g, &spec, 2).unwrap();
        assert_eq!(t.len(), 7);
        assert!(t.labels.iter().all(|l| l.spec == state(&spec, "s")));
        assert_eq!(check_annotation(&t, &g, &spec), Ok(()));
        assert!(annotate_tree(&DecisionStructure::constant(prof(&g, "b"), 2), &g, &spec, 2).is_err());
    }

    #[test]
    fn annotate_tree_matches_observer_runs() {
        let g = fixtures::evenr_observer_game();
        let spec = fixtures::safe_spec();
        let c = DecisionStructure::constant(prof(&g, "a"), 2);
        let t = annotate_tree(&c, &g, &spec, 2).unwrap();
        for (h, v) in t.strategy.followed_histories(2) {
            let run = run_mealy(&g, &g.observers[0], &h).unwrap();
            assert_eq!(t.labels[v].observers[0], *run.states.last().unwrap());
        }
    }

    #[test]
    fn relabelling_does_not_change_verdicts() {
        let (g, spec, a) = fixtures::steer_witness();
        let r = a.renamed(&[1, 0]);
        assert_eq!(check_annotation(&r, &g, &spec).is_ok(), check_annotation(&a, &g, &spec).is_ok());
        assert_eq!(is_witness(&r, &spec).is_ok(), is_witness(&a, &spec).is_ok());
    }
}
