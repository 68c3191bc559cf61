//! Decision structures, traces, the uniformity relations ≈ⁱ, tree
//! unravellings and projection onto private Moore machines.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

use thiserror::Error;

use crate::game::{GameSpec, History, Move, StateId};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("node {node} prescribes profile {profile}, but the game has {count} profiles")]
    BadProfile { node: NodeId, profile: usize, count: usize },
    #[error("node {node} has {found} outgoing edges, expected one per direction ({expected})")]
    EdgeArity { node: NodeId, expected: usize, found: usize },
    #[error("edge from node {node} points to unknown node {target}")]
    BadTarget { node: NodeId, target: NodeId },
    #[error("initial node {0} does not exist")]
    BadInitial(NodeId),
    #[error("strategy is not uniform: {0}")]
    NonUniform(Box<UniformityViolation>),
}

/// A finite graph `(V, E, f, v_ε)` with `E` total and deterministic on
/// `V × D`. Frontier nodes are cut leaves of a truncated unravelling; they loop
/// to themselves and are skipped by acceptance checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionStructure {
    pub names: Vec<String>,
    pub choice: Vec<usize>,
    pub edges: Vec<Vec<NodeId>>,
    pub initial: NodeId,
    pub frontier: Vec<bool>,
}

/// The path of a history through a structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub path: Vec<NodeId>,
    pub follows: bool,
}

impl DecisionStructure {
    pub fn new(choice: Vec<usize>, edges: Vec<Vec<NodeId>>, initial: NodeId) -> Self {
        let names = (0..choice.len()).map(|i| format!("v{i}")).collect();
        let frontier = vec![false; choice.len()];
        DecisionStructure { names, choice, edges, initial, frontier }
    }

    /// One node looping on every direction.
    pub fn constant(profile: usize, directions: usize) -> Self {
        Self::new(vec![profile], vec![vec![0; directions]], 0)
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    pub fn succ(&self, v: NodeId, d: usize) -> NodeId {
        self.edges[v][d]
    }

    pub fn is_frontier(&self, v: NodeId) -> bool {
        self.frontier.get(v).copied().unwrap_or(false)
    }

    pub fn node_index(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn check(&self, game: &GameSpec) -> Result<(), StructureError> {
        let pc = game.profile_count();
        let nd = game.num_directions();
        if self.initial >= self.len() {
            return Err(StructureError::BadInitial(self.initial));
        }
        for v in 0..self.len() {
            if self.choice[v] >= pc {
                return Err(StructureError::BadProfile { node: v, profile: self.choice[v], count: pc });
            }
            if self.edges[v].len() != nd {
                return Err(StructureError::EdgeArity { node: v, expected: nd, found: self.edges[v].len() });
            }
            if let Some(&t) = self.edges[v].iter().find(|&&t| t >= self.len()) {
                return Err(StructureError::BadTarget { node: v, target: t });
            }
        }
        Ok(())
    }

    /// Nodes in breadth-first order from the initial node, directions in
    /// canonical order.
    pub fn bfs_order(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.len()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &w in &self.edges[v] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
        order
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut r = vec![false; self.len()];
        for v in self.bfs_order() {
            r[v] = true;
        }
        r
    }

    /// Coarsest partition of the reachable nodes into blocks with equal
    /// `key` whose direction successors lie in equal blocks. Returns the
    /// quotient and each node's block (`usize::MAX` if unreachable); blocks
    /// are numbered by least member.
    pub fn quotient_by<K: Hash + Eq>(&self, key: impl Fn(NodeId) -> K) -> (DecisionStructure, Vec<usize>) {
        let reach = self.reachable();
        let nodes: Vec<NodeId> = (0..self.len()).filter(|&v| reach[v]).collect();
        let mut block = vec![usize::MAX; self.len()];
        let mut ids: HashMap<K, usize> = HashMap::new();
        for &v in &nodes {
            let next = ids.len();
            block[v] = *ids.entry(key(v)).or_insert(next);
        }
        let mut count = ids.len();
        loop {
            let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next_block = block.clone();
            for &v in &nodes {
                let k = (block[v], self.edges[v].iter().map(|&w| block[w]).collect());
                let next = ids.len();
                next_block[v] = *ids.entry(k).or_insert(next);
            }
            block = next_block;
            if ids.len() == count {
                break;
            }
            count = ids.len();
        }
        let mut order = vec![usize::MAX; count];
        let mut reps = Vec::new();
        for &v in &nodes {
            if order[block[v]] == usize::MAX {
                order[block[v]] = reps.len();
                reps.push(v);
            }
        }
        for &v in &nodes {
            block[v] = order[block[v]];
        }
        let q = DecisionStructure {
            names: reps.iter().map(|&v| self.names[v].clone()).collect(),
            choice: reps.iter().map(|&v| self.choice[v]).collect(),
            edges: reps.iter().map(|&v| self.edges[v].iter().map(|&w| block[w]).collect()).collect(),
            initial: block[self.initial],
            frontier: reps.iter().map(|&v| self.is_frontier(v)).collect(),
        };
        (q, block)
    }

    /// Quotient by bisimilarity; it follows exactly the same histories with
    /// the same profiles.
    pub fn minimized(&self) -> DecisionStructure {
        self.quotient_by(|v| (self.choice[v], self.is_frontier(v))).0
    }

    /// Restriction to reachable nodes, preserving relative order. Returns the
    /// pruned structure and, for each new node, its old index.
    pub fn pruned(&self) -> (DecisionStructure, Vec<NodeId>) {
        let reach = self.reachable();
        let keep: Vec<NodeId> = (0..self.len()).filter(|&v| reach[v]).collect();
        (self.restrict(&keep), keep)
    }

    /// Induced structure on `keep` (must be closed under edges and contain
    /// the initial node).
    pub fn restrict(&self, keep: &[NodeId]) -> DecisionStructure {
        let mut index = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        DecisionStructure {
            names: keep.iter().map(|&v| self.names[v].clone()).collect(),
            choice: keep.iter().map(|&v| self.choice[v]).collect(),
            edges: keep
                .iter()
                .map(|&v| self.edges[v].iter().map(|&w| index[w]).collect())
                .collect(),
            initial: index[self.initial],
            frontier: keep.iter().map(|&v| self.is_frontier(v)).collect(),
        }
    }

    /// Same structure with nodes permuted (old index -> new index).
    pub fn renamed(&self, perm: &[NodeId]) -> DecisionStructure {
        let n = self.len();
        let mut names = vec![String::new(); n];
        let mut choice = vec![0; n];
        let mut edges = vec![Vec::new(); n];
        let mut frontier = vec![false; n];
        for v in 0..n {
            let p = perm[v];
            names[p] = self.names[v].clone();
            choice[p] = self.choice[v];
            edges[p] = self.edges[v].iter().map(|&w| perm[w]).collect();
            frontier[p] = self.is_frontier(v);
        }
        DecisionStructure { names, choice, edges, initial: perm[self.initial], frontier }
    }

    /// Every reachable node except the root has exactly one incoming edge
    /// from a non-frontier node, and the root has none.
    pub fn is_tree(&self) -> bool {
        let reach = self.reachable();
        let mut indeg = vec![0usize; self.len()];
        for v in 0..self.len() {
            if !reach[v] || self.is_frontier(v) {
                continue;
            }
            for &w in &self.edges[v] {
                indeg[w] += 1;
            }
        }
        (0..self.len())
            .filter(|&v| reach[v])
            .all(|v| if v == self.initial { indeg[v] == 0 } else { indeg[v] == 1 })
    }

    /// Histories following the structure, up to length `depth`, in
    /// lexicographic direction order, together with their end nodes.
    pub fn followed_histories(&self, depth: usize) -> Vec<(History, NodeId)> {
        let mut out = vec![(History::empty(), self.initial)];
        let mut layer = vec![(History::empty(), self.initial)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (h, v) in &layer {
                for (d, &w) in self.edges[*v].iter().enumerate() {
                    next.push((h.extended(Move::new(self.choice[*v], d)), w));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// Shortest followed history reaching each reachable node.
    pub fn access_histories(&self) -> Vec<Option<History>> {
        let mut acc: Vec<Option<History>> = vec![None; self.len()];
        acc[self.initial] = Some(History::empty());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(v) = queue.pop_front() {
            let h = acc[v].clone().unwrap();
            for (d, &w) in self.edges[v].iter().enumerate() {
                if acc[w].is_none() {
                    acc[w] = Some(h.extended(Move::new(self.choice[v], d)));
                    queue.push_back(w);
                }
            }
        }
        acc
    }
}

/// The unique path of `history` from the initial node, and whether the
/// history follows the structure.
pub fn trace(s: &DecisionStructure, history: &History) -> Trace {
    let mut v = s.initial;
    let mut path = vec![v];
    let mut follows = true;
    for mv in history.moves() {
        if s.choice[v] != mv.profile {
            follows = false;
        }
        v = s.succ(v, mv.direction);
        path.push(v);
    }
    Trace { path, follows }
}

/// Which histories induce ≈ⁱ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UniformityMode {
    /// Both histories follow the structure.
    #[default]
    Followed,
    /// Any pair of histories, related through their traces.
    AllHistories,
}

/// Per-player reflexive, symmetric relations on nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityRelation {
    pub per_player: Vec<BTreeSet<(NodeId, NodeId)>>,
}

impl UniformityRelation {
    pub fn related(&self, player: usize, u: NodeId, v: NodeId) -> bool {
        self.per_player[player].contains(&(u, v))
    }

    /// ≈ = ∪ᵢ ≈ⁱ
    pub fn union(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.per_player.iter().flat_map(|r| r.iter().copied()).collect()
    }
}

/// A pair of nodes related by ≈ⁱ that prescribe different actions to player
/// `player`, with indistinguishable histories reaching them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityViolation {
    pub player: usize,
    pub left: NodeId,
    pub right: NodeId,
    pub left_history: History,
    pub right_history: History,
}

impl std::fmt::Display for UniformityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "player {} sees nodes {} and {} as indistinguishable", self.player, self.left, self.right)
    }
}

type ProductState = (u32, u32, u32, u32);

/// Reachability in the synchronized product `V × V × Qⁱ × Qⁱ` for one
/// player. Parent links allow reconstructing the witnessing history pair.
struct ProductSearch<'a> {
    s: &'a DecisionStructure,
    game: &'a GameSpec,
    player: usize,
    mode: UniformityMode,
    parent: HashMap<ProductState, Option<(ProductState, Move, Move)>>,
    order: Vec<ProductState>,
}

impl<'a> ProductSearch<'a> {
    fn new(s: &'a DecisionStructure, game: &'a GameSpec, player: usize, mode: UniformityMode) -> Self {
        ProductSearch { s, game, player, mode, parent: HashMap::new(), order: Vec::new() }
    }

    fn moves_from(&self, v: NodeId) -> Vec<Move> {
        let nd = self.game.num_directions();
        match self.mode {
            UniformityMode::Followed => (0..nd).map(|d| Move::new(self.s.choice[v], d)).collect(),
            UniformityMode::AllHistories => (0..self.game.profile_count())
                .flat_map(|p| (0..nd).map(move |d| Move::new(p, d)))
                .collect(),
        }
    }

    /// Breadth-first exploration; `stop` is consulted on every newly reached
    /// state and ends the search early when it returns true.
    fn run(&mut self, mut stop: impl FnMut(NodeId, NodeId) -> bool) -> Option<ProductState> {
        let m = &self.game.observers[self.player];
        let q0 = m.initial as u32;
        let v0 = self.s.initial as u32;
        let start = (v0, v0, q0, q0);
        self.parent.insert(start, None);
        self.order.push(start);
        if stop(self.s.initial, self.s.initial) {
            return Some(start);
        }
        let mut i = 0;
        while i < self.order.len() {
            let st @ (v, w, q, r) = self.order[i];
            i += 1;
            let (v, w) = (v as usize, w as usize);
            let left = self.moves_from(v);
            let right = self.moves_from(w);
            for &ma in &left {
                let (qa, ba) = m.step(q as usize, self.game.move_index(ma));
                let va = self.s.succ(v, ma.direction);
                for &mb in &right {
                    let (qb, bb) = m.step(r as usize, self.game.move_index(mb));
                    if ba != bb {
                        continue;
                    }
                    let vb = self.s.succ(w, mb.direction);
                    let next = (va as u32, vb as u32, qa as u32, qb as u32);
                    if self.parent.contains_key(&next) {
                        continue;
                    }
                    self.parent.insert(next, Some((st, ma, mb)));
                    self.order.push(next);
                    if stop(va, vb) {
                        return Some(next);
                    }
                }
            }
        }
        None
    }

    fn histories(&self, mut st: ProductState) -> (History, History) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        while let Some(Some((prev, ma, mb))) = self.parent.get(&st) {
            a.push(*ma);
            b.push(*mb);
            st = *prev;
        }
        a.reverse();
        b.reverse();
        (History(a), History(b))
    }
}

/// Computes ≈ⁱ for every player.
pub fn compute_uniformity(s: &DecisionStructure, game: &GameSpec) -> UniformityRelation {
    compute_uniformity_with(s, game, UniformityMode::Followed)
}

pub fn compute_uniformity_with(
    s: &DecisionStructure,
    game: &GameSpec,
    mode: UniformityMode,
) -> UniformityRelation {
    let per_player = (0..game.players())
        .map(|i| {
            let mut search = ProductSearch::new(s, game, i, mode);
            search.run(|_, _| false);
            search.order.iter().map(|&(v, w, _, _)| (v as usize, w as usize)).collect()
        })
        .collect();
    UniformityRelation { per_player }
}

/// Checks the uniformity condition `v ≈ⁱ v′ ⇒ fⁱ(v) = fⁱ(v′)`.
pub fn check_strategy(s: &DecisionStructure, game: &GameSpec) -> Result<(), UniformityViolation> {
    check_strategy_with(s, game, UniformityMode::Followed)
}

pub fn check_strategy_with(
    s: &DecisionStructure,
    game: &GameSpec,
    mode: UniformityMode,
) -> Result<(), UniformityViolation> {
    for player in 0..game.players() {
        let mut search = ProductSearch::new(s, game, player, mode);
        let hit = search.run(|v, w| game.action_of(s.choice[v], player) != game.action_of(s.choice[w], player));
        if let Some(st) = hit {
            let (left_history, right_history) = search.histories(st);
            return Err(UniformityViolation {
                player,
                left: st.0 as usize,
                right: st.1 as usize,
                left_history,
                right_history,
            });
        }
    }
    Ok(())
}

/// A truncated tree unravelling together with the original node behind each
/// tree node.
#[derive(Clone, Debug)]
pub struct Unravelling {
    pub tree: DecisionStructure,
    pub origin: Vec<NodeId>,
    pub depth: Vec<usize>,
}

/// Unravels `s` into the tree of direction strings of length ≤ `depth`. Cut
/// leaves are marked frontier and loop to themselves.
pub fn unravel(s: &DecisionStructure, game: &GameSpec, depth: usize) -> Unravelling {
    let nd = game.num_directions();
    let mut names = vec![String::new()];
    let mut origin = vec![s.initial];
    let mut depths = vec![0];
    let mut edges: Vec<Vec<NodeId>> = vec![Vec::new()];
    let mut layer = vec![0usize];
    for level in 0..depth {
        let mut next = Vec::new();
        for &t in &layer {
            for d in 0..nd {
                let id = origin.len();
                names.push(format!("{}{}", names[t], dir_token(game, d)));
                origin.push(s.succ(origin[t], d));
                depths.push(level + 1);
                edges.push(Vec::new());
                edges[t].push(id);
                next.push(id);
            }
        }
        layer = next;
    }
    let mut frontier = vec![false; origin.len()];
    for &t in &layer {
        edges[t] = vec![t; nd];
        frontier[t] = true;
    }
    for (i, n) in names.iter_mut().enumerate() {
        if n.is_empty() && i == 0 {
            *n = "e".to_string();
        }
    }
    let choice = origin.iter().map(|&v| s.choice[v]).collect();
    Unravelling {
        tree: DecisionStructure { names, choice, edges, initial: 0, frontier },
        origin,
        depth: depths,
    }
}

fn dir_token(game: &GameSpec, d: usize) -> String {
    let name = &game.directions[d];
    if name.chars().count() == 1 {
        name.clone()
    } else {
        format!("[{name}]")
    }
}

/// Player-private Moore machine over observation letters. States are
/// knowledge sets of `(node, observer state)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateMooreMachine {
    pub player: usize,
    pub states: Vec<BTreeSet<(NodeId, StateId)>>,
    pub output: Vec<usize>,
    pub transitions: BTreeMap<(usize, usize), usize>,
}

impl PrivateMooreMachine {
    /// Action prescribed after an observation sequence, if the sequence can
    /// occur on a followed history.
    pub fn action_after(&self, observations: &[usize]) -> Option<usize> {
        let mut s = 0;
        for &b in observations {
            s = *self.transitions.get(&(s, b))?;
        }
        Some(self.output[s])
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Subset construction of player `player`'s private machine.
pub fn project_private(
    s: &DecisionStructure,
    game: &GameSpec,
    player: usize,
) -> Result<PrivateMooreMachine, StructureError> {
    check_strategy(s, game).map_err(|v| StructureError::NonUniform(Box::new(v)))?;
    let m = &game.observers[player];
    let init: BTreeSet<(NodeId, StateId)> = [(s.initial, m.initial)].into();
    let mut index: BTreeMap<BTreeSet<(NodeId, StateId)>, usize> = BTreeMap::new();
    let mut states = vec![init.clone()];
    index.insert(init, 0);
    let mut transitions = BTreeMap::new();
    let mut i = 0;
    while i < states.len() {
        let mut succ: BTreeMap<usize, BTreeSet<(NodeId, StateId)>> = BTreeMap::new();
        for &(v, q) in &states[i] {
            for d in 0..game.num_directions() {
                let mv = game.move_index(Move::new(s.choice[v], d));
                let (q2, b) = m.step(q, mv);
                succ.entry(b).or_default().insert((s.succ(v, d), q2));
            }
        }
        for (b, set) in succ {
            let id = *index.entry(set.clone()).or_insert_with(|| {
                states.push(set);
                states.len() - 1
            });
            transitions.insert((i, b), id);
        }
        i += 1;
    }
    let output = states
        .iter()
        .map(|set| {
            let &(v, _) = set.iter().next().expect("knowledge sets are nonempty");
            game.action_of(s.choice[v], player)
        })
        .collect();
    Ok(PrivateMooreMachine { player, states, output, transitions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::run_mealy;

    fn prof(game: &GameSpec, a: &str) -> usize {
        game.profile_of(&[game.actions[0].iter().position(|x| x == a).unwrap()])
    }

    #[test]
    fn trace_examples() {
        let g = fixtures::blind_game();
        let s = DecisionStructure::constant(prof(&g, "a"), 2);
        let t = trace(&s, &History::empty());
        assert_eq!(t, Trace { path: vec![0], follows: true });
        let a = prof(&g, "a");
        let b = prof(&g, "b");
        let t = trace(&s, &History(vec![Move::new(a, 0), Move::new(a, 1)]));
        assert_eq!(t, Trace { path: vec![0, 0, 0], follows: true });
        let t = trace(&s, &History(vec![Move::new(b, 0)]));
        assert_eq!(t, Trace { path: vec![0, 0], follows: false });
    }

    /// Root plays a; on l goes to node 1, on r to node 2; both absorbing.
    fn three_node(g: &GameSpec, x: &str, y: &str) -> DecisionStructure {
        DecisionStructure::new(
            vec![prof(g, "a"), prof(g, x), prof(g, y)],
            vec![vec![1, 2], vec![1, 1], vec![2, 2]],
            0,
        )
    }

    #[test]
    fn full_observation_uniformity_is_identity_on_trees() {
        let g = fixtures::full_game();
        let s = unravel(&three_node(&g, "a", "b"), &g, 3).tree;
        let rel = compute_uniformity(&s, &g);
        for &(u, v) in &rel.per_player[0] {
            assert_eq!(u, v);
        }
        assert_eq!(rel.per_player[0].len(), s.len());
    }

    #[test]
    fn blind_relates_all_same_depth_nodes() {
        let g = fixtures::blind_game();
        let u = unravel(&three_node(&g, "a", "b"), &g, 2);
        let rel = compute_uniformity(&u.tree, &g);
        for v in 0..u.tree.len() {
            for w in 0..u.tree.len() {
                if u.depth[v] == u.depth[w] {
                    assert!(rel.related(0, v, w), "{v} {w}");
                }
            }
        }
        assert!(check_strategy(&u.tree, &g).is_err());
    }

    #[test]
    fn dmask_relates_direction_siblings() {
        // oracle: enumerate followed histories to depth 2 and compare outputs
        let g = fixtures::dmask_game();
        let s = three_node(&g, "a", "a");
        let rel = compute_uniformity(&s, &g);
        let hs = s.followed_histories(2);
        let mut expected = BTreeSet::new();
        for (h1, v1) in &hs {
            for (h2, v2) in &hs {
                let r1 = run_mealy(&g, &g.observers[0], h1).unwrap();
                let r2 = run_mealy(&g, &g.observers[0], h2).unwrap();
                if r1.observations == r2.observations {
                    expected.insert((*v1, *v2));
                }
            }
        }
        assert!(expected.contains(&(1, 2)));
        assert_eq!(rel.per_player[0], expected);
    }

    #[test]
    fn check_strategy_examples() {
        let g = fixtures::blind_game();
        assert!(check_strategy(&DecisionStructure::constant(prof(&g, "a"), 2), &g).is_ok());

        let s = three_node(&g, "b", "a");
        let v = check_strategy(&s, &g).unwrap_err();
        assert_eq!(v.player, 0);
        assert_eq!([v.left.min(v.right), v.left.max(v.right)], [1, 2]);

        let g = fixtures::dmask_game();
        let s = three_node(&g, "b", "a");
        let v = check_strategy(&s, &g).unwrap_err();
        let a = prof(&g, "a");
        let mut pair = [v.left_history.clone(), v.right_history.clone()];
        pair.sort();
        assert_eq!(pair, [History(vec![Move::new(a, 0)]), History(vec![Move::new(a, 1)])]);
        assert!(crate::game::indistinguishable(&g, &g.observers[0], &pair[0], &pair[1]).unwrap());
    }

    #[test]
    fn all_histories_mode_is_coarser() {
        let g = fixtures::dmask_game();
        let s = three_node(&g, "a", "b");
        let followed = compute_uniformity(&s, &g);
        let all = compute_uniformity_with(&s, &g, UniformityMode::AllHistories);
        assert!(followed.per_player[0].is_subset(&all.per_player[0]));
    }

    #[test]
    fn unravel_examples() {
        let g = fixtures::blind_game();
        let s = three_node(&g, "a", "b");
        let u = unravel(&s, &g, 0);
        assert_eq!(u.tree.len(), 1);
        assert_eq!(u.tree.choice[0], s.choice[0]);

        let c = DecisionStructure::constant(prof(&g, "a"), 2);
        let u = unravel(&c, &g, 2);
        assert_eq!(u.tree.len(), 7);
        assert!(u.tree.choice.iter().all(|&p| p == prof(&g, "a")));
        assert_eq!(u.tree.frontier.iter().filter(|&&f| f).count(), 4);

        let u = unravel(&c, &g, 3);
        assert_eq!(u.tree.len(), 15);
        assert!(u.tree.is_tree());
        assert!(!s.is_tree());
    }

    #[test]
    fn unravel_agrees_on_followed_histories() {
        let g = fixtures::dmask_game();
        let s = three_node(&g, "a", "b");
        let u = unravel(&s, &g, 3);
        let a: Vec<History> = s.followed_histories(3).into_iter().map(|x| x.0).collect();
        let b: Vec<History> = u.tree.followed_histories(3).into_iter().map(|x| x.0).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn project_examples() {
        let g = fixtures::dmask_game();
        let c = DecisionStructure::constant(prof(&g, "a"), 2);
        let m = project_private(&c, &g, 0).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.output, vec![0]);

        // full information: the machine mirrors the structure
        let g = fixtures::full_game();
        let s = three_node(&g, "a", "b");
        let m = project_private(&s, &g, 0).unwrap();
        assert_eq!(m.len(), 3);

        // two-node dmask strategy: root plays a, everything else loops on node 1
        let g = fixtures::dmask_game();
        let s = DecisionStructure::new(vec![prof(&g, "a"), prof(&g, "a")], vec![vec![1, 1], vec![1, 1]], 0);
        let m = project_private(&s, &g, 0).unwrap();
        let sets: Vec<Vec<NodeId>> = m.states.iter().map(|k| k.iter().map(|p| p.0).collect()).collect();
        assert_eq!(sets, vec![vec![0], vec![1]]);

        let bad = three_node(&g, "b", "a");
        assert!(matches!(project_private(&bad, &g, 0), Err(StructureError::NonUniform(_))));
    }

    #[test]
    fn projection_round_trip_to_depth_five() {
        for (g, s) in [
            (fixtures::full_game(), three_node(&fixtures::full_game(), "a", "b")),
            (fixtures::dmask_game(), three_node(&fixtures::dmask_game(), "b", "b")),
            (fixtures::blind_game(), DecisionStructure::constant(0, 2)),
        ] {
            let machines: Vec<_> = (0..g.players()).map(|i| project_private(&s, &g, i).unwrap()).collect();
            for (h, v) in s.followed_histories(5) {
                let mut acts = Vec::new();
                for (i, m) in machines.iter().enumerate() {
                    let obs = run_mealy(&g, &g.observers[i], &h).unwrap().observations;
                    acts.push(m.action_after(&obs).unwrap());
                }
                assert_eq!(g.profile_of(&acts), s.choice[v]);
            }
        }
    }
}
