//! Distributed states: maximal connected components of the union of the
//! uniformity relations, their isomorphism classes and size parameters.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use thiserror::Error;

use crate::annotation::{AnnotatedStrategy, Label};
use crate::game::{GameSpec, Move};
use crate::strategy::{compute_uniformity, DecisionStructure, NodeId, UniformityRelation};

/// Components larger than this are rejected by the isomorphism search.
pub const DEFAULT_NODE_BUDGET: usize = 64;
const STEP_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DStateError {
    #[error("d-state with {size} nodes exceeds the isomorphism bound {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("isomorphism search exceeded {0} steps")]
    SearchBudget(usize),
}

/// A component with its restricted structure. Local index `i` stands for
/// `nodes[i]`; edges out of frontier nodes are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DState {
    pub nodes: Vec<NodeId>,
    pub labels: Vec<Label>,
    pub choice: Vec<usize>,
    pub frontier: Vec<bool>,
    /// `relations[i][u][v]` iff `nodes[u] ≈ⁱ nodes[v]`.
    pub relations: Vec<Vec<Vec<bool>>>,
    /// `internal[u][d]`: local target of the `d`-edge when it stays inside.
    pub internal: Vec<Vec<Option<usize>>>,
    /// Edges leaving the component: `(local source, direction, target)`.
    pub exits: Vec<(usize, usize, NodeId)>,
}

impl DState {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn local(&self, v: NodeId) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// D-states of the reachable part, ordered by least node.
pub fn compute_dstates(a: &AnnotatedStrategy, game: &GameSpec) -> Vec<DState> {
    let rel = compute_uniformity(&a.strategy, game);
    compute_dstates_with(a, &rel)
}

pub fn compute_dstates_with(a: &AnnotatedStrategy, rel: &UniformityRelation) -> Vec<DState> {
    let s = &a.strategy;
    let n = s.len();
    let reach = s.reachable();
    let mut uf = UnionFind::new(n);
    for r in &rel.per_player {
        for &(u, v) in r {
            uf.union(u, v);
        }
    }
    let mut groups: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for v in 0..n {
        if reach[v] {
            let root = uf.find(v);
            groups.entry(root).or_default().push(v);
        }
    }
    let mut out: Vec<DState> = groups.into_values().map(|nodes| build_dstate(s, &a.labels, rel, nodes)).collect();
    out.sort_by_key(|k| k.nodes[0]);
    out
}

fn build_dstate(s: &DecisionStructure, labels: &[Label], rel: &UniformityRelation, nodes: Vec<NodeId>) -> DState {
    let m = nodes.len();
    let local: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let relations = rel
        .per_player
        .iter()
        .map(|r| {
            let mut mat = vec![vec![false; m]; m];
            for (i, &u) in nodes.iter().enumerate() {
                for (j, &v) in nodes.iter().enumerate() {
                    mat[i][j] = r.contains(&(u, v));
                }
            }
            mat
        })
        .collect();
    let mut internal = vec![Vec::new(); m];
    let mut exits = Vec::new();
    for (i, &v) in nodes.iter().enumerate() {
        if s.is_frontier(v) {
            internal[i] = vec![None; s.edges[v].len()];
            continue;
        }
        for (d, &w) in s.edges[v].iter().enumerate() {
            match local.get(&w) {
                Some(&j) => internal[i].push(Some(j)),
                None => {
                    internal[i].push(None);
                    exits.push((i, d, w));
                }
            }
        }
    }
    DState {
        labels: nodes.iter().map(|&v| labels[v].clone()).collect(),
        choice: nodes.iter().map(|&v| s.choice[v]).collect(),
        frontier: nodes.iter().map(|&v| s.is_frontier(v)).collect(),
        relations,
        internal,
        exits,
        nodes,
    }
}

/// Colour refinement over labels, actions, internal edges and relations.
/// Colours are hashes, so they compare across d-states.
fn refine(k: &DState) -> Vec<u64> {
    let m = k.len();
    let mut sig: Vec<u64> = (0..m).map(|u| hash_of(&(&k.labels[u], k.choice[u]))).collect();
    for _ in 0..m.min(8) {
        let next: Vec<u64> = (0..m)
            .map(|u| {
                let edges: Vec<Option<u64>> = k.internal[u].iter().map(|t| t.map(|j| sig[j])).collect();
                let mut rels: Vec<(usize, u64)> = Vec::new();
                for (i, mat) in k.relations.iter().enumerate() {
                    for v in 0..m {
                        if mat[u][v] {
                            rels.push((i, sig[v]));
                        }
                    }
                }
                rels.sort_unstable();
                hash_of(&(sig[u], edges, rels))
            })
            .collect();
        let stable = distinct(&next) == distinct(&sig);
        sig = next;
        if stable {
            break;
        }
    }
    sig
}

fn distinct(v: &[u64]) -> usize {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

fn hash_of<T: Hash>(x: &T) -> u64 {
    use std::hash::{DefaultHasher, Hasher};
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

/// Invariant used to skip isomorphism tests between d-states that differ in
/// refined colour counts.
pub fn signature(k: &DState) -> u64 {
    let mut c = refine(k);
    c.sort_unstable();
    hash_of(&c)
}

/// Lexicographically least isomorphism `κ₁ → κ₂` (as local indices)
/// preserving labels, actions, internal direction-labelled edges and every
/// ≈ⁱ, or `None`.
pub fn isomorphic(k1: &DState, k2: &DState) -> Result<Option<Vec<usize>>, DStateError> {
    isomorphic_with_budget(k1, k2, DEFAULT_NODE_BUDGET)
}

pub fn isomorphic_with_budget(k1: &DState, k2: &DState, bound: usize) -> Result<Option<Vec<usize>>, DStateError> {
    for k in [k1, k2] {
        if k.len() > bound {
            return Err(DStateError::TooLarge { size: k.len(), bound });
        }
    }
    if k1.len() != k2.len() || k1.relations.len() != k2.relations.len() {
        return Ok(None);
    }
    let m = k1.len();
    let (c1, c2) = (refine(k1), refine(k2));
    let mut s1 = c1.clone();
    let mut s2 = c2.clone();
    s1.sort_unstable();
    s2.sort_unstable();
    if s1 != s2 {
        return Ok(None);
    }
    let candidates: Vec<Vec<usize>> = (0..m).map(|u| (0..m).filter(|&v| c2[v] == c1[u]).collect()).collect();
    let mut map = vec![usize::MAX; m];
    let mut used = vec![false; m];
    let mut steps = 0usize;
    if search(k1, k2, &candidates, 0, &mut map, &mut used, &mut steps)? {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

fn consistent(k1: &DState, k2: &DState, map: &[usize], u: usize, v: usize) -> bool {
    if k1.labels[u] != k2.labels[v] || k1.choice[u] != k2.choice[v] {
        return false;
    }
    for (mat1, mat2) in k1.relations.iter().zip(&k2.relations) {
        if mat1[u][u] != mat2[v][v] {
            return false;
        }
    }
    for (d, t) in k1.internal[u].iter().enumerate() {
        let t2 = k2.internal[v].get(d).copied().flatten();
        match (t, t2) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                if *a == u && b != v {
                    return false;
                }
                if map[*a] != usize::MAX && map[*a] != b {
                    return false;
                }
            }
            _ => return false,
        }
    }
    for w in 0..u {
        let x = map[w];
        for (mat1, mat2) in k1.relations.iter().zip(&k2.relations) {
            if mat1[u][w] != mat2[v][x] || mat1[w][u] != mat2[x][v] {
                return false;
            }
        }
        for (d, t) in k1.internal[w].iter().enumerate() {
            if *t == Some(u) && k2.internal[x][d] != Some(v) {
                return false;
            }
        }
    }
    true
}

fn search(
    k1: &DState,
    k2: &DState,
    candidates: &[Vec<usize>],
    u: usize,
    map: &mut [usize],
    used: &mut [bool],
    steps: &mut usize,
) -> Result<bool, DStateError> {
    if u == map.len() {
        return Ok(true);
    }
    for &v in &candidates[u] {
        *steps += 1;
        if *steps > STEP_BUDGET {
            return Err(DStateError::SearchBudget(STEP_BUDGET));
        }
        if used[v] || !consistent(k1, k2, map, u, v) {
            continue;
        }
        map[u] = v;
        used[v] = true;
        if search(k1, k2, candidates, u + 1, map, used, steps)? {
            return Ok(true);
        }
        map[u] = usize::MAX;
        used[v] = false;
    }
    Ok(false)
}

/// Partition of the d-states into isomorphism classes and the three size
/// parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub dstates: Vec<DState>,
    /// Indices into `dstates`, each class in ascending order; classes ordered
    /// by their first member.
    pub classes: Vec<Vec<usize>>,
}

impl ClassReport {
    /// Number of isomorphism classes.
    pub fn index(&self) -> usize {
        self.classes.len()
    }

    pub fn max_dstate_size(&self) -> usize {
        self.dstates.iter().map(DState::len).max().unwrap_or(0)
    }

    pub fn max_class_size(&self) -> usize {
        self.classes.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn class_of(&self, dstate: usize) -> usize {
        self.classes.iter().position(|c| c.contains(&dstate)).expect("every d-state has a class")
    }

    /// Class containing node `v`.
    pub fn class_of_node(&self, v: NodeId) -> Option<usize> {
        let k = self.dstates.iter().position(|k| k.local(v).is_some())?;
        Some(self.class_of(k))
    }

    /// Whether some class of `self` has a representative isomorphic to `k`.
    pub fn contains_type(&self, k: &DState) -> Result<bool, DStateError> {
        for c in &self.classes {
            if isomorphic(&self.dstates[c[0]], k)?.is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

pub fn classify(a: &AnnotatedStrategy, game: &GameSpec) -> Result<ClassReport, DStateError> {
    classify_dstates(compute_dstates(a, game))
}

pub fn classify_dstates(dstates: Vec<DState>) -> Result<ClassReport, DStateError> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut by_sig: HashMap<(usize, u64), Vec<usize>> = HashMap::new();
    for (i, k) in dstates.iter().enumerate() {
        if k.len() > DEFAULT_NODE_BUDGET {
            return Err(DStateError::TooLarge { size: k.len(), bound: DEFAULT_NODE_BUDGET });
        }
        let key = (k.len(), signature(k));
        let bucket = by_sig.entry(key).or_default();
        let mut placed = false;
        for &c in bucket.iter() {
            if isomorphic(&dstates[classes[c][0]], k)?.is_some() {
                classes[c].push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![i]);
            bucket.push(classes.len() - 1);
        }
    }
    Ok(ClassReport { dstates, classes })
}

/// Per-level statistics of d-states on a tree of followed histories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelStats {
    pub depth: usize,
    pub nodes: usize,
    pub dstates: usize,
    pub max_size: usize,
}

/// D-state sizes level by level on the unravelling of `s`, without building
/// the tree's uniformity product. On a tree, two same-depth nodes are
/// ≈ⁱ-related iff their histories produce the same observations for player
/// `i`, so each node carries one observation-class id per player and
/// components come from a union-find over equal ids.
pub fn tree_level_dstates<S: Clone, O: Hash + Eq>(
    s: &DecisionStructure,
    game: &GameSpec,
    initial: Vec<S>,
    depth: usize,
    step: impl Fn(usize, &S, usize) -> (S, O),
) -> Vec<LevelStats> {
    let n = initial.len();
    // (structure node, observer states, class id per player)
    let mut layer: Vec<(NodeId, Vec<S>, Vec<u32>)> = vec![(s.initial, initial, vec![0; n])];
    let mut out = vec![LevelStats { depth: 0, nodes: 1, dstates: 1, max_size: 1 }];
    for level in 1..=depth {
        let mut ids: Vec<HashMap<(u32, O), u32>> = (0..n).map(|_| HashMap::new()).collect();
        let mut next = Vec::with_capacity(layer.len() * game.num_directions());
        for (v, states, classes) in &layer {
            for d in 0..game.num_directions() {
                let mv = game.move_index(Move::new(s.choice[*v], d));
                let mut ns = Vec::with_capacity(n);
                let mut nc = Vec::with_capacity(n);
                for i in 0..n {
                    let (q, o) = step(i, &states[i], mv);
                    let fresh = ids[i].len() as u32;
                    nc.push(*ids[i].entry((classes[i], o)).or_insert(fresh));
                    ns.push(q);
                }
                next.push((s.succ(*v, d), ns, nc));
            }
        }
        let mut uf = UnionFind::new(next.len());
        for i in 0..n {
            let mut first: HashMap<u32, usize> = HashMap::new();
            for (x, (_, _, c)) in next.iter().enumerate() {
                match first.get(&c[i]) {
                    Some(&y) => uf.union(x, y),
                    None => {
                        first.insert(c[i], x);
                    }
                }
            }
        }
        let mut sizes: HashMap<usize, usize> = HashMap::new();
        for x in 0..next.len() {
            *sizes.entry(uf.find(x)).or_default() += 1;
        }
        out.push(LevelStats {
            depth: level,
            nodes: next.len(),
            dstates: sizes.len(),
            max_size: sizes.values().copied().max().unwrap_or(0),
        });
        layer = next;
    }
    out
}

/// [`tree_level_dstates`] with the game's own observers.
pub fn tree_level_dstates_mealy(s: &DecisionStructure, game: &GameSpec, depth: usize) -> Vec<LevelStats> {
    let init = game.observers.iter().map(|m| m.initial).collect();
    tree_level_dstates(s, game, init, depth, |i, &q, mv| game.observers[i].step(q, mv))
}
