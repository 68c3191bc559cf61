//! Retractions: label-preserving node maps whose image is again a uniform
//! strategy, their composition, and compaction of isomorphic d-states.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::annotation::{check_annotation, AnnotatedStrategy, AnnotationError};
use crate::dstates::{classify, ClassReport, DStateError};
use crate::game::{GameSpec, ParityTreeAutomaton};
use crate::progress::{check_measure, compare_lex, MeasureError, ProgressMeasure};
use crate::strategy::{check_strategy, DecisionStructure, NodeId, UniformityViolation};

/// A total map on the nodes of a structure, `map[v] = h(v)`.
pub type NodeMap = Vec<NodeId>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RetractionError {
    #[error("map has {found} entries, structure has {expected} nodes")]
    MapLength { expected: usize, found: usize },
    #[error("node {node} is mapped to {target}, which does not exist")]
    OutOfRange { node: NodeId, target: NodeId },
    #[error("node {node} and its image {target} carry different labels")]
    LabelChanged { node: NodeId, target: NodeId },
    #[error("the image is not uniform: {0}")]
    NotUniform(UniformityViolation),
    #[error("the input annotation is invalid: {0}")]
    Annotation(AnnotationError),
    #[error("measure of node {node} is below that of its image {target} at priority {priority}")]
    NotMonotone { node: NodeId, target: NodeId, priority: u32 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("maps cannot be composed: {0}")]
    NotComposable(String),
    #[error(transparent)]
    DState(#[from] DStateError),
}

/// The image `h(S)`: nodes reachable from `h(v_ε)` under `u -d-> E(h(u), d)`,
/// acting as `h(u)`. Returns the structure and, for each of its nodes, the
/// original node it stands for. Node order follows the original order.
pub fn image(s: &DecisionStructure, h: &[NodeId]) -> (DecisionStructure, Vec<NodeId>) {
    let n = s.len();
    let mut seen = vec![false; n];
    let start = h[s.initial];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &w in &s.edges[h[u]] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let origin: Vec<NodeId> = (0..n).filter(|&v| seen[v]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in origin.iter().enumerate() {
        index[v] = i;
    }
    let structure = DecisionStructure {
        names: origin.iter().map(|&u| s.names[u].clone()).collect(),
        choice: origin.iter().map(|&u| s.choice[h[u]]).collect(),
        edges: origin.iter().map(|&u| s.edges[h[u]].iter().map(|&w| index[w]).collect()).collect(),
        initial: index[start],
        frontier: origin.iter().map(|&u| s.is_frontier(h[u])).collect(),
    };
    (structure, origin)
}

/// Image with the labels of the original nodes.
pub fn image_annotated(a: &AnnotatedStrategy, h: &[NodeId]) -> (AnnotatedStrategy, Vec<NodeId>) {
    let (strategy, origin) = image(&a.strategy, h);
    let labels = origin.iter().map(|&u| a.labels[u].clone()).collect();
    (AnnotatedStrategy { strategy, labels }, origin)
}

fn check_shape(a: &AnnotatedStrategy, h: &[NodeId]) -> Result<(), RetractionError> {
    let n = a.len();
    if h.len() != n {
        return Err(RetractionError::MapLength { expected: n, found: h.len() });
    }
    if let Some(v) = (0..n).find(|&v| h[v] >= n) {
        return Err(RetractionError::OutOfRange { node: v, target: h[v] });
    }
    Ok(())
}

/// Checks that `h` preserves labels and has a uniform image. The image of a
/// valid annotation under such a map is again a valid annotation; this is
/// asserted on success.
pub fn check_retraction(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    h: &[NodeId],
) -> Result<(), RetractionError> {
    check_shape(a, h)?;
    check_annotation(a, game, spec).map_err(RetractionError::Annotation)?;
    if let Some(v) = (0..a.len()).find(|&v| a.labels[v] != a.labels[h[v]]) {
        return Err(RetractionError::LabelChanged { node: v, target: h[v] });
    }
    let (img, _) = image_annotated(a, h);
    check_strategy(&img.strategy, game).map_err(RetractionError::NotUniform)?;
    assert_eq!(check_annotation(&img, game, spec), Ok(()), "retract of a valid annotation must be annotated");
    Ok(())
}

/// `μ(v) ⪰_k μ(h(v))` for every node, with `k` the priority of `v`.
pub fn check_monotone(
    a: &AnnotatedStrategy,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
    h: &[NodeId],
) -> Result<(), RetractionError> {
    check_shape(a, h)?;
    if mu.len() != a.len() {
        return Err(MeasureError::NodeCount { expected: a.len(), found: mu.len() }.into());
    }
    for v in 0..a.len() {
        let k = a.priority(spec, v);
        if compare_lex(&mu[v], &mu[h[v]], k as usize)? == Ordering::Less {
            return Err(RetractionError::NotMonotone { node: v, target: h[v], priority: k });
        }
    }
    Ok(())
}

/// A retract together with the restricted measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Retract {
    pub annotated: AnnotatedStrategy,
    /// For each retract node, the input node it stands for.
    pub origin: Vec<NodeId>,
    pub measure: ProgressMeasure,
}

/// Applies a checked, monotone retraction. The restricted measure is again a
/// progress measure of the retract (asserted).
pub fn retract(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
    h: &[NodeId],
) -> Result<Retract, RetractionError> {
    check_measure(a, spec, mu)?;
    check_retraction(a, game, spec, h)?;
    check_monotone(a, spec, mu, h)?;
    let (annotated, origin) = image_annotated(a, h);
    let measure: ProgressMeasure = origin.iter().map(|&u| mu[u].clone()).collect();
    assert_eq!(check_measure(&annotated, spec, &measure), Ok(()), "monotone retraction must keep the measure");
    Ok(Retract { annotated, origin, measure })
}

/// Composite of `g` on `S` with `h` on the retract `g(S)`, where `h` is given
/// in the retract's own node indices. The result `c` has the second retract
/// as its image: `c(u) = g(h(u))` on nodes of `g(S)`, `c(v_ε) = h(g(v_ε))`
/// and `c = g` elsewhere. When `v_ε` is itself a node of the second retract
/// and the two requirements on it differ, `c = g ∘ h` is returned instead if
/// it passes both checks; its image may then differ from the second retract.
pub fn compose(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
    g: &[NodeId],
    h: &[NodeId],
) -> Result<NodeMap, RetractionError> {
    let first = retract(a, game, spec, mu, g)?;
    let second = retract(&first.annotated, game, spec, &first.measure, h)?;
    let origin = &first.origin;
    let mut local = vec![usize::MAX; a.len()];
    for (i, &u) in origin.iter().enumerate() {
        local[u] = i;
    }
    let h_orig = |u: NodeId| if local[u] == usize::MAX { u } else { origin[h[local[u]]] };
    let init = a.strategy.initial;
    let mut c: NodeMap = g.to_vec();
    for &u in origin {
        c[u] = g[h_orig(u)];
    }
    let start = h_orig(g[init]);
    let init_in_second = second.origin.iter().any(|&i| origin[i] == init);
    if !init_in_second || c[init] == start {
        c[init] = start;
        let (ci, co) = image(&a.strategy, &c);
        let (hi, ho) = image(&first.annotated.strategy, h);
        let ho: Vec<NodeId> = ho.iter().map(|&i| origin[i]).collect();
        if ci.edges != hi.edges || ci.choice != hi.choice || ci.initial != hi.initial || co != ho {
            return Err(RetractionError::NotComposable("the composite image differs from the second retract".into()));
        }
    } else {
        c = (0..a.len()).map(|u| g[h_orig(u)]).collect();
    }
    check_retraction(a, game, spec, &c)?;
    check_monotone(a, spec, mu, &c)?;
    Ok(c)
}

fn identity(n: usize) -> NodeMap {
    (0..n).collect()
}

/// Folds isomorphic members of one ≅-class onto minimal members. Members are
/// compared pointwise through the least isomorphism from the first member:
/// `x ⪰ y` if every node of `x` dominates its counterpart in `y` at its own
/// priority. Each member maps to the first minimal member below it; members
/// with equal measures fold onto the earliest one. If folding the whole class
/// at once fails the checks, members still reachable in the current image
/// are added in batches, halved on failure, and kept only when the map stays
/// a retraction without creating new classes.
pub fn compact_class(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
    report: &ClassReport,
    class: usize,
) -> Result<NodeMap, RetractionError> {
    let members = &report.classes[class];
    let n = a.len();
    if members.len() < 2 {
        return Ok(identity(n));
    }
    let base = &report.dstates[members[0]];
    let mut nodes_of: Vec<Vec<NodeId>> = Vec::with_capacity(members.len());
    for &m in members {
        let k = &report.dstates[m];
        let iso = crate::dstates::isomorphic(base, k)?.expect("class members are isomorphic");
        nodes_of.push(iso.iter().map(|&j| k.nodes[j]).collect());
    }
    let geq = |x: usize, y: usize| -> Result<bool, MeasureError> {
        for (&u, &w) in nodes_of[x].iter().zip(&nodes_of[y]) {
            let k = a.priority(spec, u) as usize;
            if compare_lex(&mu[u], &mu[w], k)? == Ordering::Less {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let c = members.len();
    let mut ge = vec![vec![false; c]; c];
    for x in 0..c {
        for y in 0..c {
            ge[x][y] = geq(x, y)?;
        }
    }
    let minimal: Vec<usize> = (0..c)
        .filter(|&y| (0..c).all(|z| !ge[y][z] || ge[z][y]))
        .filter(|&y| !(0..y).any(|z| ge[y][z] && ge[z][y]))
        .collect();
    let target: Vec<usize> = (0..c).map(|x| *minimal.iter().find(|&&y| ge[x][y]).unwrap_or(&x)).collect();

    let apply = |h: &mut NodeMap, x: usize| {
        for (&u, &w) in nodes_of[x].iter().zip(&nodes_of[target[x]]) {
            h[u] = w;
        }
    };
    let acceptable = |h: &NodeMap| -> Result<bool, RetractionError> {
        match check_retraction(a, game, spec, h) {
            Ok(()) => {}
            Err(RetractionError::LabelChanged { .. } | RetractionError::NotUniform(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
        let (img, _) = image_annotated(a, h);
        let after = classify(&img, game)?;
        for cl in &after.classes {
            if !report.contains_type(&after.dstates[cl[0]])? {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut all = identity(n);
    for x in 0..c {
        apply(&mut all, x);
    }
    if all == identity(n) || acceptable(&all)? {
        return Ok(all);
    }
    let mut h = identity(n);
    let mut stack: Vec<Vec<usize>> = vec![(0..c).filter(|&x| target[x] != x).collect()];
    while let Some(batch) = stack.pop() {
        let (_, origin) = image(&a.strategy, &h);
        let mut reached = vec![false; n];
        origin.iter().for_each(|&u| reached[u] = true);
        let live: Vec<usize> = batch.into_iter().filter(|&x| nodes_of[x].iter().any(|&u| reached[u])).collect();
        if live.is_empty() {
            continue;
        }
        let mut trial = h.clone();
        live.iter().for_each(|&x| apply(&mut trial, x));
        if acceptable(&trial)? {
            h = trial;
        } else if live.len() > 1 {
            let (first, second) = live.split_at(live.len() / 2);
            stack.push(second.to_vec());
            stack.push(first.to_vec());
        }
    }
    Ok(h)
}

/// Outcome of repeated compaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compaction {
    pub result: Retract,
    /// Number of class folds applied.
    pub folds: usize,
}

fn progress_key(a: &AnnotatedStrategy) -> (usize, usize) {
    let frontier = (0..a.len()).filter(|&v| a.strategy.is_frontier(v)).count();
    (frontier, a.len())
}

fn chain(outer: &[NodeId], inner: &[NodeId]) -> Vec<NodeId> {
    inner.iter().map(|&i| outer[i]).collect()
}

/// Compacts every ≅-class until no fold reduces the number of frontier
/// nodes or of nodes.
pub fn compact_all(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
) -> Result<Compaction, RetractionError> {
    check_measure(a, spec, mu)?;
    let (pruned, keep) = a.strategy.pruned();
    let mut cur = Retract {
        annotated: AnnotatedStrategy { strategy: pruned, labels: keep.iter().map(|&v| a.labels[v].clone()).collect() },
        measure: keep.iter().map(|&v| mu[v].clone()).collect(),
        origin: keep,
    };
    let mut folds = 0;
    'outer: loop {
        let report = classify(&cur.annotated, game)?;
        for class in 0..report.classes.len() {
            let h = compact_class(&cur.annotated, game, spec, &cur.measure, &report, class)?;
            if h == identity(cur.annotated.len()) {
                continue;
            }
            let next = retract(&cur.annotated, game, spec, &cur.measure, &h)?;
            if progress_key(&next.annotated) < progress_key(&cur.annotated) {
                cur = Retract { origin: chain(&cur.origin, &next.origin), ..next };
                folds += 1;
                continue 'outer;
            }
        }
        return Ok(Compaction { result: cur, folds });
    }
}

/// Maps every node to the measure-least node with the same label inside its
/// d-state (ties to the smaller index).
pub fn horizontal_fold(a: &AnnotatedStrategy, game: &GameSpec, mu: &[Vec<u32>]) -> NodeMap {
    let mut h = identity(a.len());
    for k in crate::dstates::compute_dstates(a, game) {
        let mut best: BTreeMap<&crate::annotation::Label, NodeId> = BTreeMap::new();
        for &v in &k.nodes {
            let e = best.entry(&a.labels[v]).or_insert(v);
            if mu[v] < mu[*e] {
                *e = v;
            }
        }
        for &v in &k.nodes {
            h[v] = best[&a.labels[v]];
        }
    }
    h
}

/// [`horizontal_fold`] if it is a retraction, otherwise the largest prefix
/// of per-d-state folds (in d-state order) that keeps it one.
pub fn horizontal_retract(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
) -> Result<Retract, RetractionError> {
    let full = horizontal_fold(a, game, mu);
    match retract(a, game, spec, mu, &full) {
        Ok(r) => return Ok(r),
        Err(RetractionError::LabelChanged { .. } | RetractionError::NotUniform(_)) => {}
        Err(e) => return Err(e),
    }
    let mut h = identity(a.len());
    for k in crate::dstates::compute_dstates(a, game) {
        let mut trial = h.clone();
        for &v in &k.nodes {
            trial[v] = full[v];
        }
        if check_retraction(a, game, spec, &trial).is_ok() {
            h = trial;
        }
    }
    retract(a, game, spec, mu, &h)
}

/// Coarsest partition of the reachable nodes into blocks with equal label,
/// action and frontier flag whose direction successors lie in equal blocks.
/// Returns the quotient and the block of each input node (`usize::MAX` for
/// unreachable ones). Blocks are ordered by least member.
pub fn minimize(a: &AnnotatedStrategy) -> (AnnotatedStrategy, Vec<usize>) {
    let s = &a.strategy;
    let (strategy, block) = s.quotient_by(|v| (a.labels[v].clone(), s.choice[v], s.is_frontier(v)));
    let mut labels = vec![None; strategy.len()];
    for v in 0..s.len() {
        if block[v] != usize::MAX && labels[block[v]].is_none() {
            labels[block[v]] = Some(a.labels[v].clone());
        }
    }
    (AnnotatedStrategy { strategy, labels: labels.into_iter().map(Option::unwrap).collect() }, block)
}

/// Horizontal folds, class compaction and the final quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pipeline {
    pub horizontal: Retract,
    pub compacted: Compaction,
    pub minimized: AnnotatedStrategy,
}

pub fn compaction_pipeline(
    a: &AnnotatedStrategy,
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
    mu: &[Vec<u32>],
) -> Result<Pipeline, RetractionError> {
    let horizontal = horizontal_retract(a, game, spec, mu)?;
    let compacted = compact_all(&horizontal.annotated, game, spec, &horizontal.measure)?;
    let origin = chain(&horizontal.origin, &compacted.result.origin);
    let compacted = Compaction { result: Retract { origin, ..compacted.result }, ..compacted };
    let (minimized, _) = minimize(&compacted.result.annotated);
    Ok(Pipeline { horizontal, compacted, minimized })
}
