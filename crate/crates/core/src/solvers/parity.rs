//! Two-player parity games with the min-parity condition, solved with small
//! progress measures.
//!
//! The protagonist ("even") wins a play when the least priority occurring
//! infinitely often is even. Positions without moves are totalized: a stuck
//! protagonist loses, a stuck antagonist loses.

use std::cmp::Ordering;
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Owner {
    Even,
    Odd,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParityArena {
    pub names: Vec<String>,
    pub owner: Vec<Owner>,
    pub priority: Vec<u32>,
    pub moves: Vec<Vec<usize>>,
    pub initial: usize,
}

impl ParityArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn add_position(&mut self, name: impl Into<String>, owner: Owner, priority: u32) -> usize {
        self.names.push(name.into());
        self.owner.push(owner);
        self.priority.push(priority);
        self.moves.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn add_move(&mut self, from: usize, to: usize) {
        if !self.moves[from].contains(&to) {
            self.moves[from].push(to);
        }
    }

    /// Copy in which every position has a move. Dead ends are sent to fresh
    /// sink positions that are losing for their owner.
    pub fn totalized(&self) -> ParityArena {
        let mut a = self.clone();
        let mut lose_even = None;
        let mut lose_odd = None;
        for v in 0..self.len() {
            if !a.moves[v].is_empty() {
                continue;
            }
            let sink = match a.owner[v] {
                Owner::Even => *lose_even.get_or_insert_with(|| {
                    let s = a.add_position("⊥even", Owner::Even, 1);
                    a.moves[s].push(s);
                    s
                }),
                Owner::Odd => *lose_odd.get_or_insert_with(|| {
                    let s = a.add_position("⊥odd", Owner::Even, 0);
                    a.moves[s].push(s);
                    s
                }),
            };
            a.moves[v].push(sink);
        }
        a
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (v, ms) in self.moves.iter().enumerate() {
            for &w in ms {
                pred[w].push(v);
            }
        }
        pred
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }
}

/// A small progress measure value; `None` is ⊤.
pub type Measure = Option<Vec<u32>>;

/// Winning regions, a positional protagonist strategy on its winning region,
/// and the progress measure certifying both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParitySolution {
    pub even_wins: Vec<bool>,
    pub strategy: Vec<Option<usize>>,
    pub measure: Vec<Measure>,
}

impl ParitySolution {
    pub fn initial_won(&self, arena: &ParityArena) -> bool {
        self.even_wins[arena.initial]
    }
}

fn lex(a: &Measure, b: &Measure) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

/// Least measure `m` with `m ⪰_p w` (even `p`) or `m ≻_p w` (odd `p`).
fn prog(w: &Measure, p: usize, bounds: &[u32]) -> Measure {
    let w = w.as_ref()?;
    let mut m = vec![0; w.len()];
    m[..=p].copy_from_slice(&w[..=p]);
    if p.is_multiple_of(2) {
        return Some(m);
    }
    let mut j = p as isize;
    while j >= 1 {
        let ju = j as usize;
        if ju % 2 == 1 && m[ju] < bounds[ju] {
            m[ju] += 1;
            for x in &mut m[ju + 1..=p] {
                *x = 0;
            }
            return Some(m);
        }
        j -= 1;
    }
    None
}

/// Solves a finite parity arena. Arenas with dead ends are totalized first;
/// the returned vectors cover only the original positions.
pub fn solve_parity(arena: &ParityArena) -> ParitySolution {
    let n0 = arena.len();
    let a = arena.totalized();
    let n = a.len();
    let r = a.max_priority() as usize + 1;
    let mut bounds = vec![0u32; r];
    for &p in &a.priority {
        if p % 2 == 1 {
            bounds[p as usize] += 1;
        }
    }
    let pred = a.predecessors();
    // Odd's region sits at the top of the lattice in the least fixpoint;
    // seeding it there skips the slow climb.
    let regions = winning_regions(&a, &pred);
    let mut mu: Vec<Measure> = regions.iter().map(|&even| even.then(|| vec![0; r])).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| regions[v]).collect();
    let mut queued = regions.clone();

    let best = |mu: &[Measure], v: usize| -> Measure {
        let p = a.priority[v] as usize;
        let mut vals = a.moves[v].iter().map(|&w| prog(&mu[w], p, &bounds));
        let first = vals.next().expect("totalized");
        vals.fold(first, |acc, x| {
            let keep_acc = match a.owner[v] {
                Owner::Even => lex(&acc, &x) != Ordering::Greater,
                Owner::Odd => lex(&acc, &x) != Ordering::Less,
            };
            if keep_acc { acc } else { x }
        })
    };

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let cand = best(&mu, v);
        if lex(&cand, &mu[v]) == Ordering::Greater {
            mu[v] = cand;
            for &u in &pred[v] {
                if !queued[u] {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }

    let even_wins: Vec<bool> = mu.iter().map(Option::is_some).collect();
    let strategy = (0..n0)
        .map(|v| {
            if a.owner[v] != Owner::Even || !even_wins[v] {
                return None;
            }
            let p = a.priority[v] as usize;
            let mut best_w = None;
            let mut best_m: Measure = None;
            for &w in &a.moves[v] {
                let m = prog(&mu[w], p, &bounds);
                if best_w.is_none() || lex(&m, &best_m) == Ordering::Less {
                    best_w = Some(w);
                    best_m = m;
                }
            }
            best_w.filter(|&w| w < n0)
        })
        .collect();
    ParitySolution {
        even_wins: even_wins[..n0].to_vec(),
        strategy,
        measure: mu[..n0].to_vec(),
    }
}

/// Positions of `owner`'s attractor to `target` inside `alive`.
fn attractor(a: &ParityArena, pred: &[Vec<usize>], alive: &[bool], target: &[usize], owner: Owner) -> Vec<bool> {
    let mut attr = vec![false; a.len()];
    let mut left: Vec<usize> =
        (0..a.len()).map(|v| if alive[v] { a.moves[v].iter().filter(|&&w| alive[w]).count() } else { 0 }).collect();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &t in target {
        if alive[t] && !attr[t] {
            attr[t] = true;
            queue.push_back(t);
        }
    }
    while let Some(w) = queue.pop_front() {
        for &v in &pred[w] {
            if !alive[v] || attr[v] {
                continue;
            }
            let pulled = if a.owner[v] == owner {
                true
            } else {
                left[v] -= 1;
                left[v] == 0
            };
            if pulled {
                attr[v] = true;
                queue.push_back(v);
            }
        }
    }
    attr
}

/// Recursive attractor decomposition on a total arena; `true` where Even
/// wins.
fn winning_regions(a: &ParityArena, pred: &[Vec<usize>]) -> Vec<bool> {
    fn solve(a: &ParityArena, pred: &[Vec<usize>], alive: &[bool]) -> Vec<bool> {
        let mut even = vec![false; a.len()];
        let Some(p) = (0..a.len()).filter(|&v| alive[v]).map(|v| a.priority[v]).min() else {
            return even;
        };
        let me = if p % 2 == 0 { Owner::Even } else { Owner::Odd };
        let top: Vec<usize> = (0..a.len()).filter(|&v| alive[v] && a.priority[v] == p).collect();
        let attr = attractor(a, pred, alive, &top, me);
        let rest: Vec<bool> = (0..a.len()).map(|v| alive[v] && !attr[v]).collect();
        let sub = solve(a, pred, &rest);
        let theirs: Vec<usize> = (0..a.len()).filter(|&v| rest[v] && sub[v] != (me == Owner::Even)).collect();
        if theirs.is_empty() {
            for v in 0..a.len() {
                even[v] = alive[v] && me == Owner::Even;
            }
            return even;
        }
        let other = if me == Owner::Even { Owner::Odd } else { Owner::Even };
        let lost = attractor(a, pred, alive, &theirs, other);
        let remaining: Vec<bool> = (0..a.len()).map(|v| alive[v] && !lost[v]).collect();
        let sub2 = solve(a, pred, &remaining);
        for v in 0..a.len() {
            if alive[v] {
                even[v] = if lost[v] { other == Owner::Even } else { sub2[v] };
            }
        }
        even
    }
    solve(a, pred, &vec![true; a.len()])
}

/// Re-checks a solution: every finite measure satisfies the progress
/// condition locally and the strategy follows decreasing edges.
pub fn check_solution(arena: &ParityArena, sol: &ParitySolution) -> bool {
    let n0 = arena.len();
    let cmp_ok = |mv: &Vec<u32>, mw: &Measure, p: usize| -> bool {
        match mw {
            None => false,
            Some(w) => {
                let o = mv[..=p].cmp(&w[..=p]);
                if p.is_multiple_of(2) { o != Ordering::Less } else { o == Ordering::Greater }
            }
        }
    };
    for v in 0..n0 {
        let Some(mv) = &sol.measure[v] else { continue };
        let p = arena.priority[v] as usize;
        let succ = &arena.moves[v];
        // dead ends: even stuck loses, odd stuck loses
        let ok = match arena.owner[v] {
            Owner::Even => {
                if succ.is_empty() {
                    false
                } else {
                    let Some(w) = sol.strategy[v] else { return false };
                    succ.contains(&w) && cmp_ok(mv, &sol.measure[w], p)
                }
            }
            Owner::Odd => succ.iter().all(|&w| cmp_ok(mv, &sol.measure[w], p)),
        };
        if !ok {
            return false;
        }
    }
    true
}
