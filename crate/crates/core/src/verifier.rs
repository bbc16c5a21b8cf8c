//! Oracles for legitimacy and its consequences. Distances always come from
//! BFS on the graph, never from the `d` variables being checked.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{Graph, NodeId, NodeSet, UNREACHABLE};
use crate::protocol::{Arrow, Clock, Clocks, Configuration, Local, NodeState, Params, Tick};
use crate::rng::XorShift64Star;

/// Default cap on shortest paths enumerated per `(s, u)` pair.
pub const PATH_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("{count} shortest paths from {s} to {u} exceed the cap of {cap}")]
    PathCapExceeded { s: NodeId, u: NodeId, count: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Predicate {
    WellDefined,
    LeaderDown,
    BranchCoherence,
}

impl Predicate {
    pub fn name(self) -> &'static str {
        match self {
            Predicate::WellDefined => "well_defined",
            Predicate::LeaderDown => "leader_down",
            Predicate::BranchCoherence => "branch_coherence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LegitimacyReport {
    pub legitimate: bool,
    pub violations: Vec<(NodeId, Predicate)>,
    /// Pairs of leaders closer than `k`, with their distance.
    pub distance_violations: Vec<(NodeId, NodeId, usize)>,
}

pub fn leaders(cfg: &Configuration) -> NodeSet {
    NodeSet::from_sorted((0..cfg.n()).filter(|&u| cfg.states[u].d == 0).collect())
}

/// Pairwise distance at least `a`, and every node within `b` of the set.
pub fn is_ruling_set(g: &Graph, s: &NodeSet, a: usize, b: usize) -> bool {
    if s.is_empty() {
        return false;
    }
    for x in s {
        let dist = g.bfs_bounded([x], a.saturating_sub(1));
        if s.iter().any(|y| y != x && dist[y] != UNREACHABLE && dist[y] < a) {
            return false;
        }
    }
    g.bfs_distances(s).iter().all(|&d| d <= b)
}

/// The three local predicates at `u`.
pub fn local_violations(g: &Graph, cfg: &Configuration, u: NodeId) -> impl Iterator<Item = Predicate> {
    let l = Local::new(cfg.params, g, &cfg.states[..], u, false);
    let mut out = Vec::new();
    if !l.well_defined() {
        out.push(Predicate::WellDefined);
    }
    if !l.leader_down() {
        out.push(Predicate::LeaderDown);
    }
    if !l.branch_coherence() {
        out.push(Predicate::BranchCoherence);
    }
    out.into_iter()
}

fn local_ok(params: Params, g: &Graph, states: &[NodeState], u: NodeId) -> bool {
    let l = Local::new(params, g, states, u, false);
    l.well_defined() && l.leader_down() && l.branch_coherence()
}

pub fn is_legitimate(g: &Graph, cfg: &Configuration) -> LegitimacyReport {
    let mut violations = Vec::new();
    for u in g.nodes() {
        violations.extend(local_violations(g, cfg, u).map(|p| (u, p)));
    }
    let distance_violations = close_leader_pairs(g, &leaders(cfg), cfg.params.k() as usize);
    LegitimacyReport { legitimate: violations.is_empty() && distance_violations.is_empty(), violations, distance_violations }
}

/// Leader pairs `(u, v)`, `u < v`, at distance less than `k`.
fn close_leader_pairs(g: &Graph, s: &NodeSet, k: usize) -> Vec<(NodeId, NodeId, usize)> {
    let mut out = Vec::new();
    for x in s {
        let dist = g.bfs_bounded([x], k - 1);
        for y in s {
            if y > x && dist[y] < k {
                out.push((x, y, dist[y]));
            }
        }
    }
    out
}

/// Smallest distance between two distinct sources, by a single multi-source
/// BFS: the minimum over edges joining different Voronoi cells.
pub fn min_pairwise_distance(g: &Graph, sources: &NodeSet) -> Option<usize> {
    let mut dist = vec![UNREACHABLE; g.n()];
    let mut owner = vec![usize::MAX; g.n()];
    let mut queue = alloc::collections::VecDeque::new();
    for s in sources {
        dist[s] = 0;
        owner[s] = s;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHABLE {
                dist[v] = dist[u] + 1;
                owner[v] = owner[u];
                queue.push_back(v);
            }
        }
    }
    let mut best: Option<usize> = None;
    for (u, v) in g.edges() {
        if owner[u] != owner[v] && owner[u] != usize::MAX && owner[v] != usize::MAX {
            let d = dist[u] + 1 + dist[v];
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

/// `d_u == min(dist(u, S), k-1)` at every node.
pub fn check_dist_consistency(g: &Graph, cfg: &Configuration) -> bool {
    let s = leaders(cfg);
    let k1 = cfg.params.k() as usize - 1;
    let dist = g.bfs_distances(&s);
    g.nodes().all(|u| cfg.states[u].d as usize == dist[u].min(k1))
}

pub fn is_locally_legitimate(g: &Graph, cfg: &Configuration, s: NodeId) -> bool {
    if cfg.states[s].d != 0 {
        return false;
    }
    let k = cfg.params.k() as usize;
    let h = cfg.params.half() as usize;
    let dist = g.bfs_bounded([s], k - 1);
    g.nodes().all(|u| {
        let du = dist[u];
        let d = cfg.states[u].d as usize;
        if du <= h {
            d == du && local_ok(cfg.params, g, &cfg.states, u)
        } else if du < k {
            k - du <= d && d <= du
        } else {
            true
        }
    })
}

/// Leaders having another leader at distance less than `k`.
pub fn phi(g: &Graph, cfg: &Configuration) -> NodeSet {
    close_leader_pairs(g, &leaders(cfg), cfg.params.k() as usize).into_iter().flat_map(|(u, v, _)| [u, v]).collect()
}

/// Clock structure along every shortest path from the leader `s` to every
/// node within `floor(k/2) - 1`: for each clock index `i > dist`, a prefix of
/// `(Down, c_{i,s})` followed by a suffix of `(Up, c')` with
/// `c'` in `{c_{i,s} - 1, c_{i,s}}`.
pub fn check_clock_paths(g: &Graph, cfg: &Configuration, s: NodeId) -> Result<bool, VerifyError> {
    check_clock_paths_capped(g, cfg, s, PATH_CAP)
}

pub fn check_clock_paths_capped(g: &Graph, cfg: &Configuration, s: NodeId, cap: usize) -> Result<bool, VerifyError> {
    let h = cfg.params.half() as usize;
    if h < 2 {
        return Ok(true);
    }
    let reach = h - 1;
    let dist = g.bfs_bounded([s], reach);
    // Path counts per node along the BFS DAG, for the cap.
    let mut order: Vec<NodeId> = g.nodes().filter(|&u| dist[u] <= reach).collect();
    order.sort_by_key(|&u| dist[u]);
    let mut count = vec![0usize; g.n()];
    count[s] = 1;
    for &u in &order {
        if u == s {
            continue;
        }
        let c = g.neighbors(u).iter().filter(|&&v| dist[v] != UNREACHABLE && dist[v] + 1 == dist[u]).map(|&v| count[v]).fold(0usize, |a, b| a.saturating_add(b));
        if c > cap {
            return Err(VerifyError::PathCapExceeded { s, u, count: c, cap });
        }
        count[u] = c;
    }

    let mut path = vec![s];
    Ok(walk(g, cfg, &dist, reach, &mut path))
}

fn walk(g: &Graph, cfg: &Configuration, dist: &[usize], reach: usize, path: &mut Vec<NodeId>) -> bool {
    if !path_ok(cfg, path) {
        return false;
    }
    let last = *path.last().expect("path starts at the leader");
    if dist[last] == reach {
        return true;
    }
    for &v in g.neighbors(last) {
        if dist[v] == dist[last] + 1 {
            path.push(v);
            let ok = walk(g, cfg, dist, reach, path);
            path.pop();
            if !ok {
                return false;
            }
        }
    }
    true
}

fn path_ok(cfg: &Configuration, path: &[NodeId]) -> bool {
    let len = path.len() - 1;
    let h = cfg.params.half() as usize;
    let st = |p: usize, i: usize| cfg.states[path[p]].clock(i);
    for i in len + 1..h {
        let head = st(0, i);
        if head.b != Arrow::Down {
            return false;
        }
        let mut p = 1;
        while p <= len && st(p, i) == head {
            p += 1;
        }
        if p <= len {
            let tail = st(p, i);
            if tail.b != Arrow::Up || !(tail.c == head.c || tail.c == head.c - 1) {
                return false;
            }
            if (p..=len).any(|q| st(q, i) != tail) {
                return false;
            }
        }
    }
    true
}

/// Uniform random valid state. Draw order: `d`, `err`, then `c` and `b` per clock.
pub fn random_state(params: Params, rng: &mut XorShift64Star) -> NodeState {
    let d = rng.below(params.k() as u64) as u32;
    let err = rng.below(2) == 1;
    let mut clocks = Clocks::new(params.clock_count());
    for i in 1..=clocks.len() {
        let c = Tick::new(rng.below(4) as u8);
        let b = if rng.below(2) == 1 { Arrow::Up } else { Arrow::Down };
        clocks.set(i, Clock { c, b });
    }
    NodeState { d, err, clocks }
}

pub fn random_configuration(params: Params, n: usize, rng: &mut XorShift64Star) -> Configuration {
    Configuration { params, states: (0..n).map(|_| random_state(params, rng)).collect() }
}

/// Replaces the states of `m` uniformly chosen nodes (partial Fisher-Yates,
/// one `index` draw per pick) by uniform random states, drawn in pick order.
pub fn inject_faults(cfg: &Configuration, m: usize, rng: &mut XorShift64Star) -> (Configuration, NodeSet) {
    let n = cfg.n();
    let m = m.min(n);
    let mut perm: Vec<NodeId> = (0..n).collect();
    for t in 0..m {
        let j = t + rng.index(n - t);
        perm.swap(t, j);
    }
    let mut out = cfg.clone();
    for &u in &perm[..m] {
        out.states[u] = random_state(cfg.params, rng);
    }
    (out, perm[..m].iter().copied().collect())
}

/// Per-node flags for a conjunction of local checks plus one global check,
/// kept up to date from the set of changed nodes.
#[derive(Debug, Clone)]
pub struct IncrementalCheck {
    bad: Vec<bool>,
    bad_count: usize,
    global: Option<bool>,
}

impl IncrementalCheck {
    pub fn new(n: usize, mut local_ok: impl FnMut(NodeId) -> bool) -> Self {
        let bad: Vec<bool> = (0..n).map(|u| !local_ok(u)).collect();
        let bad_count = bad.iter().filter(|&&b| b).count();
        IncrementalCheck { bad, bad_count, global: None }
    }

    /// Re-evaluates the closed neighborhoods of `changed`.
    pub fn touch(&mut self, g: &Graph, changed: &[NodeId], mut local_ok: impl FnMut(NodeId) -> bool) {
        for &u in changed {
            for v in core::iter::once(u).chain(g.neighbors(u).iter().copied()) {
                let b = !local_ok(v);
                if b != self.bad[v] {
                    self.bad[v] = b;
                    if b {
                        self.bad_count += 1;
                    } else {
                        self.bad_count -= 1;
                    }
                }
            }
        }
    }

    pub fn invalidate_global(&mut self) {
        self.global = None;
    }

    pub fn locally_ok(&self) -> bool {
        self.bad_count == 0
    }

    pub fn holds(&mut self, global_ok: impl FnOnce() -> bool) -> bool {
        if self.bad_count > 0 {
            return false;
        }
        *self.global.get_or_insert_with(global_ok)
    }
}

/// Incremental legitimacy for the base protocol.
#[derive(Debug, Clone)]
pub struct LegitimacyTracker {
    check: IncrementalCheck,
    d: Vec<u32>,
}

impl LegitimacyTracker {
    pub fn new(g: &Graph, cfg: &Configuration) -> Self {
        LegitimacyTracker {
            check: IncrementalCheck::new(cfg.n(), |u| local_ok(cfg.params, g, &cfg.states, u)),
            d: cfg.distances(),
        }
    }

    /// Returns the nodes among `changed` whose `d` changed.
    pub fn update(&mut self, g: &Graph, params: Params, states: &[NodeState], changed: &[NodeId]) -> Vec<NodeId> {
        self.check.touch(g, changed, |u| local_ok(params, g, states, u));
        let mut moved = Vec::new();
        for &u in changed {
            if self.d[u] != states[u].d {
                self.d[u] = states[u].d;
                moved.push(u);
            }
        }
        if !moved.is_empty() {
            self.check.invalidate_global();
        }
        moved
    }

    pub fn is_legitimate(&mut self, g: &Graph, params: Params, states: &[NodeState]) -> bool {
        let k = params.k() as usize;
        self.check.holds(|| {
            let s: NodeSet = (0..states.len()).filter(|&u| states[u].d == 0).collect();
            min_pairwise_distance(g, &s).map_or(true, |d| d >= k)
        })
    }
}
