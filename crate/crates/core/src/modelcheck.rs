//! Explicit-state exploration of every configuration of a tiny instance.
//!
//! Configurations are numbered densely: node `u`'s state code (see
//! [`NodeState::code`]) is digit `u` of a mixed-radix number with base
//! `states_per_node`. The visited set is then a bitset over that range, and
//! successors are obtained by adding per-node digit deltas.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::automaton::{Automaton, EngineFault};
use crate::graph::{Graph, NodeId, NodeSet, UNREACHABLE};
use crate::protocol::{apply_step_with, Configuration, Local, NodeState, Params, Protocol};
use crate::rng::XorShift64Star;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelCheckError {
    #[error("{states}^{n} configurations exceed the budget of {budget}")]
    BudgetExceeded { states: u64, n: usize, budget: u64 },
    #[error(transparent)]
    Fault(#[from] EngineFault),
}

/// A finite execution witnessing a failed check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub reason: &'static str,
    pub configs: Vec<Configuration>,
    /// `selections[t]` leads from `configs[t]` to `configs[t + 1]`.
    pub selections: Vec<NodeSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateSpaceResult {
    /// Configurations examined (all of them, or the sampled starts).
    pub examined: u64,
    /// Configurations visited, including those reached by BFS.
    pub reachable: u64,
    pub legitimate: u64,
    /// `None` when the check was not requested.
    pub closure_verified: Option<bool>,
    pub reachability_verified: Option<bool>,
    /// Non-legitimate configurations without any activable node.
    pub deadlocks: u64,
    /// Configurations from which no legitimate configuration is reachable.
    pub stuck: u64,
    pub counterexample: Option<Counterexample>,
}

/// Dense numbering of all configurations of one instance.
#[derive(Debug, Clone)]
pub struct Space<'g> {
    g: &'g Graph,
    proto: Protocol,
    radix: u64,
    pow: Vec<u64>,
    total: u64,
    dist: Vec<Vec<usize>>,
}

impl<'g> Space<'g> {
    pub fn new(g: &'g Graph, proto: Protocol, budget: u64) -> Result<Self, ModelCheckError> {
        let radix = proto.params.states_per_node();
        let n = g.n();
        let mut pow = Vec::with_capacity(n);
        let mut total: u64 = 1;
        for _ in 0..n {
            pow.push(total);
            total = match total.checked_mul(radix) {
                Some(t) if t <= budget => t,
                _ => return Err(ModelCheckError::BudgetExceeded { states: radix, n, budget }),
            };
        }
        let dist = g.nodes().map(|u| g.distances_from(u)).collect();
        Ok(Space { g, proto, radix, pow, total, dist })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn params(&self) -> Params {
        self.proto.params
    }

    pub fn decode(&self, mut idx: u64) -> Configuration {
        let params = self.proto.params;
        let states = (0..self.g.n())
            .map(|_| {
                let s = NodeState::from_code(params, idx % self.radix);
                idx /= self.radix;
                s
            })
            .collect();
        Configuration { params, states }
    }

    pub fn encode(&self, cfg: &Configuration) -> u64 {
        cfg.states.iter().zip(&self.pow).map(|(s, p)| s.code() * p).sum()
    }

    pub fn is_legitimate(&self, cfg: &Configuration) -> bool {
        let k = self.proto.params.k() as usize;
        let ok = self.g.nodes().all(|u| {
            let l = Local::new(cfg.params, self.g, &cfg.states[..], u, false);
            l.well_defined() && l.leader_down() && l.branch_coherence()
        });
        if !ok {
            return false;
        }
        let leaders: Vec<NodeId> = self.g.nodes().filter(|&u| cfg.states[u].d == 0).collect();
        leaders.iter().all(|&a| leaders.iter().all(|&b| a == b || self.dist[a][b] >= k))
    }

    /// Indices of all successors, sorted and deduplicated.
    pub fn successors(&self, cfg: &Configuration, idx: u64) -> Result<Vec<u64>, EngineFault> {
        let mut deltas: Vec<u64> = Vec::new();
        for u in self.g.nodes() {
            if let Some((s, _)) = self.proto.fire(self.g, &cfg.states, u)? {
                let old = cfg.states[u].code();
                deltas.push(s.code().wrapping_sub(old).wrapping_mul(self.pow[u]));
            }
        }
        let m = deltas.len();
        let mut sums = vec![0u64; 1 << m];
        for mask in 1usize..1 << m {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)].wrapping_add(deltas[low]);
        }
        let mut out: Vec<u64> = sums[1..].iter().map(|d| idx.wrapping_add(*d)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Every syntactically valid configuration, each exactly once.
pub fn enumerate_configs(g: &Graph, k: u32, budget: u64) -> Result<impl Iterator<Item = Configuration> + '_, ModelCheckError> {
    let params = Params::new(k).map_err(|_| ModelCheckError::BudgetExceeded { states: 0, n: g.n(), budget })?;
    let space = Space::new(g, Protocol::new(params), budget)?;
    Ok((0..space.total()).map(move |i| space.decode(i)))
}

/// All successors of `cfg`, one per distinct result of a nonempty selection.
pub fn successors(g: &Graph, proto: &Protocol, cfg: &Configuration) -> Result<Vec<Configuration>, EngineFault> {
    let active: Vec<NodeId> = g.nodes().filter(|&u| matches!(proto.fire(g, &cfg.states, u), Ok(Some(_)))).collect();
    let mut out = BTreeSet::new();
    for mask in 1u64..1 << active.len() {
        let sel: NodeSet = active.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &u)| u).collect();
        let (next, _) = apply_step_with(proto, g, cfg, &sel).map_err(|e| match e {
            crate::automaton::StepError::Fault(f) => f,
            other => unreachable!("selection of activable nodes failed: {other}"),
        })?;
        out.insert(next.states.iter().map(|s| s.code()).collect::<Vec<_>>());
    }
    Ok(out.into_iter().map(|codes| Configuration { params: cfg.params, states: codes.into_iter().map(|c| NodeState::from_code(cfg.params, c)).collect() }).collect())
}

/// Finds a selection leading from `from` to `to`.
fn witness_selection(g: &Graph, proto: &Protocol, from: &Configuration, to: &Configuration) -> NodeSet {
    let active: Vec<NodeId> = g.nodes().filter(|&u| matches!(proto.fire(g, &from.states, u), Ok(Some(_)))).collect();
    for mask in 1u64..1 << active.len() {
        let sel: NodeSet = active.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &u)| u).collect();
        if let Ok((next, _)) = apply_step_with(proto, g, from, &sel) {
            if &next == to {
                return sel;
            }
        }
    }
    unreachable!("successor without a selection")
}

/// Every successor of every legitimate configuration is legitimate and has
/// the same `d`-values.
pub fn verify_closure(g: &Graph, proto: &Protocol, budget: u64) -> Result<StateSpaceResult, ModelCheckError> {
    let space = Space::new(g, *proto, budget)?;
    let mut res = StateSpaceResult { examined: space.total(), reachable: space.total(), ..Default::default() };
    for idx in 0..space.total() {
        let cfg = space.decode(idx);
        if !space.is_legitimate(&cfg) {
            continue;
        }
        res.legitimate += 1;
        for s in space.successors(&cfg, idx)? {
            let next = space.decode(s);
            let bad = if !space.is_legitimate(&next) {
                Some("successor of a legitimate configuration is not legitimate")
            } else if next.distances() != cfg.distances() {
                Some("d-values changed from a legitimate configuration")
            } else {
                None
            };
            if let Some(reason) = bad {
                if res.counterexample.is_none() {
                    let sel = witness_selection(g, proto, &cfg, &next);
                    res.counterexample = Some(Counterexample { reason, configs: vec![cfg.clone(), next], selections: vec![sel] });
                }
            }
        }
    }
    res.closure_verified = Some(res.counterexample.is_none());
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    All,
    Sample { m: usize, seed: u64 },
}

/// From each examined configuration some legitimate configuration is
/// reachable through the successor relation.
pub fn verify_reachability(g: &Graph, proto: &Protocol, from: Start, budget: u64) -> Result<StateSpaceResult, ModelCheckError> {
    let space = Space::new(g, *proto, budget)?;
    match from {
        Start::All => reach_all(&space),
        Start::Sample { m, seed } => reach_sample(&space, m, seed),
    }
}

fn reach_all(space: &Space<'_>) -> Result<StateSpaceResult, ModelCheckError> {
    let total = space.total() as usize;
    assert!(total <= u32::MAX as usize, "successor graph indices are 32-bit");
    let mut legit = vec![false; total];
    let mut offsets = Vec::with_capacity(total + 1);
    let mut targets: Vec<u32> = Vec::new();
    let mut res = StateSpaceResult { examined: total as u64, reachable: total as u64, ..Default::default() };
    offsets.push(0u64);
    for idx in 0..total {
        let cfg = space.decode(idx as u64);
        legit[idx] = space.is_legitimate(&cfg);
        let succ = space.successors(&cfg, idx as u64)?;
        if legit[idx] {
            res.legitimate += 1;
        } else if succ.is_empty() {
            res.deadlocks += 1;
        }
        targets.extend(succ.into_iter().map(|s| s as u32));
        offsets.push(targets.len() as u64);
    }

    // Reverse edges, then backward BFS from the legitimate set.
    let mut rev_off = vec![0u64; total + 1];
    for &t in &targets {
        rev_off[t as usize + 1] += 1;
    }
    for i in 0..total {
        rev_off[i + 1] += rev_off[i];
    }
    let mut fill = rev_off.clone();
    let mut sources = vec![0u32; targets.len()];
    for src in 0..total {
        for &t in &targets[offsets[src] as usize..offsets[src + 1] as usize] {
            sources[fill[t as usize] as usize] = src as u32;
            fill[t as usize] += 1;
        }
    }
    drop(targets);
    let mut good = legit.clone();
    let mut queue: VecDeque<usize> = (0..total).filter(|&i| legit[i]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &sources[rev_off[t] as usize..rev_off[t + 1] as usize] {
            if !good[s as usize] {
                good[s as usize] = true;
                queue.push_back(s as usize);
            }
        }
    }
    res.stuck = good.iter().filter(|&&g| !g).count() as u64;
    if let Some(bad) = good.iter().position(|&g| !g) {
        res.counterexample =
            Some(Counterexample { reason: "no legitimate configuration is reachable", configs: vec![space.decode(bad as u64)], selections: vec![] });
    }
    res.reachability_verified = Some(res.stuck == 0);
    Ok(res)
}

fn reach_sample(space: &Space<'_>, m: usize, seed: u64) -> Result<StateSpaceResult, ModelCheckError> {
    let mut rng = XorShift64Star::seed_from_u64(seed);
    let mut res = StateSpaceResult::default();
    let mut seen_all = BTreeSet::new();
    for _ in 0..m {
        let start = rng.below(space.total());
        res.examined += 1;
        let mut visited = BTreeSet::new();
        visited.insert(start);
        let mut queue = VecDeque::from([start]);
        let mut found = false;
        while let Some(idx) = queue.pop_front() {
            let cfg = space.decode(idx);
            if space.is_legitimate(&cfg) {
                found = true;
                break;
            }
            let succ = space.successors(&cfg, idx)?;
            if succ.is_empty() {
                res.deadlocks += 1;
            }
            for s in succ {
                if visited.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        seen_all.extend(visited);
        if !found {
            res.stuck += 1;
            if res.counterexample.is_none() {
                res.counterexample = Some(Counterexample {
                    reason: "no legitimate configuration is reachable",
                    configs: vec![space.decode(start)],
                    selections: vec![],
                });
            }
        }
    }
    res.reachable = seen_all.len() as u64;
    res.reachability_verified = Some(res.stuck == 0);
    Ok(res)
}

/// Every configuration reachable from `cfg0` (including itself), sorted by
/// dense index.
pub fn reachable_from(g: &Graph, proto: &Protocol, cfg0: &Configuration, budget: u64) -> Result<Vec<Configuration>, ModelCheckError> {
    let space = Space::new(g, *proto, budget)?;
    let start = space.encode(cfg0);
    let mut visited = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(idx) = queue.pop_front() {
        for s in space.successors(&space.decode(idx), idx)? {
            if visited.insert(s) {
                queue.push_back(s);
            }
        }
    }
    Ok(visited.into_iter().map(|i| space.decode(i)).collect())
}

/// Shortest distance from every node to every other, exposed for tests that
/// need an oracle independent of BFS.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut d = vec![vec![UNREACHABLE; n]; n];
    for u in 0..n {
        d[u][u] = 0;
        for &v in g.neighbors(u) {
            d[u][v] = 1;
        }
    }
    for w in 0..n {
        for u in 0..n {
            if d[u][w] == UNREACHABLE {
                continue;
            }
            for v in 0..n {
                if d[w][v] != UNREACHABLE && d[u][w] + d[w][v] < d[u][v] {
                    d[u][v] = d[u][w] + d[w][v];
                }
            }
        }
    }
    d
}
