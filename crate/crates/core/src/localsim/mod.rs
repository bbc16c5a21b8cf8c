//! Ball maps: every node rebuilds the colored map of its radius-`r`
//! neighborhood, growing it one hop per activation from its neighbors' maps.
//! Colors of a distance-`(2r+1)` coloring serve as identifiers, and a LOCAL
//! algorithm of radius `r` is then evaluated on each node's map.

mod algorithms;
mod pipeline;

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::automaton::{Automaton, Engine, EngineFault};
use crate::graph::{Graph, NodeId};
use crate::rng::XorShift64Star;
use crate::scheduler::{drive, RunError, Scheduler, Termination};

pub use algorithms::{
    is_maximal_independent_set, is_proper_coloring, sequential_greedy_coloring, sequential_greedy_mis, GreedyColoring,
    GreedyMis, LocalAlgorithm, LocalError,
};
pub use pipeline::{solve_pipeline, PipelineConfig, PipelineError, PipelineOutput, Stage};

pub type Color = u32;

/// A rooted, color-labeled map of radius `radius`: the nodes within
/// `radius` hops of the root, mapped to their input label, and the edges
/// with at least one endpoint within `radius - 1` hops. Edges are stored as
/// `(a, b)` with `a < b`, so equal balls are equal values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallMap {
    pub radius: usize,
    pub root: Color,
    pub nodes: BTreeMap<Color, u32>,
    pub edges: BTreeSet<(Color, Color)>,
}

fn edge(a: Color, b: Color) -> (Color, Color) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl BallMap {
    pub fn singleton(root: Color, input: u32) -> Self {
        BallMap { radius: 0, root, nodes: BTreeMap::from([(root, input)]), edges: BTreeSet::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn input(&self, c: Color) -> Option<u32> {
        self.nodes.get(&c).copied()
    }

    pub fn neighbors(&self) -> BTreeMap<Color, Vec<Color>> {
        let mut adj: BTreeMap<Color, Vec<Color>> = self.nodes.keys().map(|&c| (c, Vec::new())).collect();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        adj
    }

    /// Hop distances from the root inside the map.
    pub fn distances(&self) -> BTreeMap<Color, usize> {
        let adj = self.neighbors();
        let mut dist = BTreeMap::from([(self.root, 0)]);
        let mut queue = VecDeque::from([self.root]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[&x];
            for &y in adj.get(&x).into_iter().flatten() {
                if !dist.contains_key(&y) {
                    dist.insert(y, dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// The sub-ball of radius `t`; meaningful for `t <= radius`.
    pub fn truncate(&self, t: usize) -> BallMap {
        let dist = self.distances();
        let within = |c: &Color, r: usize| dist.get(c).is_some_and(|&d| d <= r);
        BallMap {
            radius: t,
            root: self.root,
            nodes: self.nodes.iter().filter(|(c, _)| within(c, t)).map(|(&c, &i)| (c, i)).collect(),
            edges: if t == 0 {
                BTreeSet::new()
            } else {
                self.edges.iter().filter(|(a, b)| within(a, t - 1) || within(b, t - 1)).copied().collect()
            },
        }
    }
}

/// Ground truth from the graph itself. Fails if two nodes of the ball share
/// a color.
pub fn direct_ball_map(g: &Graph, ids: &[Color], inputs: &[u32], u: NodeId, r: usize) -> Result<BallMap, EngineFault> {
    let dist = g.bfs_bounded([u], r);
    let mut nodes = BTreeMap::new();
    let mut edges = BTreeSet::new();
    for v in g.nodes().filter(|&v| dist[v] <= r) {
        if nodes.insert(ids[v], inputs[v]).is_some() {
            return Err(EngineFault::ColorCollision { node: u, color: ids[v] });
        }
        if dist[v] < r {
            for &w in g.neighbors(v) {
                edges.insert(edge(ids[v], ids[w]));
            }
        }
    }
    Ok(BallMap { radius: r, root: ids[u], nodes, edges })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BallState {
    Bottom,
    Map(BallMap),
}

impl BallState {
    pub fn level(&self) -> Option<usize> {
        match self {
            BallState::Bottom => None,
            BallState::Map(m) => Some(m.radius),
        }
    }

    pub fn map(&self) -> Option<&BallMap> {
        match self {
            BallState::Bottom => None,
            BallState::Map(m) => Some(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BallRule {
    /// Supervisory: the stored map cannot have come from the neighbors.
    Reset,
    Init,
    MergeNeighbors,
}

impl BallRule {
    pub fn name(self) -> &'static str {
        match self {
            BallRule::Reset => "reset",
            BallRule::Init => "init",
            BallRule::MergeNeighbors => "merge_neighbors",
        }
    }
}

/// The ball-map automaton. `ids` and `inputs` are read-only per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallSystem {
    pub ids: Vec<Color>,
    pub inputs: Vec<u32>,
    pub radius: usize,
}

impl BallSystem {
    pub fn new(ids: Vec<Color>, inputs: Vec<u32>, radius: usize) -> Self {
        assert_eq!(ids.len(), inputs.len());
        BallSystem { ids, inputs, radius }
    }

    /// The radius-`level` map of `u` built from its neighbors' maps, each
    /// cut down to `level - 1`. `level >= 1`, and every neighbor must hold a
    /// map of radius at least `level - 1`.
    pub fn merge(&self, g: &Graph, states: &[BallState], u: NodeId, level: usize) -> Result<BallMap, EngineFault> {
        let me = self.ids[u];
        let mut nodes = BTreeMap::from([(me, self.inputs[u])]);
        let mut edges = BTreeSet::new();
        let mut roots = BTreeSet::new();
        for &v in g.neighbors(u) {
            let m = states[v].map().expect("neighbor holds a map").truncate(level - 1);
            if m.root == me || !roots.insert(m.root) {
                return Err(EngineFault::ColorCollision { node: u, color: m.root });
            }
            edges.insert(edge(me, m.root));
            for (&c, &input) in &m.nodes {
                if *nodes.entry(c).or_insert(input) != input {
                    return Err(EngineFault::InputMismatch { node: u, color: c });
                }
            }
            edges.extend(m.edges.iter().copied());
        }
        Ok(BallMap { radius: level, root: me, nodes, edges })
    }

    fn neighbor_ok(&self, g: &Graph, states: &[BallState], u: NodeId, min_level: usize) -> bool {
        g.neighbors(u).iter().all(|&v| match &states[v] {
            BallState::Map(m) => m.radius >= min_level && m.root == self.ids[v],
            BallState::Bottom => false,
        })
    }

    fn inconsistent(&self, g: &Graph, states: &[BallState], u: NodeId, m: &BallMap) -> bool {
        if m.root != self.ids[u] || m.input(m.root) != Some(self.inputs[u]) || m.radius > self.radius {
            return true;
        }
        if m.radius == 0 {
            return *m != BallMap::singleton(self.ids[u], self.inputs[u]);
        }
        if !self.neighbor_ok(g, states, u, m.radius - 1) {
            return true;
        }
        self.merge(g, states, u, m.radius).map_or(true, |expected| expected != *m)
    }
}

impl Automaton for BallSystem {
    type State = BallState;
    type Fired = BallRule;

    fn fire(&self, g: &Graph, states: &[BallState], u: NodeId) -> Result<Option<(BallState, BallRule)>, EngineFault> {
        let m = match &states[u] {
            BallState::Bottom => {
                return Ok(Some((BallState::Map(BallMap::singleton(self.ids[u], self.inputs[u])), BallRule::Init)));
            }
            BallState::Map(m) => m,
        };
        if self.inconsistent(g, states, u, m) {
            return Ok(Some((BallState::Bottom, BallRule::Reset)));
        }
        if m.radius < self.radius && self.neighbor_ok(g, states, u, m.radius) {
            let next = self.merge(g, states, u, m.radius + 1)?;
            return Ok(Some((BallState::Map(next), BallRule::MergeNeighbors)));
        }
        Ok(None)
    }
}

/// Runs the ball-map rules until no node is activable or `max_steps` steps
/// were taken.
pub fn run_ball_maps(
    g: &Graph,
    sys: BallSystem,
    states0: Vec<BallState>,
    sched: &mut Scheduler,
    rng: &mut XorShift64Star,
    max_steps: u64,
) -> Result<(Vec<BallState>, u64, Termination), RunError> {
    let mut engine = Engine::new(sys, g, states0)?;
    let (steps, term) = drive(&mut engine, sched, rng, max_steps, |_, _| false)?;
    Ok((engine.into_states(), steps, term))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::step;
    use crate::graph::{GraphKind, NodeSet};
    use crate::scheduler::Daemon;
    use alloc::vec;

    fn path(n: usize) -> Graph {
        Graph::generate(&GraphKind::Path { n }).unwrap()
    }

    fn all(n: usize) -> NodeSet {
        (0..n).collect()
    }

    #[test]
    fn init_from_bottom() {
        let g = path(3);
        let sys = BallSystem::new(vec![1, 2, 3], vec![0, 0, 0], 1);
        let (s, _) = step(&sys, &g, &[BallState::Bottom, BallState::Bottom, BallState::Bottom], &all(3)).unwrap();
        for (u, st) in s.iter().enumerate() {
            assert_eq!(*st, BallState::Map(BallMap::singleton(u as u32 + 1, 0)));
        }
    }

    #[test]
    fn merge_middle_of_p3() {
        let g = path(3);
        let sys = BallSystem::new(vec![1, 2, 3], vec![0, 0, 0], 1);
        let (s, _) = step(&sys, &g, &[BallState::Bottom, BallState::Bottom, BallState::Bottom], &all(3)).unwrap();
        let (s, _) = step(&sys, &g, &s, &NodeSet::single(1)).unwrap();
        let expected = BallMap {
            radius: 1,
            root: 2,
            nodes: BTreeMap::from([(1, 0), (2, 0), (3, 0)]),
            edges: BTreeSet::from([(1, 2), (2, 3)]),
        };
        assert_eq!(s[1], BallState::Map(expected.clone()));
        assert_eq!(expected, direct_ball_map(&g, &[1, 2, 3], &[0, 0, 0], 1, 1).unwrap());
    }

    #[test]
    fn bottom_neighbor_blocks_merge() {
        let g = path(2);
        let sys = BallSystem::new(vec![1, 2], vec![0, 0], 1);
        let states = [BallState::Map(BallMap::singleton(1, 0)), BallState::Bottom];
        assert!(sys.fire(&g, &states, 0).unwrap().is_none());
    }

    #[test]
    fn direct_maps() {
        let g = path(5);
        let ids = [1, 2, 3, 4, 5];
        let inputs = [7, 7, 7, 7, 7];
        assert_eq!(direct_ball_map(&g, &ids, &inputs, 2, 0).unwrap(), BallMap::singleton(3, 7));
        let whole = direct_ball_map(&g, &ids, &inputs, 0, 4).unwrap();
        assert_eq!(whole.len(), 5);
        assert_eq!(whole.edges.len(), 4);
        let m = direct_ball_map(&g, &ids, &inputs, 2, 2).unwrap();
        assert_eq!(m.truncate(1), direct_ball_map(&g, &ids, &inputs, 2, 1).unwrap());
        assert!(direct_ball_map(&g, &[1, 2, 1, 4, 5], &inputs, 1, 1).is_err());
    }

    #[test]
    fn converges_to_direct_maps_and_repairs_corruption() {
        let g = Graph::generate(&GraphKind::Cycle { n: 9 }).unwrap();
        // Distance-5 coloring of C9 would need 9 colors; use unique ids.
        let ids: Vec<Color> = (10..19).collect();
        let inputs: Vec<u32> = (0..9).map(|u| u % 3 + 1).collect();
        let sys = BallSystem::new(ids.clone(), inputs.clone(), 2);
        let mut rng = XorShift64Star::seed_from_u64(3);
        let mut sched = Scheduler::new(Daemon::SubsetRandom(0.5)).unwrap();
        let (states, _, term) = run_ball_maps(&g, sys.clone(), vec![BallState::Bottom; 9], &mut sched, &mut rng, 10_000).unwrap();
        assert_eq!(term, Termination::StationaryFixpoint);
        for u in g.nodes() {
            assert_eq!(states[u].map(), Some(&direct_ball_map(&g, &ids, &inputs, u, 2).unwrap()));
        }
        let mut bad = states.clone();
        bad[4] = BallState::Map(BallMap::singleton(99, 1));
        bad[0] = BallState::Map(BallMap { radius: 2, ..BallMap::singleton(10, 1) });
        let (fixed, _, term) = run_ball_maps(&g, sys, bad, &mut sched, &mut rng, 10_000).unwrap();
        assert_eq!(term, Termination::StationaryFixpoint);
        assert_eq!(fixed, states);
    }

    #[test]
    fn collision_is_a_fault() {
        let g = path(3);
        let sys = BallSystem::new(vec![1, 2, 1], vec![0, 0, 0], 1);
        let (s, _) = step(&sys, &g, &[BallState::Bottom, BallState::Bottom, BallState::Bottom], &all(3)).unwrap();
        assert!(matches!(sys.fire(&g, &s, 1), Err(EngineFault::ColorCollision { node: 1, color: 1 })));
    }
}
