//! Topology: anonymous, undirected, connected, bounded-degree graphs.
//!
//! Handles are dense integers `0..n`. They exist for the simulator and the
//! oracles in this crate; the protocol never reads them.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::rng::XorShift64Star;

pub type NodeId = usize;

/// Distance value for nodes that no source reaches.
pub const UNREACHABLE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    OutOfRange(NodeId, NodeId, usize),
    #[error("graph is not connected ({reached} of {n} nodes reachable from node 0)")]
    Disconnected { reached: usize, n: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid generator parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) collapse; self-loops and disconnected inputs are rejected.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let g = Graph { adj };
        let reached = g.bfs_distances(&NodeSet::single(0)).iter().filter(|&&d| d != UNREACHABLE).count();
        if reached != n {
            return Err(GraphError::Disconnected { reached, n });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn nodes(&self) -> core::ops::Range<NodeId> {
        0..self.n()
    }

    /// Canonical edge list: `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Hop distance from every node to the nearest source.
    pub fn bfs_distances(&self, sources: &NodeSet) -> Vec<usize> {
        self.bfs_bounded(sources.iter(), UNREACHABLE)
    }

    /// BFS that stops expanding at `limit` hops; nodes beyond stay `UNREACHABLE`.
    pub fn bfs_bounded(&self, sources: impl IntoIterator<Item = NodeId>, limit: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.n()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du >= limit {
                continue;
            }
            for &v in &self.adj[u] {
                if dist[v] == UNREACHABLE {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn distances_from(&self, s: NodeId) -> Vec<usize> {
        self.bfs_bounded([s], UNREACHABLE)
    }

    /// `B(center, radius)`: nodes at distance at most `radius`.
    pub fn ball(&self, center: NodeId, radius: usize) -> NodeSet {
        let dist = self.bfs_bounded([center], radius);
        NodeSet::from_sorted(self.nodes().filter(|&v| dist[v] <= radius).collect())
    }

    pub fn diameter(&self) -> usize {
        self.nodes()
            .map(|u| self.distances_from(u).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn generate(kind: &GraphKind) -> Result<Self, GraphError> {
        match *kind {
            GraphKind::Path { n } => {
                let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
                Graph::from_edges(n, &edges)
            }
            GraphKind::Cycle { n } => {
                if n < 3 {
                    return Err(GraphError::Params(alloc::format!("cycle needs n >= 3, got {n}")));
                }
                let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
                edges.push((n - 1, 0));
                Graph::from_edges(n, &edges)
            }
            GraphKind::Grid { rows, cols } => {
                let n = rows * cols;
                let mut edges = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        let u = r * cols + c;
                        if c + 1 < cols {
                            edges.push((u, u + 1));
                        }
                        if r + 1 < rows {
                            edges.push((u, u + cols));
                        }
                    }
                }
                Graph::from_edges(n, &edges)
            }
            GraphKind::RandomBoundedDegree { n, max_degree, seed } => random_bounded_degree(n, max_degree, seed),
        }
    }

    /// Text form: one `u v` pair per line, `#` starts a comment. A line with
    /// a single integer declares a node, which is only needed for `n = 1`.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut max_node: Option<NodeId> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse = |tok: &str| -> Result<NodeId, GraphError> {
                tok.parse::<NodeId>().map_err(|_| GraphError::Parse {
                    line: i + 1,
                    reason: alloc::format!("not a node handle: {tok:?}"),
                })
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                [a] => {
                    let a = parse(a)?;
                    max_node = Some(max_node.map_or(a, |m| m.max(a)));
                }
                [a, b] => {
                    let (a, b) = (parse(a)?, parse(b)?);
                    if a == b {
                        return Err(GraphError::SelfLoop(a));
                    }
                    max_node = Some(max_node.map_or(a.max(b), |m| m.max(a).max(b)));
                    edges.push((a, b));
                }
                _ => {
                    return Err(GraphError::Parse {
                        line: i + 1,
                        reason: alloc::format!("expected `u v`, got {line:?}"),
                    })
                }
            }
        }
        let n = max_node.map_or(0, |m| m + 1);
        Graph::from_edges(n, &edges)
    }

    pub fn write_edge_list(&self) -> String {
        let mut out = String::new();
        if self.n() == 1 {
            out.push_str("0\n");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Path { n: usize },
    Cycle { n: usize },
    Grid { rows: usize, cols: usize },
    RandomBoundedDegree { n: usize, max_degree: usize, seed: u64 },
}

// Random attachment tree (connected, degree-capped) plus extra random edges
// under the same cap. Draw order: one `index` per attached node, then pairs
// of `index` for each extra-edge attempt.
fn random_bounded_degree(n: usize, max_degree: usize, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if n > 2 && max_degree < 2 {
        return Err(GraphError::Params(alloc::format!(
            "a connected graph on {n} nodes needs max degree >= 2, got {max_degree}"
        )));
    }
    if n == 2 && max_degree < 1 {
        return Err(GraphError::Params("two nodes need max degree >= 1".into()));
    }
    let mut rng = XorShift64Star::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    let mut open: Vec<NodeId> = Vec::new();
    for v in 0..n {
        if v > 0 {
            let slot = rng.index(open.len());
            let u = open[slot];
            edges.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
            if degree[u] == max_degree {
                open.swap_remove(slot);
            }
        }
        if degree[v] < max_degree {
            open.push(v);
        }
    }
    let mut present: alloc::collections::BTreeSet<(NodeId, NodeId)> =
        edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let attempts = n * max_degree / 2;
    for _ in 0..attempts {
        if n < 2 {
            break;
        }
        let a = rng.index(n);
        let b = rng.index(n);
        let key = (a.min(b), a.max(b));
        if a == b || degree[a] >= max_degree || degree[b] >= max_degree || present.contains(&key) {
            continue;
        }
        present.insert(key);
        edges.push(key);
        degree[a] += 1;
        degree[b] += 1;
    }
    Graph::from_edges(n, &edges)
}

/// Sorted, duplicate-free set of node handles.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    pub fn single(u: NodeId) -> Self {
        NodeSet(vec![u])
    }

    pub fn from_sorted(v: Vec<NodeId>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        NodeSet(v)
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.0.binary_search(&u).is_ok()
    }

    pub fn insert(&mut self, u: NodeId) -> bool {
        match self.0.binary_search(&u) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, u);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|&u| other.contains(u)).collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.iter().all(|&u| other.contains(u))
    }

    pub fn max(&self) -> Option<NodeId> {
        self.0.last().copied()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut v: Vec<NodeId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = NodeId;
    type IntoIter = core::iter::Copied<core::slice::Iter<'a, NodeId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::generate(&GraphKind::Path { n }).unwrap()
    }

    #[test]
    fn bfs_on_path_and_cycle() {
        assert_eq!(path(3).bfs_distances(&NodeSet::single(0)), vec![0, 1, 2]);
        let c4 = Graph::generate(&GraphKind::Cycle { n: 4 }).unwrap();
        assert_eq!(c4.bfs_distances(&NodeSet::single(0)), vec![0, 1, 2, 1]);
        let all: NodeSet = c4.nodes().collect();
        assert_eq!(c4.bfs_distances(&all), vec![0; 4]);
    }

    #[test]
    fn balls() {
        let p4 = path(4);
        assert_eq!(p4.ball(2, 0), NodeSet::single(2));
        assert_eq!(p4.ball(1, 1).as_slice(), &[0, 1, 2]);
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(star.ball(3, 1).as_slice(), &[0, 3]);
    }

    #[test]
    fn generators() {
        assert_eq!(path(5).edges(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        let c4 = Graph::generate(&GraphKind::Cycle { n: 4 }).unwrap();
        assert_eq!(c4.edges(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        let grid = Graph::generate(&GraphKind::Grid { rows: 2, cols: 3 }).unwrap();
        assert_eq!(grid.edge_count(), 7);
        let g = Graph::generate(&GraphKind::RandomBoundedDegree { n: 50, max_degree: 4, seed: 7 }).unwrap();
        assert_eq!(g.n(), 50);
        assert!(g.max_degree() <= 4);
        let again = Graph::generate(&GraphKind::RandomBoundedDegree { n: 50, max_degree: 4, seed: 7 }).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn generator_errors() {
        assert!(Graph::generate(&GraphKind::Cycle { n: 2 }).is_err());
        assert!(Graph::generate(&GraphKind::Path { n: 0 }).is_err());
        assert!(Graph::generate(&GraphKind::RandomBoundedDegree { n: 5, max_degree: 1, seed: 0 }).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(Graph::from_edges(2, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert!(matches!(Graph::from_edges(3, &[(0, 1)]), Err(GraphError::Disconnected { .. })));
        assert!(matches!(Graph::parse_edge_list("0 1\n1 x\n"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(Graph::parse_edge_list("0 1 2\n"), Err(GraphError::Parse { line: 1, .. })));
        assert_eq!(Graph::parse_edge_list("3 3\n"), Err(GraphError::SelfLoop(3)));
        assert_eq!(Graph::parse_edge_list("# nothing\n"), Err(GraphError::Empty));
    }

    #[test]
    fn parse_handles_comments_and_duplicates() {
        let g = Graph::parse_edge_list("# a path\n0 1 # first\n1 0\n\n2 1\n").unwrap();
        assert_eq!(g, path(3));
        assert_eq!(g.write_edge_list(), "0 1\n1 2\n");
        let single = path(1);
        assert_eq!(Graph::parse_edge_list(&single.write_edge_list()).unwrap(), single);
    }
}
