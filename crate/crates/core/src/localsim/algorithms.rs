use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use thiserror::Error;

use super::{BallMap, Color};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("ball of radius {have} but the algorithm needs {need}")]
    RadiusTooSmall { need: usize, have: usize },
    #[error("color {0} needs more than {1} palette entries")]
    PaletteExceeded(Color, u32),
}

/// A LOCAL algorithm of fixed radius, given as a function of the root's
/// ball. Node colors stand in for identifiers; the map's input labels are
/// whatever the pipeline feeds in (here, the class of a distance-2 coloring).
pub trait LocalAlgorithm {
    type Output: Clone + PartialEq + Debug;
    fn radius(&self) -> usize;
    fn evaluate(&self, ball: &BallMap) -> Result<Self::Output, LocalError>;
}

/// Processes classes `1..=classes` in order: a node joins unless a
/// neighbor from an earlier class joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyMis {
    pub classes: u32,
}

/// Processes classes in order; a node takes the smallest color unused by
/// its neighbors from earlier classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyColoring {
    pub classes: u32,
    pub palette: u32,
}

struct View {
    adj: BTreeMap<Color, Vec<Color>>,
}

impl View {
    fn check(ball: &BallMap, need: usize) -> Result<View, LocalError> {
        if ball.radius < need {
            return Err(LocalError::RadiusTooSmall { need, have: ball.radius });
        }
        Ok(View { adj: ball.neighbors() })
    }

    /// Neighbors of `x` from strictly earlier classes. Such a chain loses a
    /// class per hop, so it never leaves a ball of radius `classes`.
    fn earlier<'a>(&'a self, ball: &'a BallMap, x: Color) -> impl Iterator<Item = Color> + 'a {
        let cx = ball.nodes[&x];
        self.adj[&x].iter().copied().filter(move |y| ball.nodes[y] < cx)
    }
}

fn mis_at(view: &View, ball: &BallMap, x: Color, memo: &mut BTreeMap<Color, bool>) -> bool {
    if let Some(&b) = memo.get(&x) {
        return b;
    }
    let earlier: Vec<Color> = view.earlier(ball, x).collect();
    let b = earlier.into_iter().all(|y| !mis_at(view, ball, y, memo));
    memo.insert(x, b);
    b
}

fn color_at(view: &View, ball: &BallMap, x: Color, memo: &mut BTreeMap<Color, u32>) -> u32 {
    if let Some(&c) = memo.get(&x) {
        return c;
    }
    let earlier: Vec<Color> = view.earlier(ball, x).collect();
    let mut used: Vec<u32> = earlier.into_iter().map(|y| color_at(view, ball, y, memo)).collect();
    used.sort_unstable();
    let c = first_free(&used);
    memo.insert(x, c);
    c
}

fn first_free(sorted: &[u32]) -> u32 {
    let mut c = 0;
    for &x in sorted {
        if x == c {
            c += 1;
        } else if x > c {
            break;
        }
    }
    c
}

impl LocalAlgorithm for GreedyMis {
    type Output = bool;

    fn radius(&self) -> usize {
        self.classes as usize
    }

    fn evaluate(&self, ball: &BallMap) -> Result<bool, LocalError> {
        let view = View::check(ball, self.radius())?;
        Ok(mis_at(&view, ball, ball.root, &mut BTreeMap::new()))
    }
}

impl LocalAlgorithm for GreedyColoring {
    type Output = u32;

    fn radius(&self) -> usize {
        self.classes as usize
    }

    fn evaluate(&self, ball: &BallMap) -> Result<u32, LocalError> {
        let view = View::check(ball, self.radius())?;
        let c = color_at(&view, ball, ball.root, &mut BTreeMap::new());
        if c >= self.palette {
            return Err(LocalError::PaletteExceeded(ball.root, self.palette));
        }
        Ok(c)
    }
}

fn class_order(classes: &[u32]) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..classes.len()).collect();
    order.sort_by_key(|&u| (classes[u], u));
    order
}

/// Whole-graph greedy MIS in class order, lowest handle first within a class.
pub fn sequential_greedy_mis(g: &Graph, classes: &[u32]) -> Vec<bool> {
    let mut in_set = vec![false; g.n()];
    for u in class_order(classes) {
        in_set[u] = g.neighbors(u).iter().all(|&v| !in_set[v]);
    }
    in_set
}

/// Whole-graph greedy coloring in class order, lowest handle first within a
/// class; colors start at 0.
pub fn sequential_greedy_coloring(g: &Graph, classes: &[u32]) -> Vec<u32> {
    let mut color: Vec<Option<u32>> = vec![None; g.n()];
    for u in class_order(classes) {
        let mut used: Vec<u32> = g.neighbors(u).iter().filter_map(|&v| color[v]).collect();
        used.sort_unstable();
        color[u] = Some(first_free(&used));
    }
    color.into_iter().map(|c| c.unwrap()).collect()
}

pub fn is_maximal_independent_set(g: &Graph, in_set: &[bool]) -> bool {
    g.nodes().all(|u| {
        let nbr_in = g.neighbors(u).iter().any(|&v| in_set[v]);
        if in_set[u] {
            !nbr_in
        } else {
            nbr_in
        }
    })
}

pub fn is_proper_coloring(g: &Graph, colors: &[u32], palette: u32) -> bool {
    g.nodes().all(|u| colors[u] < palette && g.neighbors(u).iter().all(|&v| colors[v] != colors[u]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use crate::localsim::direct_ball_map;

    fn evaluate_all<A: LocalAlgorithm>(g: &Graph, classes: &[u32], alg: &A) -> Vec<A::Output> {
        let ids: Vec<Color> = (0..g.n() as u32).collect();
        g.nodes().map(|u| alg.evaluate(&direct_ball_map(g, &ids, classes, u, alg.radius()).unwrap()).unwrap()).collect()
    }

    #[test]
    fn isolated_root() {
        let ball = BallMap { radius: 3, ..BallMap::singleton(5, 1) };
        assert!(GreedyMis { classes: 3 }.evaluate(&ball).unwrap());
        assert_eq!(GreedyColoring { classes: 3, palette: 1 }.evaluate(&ball).unwrap(), 0);
    }

    #[test]
    fn single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(evaluate_all(&g, &[1, 2], &GreedyMis { classes: 2 }), vec![true, false]);
        assert_eq!(evaluate_all(&g, &[1, 2], &GreedyColoring { classes: 2, palette: 2 }), vec![0, 1]);
    }

    #[test]
    fn p5_mis() {
        let g = Graph::generate(&GraphKind::Path { n: 5 }).unwrap();
        let classes = [1, 2, 3, 1, 2];
        let local = evaluate_all(&g, &classes, &GreedyMis { classes: 3 });
        assert_eq!(local, vec![true, false, false, true, false]);
        assert_eq!(local, sequential_greedy_mis(&g, &classes));
        assert!(is_maximal_independent_set(&g, &local));
    }

    #[test]
    fn radius_too_small() {
        let ball = BallMap::singleton(1, 1);
        assert_eq!(GreedyMis { classes: 2 }.evaluate(&ball), Err(LocalError::RadiusTooSmall { need: 2, have: 0 }));
    }

    #[test]
    fn validators() {
        let g = Graph::generate(&GraphKind::Path { n: 3 }).unwrap();
        assert!(is_maximal_independent_set(&g, &[true, false, true]));
        assert!(!is_maximal_independent_set(&g, &[true, false, false]));
        assert!(!is_maximal_independent_set(&g, &[true, true, false]));
        assert!(is_proper_coloring(&g, &[0, 1, 0], 2));
        assert!(!is_proper_coloring(&g, &[0, 0, 1], 2));
        assert!(!is_proper_coloring(&g, &[0, 2, 0], 2));
    }

    #[test]
    fn first_free_color() {
        assert_eq!(first_free(&[]), 0);
        assert_eq!(first_free(&[0, 0, 1, 3]), 2);
        assert_eq!(first_free(&[1, 2]), 0);
    }
}
