//! `L` ruling-set instances run side by side. Layer `j` is the base protocol
//! where a node that leads some earlier layer may not lead layer `j`, so the
//! leader sets of successive layers partition the nodes into distance-`k`
//! independent sets, i.e. a distance-`K` coloring for every `K < k`.

use alloc::vec;
use alloc::vec::Vec;

use crate::automaton::{self, Automaton, EngineFault, Firing, StepError};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::hash::Fnv64;
use crate::protocol::{fire_at, Local, NodeState, Params, Protocol, RuleSet, StateTable};
use crate::rng::XorShift64Star;
use crate::scheduler::{RunError, Scheduler, Termination};
use crate::verifier::{self, min_pairwise_distance};

/// Per node, one state per layer; `states[u][j - 1]` is layer `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayeredConfiguration {
    pub params: Params,
    pub states: Vec<Vec<NodeState>>,
}

impl LayeredConfiguration {
    pub fn uniform(params: Params, layers: usize, n: usize) -> Self {
        let s = NodeState::new(params, params.k() - 1);
        LayeredConfiguration { params, states: vec![vec![s; layers]; n] }
    }

    pub fn random(params: Params, layers: usize, n: usize, rng: &mut XorShift64Star) -> Self {
        let states = (0..n).map(|_| (0..layers).map(|_| verifier::random_state(params, rng)).collect()).collect();
        LayeredConfiguration { params, states }
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn layers(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    /// Layer `j` (1-based) as a base configuration.
    pub fn layer(&self, j: usize) -> crate::protocol::Configuration {
        crate::protocol::Configuration { params: self.params, states: self.states.iter().map(|s| s[j - 1]).collect() }
    }

    pub fn is_valid(&self) -> bool {
        let l = self.layers();
        self.states.iter().all(|s| s.len() == l && s.iter().all(|x| x.is_valid(self.params)))
    }

    /// FNV-1a over `k`, `n`, `L`, then every node's layers in order.
    pub fn hash64(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u32(self.params.k());
        h.write_u32(self.n() as u32);
        h.write_u32(self.layers() as u32);
        for s in &self.states {
            for x in s {
                x.hash_into(&mut h);
            }
        }
        h.finish()
    }
}

/// True if `u` leads a layer before `j` (0-based).
fn earlier_leader(states: &[NodeState], j: usize) -> bool {
    states[..j].iter().any(|s| s.d == 0)
}

struct LayerView<'a> {
    states: &'a [Vec<NodeState>],
    j: usize,
}

impl StateTable for LayerView<'_> {
    fn state(&self, v: NodeId) -> &NodeState {
        &self.states[v][self.j]
    }
}

fn local<'a>(params: Params, g: &'a Graph, view: &'a LayerView<'a>, u: NodeId) -> Local<'a, LayerView<'a>> {
    Local::new(params, g, view, u, earlier_leader(&view.states[u], view.j))
}

/// The layered automaton. An activation fires, in every layer, whatever the
/// base rules (with the cross-layer guards) allow there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayeredProtocol {
    pub proto: Protocol,
}

impl LayeredProtocol {
    pub fn new(params: Params) -> Self {
        LayeredProtocol { proto: Protocol::new(params) }
    }
}

impl Automaton for LayeredProtocol {
    type State = Vec<NodeState>;
    type Fired = Vec<RuleSet>;

    fn fire(&self, g: &Graph, states: &[Vec<NodeState>], u: NodeId) -> Result<Option<(Vec<NodeState>, Vec<RuleSet>)>, EngineFault> {
        let mut out = states[u].clone();
        let mut fired = vec![RuleSet::EMPTY; out.len()];
        let mut any = false;
        for j in 0..out.len() {
            let view = LayerView { states, j };
            if let Some((s, r)) = fire_at(&self.proto, &local(self.proto.params, g, &view, u))? {
                out[j] = s;
                fired[j] = r;
                any = true;
            }
        }
        Ok(any.then_some((out, fired)))
    }

    fn is_stationary(&self, fired: &Vec<RuleSet>) -> bool {
        fired.iter().all(|r| r.all_stationary())
    }
}

/// Rules that would fire at `u`, per layer.
pub fn layered_eligible(g: &Graph, lcfg: &LayeredConfiguration, u: NodeId) -> Result<Vec<RuleSet>, EngineFault> {
    let lp = LayeredProtocol::new(lcfg.params);
    Ok(lp.fire(g, &lcfg.states, u)?.map_or_else(|| vec![RuleSet::EMPTY; lcfg.layers()], |(_, f)| f))
}

pub fn apply_layered_step(
    g: &Graph,
    lcfg: &LayeredConfiguration,
    selected: &NodeSet,
) -> Result<(LayeredConfiguration, Vec<(NodeId, Vec<RuleSet>)>), StepError> {
    let (states, fired) = automaton::step(&LayeredProtocol::new(lcfg.params), g, &lcfg.states, selected)?;
    let actions = fired.into_iter().map(|Firing { node, fired, .. }| (node, fired)).collect();
    Ok((LayeredConfiguration { params: lcfg.params, states }, actions))
}

fn layer_local_ok(params: Params, g: &Graph, states: &[Vec<NodeState>], u: NodeId, j: usize) -> bool {
    let view = LayerView { states, j };
    let l = local(params, g, &view, u);
    l.well_defined() && l.leader_down() && l.branch_coherence()
}

fn layer_leaders(states: &[Vec<NodeState>], j: usize) -> NodeSet {
    (0..states.len()).filter(|&u| states[u][j].d == 0).collect()
}

/// Legitimacy for the first `j` layers (1-based): the three local predicates
/// with the layered `well_defined`, and leaders of each layer at distance at
/// least `k` from each other.
pub fn is_layer_legitimate(g: &Graph, lcfg: &LayeredConfiguration, j: usize) -> bool {
    let k = lcfg.params.k() as usize;
    (0..j.min(lcfg.layers())).all(|i| {
        g.nodes().all(|u| layer_local_ok(lcfg.params, g, &lcfg.states, u, i))
            && min_pairwise_distance(g, &layer_leaders(&lcfg.states, i)).map_or(true, |d| d >= k)
    })
}

/// Step engine for the layered automaton. It caches the pending result and
/// the local predicates per (node, layer) and, after a step, re-evaluates
/// only the layers that can have changed: layer `j` on the closed
/// neighborhood of a node whose layer `j` changed, plus the later layers of
/// that node when it started or stopped leading layer `j`.
#[derive(Debug, Clone)]
pub struct LayeredEngine<'g> {
    g: &'g Graph,
    proto: Protocol,
    layers: usize,
    states: Vec<Vec<NodeState>>,
    pending: Vec<Vec<Option<(NodeState, RuleSet)>>>,
    active: Vec<u32>,
    restless: Vec<u32>,
    activable: usize,
    unsettled: usize,
    ok: Vec<Vec<bool>>,
    bad: usize,
    spread_ok: Vec<Option<bool>>,
    stamp: Vec<u64>,
    steps: u64,
}

impl<'g> LayeredEngine<'g> {
    pub fn new(g: &'g Graph, lcfg: LayeredConfiguration) -> Result<Self, EngineFault> {
        let layers = lcfg.layers();
        let n = lcfg.n();
        let mut e = LayeredEngine {
            g,
            proto: Protocol::new(lcfg.params),
            layers,
            states: lcfg.states,
            pending: vec![vec![None; layers]; n],
            active: vec![0; n],
            restless: vec![0; n],
            activable: 0,
            unsettled: 0,
            ok: vec![vec![true; layers]; n],
            bad: 0,
            spread_ok: vec![None; layers],
            stamp: vec![0; n * layers],
            steps: 0,
        };
        for u in 0..n {
            for j in 0..layers {
                e.refresh(u, j)?;
            }
        }
        Ok(e)
    }

    fn refresh(&mut self, u: NodeId, j: usize) -> Result<(), EngineFault> {
        let params = self.proto.params;
        let view = LayerView { states: &self.states, j };
        let l = local(params, self.g, &view, u);
        let next = fire_at(&self.proto, &l)?;
        let ok = l.well_defined() && l.leader_down() && l.branch_coherence();

        let was = self.pending[u][j].as_ref().map(|(_, r)| !r.all_stationary());
        let now = next.as_ref().map(|(_, r)| !r.all_stationary());
        let (a0, r0) = (self.active[u] > 0, self.restless[u] > 0);
        self.active[u] = self.active[u] + now.is_some() as u32 - was.is_some() as u32;
        self.restless[u] = self.restless[u] + (now == Some(true)) as u32 - (was == Some(true)) as u32;
        self.activable = self.activable + (self.active[u] > 0) as usize - a0 as usize;
        self.unsettled = self.unsettled + (self.restless[u] > 0) as usize - r0 as usize;
        self.pending[u][j] = next;

        if ok != self.ok[u][j] {
            self.ok[u][j] = ok;
            if ok {
                self.bad -= 1;
            } else {
                self.bad += 1;
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    pub fn states(&self) -> &[Vec<NodeState>] {
        &self.states
    }

    pub fn config(&self) -> LayeredConfiguration {
        LayeredConfiguration { params: self.proto.params, states: self.states.clone() }
    }

    pub fn into_config(self) -> LayeredConfiguration {
        LayeredConfiguration { params: self.proto.params, states: self.states }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn activable_count(&self) -> usize {
        self.activable
    }

    /// Nodes that would fire some non-stationary rule.
    pub fn unsettled_count(&self) -> usize {
        self.unsettled
    }

    pub fn activable(&self) -> Vec<NodeId> {
        (0..self.states.len()).filter(|&u| self.active[u] > 0).collect()
    }

    /// Legitimacy of all layers, see [`is_layer_legitimate`].
    pub fn is_legitimate(&mut self) -> bool {
        if self.bad > 0 {
            return false;
        }
        let k = self.proto.params.k() as usize;
        for j in 0..self.layers {
            let ok = match self.spread_ok[j] {
                Some(ok) => ok,
                None => {
                    let ok = min_pairwise_distance(self.g, &layer_leaders(&self.states, j)).map_or(true, |d| d >= k);
                    self.spread_ok[j] = Some(ok);
                    ok
                }
            };
            if !ok {
                return false;
            }
        }
        true
    }

    pub fn step(&mut self, selected: &NodeSet) -> Result<Vec<(NodeId, Vec<RuleSet>)>, StepError> {
        if selected.is_empty() {
            return Err(StepError::EmptySelection);
        }
        for u in selected {
            if u >= self.states.len() {
                return Err(StepError::UnknownNode(u));
            }
            if self.active[u] == 0 {
                return Err(StepError::NotActivable(u));
            }
        }
        self.steps += 1;
        let mut fired = Vec::with_capacity(selected.len());
        let mut writes = Vec::new();
        for u in selected {
            let mut f = vec![RuleSet::EMPTY; self.layers];
            for (j, p) in self.pending[u].iter().enumerate() {
                if let Some((s, r)) = p {
                    f[j] = *r;
                    if *s != self.states[u][j] {
                        writes.push((u, j, *s));
                    }
                }
            }
            fired.push((u, f));
        }
        let stamp = self.steps;
        let mut seen = core::mem::take(&mut self.stamp);
        let mut dirty = Vec::new();
        let layers = self.layers;
        let mut mark = |v: NodeId, j: usize, dirty: &mut Vec<(NodeId, usize)>| {
            if seen[v * layers + j] != stamp {
                seen[v * layers + j] = stamp;
                dirty.push((v, j));
            }
        };
        for &(u, j, s) in &writes {
            let old = core::mem::replace(&mut self.states[u][j], s);
            if old.d != s.d {
                self.spread_ok[j] = None;
            }
            mark(u, j, &mut dirty);
            for &v in self.g.neighbors(u) {
                mark(v, j, &mut dirty);
            }
            if (old.d == 0) != (s.d == 0) {
                for j2 in j + 1..layers {
                    mark(u, j2, &mut dirty);
                }
            }
        }
        self.stamp = seen;
        for (v, j) in dirty {
            self.refresh(v, j)?;
        }
        Ok(fired)
    }
}

/// Runs the layered automaton until every layer is legitimate or `max_steps`
/// steps were taken.
pub fn run_layered(
    g: &Graph,
    lcfg0: LayeredConfiguration,
    sched: &mut Scheduler,
    rng: &mut XorShift64Star,
    max_steps: u64,
) -> Result<(LayeredConfiguration, u64, Termination), RunError> {
    let mut engine = LayeredEngine::new(g, lcfg0)?;
    let mut done = 0;
    let term = loop {
        if engine.unsettled_count() == 0 && engine.is_legitimate() {
            break Termination::LegitimateReached;
        }
        if engine.activable_count() == 0 {
            break Termination::StationaryFixpoint;
        }
        if done >= max_steps {
            break Termination::StepCap;
        }
        let selected = sched.select(&engine.activable(), rng)?;
        engine.step(&selected)?;
        done += 1;
    };
    Ok((engine.into_config(), done, term))
}

/// A color per node, 1-based layer index; `None` for uncolored nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringResult {
    pub colors: Vec<Option<u32>>,
}

pub const UNCOLORED: Option<u32> = None;

impl ColoringResult {
    pub fn uncolored(&self) -> Vec<NodeId> {
        self.colors.iter().enumerate().filter(|(_, c)| c.is_none()).map(|(u, _)| u).collect()
    }

    pub fn max_color(&self) -> u32 {
        self.colors.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Relabels the used colors to `1..=C`, keeping their order.
    pub fn compacted(&self) -> ColoringResult {
        let mut used: Vec<u32> = self.colors.iter().flatten().copied().collect();
        used.sort_unstable();
        used.dedup();
        let colors = self.colors.iter().map(|c| c.map(|c| used.binary_search(&c).unwrap() as u32 + 1)).collect();
        ColoringResult { colors }
    }
}

/// The first layer a node leads.
pub fn extract_coloring(lcfg: &LayeredConfiguration) -> ColoringResult {
    ColoringResult { colors: lcfg.states.iter().map(|s| s.iter().position(|x| x.d == 0).map(|j| j as u32 + 1)).collect() }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColoringReport {
    pub valid: bool,
    pub uncolored: Vec<NodeId>,
    /// Same color at distance at most `K`.
    pub conflicts: Vec<(NodeId, NodeId, usize)>,
    /// Layers whose leaders are closer than `k`, or that leave a node of the
    /// residual set farther than `k - 1` from every leader; with a witness.
    pub bad_layers: Vec<(u32, NodeId)>,
}

/// Checks a coloring: every node colored, equal colors at distance greater
/// than `big_k`, and each color class a `(k, k-1)`-ruling set of the nodes
/// not taken by smaller colors (distances in `g`). Pass `k = None` to skip
/// the last check, e.g. for a compacted coloring.
pub fn check_coloring(g: &Graph, result: &ColoringResult, big_k: usize, k: Option<usize>) -> ColoringReport {
    let mut rep = ColoringReport { uncolored: result.uncolored(), ..Default::default() };
    for u in g.nodes() {
        let Some(cu) = result.colors[u] else { continue };
        let dist = g.bfs_bounded([u], big_k);
        for v in u + 1..g.n() {
            if dist[v] <= big_k && result.colors[v] == Some(cu) {
                rep.conflicts.push((u, v, dist[v]));
            }
        }
    }
    if let Some(k) = k {
        let mut residual: Vec<bool> = vec![true; g.n()];
        for j in 1..=result.max_color() {
            let s: NodeSet = g.nodes().filter(|&u| result.colors[u] == Some(j)).collect();
            if let Some(&u) = s.as_slice().first() {
                if min_pairwise_distance(g, &s).map_or(false, |d| d < k) {
                    rep.bad_layers.push((j, u));
                    continue;
                }
            }
            let dist = g.bfs_distances(&s);
            if let Some(w) = g.nodes().find(|&w| residual[w] && dist[w] > k - 1) {
                rep.bad_layers.push((j, w));
            }
            for u in &s {
                residual[u] = false;
            }
        }
    }
    rep.valid = rep.uncolored.is_empty() && rep.conflicts.is_empty() && rep.bad_layers.is_empty();
    rep
}

pub fn verify_coloring(g: &Graph, result: &ColoringResult, big_k: usize, k: usize) -> bool {
    check_coloring(g, result, big_k, Some(k)).valid
}

/// `min(Δ^k, cap)` with saturation, at least 1.
pub fn default_layers(g: &Graph, k: u32, cap: usize) -> usize {
    let delta = g.max_degree().max(1);
    let mut l: usize = 1;
    for _ in 0..k {
        l = l.saturating_mul(delta);
        if l >= cap {
            return cap.max(1);
        }
    }
    l.min(cap).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use crate::protocol::Configuration;
    use crate::scheduler::Daemon;

    fn path(n: usize) -> Graph {
        Graph::generate(&GraphKind::Path { n }).unwrap()
    }

    fn params(k: u32) -> Params {
        Params::new(k).unwrap()
    }

    fn with_layers(p: Params, d: &[&[u32]]) -> LayeredConfiguration {
        LayeredConfiguration { params: p, states: d.iter().map(|row| row.iter().map(|&x| NodeState::new(p, x)).collect()).collect() }
    }

    #[test]
    fn belong_to_two_resets_later_layer() {
        let g = path(2);
        let p = params(3);
        let lcfg = with_layers(p, &[&[0, 0], &[1, 1]]);
        let el = layered_eligible(&g, &lcfg, 0).unwrap();
        assert!(el[1].contains(crate::protocol::RuleId::BelongToTwoRulingSets));
        let (next, _) = apply_layered_step(&g, &lcfg, &NodeSet::single(0)).unwrap();
        assert_eq!(next.states[0][1].d, 1);
        assert_eq!(next.states[0][0].d, 0);
    }

    #[test]
    fn become_leader_blocked_by_earlier_layer() {
        let g = path(2);
        let p = params(3);
        // Node 0 leads layer 1; in layer 2 everyone sits at k-1.
        let blocked = with_layers(p, &[&[0, 2], &[1, 2]]);
        let el = layered_eligible(&g, &blocked, 0).unwrap();
        assert!(!el[1].contains(crate::protocol::RuleId::BecomeLeader));
        let free = with_layers(p, &[&[1, 2], &[0, 2]]);
        let el = layered_eligible(&g, &free, 0).unwrap();
        assert!(el[1].contains(crate::protocol::RuleId::BecomeLeader));
    }

    #[test]
    fn earlier_leader_needs_no_parent_at_k_minus_one() {
        // Both nodes lead an earlier layer, so layer 3 has no leader at all.
        let g = path(2);
        let p = params(3);
        let lcfg = with_layers(p, &[&[0, 1, 2], &[1, 0, 2]]);
        assert!(is_layer_legitimate(&g, &lcfg, 3));
        assert!(layered_eligible(&g, &lcfg, 0).unwrap().iter().all(|r| r.is_empty()));
        let v = LayerView { states: &lcfg.states, j: 2 };
        assert!(local(p, &g, &v, 0).well_defined());
    }

    #[test]
    fn layer_one_matches_base_protocol() {
        let g = Graph::generate(&GraphKind::RandomBoundedDegree { n: 12, max_degree: 3, seed: 2 }).unwrap();
        let p = params(4);
        let mut rng = XorShift64Star::seed_from_u64(5);
        let mut lcfg = LayeredConfiguration::random(p, 3, g.n(), &mut rng);
        let mut base = lcfg.layer(1);
        for _ in 0..200 {
            let sel: NodeSet = g.nodes().filter(|_| rng.chance(0.5)).collect();
            if sel.is_empty() {
                continue;
            }
            let sel: NodeSet = sel.iter().filter(|&u| !layered_eligible(&g, &lcfg, u).unwrap().iter().all(|r| r.is_empty())).collect();
            if sel.is_empty() {
                continue;
            }
            let (next, _) = apply_layered_step(&g, &lcfg, &sel).unwrap();
            let base_sel: NodeSet = sel.iter().filter(|&u| !Protocol::new(p).eligible_rules(&g, &base.states, u).unwrap().is_empty()).collect();
            if !base_sel.is_empty() {
                base = crate::protocol::apply_step(&g, &base, &base_sel).unwrap().0;
            }
            lcfg = next;
            assert_eq!(lcfg.layer(1), base);
        }
    }

    #[test]
    fn engine_matches_pure_step() {
        let g = Graph::generate(&GraphKind::RandomBoundedDegree { n: 14, max_degree: 3, seed: 8 }).unwrap();
        for k in [3, 5] {
            let p = params(k);
            let mut rng = XorShift64Star::seed_from_u64(k as u64);
            let mut lcfg = LayeredConfiguration::random(p, 4, g.n(), &mut rng);
            let mut engine = LayeredEngine::new(&g, lcfg.clone()).unwrap();
            for _ in 0..400 {
                let act: Vec<NodeId> =
                    g.nodes().filter(|&u| layered_eligible(&g, &lcfg, u).unwrap().iter().any(|r| !r.is_empty())).collect();
                assert_eq!(engine.activable(), act);
                assert_eq!(engine.is_legitimate(), is_layer_legitimate(&g, &lcfg, 4));
                if act.is_empty() {
                    break;
                }
                let mut sel: NodeSet = act.iter().copied().filter(|_| rng.chance(0.4)).collect();
                if sel.is_empty() {
                    sel.insert(act[rng.index(act.len())]);
                }
                let (next, fired) = apply_layered_step(&g, &lcfg, &sel).unwrap();
                assert_eq!(engine.step(&sel).unwrap(), fired);
                lcfg = next;
                assert_eq!(engine.states(), &lcfg.states[..]);
            }
        }
    }

    #[test]
    fn coloring_extraction() {
        let p = params(3);
        let lcfg = with_layers(p, &[&[1, 0, 1, 1, 0], &[1, 1, 1, 1, 1]]);
        let c = extract_coloring(&lcfg);
        assert_eq!(c.colors, vec![Some(2), UNCOLORED]);
        assert_eq!(c.uncolored(), vec![1]);
    }

    #[test]
    fn layer_legitimacy_examples() {
        let g = path(4);
        let p = params(3);
        let base = Configuration::from_distances(p, &[0, 1, 1, 0]);
        let one = LayeredConfiguration { params: p, states: base.states.iter().map(|s| vec![*s]).collect() };
        assert!(is_layer_legitimate(&g, &one, 1));
        let two = with_layers(p, &[&[0, 1], &[1, 0], &[1, 0], &[0, 1]]);
        assert!(!is_layer_legitimate(&g, &two, 2));
    }

    fn converge(g: &Graph, k: u32, layers: usize, seed: u64) -> LayeredConfiguration {
        let p = params(k);
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let lcfg = LayeredConfiguration::random(p, layers, g.n(), &mut rng);
        let mut sched = Scheduler::new(Daemon::SubsetRandom(0.5)).unwrap();
        let (out, _, term) = run_layered(g, lcfg, &mut sched, &mut rng, 1_000_000).unwrap();
        assert_eq!(term, Termination::LegitimateReached);
        assert!(is_layer_legitimate(g, &out, layers));
        out
    }

    #[test]
    fn converged_path_is_colored() {
        let g = path(5);
        let out = converge(&g, 3, 9, 1);
        let c = extract_coloring(&out);
        assert!(verify_coloring(&g, &c, 2, 3), "{:?}", check_coloring(&g, &c, 2, Some(3)));
        let g = path(10);
        let c = extract_coloring(&converge(&g, 3, 9, 2));
        assert!(verify_coloring(&g, &c, 2, 3));
    }

    #[test]
    fn merged_colors_are_rejected() {
        let g = path(10);
        let mut c = extract_coloring(&converge(&g, 3, 9, 3));
        let a = c.colors[0];
        let b = c.colors[1];
        for x in c.colors.iter_mut() {
            if *x == b {
                *x = a;
            }
        }
        assert!(!check_coloring(&g, &c, 2, Some(3)).conflicts.is_empty());
    }

    #[test]
    fn one_layer_is_not_enough() {
        let g = path(10);
        let c = extract_coloring(&converge(&g, 3, 1, 4));
        let rep = check_coloring(&g, &c, 2, Some(3));
        assert!(!rep.valid);
        assert!(!rep.uncolored.is_empty());
    }

    #[test]
    fn layers_default() {
        let g = path(10);
        assert_eq!(default_layers(&g, 3, 1000), 8);
        assert_eq!(default_layers(&g, 30, 50), 50);
        let single = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(default_layers(&single, 3, 10), 1);
    }
}
