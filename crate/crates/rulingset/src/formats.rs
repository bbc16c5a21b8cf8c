//! JSON forms of graphs, configurations, reports and results.

use std::collections::BTreeMap;

use rulingset_core::layered::{ColoringReport, ColoringResult};
use rulingset_core::localsim::BallMap;
use rulingset_core::modelcheck::StateSpaceResult;
use rulingset_core::protocol::Clocks;
use rulingset_core::verifier::LegitimacyReport;
use rulingset_core::{Arrow, Clock, Configuration, Graph, NodeId, NodeState, Params};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[NodeId; 2]>,
}

impl GraphJson {
    pub fn from_graph(g: &Graph) -> Self {
        GraphJson { n: g.n(), edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }

    pub fn to_graph(&self) -> Result<Graph, CliError> {
        let edges: Vec<(NodeId, NodeId)> = self.edges.iter().map(|&[u, v]| (u, v)).collect();
        Ok(Graph::from_edges(self.n, &edges)?)
    }
}

/// Reads either the JSON graph form or the edge-list text form.
pub fn parse_graph(text: &str) -> Result<Graph, CliError> {
    if text.trim_start().starts_with('{') {
        let j: GraphJson = serde_json::from_str(text).map_err(|e| CliError::Format(format!("graph JSON: {e}")))?;
        j.to_graph()
    } else {
        Ok(Graph::parse_edge_list(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrowJson {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockJson {
    pub c: u8,
    pub b: ArrowJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub d: u32,
    pub err: u8,
    pub clocks: Vec<ClockJson>,
}

impl NodeJson {
    pub fn from_state(s: &NodeState) -> Self {
        NodeJson {
            d: s.d,
            err: s.err as u8,
            clocks: s
                .clocks
                .iter()
                .map(|c| ClockJson {
                    c: c.c.value(),
                    b: match c.b {
                        Arrow::Up => ArrowJson::Up,
                        Arrow::Down => ArrowJson::Down,
                    },
                })
                .collect(),
        }
    }

    pub fn to_state(&self, params: Params, node: NodeId) -> Result<NodeState, CliError> {
        let bad = |what: String| CliError::Format(format!("node {node}: {what}"));
        if self.d >= params.k() {
            return Err(bad(format!("d = {} is not below k = {}", self.d, params.k())));
        }
        if self.err > 1 {
            return Err(bad(format!("err must be 0 or 1, got {}", self.err)));
        }
        if self.clocks.len() != params.clock_count() {
            return Err(bad(format!("expected {} clocks, got {}", params.clock_count(), self.clocks.len())));
        }
        let mut clocks = Clocks::new(params.clock_count());
        for (i, c) in self.clocks.iter().enumerate() {
            if c.c > 3 {
                return Err(bad(format!("clock {} has c = {}, outside 0..4", i + 1, c.c)));
            }
            let b = match c.b {
                ArrowJson::Up => Arrow::Up,
                ArrowJson::Down => Arrow::Down,
            };
            clocks.set(i + 1, Clock::new(c.c, b));
        }
        Ok(NodeState { d: self.d, err: self.err == 1, clocks })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigJson {
    pub k: u32,
    pub nodes: Vec<NodeJson>,
}

impl ConfigJson {
    pub fn from_config(cfg: &Configuration) -> Self {
        ConfigJson { k: cfg.params.k(), nodes: cfg.states.iter().map(NodeJson::from_state).collect() }
    }

    pub fn to_config(&self) -> Result<Configuration, CliError> {
        let params = Params::new(self.k)?;
        let states = self.nodes.iter().enumerate().map(|(u, s)| s.to_state(params, u)).collect::<Result<_, _>>()?;
        Ok(Configuration { params, states })
    }
}

pub fn parse_config(text: &str) -> Result<Configuration, CliError> {
    let j: ConfigJson = serde_json::from_str(text).map_err(|e| CliError::Format(format!("configuration JSON: {e}")))?;
    j.to_config()
}

/// Uncolored nodes have `null` in `colors` and are listed in `uncolored`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringJson {
    pub colors: Vec<Option<u32>>,
    pub uncolored: Vec<NodeId>,
}

impl ColoringJson {
    pub fn from_result(r: &ColoringResult) -> Self {
        ColoringJson { colors: r.colors.clone(), uncolored: r.uncolored() }
    }

    pub fn to_result(&self) -> ColoringResult {
        ColoringResult { colors: self.colors.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringCheckJson {
    pub valid: bool,
    pub uncolored: Vec<NodeId>,
    /// `[u, v, distance]` for equal colors at distance at most K.
    pub conflicts: Vec<[usize; 3]>,
    /// `[layer, node]` for layers that are not maximal in the residual set.
    pub bad_layers: Vec<[usize; 2]>,
}

impl ColoringCheckJson {
    pub fn from_report(r: &ColoringReport) -> Self {
        ColoringCheckJson {
            valid: r.valid,
            uncolored: r.uncolored.clone(),
            conflicts: r.conflicts.iter().map(|&(u, v, d)| [u, v, d]).collect(),
            bad_layers: r.bad_layers.iter().map(|&(j, u)| [j as usize, u]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationJson {
    pub node: NodeId,
    pub predicate: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegitimacyJson {
    pub legitimate: bool,
    pub violations: Vec<ViolationJson>,
    /// `[s, t, distance]` for leaders closer than k.
    pub distance_violations: Vec<[usize; 3]>,
    pub leaders: Vec<NodeId>,
    pub ruling_set: bool,
}

impl LegitimacyJson {
    pub fn new(r: &LegitimacyReport, leaders: Vec<NodeId>, ruling_set: bool) -> Self {
        LegitimacyJson {
            legitimate: r.legitimate,
            violations: r
                .violations
                .iter()
                .map(|&(node, p)| ViolationJson { node, predicate: p.name().to_string() })
                .collect(),
            distance_violations: r.distance_violations.iter().map(|&(s, t, d)| [s, t, d]).collect(),
            leaders,
            ruling_set,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpaceJson {
    pub examined: u64,
    pub reachable: u64,
    pub legitimate: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reachability_verified: Option<bool>,
    pub deadlocks: u64,
    pub stuck: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl StateSpaceJson {
    pub fn from_result(r: &StateSpaceResult) -> Self {
        StateSpaceJson {
            examined: r.examined,
            reachable: r.reachable,
            legitimate: r.legitimate,
            closure_verified: r.closure_verified,
            reachability_verified: r.reachability_verified,
            deadlocks: r.deadlocks,
            stuck: r.stuck,
            counterexample: r.counterexample.as_ref().map(|c| c.reason.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputsJson<T> {
    pub problem: String,
    pub outputs: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallMapJson {
    pub radius: usize,
    pub root: u32,
    /// Color to input label.
    pub nodes: BTreeMap<u32, u32>,
    pub edges: Vec<[u32; 2]>,
}

impl BallMapJson {
    pub fn from_map(m: &BallMap) -> Self {
        BallMapJson {
            radius: m.radius,
            root: m.root,
            nodes: m.nodes.clone(),
            edges: m.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

pub fn hex_hash(h: u64) -> String {
    format!("{h:016x}")
}

pub fn parse_hex_hash(s: &str) -> Result<u64, CliError> {
    u64::from_str_radix(s, 16).map_err(|_| CliError::Format(format!("bad hash {s:?}")))
}
