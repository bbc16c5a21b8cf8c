//! JSONL traces. One object per line, tagged by `event`:
//!
//! - `init`: parameters, initial hash, and for base-protocol runs the full
//!   initial configuration;
//! - `step`: selection, fired rules, post-step hash and the new states of
//!   the nodes that changed;
//! - `fault`: states overwritten from outside;
//! - `end`: step count, termination reason and final hash.
//!
//! Hashes are the 64-bit configuration hash as 16 lowercase hex digits, so
//! two implementations can diff traces line by line.

use rulingset_core::modelcheck::Counterexample;
use rulingset_core::protocol::{apply_step, ActionSet};
use rulingset_core::scheduler::{RunError, TraceEvent};
use rulingset_core::{Configuration, Graph, NodeId, NodeSet, NodeState, RuleSet};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::formats::{hex_hash, parse_hex_hash, ConfigJson, NodeJson};

pub const KIND_BASE: &str = "rulingset";
pub const KIND_LAYERED: &str = "layered";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredJson {
    pub node: NodeId,
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaJson {
    pub node: NodeId,
    pub state: NodeJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceLine {
    Init {
        kind: String,
        k: u32,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layers: Option<usize>,
        daemon: String,
        seed: u64,
        hash: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<ConfigJson>,
    },
    Step {
        step: u64,
        selected: Vec<NodeId>,
        fired: Vec<FiredJson>,
        hash: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        delta: Vec<DeltaJson>,
    },
    Fault {
        step: u64,
        nodes: Vec<NodeId>,
        hash: String,
        delta: Vec<DeltaJson>,
    },
    End {
        steps: u64,
        termination: String,
        hash: String,
    },
}

impl TraceLine {
    pub fn hash(&self) -> &str {
        match self {
            TraceLine::Init { hash, .. }
            | TraceLine::Step { hash, .. }
            | TraceLine::Fault { hash, .. }
            | TraceLine::End { hash, .. } => hash,
        }
    }
}

pub fn fired_json(fired: &[(NodeId, RuleSet)]) -> Vec<FiredJson> {
    fired
        .iter()
        .map(|&(node, rules)| FiredJson { node, rules: rules.iter().map(|r| r.name().to_string()).collect() })
        .collect()
}

/// Layered firings; rule names carry their 1-based layer, as in `2/update_distance`.
pub fn layered_fired_json(fired: &[(NodeId, Vec<RuleSet>)]) -> Vec<FiredJson> {
    fired
        .iter()
        .map(|(node, layers)| FiredJson {
            node: *node,
            rules: layers
                .iter()
                .enumerate()
                .flat_map(|(j, rs)| rs.iter().map(move |r| format!("{}/{}", j + 1, r.name())))
                .collect(),
        })
        .collect()
}

fn delta_json(delta: &[(NodeId, NodeState)]) -> Vec<DeltaJson> {
    delta.iter().map(|(node, s)| DeltaJson { node: *node, state: NodeJson::from_state(s) }).collect()
}

pub fn init_line(cfg0: &Configuration, daemon: &str, seed: u64) -> TraceLine {
    TraceLine::Init {
        kind: KIND_BASE.into(),
        k: cfg0.params.k(),
        n: cfg0.n(),
        layers: None,
        daemon: daemon.into(),
        seed,
        hash: hex_hash(cfg0.hash64()),
        config: Some(ConfigJson::from_config(cfg0)),
    }
}

pub fn event_line(e: &TraceEvent) -> TraceLine {
    match e {
        TraceEvent::Step(s) => TraceLine::Step {
            step: s.step,
            selected: s.selected.as_slice().to_vec(),
            fired: fired_json(&s.fired),
            hash: hex_hash(s.hash),
            delta: delta_json(&s.delta),
        },
        TraceEvent::Fault { step, nodes, hash, delta } => TraceLine::Fault {
            step: *step,
            nodes: nodes.as_slice().to_vec(),
            hash: hex_hash(*hash),
            delta: delta_json(delta),
        },
    }
}

pub fn end_line(steps: u64, termination: &str, hash: u64) -> TraceLine {
    TraceLine::End { steps, termination: termination.into(), hash: hex_hash(hash) }
}

pub fn to_jsonl(lines: &[TraceLine]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(&serde_json::to_string(l).expect("trace lines serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<TraceLine>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::Format(format!("trace line {}: {e}", i + 1))))
        .collect()
}

fn changed_nodes(before: &Configuration, after: &Configuration) -> Vec<(NodeId, NodeState)> {
    (0..after.n()).filter(|&u| before.states[u] != after.states[u]).map(|u| (u, after.states[u])).collect()
}

/// A counterexample as a base-protocol trace, re-executing each selection.
pub fn counterexample_lines(g: &Graph, cx: &Counterexample) -> Result<Vec<TraceLine>, CliError> {
    let first = cx.configs.first().ok_or_else(|| CliError::Format("empty counterexample".into()))?;
    let mut lines = vec![init_line(first, "scripted", 0)];
    let mut cfg = first.clone();
    for (t, sel) in cx.selections.iter().enumerate() {
        let (next, fired) = apply_step(g, &cfg, sel).map_err(RunError::from)?;
        debug_assert_eq!(Some(&next), cx.configs.get(t + 1));
        lines.push(TraceLine::Step {
            step: t as u64 + 1,
            selected: sel.as_slice().to_vec(),
            fired: fired_json(&fired),
            hash: hex_hash(next.hash64()),
            delta: delta_json(&changed_nodes(&cfg, &next)),
        });
        cfg = next;
    }
    lines.push(end_line(cx.selections.len() as u64, cx.reason, cfg.hash64()));
    Ok(lines)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replayed {
    pub steps: u64,
    pub faults: usize,
    pub last: Configuration,
}

/// Re-executes a base-protocol trace: every recorded selection is applied
/// with the pure step function and must reproduce the recorded rules, delta
/// and hash. Faults are applied from their deltas.
pub fn replay(g: &Graph, lines: &[TraceLine]) -> Result<Replayed, CliError> {
    let mismatch = |line: usize, reason: String| CliError::Replay { line: line + 1, reason };
    let Some(TraceLine::Init { kind, hash, config: Some(config), .. }) = lines.first() else {
        return Err(mismatch(0, "first line must be a base-protocol init event with a configuration".into()));
    };
    if kind != KIND_BASE {
        return Err(mismatch(0, format!("cannot replay a {kind} trace")));
    }
    let mut cfg = config.to_config()?;
    if cfg.n() != g.n() {
        return Err(mismatch(0, format!("trace has {} nodes, graph has {}", cfg.n(), g.n())));
    }
    let check_hash = |i: usize, cfg: &Configuration, hash: &str| -> Result<(), CliError> {
        if cfg.hash64() != parse_hex_hash(hash)? {
            return Err(mismatch(i, format!("hash {hash} does not match {}", hex_hash(cfg.hash64()))));
        }
        Ok(())
    };
    check_hash(0, &cfg, hash)?;
    let apply_delta = |cfg: &mut Configuration, delta: &[DeltaJson]| -> Result<(), CliError> {
        for d in delta {
            if d.node >= cfg.n() {
                return Err(CliError::Format(format!("delta names node {} outside the graph", d.node)));
            }
            cfg.states[d.node] = d.state.to_state(cfg.params, d.node)?;
        }
        Ok(())
    };
    let (mut steps, mut faults) = (0u64, 0usize);
    for (i, line) in lines.iter().enumerate().skip(1) {
        match line {
            TraceLine::Init { .. } => return Err(mismatch(i, "second init event".into())),
            TraceLine::Step { step, selected, fired, hash, delta } => {
                if *step != steps + 1 {
                    return Err(mismatch(i, format!("step {step} follows step {steps}")));
                }
                let sel: NodeSet = selected.iter().copied().collect();
                let (next, actions): (Configuration, ActionSet) =
                    apply_step(g, &cfg, &sel).map_err(|e| mismatch(i, e.to_string()))?;
                if fired_json(&actions) != *fired {
                    return Err(mismatch(i, "fired rules differ".into()));
                }
                let mut patched = cfg.clone();
                apply_delta(&mut patched, delta)?;
                if patched != next || delta.len() != changed_nodes(&cfg, &next).len() {
                    return Err(mismatch(i, "delta differs from the re-executed step".into()));
                }
                check_hash(i, &next, hash)?;
                cfg = next;
                steps += 1;
            }
            TraceLine::Fault { step, hash, delta, .. } => {
                if *step != steps {
                    return Err(mismatch(i, format!("fault at step {step}, trace is at {steps}")));
                }
                apply_delta(&mut cfg, delta)?;
                check_hash(i, &cfg, hash)?;
                faults += 1;
            }
            TraceLine::End { steps: total, hash, .. } => {
                if *total != steps {
                    return Err(mismatch(i, format!("end reports {total} steps, replayed {steps}")));
                }
                check_hash(i, &cfg, hash)?;
            }
        }
    }
    Ok(Replayed { steps, faults, last: cfg })
}
