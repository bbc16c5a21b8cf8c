//! The shared-memory execution model, independent of any particular rule set.
//!
//! An automaton decides, for one node and a read-only snapshot of all node
//! states, whether the node is activable and what its next state would be.
//! The base protocol, the layered coloring and the ball-map stage all
//! implement it, so the step function, the daemons and the run loop are
//! written once.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use thiserror::Error;

use crate::graph::{Graph, NodeId, NodeSet};

/// An internal inconsistency of a rule set. These are programming errors or
/// invalid inputs, never ordinary protocol behavior, so they abort a run.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineFault {
    #[error("node {node}: rules {first} and {second} write different values to {var}")]
    WriteConflict { node: NodeId, var: String, first: &'static str, second: &'static str },
    #[error("node {node}: color {color} appears twice while merging ball maps")]
    ColorCollision { node: NodeId, color: u32 },
    #[error("node {node}: ball maps disagree on the input attached to color {color}")]
    InputMismatch { node: NodeId, color: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("empty selection")]
    EmptySelection,
    #[error("node {0} is not a node of the graph")]
    UnknownNode(NodeId),
    #[error("node {0} was selected but has no eligible rule")]
    NotActivable(NodeId),
    #[error(transparent)]
    Fault(#[from] EngineFault),
}

pub trait Automaton {
    type State: Clone + PartialEq + Debug;
    /// Which rules fired at a node during one activation.
    type Fired: Clone + PartialEq + Debug;

    /// Evaluates all guards at `u` against `states` and, if some rule is
    /// eligible, executes every eligible command against the same snapshot.
    fn fire(
        &self,
        g: &Graph,
        states: &[Self::State],
        u: NodeId,
    ) -> Result<Option<(Self::State, Self::Fired)>, EngineFault>;

    /// True if the activation only performs maintenance that a legitimate
    /// configuration keeps doing forever. Used to skip expensive stop checks.
    fn is_stationary(&self, _fired: &Self::Fired) -> bool {
        false
    }
}

/// One node's part of a step.
#[derive(Debug, Clone, PartialEq)]
pub struct Firing<F> {
    pub node: NodeId,
    pub fired: F,
    /// False when the commands left the state as it was.
    pub changed: bool,
}

/// Stateless one-step transition: every selected node executes its eligible
/// rules against `states`; the others keep their state.
pub fn step<A: Automaton>(
    a: &A,
    g: &Graph,
    states: &[A::State],
    selected: &NodeSet,
) -> Result<(Vec<A::State>, Vec<Firing<A::Fired>>), StepError> {
    if selected.is_empty() {
        return Err(StepError::EmptySelection);
    }
    let mut next = states.to_vec();
    let mut fired = Vec::with_capacity(selected.len());
    for u in selected {
        if u >= states.len() {
            return Err(StepError::UnknownNode(u));
        }
        let (s, f) = a.fire(g, states, u)?.ok_or(StepError::NotActivable(u))?;
        let changed = s != states[u];
        next[u] = s;
        fired.push(Firing { node: u, fired: f, changed });
    }
    Ok((next, fired))
}

/// Stateful executor that caches each node's pending activation and only
/// re-evaluates the closed neighborhoods of nodes whose state changed.
#[derive(Debug, Clone)]
pub struct Engine<'g, A: Automaton> {
    automaton: A,
    g: &'g Graph,
    states: Vec<A::State>,
    pending: Vec<Option<(A::State, A::Fired)>>,
    dirty: Vec<bool>,
    dirty_list: Vec<NodeId>,
    activable: usize,
    unsettled: usize,
    steps: u64,
}

impl<'g, A: Automaton> Engine<'g, A> {
    pub fn new(automaton: A, g: &'g Graph, states: Vec<A::State>) -> Result<Self, EngineFault> {
        assert_eq!(states.len(), g.n(), "state vector length must match the graph");
        let n = g.n();
        let mut e = Engine {
            automaton,
            g,
            states,
            pending: (0..n).map(|_| None).collect(),
            dirty: alloc::vec![true; n],
            dirty_list: (0..n).collect(),
            activable: 0,
            unsettled: 0,
            steps: 0,
        };
        e.refresh()?;
        Ok(e)
    }

    pub fn automaton(&self) -> &A {
        &self.automaton
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    pub fn states(&self) -> &[A::State] {
        &self.states
    }

    pub fn into_states(self) -> Vec<A::State> {
        self.states
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Pending activation of `u`: its next state and the rules that would fire.
    pub fn pending(&self, u: NodeId) -> Option<&(A::State, A::Fired)> {
        self.pending[u].as_ref()
    }

    pub fn is_activable(&self, u: NodeId) -> bool {
        self.pending[u].is_some()
    }

    pub fn activable_count(&self) -> usize {
        self.activable
    }

    /// Activable nodes whose eligible rules are not all stationary.
    pub fn unsettled_count(&self) -> usize {
        self.unsettled
    }

    pub fn activable(&self) -> Vec<NodeId> {
        (0..self.states.len()).filter(|&u| self.pending[u].is_some()).collect()
    }

    fn mark(&mut self, u: NodeId) {
        let g = self.g;
        for v in core::iter::once(u).chain(g.neighbors(u).iter().copied()) {
            if !self.dirty[v] {
                self.dirty[v] = true;
                self.dirty_list.push(v);
            }
        }
    }

    fn refresh(&mut self) -> Result<(), EngineFault> {
        while let Some(u) = self.dirty_list.pop() {
            self.dirty[u] = false;
            if let Some((_, f)) = &self.pending[u] {
                self.activable -= 1;
                if !self.automaton.is_stationary(f) {
                    self.unsettled -= 1;
                }
            }
            let p = match self.automaton.fire(self.g, &self.states, u) {
                Ok(p) => p,
                Err(e) => {
                    // Keep the counters consistent for callers that inspect
                    // the engine after a fault.
                    self.pending[u] = None;
                    return Err(e);
                }
            };
            if let Some((_, f)) = &p {
                self.activable += 1;
                if !self.automaton.is_stationary(f) {
                    self.unsettled += 1;
                }
            }
            self.pending[u] = p;
        }
        Ok(())
    }

    /// Executes one step with the given selection.
    pub fn step(&mut self, selected: &NodeSet) -> Result<Vec<Firing<A::Fired>>, StepError> {
        if selected.is_empty() {
            return Err(StepError::EmptySelection);
        }
        let mut updates = Vec::with_capacity(selected.len());
        for u in selected {
            if u >= self.states.len() {
                return Err(StepError::UnknownNode(u));
            }
            let (s, f) = self.pending[u].clone().ok_or(StepError::NotActivable(u))?;
            updates.push((u, s, f));
        }
        let mut fired = Vec::with_capacity(updates.len());
        for (u, s, f) in updates {
            let changed = s != self.states[u];
            // `fire` is a function of the closed neighborhood only, so an
            // unchanged state leaves every cached activation valid.
            if changed {
                self.states[u] = s;
                self.mark(u);
            }
            fired.push(Firing { node: u, fired: f, changed });
        }
        self.steps += 1;
        self.refresh()?;
        Ok(fired)
    }

    /// Overwrites one node's state outside of the protocol (fault injection).
    pub fn set_state(&mut self, u: NodeId, s: A::State) -> Result<(), EngineFault> {
        self.states[u] = s;
        self.mark(u);
        self.refresh()
    }

    pub fn replace_states(&mut self, states: Vec<A::State>) -> Result<(), EngineFault> {
        assert_eq!(states.len(), self.states.len());
        for u in 0..states.len() {
            if states[u] != self.states[u] {
                self.mark(u);
            }
        }
        self.states = states;
        self.refresh()
    }
}
