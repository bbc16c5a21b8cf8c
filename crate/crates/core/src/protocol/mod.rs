//! The `(k, k-1)`-ruling-set protocol: node variables, predicates, prioritized
//! rules and the one-step transition.

mod rules;
mod state;

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::automaton::{self, Automaton, EngineFault, Firing};
use crate::graph::{Graph, NodeId, NodeSet};

pub use rules::{fire_at, Local};
pub use state::{Arrow, Clock, Clocks, Configuration, NodeState, Tick};

pub use crate::automaton::StepError;

/// Largest supported `k`: clocks are bit-packed three bits each into a `u128`.
pub const MAX_K: u32 = 2 * (state::MAX_CLOCKS as u32 + 1) + 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("k must be at least 3, got {0}")]
    KTooSmall(u32),
    #[error("k must be at most {MAX_K}, got {0}")]
    KTooLarge(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    k: u32,
}

impl Params {
    pub fn new(k: u32) -> Result<Self, ParamError> {
        if k < 3 {
            Err(ParamError::KTooSmall(k))
        } else if k > MAX_K {
            Err(ParamError::KTooLarge(k))
        } else {
            Ok(Params { k })
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `floor(k / 2)`.
    pub fn half(&self) -> u32 {
        self.k / 2
    }

    /// Number of clocks per node, `max(0, floor(k/2) - 1)`.
    pub fn clock_count(&self) -> usize {
        (self.half() - 1) as usize
    }

    /// Number of distinct node states.
    pub fn states_per_node(&self) -> u64 {
        self.k as u64 * 2 * 8u64.pow(self.clock_count() as u32)
    }
}

#[repr(u8)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    UpdateDistance,
    BelongToTwoRulingSets,
    LeaderDown,
    TwoHeads,
    BranchIncoherence,
    RemoteCollision,
    IncrLeader,
    Sync1Down,
    Sync2PlusDown,
    Sync1PlusUp,
    SyncEndOfChain,
    BecomeLeader,
    ErrorSpread,
    ResetError,
}

impl RuleId {
    pub const ALL: [RuleId; 14] = [
        RuleId::UpdateDistance,
        RuleId::BelongToTwoRulingSets,
        RuleId::LeaderDown,
        RuleId::TwoHeads,
        RuleId::BranchIncoherence,
        RuleId::RemoteCollision,
        RuleId::IncrLeader,
        RuleId::Sync1Down,
        RuleId::Sync2PlusDown,
        RuleId::Sync1PlusUp,
        RuleId::SyncEndOfChain,
        RuleId::BecomeLeader,
        RuleId::ErrorSpread,
        RuleId::ResetError,
    ];

    /// Lower numbers take precedence.
    pub fn priority(self) -> u8 {
        use RuleId::*;
        match self {
            UpdateDistance | BelongToTwoRulingSets => 0,
            LeaderDown | TwoHeads | BranchIncoherence | RemoteCollision => 1,
            _ => 2,
        }
    }

    pub fn is_stationary(self) -> bool {
        use RuleId::*;
        matches!(self, IncrLeader | Sync1Down | Sync2PlusDown | Sync1PlusUp | SyncEndOfChain)
    }

    pub fn name(self) -> &'static str {
        use RuleId::*;
        match self {
            UpdateDistance => "update_distance",
            BelongToTwoRulingSets => "belong_to_two_ruling_sets",
            LeaderDown => "leader_down",
            TwoHeads => "two_heads",
            BranchIncoherence => "branch_incoherence",
            RemoteCollision => "remote_collision",
            IncrLeader => "incr_leader",
            Sync1Down => "sync_1_down",
            Sync2PlusDown => "sync_2plus_down",
            Sync1PlusUp => "sync_1plus_up",
            SyncEndOfChain => "sync_end_of_chain",
            BecomeLeader => "become_leader",
            ErrorSpread => "error_spread",
            ResetError => "reset_error",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleId> {
        RuleId::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of rules, iterated in declaration order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RuleSet(u16);

impl RuleSet {
    pub const EMPTY: RuleSet = RuleSet(0);

    pub fn insert(&mut self, r: RuleId) {
        self.0 |= 1 << r as u8;
    }

    pub fn contains(self, r: RuleId) -> bool {
        self.0 & (1 << r as u8) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = RuleId> {
        RuleId::ALL.into_iter().filter(move |&r| self.contains(r))
    }

    pub fn all_stationary(self) -> bool {
        self.iter().all(RuleId::is_stationary)
    }

    pub fn to_vec(self) -> Vec<RuleId> {
        self.iter().collect()
    }
}

impl FromIterator<RuleId> for RuleSet {
    fn from_iter<I: IntoIterator<Item = RuleId>>(iter: I) -> Self {
        let mut s = RuleSet::EMPTY;
        for r in iter {
            s.insert(r);
        }
        s
    }
}

/// Read access to one state per node. Implemented by plain state slices and
/// by the per-layer views of the layered coloring.
pub trait StateTable {
    fn state(&self, v: NodeId) -> &NodeState;
}

impl StateTable for [NodeState] {
    fn state(&self, v: NodeId) -> &NodeState {
        &self[v]
    }
}

/// The rule set for one `k`, plus switches used by mutation tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Protocol {
    pub params: Params,
    /// When false, Incr Leader ignores the neighbors' arrows. This variant is
    /// known to break closure and exists so the model checker can show it.
    pub incr_leader_requires_up: bool,
}

impl Protocol {
    pub fn new(params: Params) -> Self {
        Protocol { params, incr_leader_requires_up: true }
    }

    pub fn with_k(k: u32) -> Result<Self, ParamError> {
        Ok(Protocol::new(Params::new(k)?))
    }

    /// Rules that would fire at `u`, i.e. the activable rules of minimum
    /// priority number.
    pub fn eligible_rules(&self, g: &Graph, states: &[NodeState], u: NodeId) -> Result<RuleSet, EngineFault> {
        Ok(fire_at(self, &Local::new(self.params, g, states, u, false))?.map_or(RuleSet::EMPTY, |(_, r)| r))
    }
}

impl Automaton for Protocol {
    type State = NodeState;
    type Fired = RuleSet;

    fn fire(&self, g: &Graph, states: &[NodeState], u: NodeId) -> Result<Option<(NodeState, RuleSet)>, EngineFault> {
        fire_at(self, &Local::new(self.params, g, states, u, false))
    }

    fn is_stationary(&self, fired: &RuleSet) -> bool {
        fired.all_stationary()
    }
}

/// Rules fired per selected node in one step.
pub type ActionSet = Vec<(NodeId, RuleSet)>;

/// Pure one-step transition of the base protocol.
pub fn apply_step(
    g: &Graph,
    cfg: &Configuration,
    selected: &NodeSet,
) -> Result<(Configuration, ActionSet), StepError> {
    apply_step_with(&Protocol::new(cfg.params), g, cfg, selected)
}

pub fn apply_step_with(
    proto: &Protocol,
    g: &Graph,
    cfg: &Configuration,
    selected: &NodeSet,
) -> Result<(Configuration, ActionSet), StepError> {
    let (states, fired) = automaton::step(proto, g, &cfg.states, selected)?;
    let actions = fired.into_iter().map(|Firing { node, fired, .. }| (node, fired)).collect();
    Ok((Configuration { params: cfg.params, states }, actions))
}
