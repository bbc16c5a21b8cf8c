//! Self-stabilizing `(k, k-1)`-ruling sets in anonymous shared-memory networks.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! parts: the guarded-command protocol, daemons, verification oracles, an
//! explicit-state model checker, the layered distance-K coloring and the
//! ball-map based LOCAL simulation. File formats, traces and the command line
//! driver live in the `rulingset` crate.
//!
//! Node handles are dense integers used by the simulator only. Guards and
//! commands read the states of a node and its neighbors, never handles.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod automaton;
pub mod graph;
pub mod hash;
pub mod layered;
pub mod localsim;
pub mod modelcheck;
pub mod protocol;
pub mod rng;
pub mod scheduler;
pub mod verifier;

pub use automaton::{Automaton, EngineFault};
pub use graph::{Graph, GraphError, GraphKind, NodeId, NodeSet};
pub use protocol::{
    apply_step, Arrow, Clock, Configuration, NodeState, Params, Protocol, RuleId, RuleSet,
    StepError, Tick,
};
pub use rng::XorShift64Star;
pub use scheduler::{Daemon, RunResult, Termination};
