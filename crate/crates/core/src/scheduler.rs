//! Daemons and the run loop.
//!
//! The Gouda fairness condition cannot be implemented by a finite scheduler;
//! `SubsetRandom(p)` approximates it by giving every nonempty subset of the
//! activable nodes positive probability at every step. `RoundRobinFair` is a
//! deterministic convenience for smoke tests and does not satisfy Gouda in
//! general. `Scripted` replays a fixed activation order, e.g. the constructive
//! steps of a convergence argument.
//!
//! Random draws: `SubsetRandom` draws `chance(p)` once per activable node in
//! increasing handle order and repeats the whole round until the subset is
//! nonempty; `CentralRandom` draws one `index(len)` over the sorted activable
//! list.

use alloc::vec::Vec;

use thiserror::Error;

use crate::automaton::{Automaton, Engine, EngineFault, Firing, StepError};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::protocol::{Configuration, NodeState, Protocol, RuleSet};
use crate::rng::XorShift64Star;
use crate::verifier::{self, LegitimacyTracker};

#[derive(Debug, Clone, PartialEq)]
pub enum Daemon {
    Synchronous,
    CentralRandom,
    SubsetRandom(f64),
    Scripted(Vec<NodeSet>),
    RoundRobinFair,
}

impl Daemon {
    pub fn name(&self) -> &'static str {
        match self {
            Daemon::Synchronous => "synchronous",
            Daemon::CentralRandom => "central-random",
            Daemon::SubsetRandom(_) => "subset-random",
            Daemon::Scripted(_) => "scripted",
            Daemon::RoundRobinFair => "round-robin",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("subset probability must be in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("no activable node to select from")]
    NothingActivable,
    #[error("script exhausted after {0} selections")]
    ScriptExhausted(usize),
    #[error("scripted selection {0} contains no activable node")]
    EmptyIntersection(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Step(#[from] StepError),
}

impl From<EngineFault> for RunError {
    fn from(e: EngineFault) -> Self {
        RunError::Step(StepError::Fault(e))
    }
}

/// A daemon together with its cursor state.
#[derive(Debug, Clone)]
pub struct Scheduler {
    daemon: Daemon,
    cursor: usize,
}

impl Scheduler {
    pub fn new(daemon: Daemon) -> Result<Self, ScheduleError> {
        if let Daemon::SubsetRandom(p) = daemon {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ScheduleError::InvalidProbability(p));
            }
        }
        Ok(Scheduler { daemon, cursor: 0 })
    }

    pub fn daemon(&self) -> &Daemon {
        &self.daemon
    }

    /// Picks a nonempty subset of `activable` (sorted, duplicate-free).
    pub fn select(&mut self, activable: &[NodeId], rng: &mut XorShift64Star) -> Result<NodeSet, ScheduleError> {
        if activable.is_empty() {
            return Err(ScheduleError::NothingActivable);
        }
        match &self.daemon {
            Daemon::Synchronous => Ok(NodeSet::from_sorted(activable.to_vec())),
            Daemon::CentralRandom => Ok(NodeSet::single(activable[rng.index(activable.len())])),
            &Daemon::SubsetRandom(p) => loop {
                let picked: Vec<NodeId> = activable.iter().copied().filter(|_| rng.chance(p)).collect();
                if !picked.is_empty() {
                    return Ok(NodeSet::from_sorted(picked));
                }
            },
            Daemon::Scripted(script) => {
                let at = self.cursor;
                let want = script.get(at).ok_or(ScheduleError::ScriptExhausted(at))?;
                self.cursor += 1;
                let picked: Vec<NodeId> = want.iter().filter(|u| activable.binary_search(u).is_ok()).collect();
                if picked.is_empty() {
                    return Err(ScheduleError::EmptyIntersection(at));
                }
                Ok(NodeSet::from_sorted(picked))
            }
            Daemon::RoundRobinFair => {
                let start = self.cursor;
                let pos = activable.partition_point(|&u| u < start);
                let u = activable.get(pos).copied().unwrap_or(activable[0]);
                self.cursor = u + 1;
                Ok(NodeSet::single(u))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    LegitimateReached,
    StepCap,
    StationaryFixpoint,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::LegitimateReached => "legitimate_reached",
            Termination::StepCap => "step_cap",
            Termination::StationaryFixpoint => "stationary_fixpoint",
        }
    }
}

/// Drives any automaton: select, step, and stop when `stop` holds, when no
/// node is activable, or after `max_steps` further steps. `stop` is called
/// once before the first step (with `None`) and after every step.
pub fn drive<A: Automaton>(
    engine: &mut Engine<'_, A>,
    sched: &mut Scheduler,
    rng: &mut XorShift64Star,
    max_steps: u64,
    mut stop: impl FnMut(&Engine<'_, A>, Option<(&NodeSet, &[Firing<A::Fired>])>) -> bool,
) -> Result<(u64, Termination), RunError> {
    if stop(engine, None) {
        return Ok((0, Termination::LegitimateReached));
    }
    let mut done = 0;
    loop {
        if engine.activable_count() == 0 {
            return Ok((done, Termination::StationaryFixpoint));
        }
        if done >= max_steps {
            return Ok((done, Termination::StepCap));
        }
        let selected = sched.select(&engine.activable(), rng)?;
        let fired = engine.step(&selected)?;
        done += 1;
        if stop(engine, Some((&selected, &fired))) {
            return Ok((done, Termination::LegitimateReached));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopWhen {
    Legitimate,
    Never,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: u64,
    pub selected: NodeSet,
    pub fired: Vec<(NodeId, RuleSet)>,
    pub hash: u64,
    /// Post-step states of the nodes that changed.
    pub delta: Vec<(NodeId, NodeState)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Step(TraceStep),
    /// States overwritten from outside the protocol after `step` steps.
    Fault { step: u64, nodes: NodeSet, hash: u64, delta: Vec<(NodeId, NodeState)> },
}

impl TraceEvent {
    pub fn hash(&self) -> u64 {
        match self {
            TraceEvent::Step(s) => s.hash,
            TraceEvent::Fault { hash, .. } => *hash,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: Configuration,
    pub steps: u64,
    pub termination: Termination,
    pub trace: Option<Vec<TraceEvent>>,
}

/// What one step of a [`Simulation`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub selected: NodeSet,
    pub fired: Vec<(NodeId, RuleSet)>,
    /// Nodes whose `d` changed.
    pub d_changed: Vec<NodeId>,
}

/// A run of the base protocol that can be advanced, perturbed and inspected.
/// Legitimacy is tracked incrementally and confirmed by the verifier.
pub struct Simulation<'g> {
    engine: Engine<'g, Protocol>,
    sched: Scheduler,
    rng: XorShift64Star,
    tracker: LegitimacyTracker,
    trace: Option<Vec<TraceEvent>>,
}

impl<'g> Simulation<'g> {
    pub fn new(
        g: &'g Graph,
        cfg0: Configuration,
        proto: Protocol,
        daemon: Daemon,
        rng: XorShift64Star,
        record_trace: bool,
    ) -> Result<Self, RunError> {
        assert_eq!(cfg0.params, proto.params, "configuration and protocol disagree on k");
        let sched = Scheduler::new(daemon)?;
        let tracker = LegitimacyTracker::new(g, &cfg0);
        let engine = Engine::new(proto, g, cfg0.states)?;
        Ok(Simulation { engine, sched, rng, tracker, trace: record_trace.then(Vec::new) })
    }

    pub fn graph(&self) -> &'g Graph {
        self.engine.graph()
    }

    pub fn engine(&self) -> &Engine<'g, Protocol> {
        &self.engine
    }

    pub fn states(&self) -> &[NodeState] {
        self.engine.states()
    }

    pub fn config(&self) -> Configuration {
        Configuration { params: self.engine.automaton().params, states: self.engine.states().to_vec() }
    }

    pub fn steps(&self) -> u64 {
        self.engine.steps()
    }

    pub fn rng_mut(&mut self) -> &mut XorShift64Star {
        &mut self.rng
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn is_legitimate(&mut self) -> bool {
        if self.engine.unsettled_count() > 0 {
            // Only stationary rules are eligible in a legitimate configuration.
            return false;
        }
        let params = self.engine.automaton().params;
        let ok = self.tracker.is_legitimate(self.engine.graph(), params, self.engine.states());
        debug_assert_eq!(ok, verifier::is_legitimate(self.engine.graph(), &self.config()).legitimate);
        ok
    }

    /// One select-and-apply step; `None` if no node is activable.
    pub fn step(&mut self) -> Result<Option<StepOutcome>, RunError> {
        if self.engine.activable_count() == 0 {
            return Ok(None);
        }
        let selected = self.sched.select(&self.engine.activable(), &mut self.rng)?;
        let firings = self.engine.step(&selected)?;
        let changed: Vec<NodeId> = firings.iter().filter(|f| f.changed).map(|f| f.node).collect();
        let d_changed = self.tracker.update(self.engine.graph(), self.engine.automaton().params, self.engine.states(), &changed);
        let fired: Vec<(NodeId, RuleSet)> = firings.into_iter().map(|f| (f.node, f.fired)).collect();
        if let Some(trace) = &mut self.trace {
            let states = self.engine.states();
            trace.push(TraceEvent::Step(TraceStep {
                step: self.engine.steps(),
                selected: selected.clone(),
                fired: fired.clone(),
                hash: Configuration { params: self.engine.automaton().params, states: states.to_vec() }.hash64(),
                delta: changed.iter().map(|&u| (u, states[u])).collect(),
            }));
        }
        Ok(Some(StepOutcome { selected, fired, d_changed }))
    }

    /// Runs at most `max_steps` further steps.
    pub fn run(&mut self, max_steps: u64, stop: StopWhen) -> Result<(u64, Termination), RunError> {
        let mut done = 0;
        loop {
            if stop == StopWhen::Legitimate && self.is_legitimate() {
                return Ok((done, Termination::LegitimateReached));
            }
            if done >= max_steps {
                return Ok((done, Termination::StepCap));
            }
            if self.step()?.is_none() {
                return Ok((done, Termination::StationaryFixpoint));
            }
            done += 1;
        }
    }

    /// Scrambles `m` uniformly chosen nodes (see [`verifier::inject_faults`]).
    pub fn inject_faults(&mut self, m: usize) -> Result<NodeSet, RunError> {
        let (cfg, nodes) = verifier::inject_faults(&self.config(), m, &mut self.rng);
        self.overwrite(cfg, nodes.clone())?;
        Ok(nodes)
    }

    /// Replaces the configuration from outside the protocol.
    pub fn overwrite(&mut self, cfg: Configuration, nodes: NodeSet) -> Result<(), RunError> {
        let before = self.engine.states().to_vec();
        self.engine.replace_states(cfg.states)?;
        let changed: Vec<NodeId> = (0..before.len()).filter(|&u| before[u] != self.engine.states()[u]).collect();
        self.tracker.update(self.engine.graph(), self.engine.automaton().params, self.engine.states(), &changed);
        if let Some(trace) = &mut self.trace {
            let states = self.engine.states();
            trace.push(TraceEvent::Fault {
                step: self.engine.steps(),
                nodes,
                hash: Configuration { params: self.engine.automaton().params, states: states.to_vec() }.hash64(),
                delta: changed.iter().map(|&u| (u, states[u])).collect(),
            });
        }
        Ok(())
    }

    pub fn finish(self, termination: Termination) -> RunResult {
        let params = self.engine.automaton().params;
        let steps = self.engine.steps();
        RunResult {
            config: Configuration { params, states: self.engine.into_states() },
            steps,
            termination,
            trace: self.trace,
        }
    }
}

/// Runs the base protocol from `cfg0` for at most `cap` steps.
pub fn run(
    g: &Graph,
    cfg0: Configuration,
    daemon: Daemon,
    cap: u64,
    stop: StopWhen,
    rng: XorShift64Star,
    record_trace: bool,
) -> Result<RunResult, RunError> {
    let proto = Protocol::new(cfg0.params);
    let mut sim = Simulation::new(g, cfg0, proto, daemon, rng, record_trace)?;
    let (_, termination) = sim.run(cap, stop)?;
    Ok(sim.finish(termination))
}
