//! Coloring, ball maps, evaluation, all self-stabilizing stages run in
//! sequence on the same graph.
//!
//! Stage A computes a distance-2 coloring (layered, `k = 3`) whose `C` used
//! colors become the classes the greedy algorithms process in order; a
//! class-ordered greedy of `C` phases has radius `C`. Stage B computes a
//! distance-`(2C+1)` coloring (layered, `k = 2C + 2`) used as identifiers.
//! Stage C builds the radius-`C` ball maps from `⊥`.

use alloc::vec::Vec;

use thiserror::Error;

use super::{run_ball_maps, BallMap, BallState, BallSystem, LocalAlgorithm, LocalError};
use crate::graph::{Graph, NodeId};
use crate::layered::{check_coloring, default_layers, extract_coloring, run_layered, ColoringResult, LayeredConfiguration};
use crate::protocol::{ParamError, Params};
use crate::rng::XorShift64Star;
use crate::scheduler::{Daemon, RunError, Scheduler, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Classes,
    Identifiers,
    BallMaps,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Classes => "classes",
            Stage::Identifiers => "identifiers",
            Stage::BallMaps => "ball_maps",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("stage {}: {source}", .stage.name())]
    Run { stage: Stage, source: RunError },
    #[error("stage {}: not converged after {steps} steps", .stage.name())]
    NotConverged { stage: Stage, steps: u64 },
    #[error("stage {}: {} nodes left uncolored, raise the layer cap", .stage.name(), .nodes.len())]
    Uncolored { stage: Stage, nodes: Vec<NodeId> },
    #[error("stage {}: converged coloring failed verification", .stage.name())]
    InvalidColoring { stage: Stage },
    #[error("radius {0} needs an unsupported k: {1}")]
    Params(usize, ParamError),
    #[error(transparent)]
    Local(#[from] LocalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub daemon: Daemon,
    pub seed: u64,
    /// Step cap per stage.
    pub max_steps: u64,
    /// Upper bound on the number of layers of each coloring stage.
    pub layer_cap: usize,
    /// Start the coloring stages from random configurations instead of the
    /// uniform one.
    pub random_start: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { daemon: Daemon::CentralRandom, seed: 0, max_steps: 10_000_000, layer_cap: 64, random_start: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput<O> {
    /// Distance-2 coloring compacted to `1..=C`.
    pub classes: Vec<u32>,
    /// Distance-`(2r+1)` coloring used as identifiers.
    pub ids: Vec<u32>,
    pub radius: usize,
    pub maps: Vec<BallMap>,
    pub outputs: Vec<O>,
    /// Steps taken by stages A, B and C.
    pub steps: [u64; 3],
}

fn color_stage(
    g: &Graph,
    k: u32,
    cfg: &PipelineConfig,
    rng: &mut XorShift64Star,
    stage: Stage,
) -> Result<(ColoringResult, u64), PipelineError> {
    let params = Params::new(k).map_err(|e| PipelineError::Params(k as usize, e))?;
    let layers = default_layers(g, k, cfg.layer_cap.min(g.n()));
    let lcfg = if cfg.random_start {
        LayeredConfiguration::random(params, layers, g.n(), rng)
    } else {
        LayeredConfiguration::uniform(params, layers, g.n())
    };
    let mut sched = Scheduler::new(cfg.daemon.clone()).map_err(|e| PipelineError::Run { stage, source: e.into() })?;
    let (out, steps, term) =
        run_layered(g, lcfg, &mut sched, rng, cfg.max_steps).map_err(|source| PipelineError::Run { stage, source })?;
    if term != Termination::LegitimateReached {
        return Err(PipelineError::NotConverged { stage, steps });
    }
    let colors = extract_coloring(&out);
    let uncolored = colors.uncolored();
    if !uncolored.is_empty() {
        return Err(PipelineError::Uncolored { stage, nodes: uncolored });
    }
    if !check_coloring(g, &colors, k as usize - 1, Some(k as usize)).valid {
        return Err(PipelineError::InvalidColoring { stage });
    }
    log::debug!("stage {}: k={k} layers={layers} steps={steps} colors={}", stage.name(), colors.max_color());
    Ok((colors, steps))
}

/// Runs all stages and evaluates the algorithm built by `make` from the
/// number of classes and the maximum degree.
pub fn solve_pipeline<A: LocalAlgorithm>(
    g: &Graph,
    cfg: &PipelineConfig,
    make: impl FnOnce(u32, usize) -> A,
) -> Result<PipelineOutput<A::Output>, PipelineError> {
    let mut root = XorShift64Star::seed_from_u64(cfg.seed);
    let mut rng_a = root.fork();
    let mut rng_b = root.fork();
    let mut rng_c = root.fork();

    let (classes, steps_a) = color_stage(g, 3, cfg, &mut rng_a, Stage::Classes)?;
    let classes = classes.compacted();
    let alg = make(classes.max_color(), g.max_degree());
    let r = alg.radius();
    let k_b = u32::try_from(2 * r + 2).unwrap_or(u32::MAX);
    let (ids, steps_b) = color_stage(g, k_b, cfg, &mut rng_b, Stage::Identifiers)?;

    let classes: Vec<u32> = classes.colors.into_iter().map(Option::unwrap).collect();
    let ids: Vec<u32> = ids.colors.into_iter().map(Option::unwrap).collect();
    let sys = BallSystem::new(ids.clone(), classes.clone(), r);
    let mut sched =
        Scheduler::new(cfg.daemon.clone()).map_err(|e| PipelineError::Run { stage: Stage::BallMaps, source: e.into() })?;
    let (states, steps_c, _) = run_ball_maps(g, sys, alloc::vec![BallState::Bottom; g.n()], &mut sched, &mut rng_c, cfg.max_steps)
        .map_err(|source| PipelineError::Run { stage: Stage::BallMaps, source })?;
    let maps: Option<Vec<BallMap>> =
        states.into_iter().map(|s| if let BallState::Map(m) = s { (m.radius == r).then_some(m) } else { None }).collect();
    let maps = maps.ok_or(PipelineError::NotConverged { stage: Stage::BallMaps, steps: steps_c })?;
    let outputs = maps.iter().map(|m| alg.evaluate(m)).collect::<Result<Vec<_>, _>>()?;
    Ok(PipelineOutput { classes, ids, radius: r, maps, outputs, steps: [steps_a, steps_b, steps_c] })
}
