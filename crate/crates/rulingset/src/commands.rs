use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rulingset_core::hash::Fnv64;
use rulingset_core::layered::{check_coloring, default_layers, extract_coloring, LayeredConfiguration, LayeredEngine};
use rulingset_core::localsim::{
    is_maximal_independent_set, is_proper_coloring, solve_pipeline, GreedyColoring, GreedyMis, LocalAlgorithm,
    PipelineConfig, PipelineOutput,
};
use rulingset_core::modelcheck::{verify_closure, verify_reachability, StateSpaceResult, DEFAULT_BUDGET};
use rulingset_core::scheduler::{RunError, Scheduler, Simulation, StopWhen};
use rulingset_core::verifier::{self, is_ruling_set};
use rulingset_core::{Daemon, Graph, Params, Protocol, Termination, XorShift64Star};
use serde::Serialize;
use serde_json::json;

use crate::config::Settings;
use crate::error::{read_file, write_file, CliError, EXIT_BUDGET, EXIT_INVALID, EXIT_OK};
use crate::formats::{
    hex_hash, parse_config, ColoringCheckJson, ColoringJson, GraphJson, LegitimacyJson, OutputsJson, StateSpaceJson,
};
use crate::trace::{self, TraceLine, KIND_LAYERED};

pub const SIMULATE_MAX_STEPS: u64 = 1_000_000;
pub const COLOR_MAX_STEPS: u64 = 10_000_000;
pub const LAYER_CAP: usize = 64;

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string(value).expect("results serialize");
    writeln!(out, "{text}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn write_trace(settings: &Settings, lines: &[TraceLine]) -> Result<(), CliError> {
    if let Some(path) = settings.path("trace") {
        write_file(&path, &trace::to_jsonl(lines))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimSummary {
    pub seed: u64,
    pub steps: u64,
    pub termination: String,
    pub legitimate: bool,
    pub ruling_set: bool,
    pub leaders: Vec<usize>,
    /// `[step, m]` for every scramble actually applied.
    pub faults: Vec<[u64; 2]>,
    pub hash: String,
}

struct SimJob<'a> {
    g: &'a Graph,
    params: Params,
    daemon: Daemon,
    max_steps: u64,
    injections: Vec<(u64, usize)>,
    settings: &'a Settings,
    record: bool,
}

impl SimJob<'_> {
    /// Scrambles are applied at their step, or earlier if the run goes
    /// silent first. After the last one the run continues until it is
    /// legitimate or the total cap is reached.
    fn run(&self, seed: u64) -> Result<(SimSummary, Vec<TraceLine>), CliError> {
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let cfg0 = self.settings.initial(self.params, self.g.n(), &mut rng)?;
        let init = trace::init_line(&cfg0, self.daemon.name(), seed);
        let mut sim = Simulation::new(self.g, cfg0, Protocol::new(self.params), self.daemon.clone(), rng, self.record)?;
        let mut faults = Vec::new();
        for &(at, m) in &self.injections {
            let until = at.min(self.max_steps);
            if sim.steps() < until {
                sim.run(until - sim.steps(), StopWhen::Never)?;
            }
            let m = m.min(self.g.n());
            sim.inject_faults(m)?;
            faults.push([sim.steps(), m as u64]);
        }
        let (_, termination) = sim.run(self.max_steps.saturating_sub(sim.steps()), StopWhen::Legitimate)?;
        let cfg = sim.config();
        let report = verifier::is_legitimate(self.g, &cfg);
        let leaders = verifier::leaders(&cfg);
        let k = self.params.k() as usize;
        let summary = SimSummary {
            seed,
            steps: sim.steps(),
            termination: termination.as_str().into(),
            legitimate: report.legitimate,
            ruling_set: is_ruling_set(self.g, &leaders, k, k - 1),
            leaders: leaders.as_slice().to_vec(),
            faults,
            hash: hex_hash(cfg.hash64()),
        };
        let mut lines = Vec::new();
        if self.record {
            lines.push(init);
            lines.extend(sim.trace().unwrap_or_default().iter().map(trace::event_line));
            lines.push(trace::end_line(sim.steps(), termination.as_str(), cfg.hash64()));
        }
        Ok((summary, lines))
    }
}

/// Runs `f` on `0..count` with up to `jobs` threads; results keep index order.
pub fn par_map<T: Send>(count: usize, jobs: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let jobs = jobs.clamp(1, count.max(1));
    if jobs == 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = f(i);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every index ran")).collect()
}

pub fn simulate(settings: &Settings, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = settings.graph()?;
    let runs: u64 = settings.get_or("runs", 1)?;
    if runs == 0 {
        return Err(CliError::Usage("runs must be positive".into()));
    }
    if runs > 1 && settings.str("trace").is_some() {
        return Err(CliError::Usage("trace needs a single run".into()));
    }
    let job = SimJob {
        g: &g,
        params: settings.params(None)?,
        daemon: settings.daemon(Daemon::SubsetRandom(0.5))?,
        max_steps: settings.get_or("max_steps", SIMULATE_MAX_STEPS)?,
        injections: settings.injections()?,
        settings,
        record: settings.str("trace").is_some(),
    };
    let seed0: u64 = settings.get_or("seed", 0)?;
    let results = par_map(runs as usize, settings.get_or("jobs", 1)?, |i| job.run(seed0 + i as u64));
    let mut code = EXIT_OK;
    for r in results {
        let (summary, lines) = r?;
        log::info!("seed {}: {} after {} steps", summary.seed, summary.termination, summary.steps);
        if summary.termination == Termination::StepCap.as_str() {
            code = code.max(EXIT_BUDGET);
        } else if !(summary.legitimate && summary.ruling_set) {
            code = code.max(EXIT_INVALID);
        }
        emit(out, &summary)?;
        write_trace(settings, &lines)?;
    }
    Ok(code)
}

pub fn check(settings: &Settings, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = settings.graph()?;
    let path = settings.path("state").ok_or_else(|| CliError::Usage("check needs state".into()))?;
    let cfg = parse_config(&read_file(&path)?)?;
    if cfg.n() != g.n() {
        return Err(CliError::Usage(format!("state has {} nodes, graph has {}", cfg.n(), g.n())));
    }
    let report = verifier::is_legitimate(&g, &cfg);
    let leaders = verifier::leaders(&cfg);
    let k = cfg.params.k() as usize;
    let ruling = is_ruling_set(&g, &leaders, k, k - 1);
    emit(out, &LegitimacyJson::new(&report, leaders.as_slice().to_vec(), ruling))?;
    Ok(if report.legitimate { EXIT_OK } else { EXIT_INVALID })
}

pub fn modelcheck(settings: &Settings, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = settings.graph()?;
    let proto = Protocol::new(settings.params(None)?);
    let budget = settings.get_or("budget", DEFAULT_BUDGET)?;
    let (closure, reach) = match settings.str("check").unwrap_or("both") {
        "closure" => (true, false),
        "reachability" => (false, true),
        "both" => (true, true),
        other => return Err(CliError::Usage(format!("unknown check {other:?} (closure, reachability, both)"))),
    };
    let mut results: Vec<(&str, StateSpaceResult)> = Vec::new();
    if closure {
        results.push(("closure", verify_closure(&g, &proto, budget)?));
    }
    if reach {
        results.push(("reachability", verify_reachability(&g, &proto, settings.start()?, budget)?));
    }
    let mut report = serde_json::Map::new();
    let mut ok = true;
    let mut cx_written = false;
    for (name, r) in &results {
        ok &= r.closure_verified.unwrap_or(true) && r.reachability_verified.unwrap_or(true);
        report.insert((*name).into(), serde_json::to_value(StateSpaceJson::from_result(r)).unwrap());
        if let (Some(cx), false) = (&r.counterexample, cx_written) {
            write_trace(settings, &trace::counterexample_lines(&g, cx)?)?;
            cx_written = true;
        }
    }
    emit(out, &report)?;
    Ok(if ok { EXIT_OK } else { EXIT_INVALID })
}

pub fn color(settings: &Settings, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = settings.graph()?;
    let params = settings.params(Some(3))?;
    let k = params.k();
    let big_k: usize = settings.get_or("big_k", k as usize - 1)?;
    if big_k >= k as usize {
        return Err(CliError::Usage(format!("big_k must be below k = {k}")));
    }
    let layers = match settings.get::<usize>("layers")? {
        Some(0) => return Err(CliError::Usage("layers must be positive".into())),
        Some(l) => l,
        None => default_layers(&g, k, settings.get_or("layer_cap", LAYER_CAP)?),
    };
    let seed: u64 = settings.get_or("seed", 0)?;
    let max_steps: u64 = settings.get_or("max_steps", COLOR_MAX_STEPS)?;
    let daemon = settings.daemon(Daemon::CentralRandom)?;
    let mut rng = XorShift64Star::seed_from_u64(seed);
    let lcfg0 = match settings.str("init").unwrap_or("random") {
        "random" => LayeredConfiguration::random(params, layers, g.n(), &mut rng),
        "uniform" => LayeredConfiguration::uniform(params, layers, g.n()),
        other => return Err(CliError::Usage(format!("color init must be random or uniform, got {other:?}"))),
    };
    let record = settings.str("trace").is_some();
    let mut lines = Vec::new();
    if record {
        lines.push(TraceLine::Init {
            kind: KIND_LAYERED.into(),
            k,
            n: g.n(),
            layers: Some(layers),
            daemon: daemon.name().into(),
            seed,
            hash: hex_hash(lcfg0.hash64()),
            config: None,
        });
    }
    let mut sched = Scheduler::new(daemon).map_err(RunError::from)?;
    let mut engine = LayeredEngine::new(&g, lcfg0).map_err(RunError::from)?;
    let termination = loop {
        if engine.unsettled_count() == 0 && engine.is_legitimate() {
            break Termination::LegitimateReached;
        }
        if engine.activable_count() == 0 {
            break Termination::StationaryFixpoint;
        }
        if engine.steps() >= max_steps {
            break Termination::StepCap;
        }
        let selected = sched.select(&engine.activable(), &mut rng).map_err(RunError::from)?;
        let fired = engine.step(&selected).map_err(RunError::from)?;
        if record {
            lines.push(TraceLine::Step {
                step: engine.steps(),
                selected: selected.as_slice().to_vec(),
                fired: trace::layered_fired_json(&fired),
                hash: hex_hash(engine.config().hash64()),
                delta: Vec::new(),
            });
        }
    };
    let steps = engine.steps();
    let lcfg = engine.into_config();
    if record {
        lines.push(trace::end_line(steps, termination.as_str(), lcfg.hash64()));
        write_trace(settings, &lines)?;
    }
    let coloring = extract_coloring(&lcfg);
    let report = check_coloring(&g, &coloring, big_k, Some(k as usize));
    if let Some(path) = settings.path("out") {
        write_file(&path, &serde_json::to_string(&ColoringJson::from_result(&coloring)).unwrap())?;
    }
    emit(
        out,
        &json!({
            "k": k,
            "big_k": big_k,
            "layers": layers,
            "steps": steps,
            "termination": termination.as_str(),
            "coloring": ColoringJson::from_result(&coloring),
            "check": ColoringCheckJson::from_report(&report),
            "hash": hex_hash(lcfg.hash64()),
        }),
    )?;
    Ok(match termination {
        Termination::StepCap => EXIT_BUDGET,
        _ if report.valid => EXIT_OK,
        _ => EXIT_INVALID,
    })
}

fn pipeline_hash<O: Serialize>(p: &PipelineOutput<O>) -> u64 {
    let mut h = Fnv64::new();
    for (&c, &id) in p.classes.iter().zip(&p.ids) {
        h.write_u32(c);
        h.write_u32(id);
    }
    h.write(serde_json::to_string(&p.outputs).unwrap().as_bytes());
    h.finish()
}

fn solve_with<A: LocalAlgorithm>(
    g: &Graph,
    cfg: &PipelineConfig,
    problem: &str,
    make: impl FnOnce(u32, usize) -> A,
    validate: impl FnOnce(&[A::Output]) -> bool,
    settings: &Settings,
    out: &mut dyn Write,
) -> Result<u8, CliError>
where
    A::Output: Serialize,
{
    let res = solve_pipeline(g, cfg, make)?;
    let valid = validate(&res.outputs);
    let outputs = OutputsJson { problem: problem.to_string(), outputs: res.outputs.clone() };
    if let Some(path) = settings.path("out") {
        write_file(&path, &serde_json::to_string(&outputs).unwrap())?;
    }
    emit(
        out,
        &json!({
            "problem": problem,
            "outputs": res.outputs,
            "valid": valid,
            "classes": res.classes.iter().max().copied().unwrap_or(0),
            "radius": res.radius,
            "steps": res.steps,
            "hash": hex_hash(pipeline_hash(&res)),
        }),
    )?;
    Ok(if valid { EXIT_OK } else { EXIT_INVALID })
}

pub fn solve(settings: &Settings, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = settings.graph()?;
    let cfg = PipelineConfig {
        daemon: settings.daemon(Daemon::CentralRandom)?,
        seed: settings.get_or("seed", 0)?,
        max_steps: settings.get_or("max_steps", COLOR_MAX_STEPS)?,
        layer_cap: settings.get_or("layer_cap", LAYER_CAP)?,
        random_start: match settings.str("init").unwrap_or("random") {
            "random" => true,
            "uniform" => false,
            other => return Err(CliError::Usage(format!("solve init must be random or uniform, got {other:?}"))),
        },
    };
    let palette = g.max_degree() as u32 + 1;
    match settings.str("problem").unwrap_or("mis") {
        "mis" => solve_with(
            &g,
            &cfg,
            "mis",
            |classes, _| GreedyMis { classes },
            |o| is_maximal_independent_set(&g, o),
            settings,
            out,
        ),
        "coloring" => solve_with(
            &g,
            &cfg,
            "coloring",
            |classes, _| GreedyColoring { classes, palette },
            |o| is_proper_coloring(&g, o, palette),
            settings,
            out,
        ),
        other => Err(CliError::Usage(format!("unknown problem {other:?} (mis, coloring)"))),
    }
}

pub fn generate(settings: &Settings, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = settings.graph()?;
    let text = match settings.str("format").unwrap_or("edges") {
        "edges" => g.write_edge_list(),
        "json" => serde_json::to_string(&GraphJson::from_graph(&g)).unwrap() + "\n",
        other => return Err(CliError::Usage(format!("unknown format {other:?} (edges, json)"))),
    };
    match settings.path("out") {
        Some(path) => write_file(&path, &text)?,
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    Ok(EXIT_OK)
}

pub fn replay(settings: &Settings, out: &mut dyn Write) -> Result<u8, CliError> {
    let g = settings.graph()?;
    let path = settings.path("trace").ok_or_else(|| CliError::Usage("replay needs trace".into()))?;
    let lines = trace::parse_jsonl(&read_file(&path)?)?;
    let r = trace::replay(&g, &lines)?;
    emit(out, &json!({"consistent": true, "steps": r.steps, "faults": r.faults, "hash": hex_hash(r.last.hash64())}))?;
    Ok(EXIT_OK)
}
