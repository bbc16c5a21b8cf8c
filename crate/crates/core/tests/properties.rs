use proptest::prelude::*;

use rulingset_core::automaton::Automaton;
use rulingset_core::graph::UNREACHABLE;
use rulingset_core::layered::{apply_layered_step, is_layer_legitimate, run_layered, LayeredConfiguration};
use rulingset_core::localsim::{
    direct_ball_map, run_ball_maps, sequential_greedy_coloring, sequential_greedy_mis, BallState, BallSystem, GreedyColoring,
    GreedyMis, LocalAlgorithm,
};
use rulingset_core::modelcheck::floyd_warshall;
use rulingset_core::protocol::apply_step;
use rulingset_core::scheduler::{Scheduler, Simulation, StopWhen};
use rulingset_core::verifier::{self, is_legitimate, is_ruling_set, leaders, random_configuration};
use rulingset_core::*;

fn graph(n: usize, max_degree: usize, seed: u64) -> Graph {
    Graph::generate(&GraphKind::RandomBoundedDegree { n, max_degree, seed }).unwrap()
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 2usize..=5, any::<u64>()).prop_map(|(n, d, s)| graph(n, d, s))
}

/// Drives a random configuration to legitimacy.
fn converged(g: &Graph, k: u32, seed: u64) -> Configuration {
    let p = Params::new(k).unwrap();
    let mut rng = XorShift64Star::seed_from_u64(seed);
    let cfg = random_configuration(p, g.n(), &mut rng);
    let mut sim = Simulation::new(g, cfg, Protocol::new(p), Daemon::SubsetRandom(0.5), rng, false).unwrap();
    let (_, term) = sim.run(1_000_000, StopWhen::Legitimate).unwrap();
    assert_eq!(term, Termination::LegitimateReached);
    sim.config()
}

fn random_selection(active: &[NodeId], rng: &mut XorShift64Star) -> NodeSet {
    let mut sel: NodeSet = active.iter().copied().filter(|_| rng.chance(0.5)).collect();
    if sel.is_empty() {
        sel.insert(active[rng.index(active.len())]);
    }
    sel
}

fn activable(g: &Graph, p: &Protocol, cfg: &Configuration) -> Vec<NodeId> {
    g.nodes().filter(|&u| !p.eligible_rules(g, &cfg.states, u).unwrap().is_empty()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_list_round_trip(g in arb_graph(40)) {
        prop_assert_eq!(Graph::parse_edge_list(&g.write_edge_list()).unwrap(), g);
    }

    #[test]
    fn bfs_matches_floyd_warshall(g in arb_graph(30)) {
        let fw = floyd_warshall(&g);
        for u in g.nodes() {
            prop_assert_eq!(&g.distances_from(u), &fw[u]);
        }
    }

    #[test]
    fn ball_is_bfs_sublevel(g in arb_graph(30), r in 0usize..6, c in any::<prop::sample::Index>()) {
        let u = c.index(g.n());
        let dist = g.distances_from(u);
        let expected: NodeSet = g.nodes().filter(|&v| dist[v] != UNREACHABLE && dist[v] <= r).collect();
        prop_assert_eq!(g.ball(u, r), expected);
    }

    #[test]
    fn guards_only_read_the_closed_neighborhood(g in arb_graph(20), k in 3u32..=7, seed in any::<u64>()) {
        let p = Params::new(k).unwrap();
        let proto = Protocol::new(p);
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let cfg = random_configuration(p, g.n(), &mut rng);
        for u in g.nodes() {
            let before = proto.fire(&g, &cfg.states, u).unwrap();
            let mut other = cfg.clone();
            for v in g.nodes() {
                if v != u && !g.has_edge(u, v) {
                    other.states[v] = verifier::random_state(p, &mut rng);
                }
            }
            prop_assert_eq!(proto.fire(&g, &other.states, u).unwrap(), before);
        }
    }

    #[test]
    fn steps_stay_in_range(g in arb_graph(20), k in 3u32..=7, seed in any::<u64>()) {
        let p = Params::new(k).unwrap();
        let proto = Protocol::new(p);
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let mut cfg = random_configuration(p, g.n(), &mut rng);
        for _ in 0..200 {
            let act = activable(&g, &proto, &cfg);
            if act.is_empty() {
                break;
            }
            let sel = random_selection(&act, &mut rng);
            cfg = apply_step(&g, &cfg, &sel).unwrap().0;
            prop_assert!(cfg.is_valid());
        }
    }

    #[test]
    fn legitimate_configurations_are_closed(g in arb_graph(25), k in 3u32..=6, seed in any::<u64>()) {
        let cfg0 = converged(&g, k, seed);
        let proto = Protocol::new(cfg0.params);
        let d0 = cfg0.distances();
        let s = leaders(&cfg0);
        prop_assert!(is_ruling_set(&g, &s, k as usize, k as usize - 1));
        let h = k as usize / 2;
        for leader in &s {
            let dist = g.distances_from(leader);
            for u in g.nodes().filter(|&u| dist[u] <= h) {
                prop_assert_eq!(cfg0.states[u].d as usize, dist[u]);
            }
        }
        let mut rng = XorShift64Star::seed_from_u64(seed ^ 1);
        let mut cfg = cfg0;
        for _ in 0..100 {
            for u in g.nodes() {
                prop_assert!(proto.eligible_rules(&g, &cfg.states, u).unwrap().all_stationary());
            }
            let act = activable(&g, &proto, &cfg);
            if act.is_empty() {
                break;
            }
            cfg = apply_step(&g, &cfg, &random_selection(&act, &mut rng)).unwrap().0;
            prop_assert!(is_legitimate(&g, &cfg).legitimate);
            prop_assert_eq!(cfg.distances(), d0.clone());
        }
    }

    #[test]
    fn local_legitimacy_is_monotone(g in arb_graph(25), k in 4u32..=6, seed in any::<u64>()) {
        let p = Params::new(k).unwrap();
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let cfg = random_configuration(p, g.n(), &mut rng);
        let mut sim = Simulation::new(&g, cfg, Protocol::new(p), Daemon::SubsetRandom(0.5), rng, false).unwrap();
        let mut ll: Vec<NodeId> = Vec::new();
        for _ in 0..400 {
            let cfg = sim.config();
            let now: Vec<NodeId> = g.nodes().filter(|&s| verifier::is_locally_legitimate(&g, &cfg, s)).collect();
            for s in &ll {
                prop_assert!(now.contains(s), "node {} stopped being locally legitimate", s);
            }
            for &s in &now {
                let ball = g.ball(s, k as usize - 1);
                prop_assert!(ball.iter().all(|v| v == s || cfg.states[v].d != 0));
            }
            ll = now;
            if sim.step().unwrap().is_none() {
                break;
            }
        }
    }

    #[test]
    fn runs_are_reproducible(g in arb_graph(30), k in 3u32..=5, seed in any::<u64>()) {
        let p = Params::new(k).unwrap();
        let run = || {
            let mut rng = XorShift64Star::seed_from_u64(seed);
            let cfg = random_configuration(p, g.n(), &mut rng);
            scheduler::run(&g, cfg, Daemon::SubsetRandom(0.5), 100_000, StopWhen::Legitimate, rng, true).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn daemons_select_activable_nodes(seed in any::<u64>(), len in 1usize..20, which in 0usize..4) {
        let daemon = [Daemon::Synchronous, Daemon::CentralRandom, Daemon::SubsetRandom(0.3), Daemon::RoundRobinFair][which].clone();
        let mut sched = Scheduler::new(daemon).unwrap();
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let active: Vec<NodeId> = (0..len).map(|i| i * 3 + 1).collect();
        for _ in 0..20 {
            let sel = sched.select(&active, &mut rng).unwrap();
            prop_assert!(!sel.is_empty());
            prop_assert!(sel.iter().all(|u| active.contains(&u)));
        }
    }

    #[test]
    fn layer_one_projects_to_base(g in arb_graph(15), k in 3u32..=5, seed in any::<u64>()) {
        let p = Params::new(k).unwrap();
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let mut lcfg = LayeredConfiguration::random(p, 3, g.n(), &mut rng);
        let mut base = lcfg.layer(1);
        let proto = Protocol::new(p);
        for _ in 0..100 {
            let act: Vec<NodeId> = g.nodes().filter(|&u| rulingset_core::layered::layered_eligible(&g, &lcfg, u).unwrap().iter().any(|r| !r.is_empty())).collect();
            if act.is_empty() {
                break;
            }
            let sel = random_selection(&act, &mut rng);
            lcfg = apply_layered_step(&g, &lcfg, &sel).unwrap().0;
            let base_sel: NodeSet = sel.iter().filter(|&u| !proto.eligible_rules(&g, &base.states, u).unwrap().is_empty()).collect();
            if !base_sel.is_empty() {
                base = apply_step(&g, &base, &base_sel).unwrap().0;
            }
            prop_assert_eq!(lcfg.layer(1), base.clone());
        }
    }

    #[test]
    fn layered_d_values_freeze_once_legitimate(g in arb_graph(20), seed in any::<u64>()) {
        let p = Params::new(3).unwrap();
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let lcfg = LayeredConfiguration::random(p, 12, g.n(), &mut rng);
        let mut sched = Scheduler::new(Daemon::SubsetRandom(0.5)).unwrap();
        let (mut lcfg, _, term) = run_layered(&g, lcfg, &mut sched, &mut rng, 1_000_000).unwrap();
        prop_assert_eq!(term, Termination::LegitimateReached);
        let d0: Vec<Vec<u32>> = lcfg.states.iter().map(|s| s.iter().map(|x| x.d).collect()).collect();
        for _ in 0..100 {
            let act: Vec<NodeId> = g.nodes().filter(|&u| rulingset_core::layered::layered_eligible(&g, &lcfg, u).unwrap().iter().any(|r| !r.is_empty())).collect();
            if act.is_empty() {
                break;
            }
            lcfg = apply_layered_step(&g, &lcfg, &random_selection(&act, &mut rng)).unwrap().0;
            prop_assert!(is_layer_legitimate(&g, &lcfg, 12));
            let d: Vec<Vec<u32>> = lcfg.states.iter().map(|s| s.iter().map(|x| x.d).collect()).collect();
            prop_assert_eq!(&d, &d0);
        }
    }

    #[test]
    fn ball_levels_only_grow(g in arb_graph(20), r in 0usize..4, seed in any::<u64>()) {
        let ids: Vec<u32> = (0..g.n() as u32).map(|x| x * 7 + 3).collect();
        let inputs: Vec<u32> = (0..g.n() as u32).map(|x| x % 4).collect();
        let sys = BallSystem::new(ids.clone(), inputs.clone(), r);
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let mut states = vec![BallState::Bottom; g.n()];
        loop {
            let act: Vec<NodeId> = g.nodes().filter(|&u| sys.fire(&g, &states, u).unwrap().is_some()).collect();
            if act.is_empty() {
                break;
            }
            let sel = random_selection(&act, &mut rng);
            let (next, _) = rulingset_core::automaton::step(&sys, &g, &states, &sel).unwrap();
            for u in g.nodes() {
                prop_assert!(next[u].level() >= states[u].level());
            }
            states = next;
        }
        for u in g.nodes() {
            prop_assert_eq!(states[u].map(), Some(&direct_ball_map(&g, &ids, &inputs, u, r).unwrap()));
        }
        let mut sched = Scheduler::new(Daemon::CentralRandom).unwrap();
        let (again, steps, _) = run_ball_maps(&g, sys, states.clone(), &mut sched, &mut rng, 10).unwrap();
        prop_assert_eq!(steps, 0);
        prop_assert_eq!(again, states);
    }

    #[test]
    fn local_greedy_equals_sequential(g in arb_graph(30), seed in any::<u64>()) {
        // Any proper coloring works as classes; use a greedy one in a random order.
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let mut order: Vec<NodeId> = g.nodes().collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.index(i + 1));
        }
        let mut classes = vec![0u32; g.n()];
        for &u in &order {
            classes[u] = (1..).find(|c| g.neighbors(u).iter().all(|&v| classes[v] != *c)).unwrap();
        }
        let c = *classes.iter().max().unwrap();
        let ids: Vec<u32> = g.nodes().map(|u| u as u32).collect();
        let mis = GreedyMis { classes: c };
        let col = GreedyColoring { classes: c, palette: g.max_degree() as u32 + 1 };
        let local_mis: Vec<bool> = g.nodes().map(|u| mis.evaluate(&direct_ball_map(&g, &ids, &classes, u, mis.radius()).unwrap()).unwrap()).collect();
        let local_col: Vec<u32> = g.nodes().map(|u| col.evaluate(&direct_ball_map(&g, &ids, &classes, u, col.radius()).unwrap()).unwrap()).collect();
        prop_assert_eq!(local_mis, sequential_greedy_mis(&g, &classes));
        prop_assert_eq!(local_col, sequential_greedy_coloring(&g, &classes));
    }
}

#[test]
fn no_write_conflicts_over_a_million_steps() {
    let mut total = 0u64;
    let mut seed = 0;
    while total < 1_000_000 {
        seed += 1;
        let k = 3 + (seed % 5) as u32;
        let g = graph(60, 4, seed);
        let p = Params::new(k).unwrap();
        let mut rng = XorShift64Star::seed_from_u64(seed);
        let cfg = random_configuration(p, g.n(), &mut rng);
        let mut sim = Simulation::new(&g, cfg, Protocol::new(p), Daemon::SubsetRandom(0.5), rng, false).unwrap();
        // Keep going after legitimacy, with faults now and then so that the
        // non-stationary rules keep being exercised.
        for round in 0..20 {
            let (steps, _) = sim.run(2_500, StopWhen::Never).unwrap();
            total += steps;
            if round % 2 == 1 {
                sim.inject_faults(5).unwrap();
            }
        }
    }
}
