mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use aqc_core::cmr::cmr_embed;
use aqc_core::compile_game::{CompilationGame, DynamicsConfig, DynamicsStatus};
use aqc_core::embedding::{
    brute_force_min_embedding, search_ideal, verify_ideal, verify_minor, Chain, Embedding, IdealSearch,
};
use aqc_core::ising::QuadraticForm;
use aqc_core::{Graph, Topology};

use common::*;

fn graph(n: usize, p: f64, seed: u64) -> Graph {
    Topology::Random { n, p, seed }.build().unwrap()
}

/// Minimum total chain size over every disjoint chain tuple, by bitmask
/// enumeration of all vertex subsets.
fn oracle_min_qubits(gp: &Graph, gh: &Graph) -> Option<usize> {
    let adj = adjacency(gh);
    let nh = gh.num_vertices();
    let connected: Vec<u64> = (1u64..1 << nh).filter(|&m| mask_connected(&adj, m)).collect();
    fn go(v: usize, gp: &Graph, adj: &[Vec<bool>], sets: &[u64], picked: &mut Vec<u64>, best: &mut Option<usize>) {
        if v == gp.num_vertices() {
            let size = picked.iter().map(|m| m.count_ones() as usize).sum();
            if best.is_none_or(|b| size < b) {
                *best = Some(size);
            }
            return;
        }
        for &m in sets {
            if picked.iter().any(|&o| o & m != 0) {
                continue;
            }
            if gp.neighbors(v).iter().filter(|&&u| u < v).all(|&u| masks_touch(adj, picked[u], m)) {
                picked.push(m);
                go(v + 1, gp, adj, sets, picked, best);
                picked.pop();
            }
        }
    }
    let mut best = None;
    go(0, gp, &adj, &connected, &mut Vec::new(), &mut best);
    best
}

fn injections(np: usize, nh: usize) -> Vec<Vec<usize>> {
    if np == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for prefix in injections(np - 1, nh) {
        for h in 0..nh {
            if !prefix.contains(&h) {
                let mut next = prefix.clone();
                next.push(h);
                out.push(next);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brute_force_is_optimal(
        np in 1usize..=3, nh in 1usize..=7,
        pp in 0.2f64..1.0, ph in 0.2f64..1.0,
        s1 in any::<u64>(), s2 in any::<u64>(),
    ) {
        let gp = graph(np, pp, s1);
        let gh = graph(nh, ph, s2);
        let got = brute_force_min_embedding(&gp, &gh, 2.0).unwrap();
        let want = oracle_min_qubits(&gp, &gh);
        match got {
            None => prop_assert_eq!(want, None),
            Some((e, cost)) => {
                prop_assert!(verify_minor(&e, &gp, &gh).unwrap().ok);
                prop_assert_eq!(Some(e.num_qubits()), want);
                prop_assert_eq!(cost, 2.0 * (e.num_qubits() - np) as f64);
            }
        }
    }

    #[test]
    fn search_ideal_agrees_with_injection_enumeration(
        np in 1usize..=4, nh in 1usize..=8,
        pp in 0.2f64..1.0, ph in 0.2f64..1.0,
        s1 in any::<u64>(), s2 in any::<u64>(),
    ) {
        let gp = graph(np, pp, s1);
        let gh = graph(nh, ph, s2);
        let exists = injections(np, nh)
            .into_iter()
            .any(|f| gp.edges().iter().all(|&(u, v)| gh.has_edge(f[u], f[v])));
        match search_ideal(&gp, &gh, 1_000_000).unwrap() {
            IdealSearch::Found(map) => {
                prop_assert!(exists);
                prop_assert!(verify_ideal(&map, &gp, &gh).unwrap().ok);
            }
            IdealSearch::NotFound => prop_assert!(!exists),
            IdealSearch::BudgetExceeded => prop_assert!(false, "budget should suffice"),
        }
    }

    #[test]
    fn producers_emit_verified_embeddings(
        np in 2usize..=6, pp in 0.2f64..1.0, s1 in any::<u64>(), seed in any::<u64>(),
    ) {
        let gp = graph(np, pp, s1);
        let gh = Topology::Chimera { m: 2 }.build().unwrap();
        if let Some(e) = cmr_embed(&gp, &gh, seed, 10).unwrap().embedding {
            prop_assert!(verify_minor(&e, &gp, &gh).unwrap().ok);
            prop_assert!(oracle_valid_minor(&e.chains, &gp, &gh));
        }
        let game = CompilationGame::new(gp.clone(), gh.clone(), 1.0).unwrap().with_config(DynamicsConfig {
            seed,
            ..DynamicsConfig::default()
        });
        let r = game.solve().unwrap();
        if let Some(p) = r.profile {
            prop_assert!(verify_minor(&p.to_embedding(1.0), &gp, &gh).unwrap().ok);
            prop_assert!(r.passes <= 100);
            prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    /// Removing one vertex from a chain of a valid (often non-minimal)
    /// embedding is either still valid or reported with violations.
    #[test]
    fn single_vertex_deletions_are_classified(
        np in 2usize..=5, pp in 0.3f64..1.0, s1 in any::<u64>(), seed in any::<u64>(),
    ) {
        let gp = graph(np, pp, s1);
        let gh = Topology::Grid { rows: 3, cols: 4 }.build().unwrap();
        if let Some(e) = cmr_embed(&gp, &gh, seed, 10).unwrap().embedding {
            for v in 0..np {
                for &h in &e.chains[v] {
                    let mut chains = e.chains.clone();
                    chains[v].remove(&h);
                    let report = verify_minor(&Embedding::new(1.0, chains.clone()), &gp, &gh).unwrap();
                    prop_assert_eq!(report.ok, oracle_valid_minor(&chains, &gp, &gh));
                    prop_assert_eq!(report.ok, report.violations.is_empty());
                }
            }
        }
    }
}

#[test]
fn cmr_fails_sometimes_near_capacity() {
    // K4 into a 3x3 grid: an embedding exists, single tries often miss it
    let gp = Topology::Complete { n: 4 }.build().unwrap();
    let gh = Topology::Grid { rows: 3, cols: 3 }.build().unwrap();
    assert!(brute_force_min_embedding(&gp, &gh, 1.0).unwrap().is_some());
    let outcomes: Vec<bool> = (0..200)
        .map(|seed| {
            let out = cmr_embed(&gp, &gh, seed, 1).unwrap();
            if let Some(e) = &out.embedding {
                assert!(verify_minor(e, &gp, &gh).unwrap().ok);
            }
            out.embedding.is_some()
        })
        .collect();
    assert!(outcomes.contains(&true));
    assert!(outcomes.contains(&false));
}

#[test]
fn cmr_statistics_count_every_try() {
    let gp = Topology::Complete { n: 4 }.build().unwrap();
    let gh = Topology::Grid { rows: 3, cols: 3 }.build().unwrap();
    let out = cmr_embed(&gp, &gh, 5, 40).unwrap();
    assert_eq!(out.stats.tries, 40);
    assert!(out.stats.successes >= 1 && out.stats.successes < 40);
    assert!(out.embedding.is_some());
}

#[test]
fn quadratic_form_to_certified_compilation() {
    let qf = QuadraticForm::parse("x1*x2 + x2*x3 + x1*x3 + x3*x4 + x4*x1 + x2*x4").unwrap();
    let pg = qf.to_program_graph().unwrap();
    assert_eq!(pg.graph.num_edges(), 6);
    let gh = Topology::Chimera { m: 1 }.build().unwrap();
    let game = CompilationGame::new(pg.graph.clone(), gh.clone(), 1.0).unwrap();
    let r = game.solve().unwrap();
    assert_eq!(r.status, DynamicsStatus::NashCertified);
    let e = r.profile.unwrap().to_embedding(1.0);
    assert!(verify_minor(&e, &pg.graph, &gh).unwrap().ok);
    // K4 needs at least two chains of length 2 in the bipartite cell
    assert!(e.num_qubits() >= 6);
}

#[test]
fn certified_profiles_on_tiny_hardware_are_unimprovable() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let gp = graph(3 + (seed % 2) as usize, 0.7, seed);
        let gh = graph(8, 0.45, seed ^ 0xFF);
        let game = CompilationGame::new(gp.clone(), gh.clone(), 1.0).unwrap().with_config(DynamicsConfig {
            seed,
            ..DynamicsConfig::default()
        });
        let r = game.solve().unwrap();
        if r.status != DynamicsStatus::NashCertified {
            continue;
        }
        let chains: Vec<Chain> = r.profile.unwrap().chains;
        for p in 0..gp.num_vertices() {
            let best = oracle_smallest_deviation(&chains, p, &gp, &gh).unwrap();
            assert!(best.count_ones() as usize >= chains[p].len(), "seed {seed} player {p}");
        }
        checked += 1;
    }
    assert!(checked > 20);
}

#[test]
fn chimera_cells_are_k44_blocks() {
    let g = Topology::Chimera { m: 3 }.build().unwrap();
    let mut internal = 0;
    for cell in 0..9 {
        let block: BTreeSet<usize> = (8 * cell..8 * cell + 8).collect();
        internal += g.edges().iter().filter(|(u, v)| block.contains(u) && block.contains(v)).count();
    }
    assert_eq!(internal, 16 * 9);
}
