//! Reference checks written independently of the library's search code:
//! plain bitmask enumeration and flood fills over adjacency matrices.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use aqc_core::embedding::Chain;
use aqc_core::game::{FiniteGame, Play};
use aqc_core::Graph;

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.num_vertices();
    let mut m = vec![vec![false; n]; n];
    for &(u, v) in g.edges() {
        m[u][v] = true;
        m[v][u] = true;
    }
    m
}

pub fn mask_of(chain: &Chain) -> u64 {
    chain.iter().fold(0, |m, &v| m | 1 << v)
}

pub fn chain_of(mask: u64) -> Chain {
    (0..64).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Flood fill restricted to `mask`.
pub fn mask_connected(adj: &[Vec<bool>], mask: u64) -> bool {
    if mask == 0 {
        return false;
    }
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u64 << start;
    let mut frontier = vec![start];
    while let Some(v) = frontier.pop() {
        for (w, &edge) in adj[v].iter().enumerate() {
            if edge && mask >> w & 1 == 1 && seen >> w & 1 == 0 {
                seen |= 1 << w;
                frontier.push(w);
            }
        }
    }
    seen == mask
}

pub fn masks_touch(adj: &[Vec<bool>], a: u64, b: u64) -> bool {
    (0..adj.len()).any(|u| a >> u & 1 == 1 && (0..adj.len()).any(|w| b >> w & 1 == 1 && adj[u][w]))
}

/// Minor-embedding validity straight from the definition.
pub fn oracle_valid_minor(chains: &[Chain], gp: &Graph, gh: &Graph) -> bool {
    let adj = adjacency(gh);
    if chains.len() != gp.num_vertices() {
        return false;
    }
    if chains.iter().flatten().any(|&h| h >= gh.num_vertices()) {
        return false;
    }
    let masks: Vec<u64> = chains.iter().map(mask_of).collect();
    for (i, &m) in masks.iter().enumerate() {
        if !mask_connected(&adj, m) {
            return false;
        }
        for &o in &masks[i + 1..] {
            if m & o != 0 {
                return false;
            }
        }
    }
    gp.edges().iter().all(|&(u, v)| masks_touch(&adj, masks[u], masks[v]))
}

/// Size of the smallest feasible chain for `player` among ALL subsets of the
/// vertices not used by other players (hardware must have <= 20 vertices).
pub fn oracle_smallest_deviation(chains: &[Chain], player: usize, gp: &Graph, gh: &Graph) -> Option<u64> {
    let adj = adjacency(gh);
    let n = gh.num_vertices();
    assert!(n <= 20);
    let others: u64 = chains
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != player)
        .fold(0, |m, (_, c)| m | mask_of(c));
    let neighbour_masks: Vec<u64> = gp.neighbors(player).iter().map(|&j| mask_of(&chains[j])).collect();
    let mut best: Option<u64> = None;
    for mask in 1u64..1 << n {
        if mask & others != 0 {
            continue;
        }
        if let Some(b) = best {
            if (mask.count_ones(), chain_of(mask)) >= (b.count_ones(), chain_of(b)) {
                continue;
            }
        }
        if mask_connected(&adj, mask) && neighbour_masks.iter().all(|&t| masks_touch(&adj, mask, t)) {
            best = Some(mask);
        }
    }
    best
}

/// Connected subsets of `allowed` up to `max_size`, grown one neighbour at a
/// time from singletons and deduplicated by bitmask (<= 64 vertices).
pub fn oracle_connected_sets(adj: &[Vec<bool>], allowed: u64, max_size: usize) -> Vec<u64> {
    let mut all: HashSet<u64> = HashSet::new();
    let mut layer: HashSet<u64> = (0..adj.len())
        .filter(|&v| allowed >> v & 1 == 1)
        .map(|v| 1u64 << v)
        .collect();
    for _ in 0..max_size {
        if layer.is_empty() {
            break;
        }
        all.extend(layer.iter().copied());
        let mut next = HashSet::new();
        for &m in &layer {
            for (v, row) in adj.iter().enumerate() {
                if m >> v & 1 == 1 {
                    for (w, &edge) in row.iter().enumerate() {
                        if edge && allowed >> w & 1 == 1 && m >> w & 1 == 0 {
                            next.insert(m | 1 << w);
                        }
                    }
                }
            }
        }
        layer = next;
    }
    let mut out: Vec<u64> = all.into_iter().collect();
    out.sort_by_key(|&m| (m.count_ones(), chain_of(m)));
    out
}

/// Capped deviation search for one player: any feasible chain with fewer
/// vertices than the current one, searched up to `cap` vertices.
pub fn oracle_capped_improvement(chains: &[Chain], player: usize, gp: &Graph, gh: &Graph, cap: usize) -> Option<Chain> {
    let adj = adjacency(gh);
    let others: u64 = chains
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != player)
        .fold(0, |m, (_, c)| m | mask_of(c));
    let allowed = ((1u128 << gh.num_vertices()) - 1) as u64 & !others;
    let limit = (chains[player].len() - 1).min(cap);
    let neighbour_masks: Vec<u64> = gp.neighbors(player).iter().map(|&j| mask_of(&chains[j])).collect();
    oracle_connected_sets(&adj, allowed, limit)
        .into_iter()
        .find(|&m| neighbour_masks.iter().all(|&t| masks_touch(&adj, m, t)))
        .map(chain_of)
}

/// Plays where no player gains by a unilateral switch, by direct table scan.
pub fn oracle_pure_nash(g: &FiniteGame) -> BTreeSet<Play> {
    g.plays()
        .filter(|play| {
            (0..g.num_players()).all(|i| {
                let here = g.payoff(i, play).unwrap();
                (0..g.strategy_counts()[i]).all(|r| {
                    let mut alt = play.0.clone();
                    alt[i] = r;
                    g.payoff(i, &Play(alt)).unwrap() <= here
                })
            })
        })
        .collect()
}
