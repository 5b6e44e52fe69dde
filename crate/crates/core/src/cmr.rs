//! Randomized shortest-path minor embedding.
//!
//! Program vertices are inserted one at a time in a random order. The first
//! two land on random hardware vertices and, when adjacent in the program,
//! are joined by a shortest path whose interior grows the first chain. Every
//! later vertex gets a random free root, then routes a shortest path from
//! its growing chain to each already placed neighbour, absorbing the path
//! interior. Routing never enters another vertex's chain, so chains stay
//! disjoint; a try fails as soon as a route does not exist.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{Chain, Embedding};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmrStats {
    pub tries: usize,
    pub successes: usize,
    pub first_success: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmrOutcome {
    /// Embedding from the lowest-numbered successful try.
    pub embedding: Option<Embedding>,
    pub stats: CmrStats,
}

/// Runs `tries` independent tries. Try `t` draws from the ChaCha stream `t`
/// of `seed`, so results do not depend on how tries are scheduled. The
/// returned embedding carries `alpha = 1`.
pub fn cmr_embed(gp: &Graph, gh: &Graph, seed: u64, tries: usize) -> Result<CmrOutcome> {
    if tries == 0 {
        return Err(Error::InvalidParameter("tries must be at least 1".into()));
    }
    let mut stats = CmrStats {
        tries,
        successes: 0,
        first_success: None,
    };
    let mut embedding = None;
    for t in 0..tries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        if let Some(chains) = single_try(gp, gh, &mut rng) {
            stats.successes += 1;
            if embedding.is_none() {
                stats.first_success = Some(t);
                embedding = Some(Embedding::new(1.0, chains));
            }
        }
    }
    Ok(CmrOutcome { embedding, stats })
}

struct Placement<'a> {
    gh: &'a Graph,
    owner: Vec<Option<usize>>,
    chains: Vec<Chain>,
}

impl Placement<'_> {
    fn claim(&mut self, v: usize, h: usize) {
        self.owner[h] = Some(v);
        self.chains[v].insert(h);
    }

    fn free(&self) -> Vec<usize> {
        (0..self.owner.len()).filter(|&h| self.owner[h].is_none()).collect()
    }

    /// Grows `v`'s chain along a shortest path to `u`'s chain through free
    /// vertices.
    fn connect(&mut self, v: usize, u: usize) -> bool {
        let passable: Vec<bool> = self
            .owner
            .iter()
            .map(|o| o.is_none() || *o == Some(v) || *o == Some(u))
            .collect();
        let sources: Vec<usize> = self.chains[v].iter().copied().collect();
        let targets: Vec<usize> = self.chains[u].iter().copied().collect();
        let Some(path) = self.gh.route(&sources, &targets, &passable) else {
            return false;
        };
        for &h in &path[1..path.len() - 1] {
            self.claim(v, h);
        }
        true
    }
}

fn single_try(gp: &Graph, gh: &Graph, rng: &mut ChaCha8Rng) -> Option<Vec<Chain>> {
    let np = gp.num_vertices();
    if np > gh.num_vertices() {
        return None;
    }
    let mut order: Vec<usize> = gp.vertices().collect();
    order.shuffle(rng);
    let mut state = Placement {
        gh,
        owner: vec![None; gh.num_vertices()],
        chains: vec![Chain::new(); np],
    };
    let mut placed = vec![false; np];
    for (step, &v) in order.iter().enumerate() {
        let free = state.free();
        let &root = free.choose(rng)?;
        state.claim(v, root);
        placed[v] = true;
        if step == 1 {
            let first = order[0];
            if gp.has_edge(first, v) && !state.connect(first, v) {
                return None;
            }
            continue;
        }
        for &u in gp.neighbors(v) {
            if placed[u] && u != v && !state.connect(v, u) {
                return None;
            }
        }
    }
    Some(state.chains)
}
