//! The compilation game.
//!
//! Players are the program vertices. A strategy is a chain of hardware
//! vertices disjoint from the other players' chains; a player pays `alpha`
//! per edge of its chain's spanning tree (`alpha * (|chain| - 1)`) when the
//! chain is connected and touches every program neighbour's chain, and the
//! penalty `M` otherwise. Iterated best response searches for a
//! self-countering profile, which is then certified by enumerating every
//! unilateral deviation that could lower a player's cost.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cmr::cmr_embed;
use crate::embedding::{verify_minor, Chain, Embedding};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// Available-vertex count up to which best responses are also searched
/// exhaustively.
pub const BEST_RESPONSE_EXHAUSTIVE: usize = 10;
/// Available-vertex count up to which certification is always exhaustive.
pub const CERTIFY_EXHAUSTIVE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerOrder {
    Ascending,
    /// A fresh seeded shuffle before every pass.
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub max_passes: usize,
    pub order: PlayerOrder,
    pub seed: u64,
    /// CMR tries used to build the initial profile.
    pub init_tries: usize,
    /// Largest deviation size searched when certification is not exhaustive.
    pub certify_cap: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            max_passes: 100,
            order: PlayerOrder::Ascending,
            seed: 0,
            init_tries: 50,
            certify_cap: 6,
        }
    }
}

/// One chain per program vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub chains: Vec<Chain>,
}

impl Profile {
    pub fn new(chains: Vec<Chain>) -> Self {
        Profile { chains }
    }

    pub fn to_embedding(&self, alpha: f64) -> Embedding {
        Embedding::new(alpha, self.chains.clone())
    }

    fn others(&self, player: usize) -> VertexSet {
        self.chains
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != player)
            .flat_map(|(_, c)| c.iter().copied())
            .collect()
    }
}

impl From<Embedding> for Profile {
    fn from(e: Embedding) -> Self {
        Profile { chains: e.chains }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No deviation lowers any player's cost; the search was exhaustive.
    Nash,
    /// `player` strictly gains by switching to `chain`.
    Improvable { player: usize, chain: Chain },
    /// No improving deviation up to the size cap, but the cap cut the search.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsStatus {
    NashCertified,
    ConvergedUncertified,
    MaxPasses,
    Infeasible,
}

impl DynamicsStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DynamicsStatus::NashCertified => "nash_certified",
            DynamicsStatus::ConvergedUncertified => "converged_uncertified",
            DynamicsStatus::MaxPasses => "max_passes",
            DynamicsStatus::Infeasible => "infeasible",
        }
    }
}

/// An accepted unilateral switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub pass: usize,
    pub player: usize,
    pub from_cost: f64,
    pub to_cost: f64,
    pub chain: Chain,
    /// Found by certification rather than by the best-response heuristic.
    pub from_certifier: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsResult {
    /// `None` only when no starting profile could be built.
    pub profile: Option<Profile>,
    pub status: DynamicsStatus,
    pub passes: usize,
    pub total_cost: Option<f64>,
    /// Total cost before the first pass and after each pass.
    pub trace: Vec<f64>,
    pub moves: Vec<Move>,
    pub order: PlayerOrder,
    pub seed: u64,
}

impl DynamicsResult {
    pub fn to_json_value(&self, alpha: f64) -> serde_json::Value {
        let chains = self
            .profile
            .as_ref()
            .map(|p| serde_json::to_value(p.to_embedding(alpha)).expect("plain data")["chains"].clone())
            .unwrap_or(serde_json::Value::Null);
        serde_json::json!({
            "status": self.status.as_str(),
            "passes": self.passes,
            "total_cost": self.total_cost,
            "alpha": alpha,
            "chains": chains,
            "trace": self.trace,
            "order": self.order,
            "seed": self.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationGame {
    gp: Graph,
    gh: Graph,
    alpha: f64,
    penalty: f64,
    config: DynamicsConfig,
}

impl CompilationGame {
    /// Game with the default penalty `alpha * (|V_H| - 1) + 1` and default
    /// dynamics settings.
    pub fn new(gp: Graph, gh: Graph, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidCompilationGame(format!("alpha must be positive, got {alpha}")));
        }
        let penalty = Self::default_penalty(alpha, gh.num_vertices());
        Ok(CompilationGame {
            gp,
            gh,
            alpha,
            penalty,
            config: DynamicsConfig::default(),
        })
    }

    pub fn default_penalty(alpha: f64, hardware_vertices: usize) -> f64 {
        alpha * hardware_vertices.saturating_sub(1) as f64 + 1.0
    }

    /// The penalty must exceed the cost of the largest possible chain.
    pub fn with_penalty(mut self, penalty: f64) -> Result<Self> {
        let ceiling = self.alpha * self.gh.num_vertices().saturating_sub(1) as f64;
        if penalty <= ceiling || !penalty.is_finite() {
            return Err(Error::InvalidCompilationGame(format!(
                "penalty {penalty} must exceed {ceiling}"
            )));
        }
        self.penalty = penalty;
        Ok(self)
    }

    pub fn with_config(mut self, config: DynamicsConfig) -> Self {
        self.config = config;
        self
    }

    pub fn program(&self) -> &Graph {
        &self.gp
    }

    pub fn hardware(&self) -> &Graph {
        &self.gh
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.config
    }

    fn chain_cost(&self, size: usize) -> f64 {
        self.alpha * (size - 1) as f64
    }

    /// Whether `chain` would be a feasible strategy for `player` given the
    /// other chains in `profile`.
    fn feasible_for(&self, profile: &Profile, player: usize, chain: &Chain) -> bool {
        if chain.is_empty() || chain.iter().any(|&h| h >= self.gh.num_vertices()) {
            return false;
        }
        self.gh.induces_connected(chain.iter().copied(), chain.len())
            && self
                .gp
                .neighbors(player)
                .iter()
                .all(|&j| self.gh.touches(chain, &profile.chains[j]))
    }

    pub fn player_cost(&self, profile: &Profile, player: usize) -> f64 {
        let chain = &profile.chains[player];
        if self.feasible_for(profile, player, chain) {
            self.chain_cost(chain.len())
        } else {
            self.penalty
        }
    }

    pub fn total_cost(&self, profile: &Profile) -> f64 {
        (0..profile.chains.len()).map(|i| self.player_cost(profile, i)).sum()
    }

    fn requirements(&self, profile: &Profile, player: usize) -> Vec<VertexSet> {
        self.gp
            .neighbors(player)
            .iter()
            .map(|&j| profile.chains[j].clone())
            .collect()
    }

    /// Smallest feasible chain among connected subsets of `available` with
    /// at most `max_size` vertices; ties go to the smallest vertex list.
    fn smallest_feasible(
        &self,
        requirements: &[VertexSet],
        available: &VertexSet,
        max_size: usize,
    ) -> Option<Chain> {
        let n = self.gh.num_vertices();
        let contact: Vec<Vec<bool>> = requirements
            .iter()
            .map(|t| {
                let mut near = vec![false; n];
                for &h in t {
                    for &w in self.gh.neighbors(h) {
                        near[w] = true;
                    }
                }
                near
            })
            .collect();
        let mut best: Option<Vec<usize>> = None;
        self.gh.for_each_connected_subset(available, max_size, |s| {
            if let Some(b) = &best {
                if (s.len(), s) >= (b.len(), b.as_slice()) {
                    return;
                }
            }
            if contact.iter().all(|near| s.iter().any(|&h| near[h])) {
                best = Some(s.to_vec());
            }
        });
        best.map(|b| b.into_iter().collect())
    }

    /// A cheapest chain the heuristics can find for `player` with the other
    /// chains fixed. The current chain is always a candidate and wins ties.
    pub fn best_response(&self, profile: &Profile, player: usize) -> Option<Chain> {
        let current = &profile.chains[player];
        let available: VertexSet = self
            .gh
            .vertices()
            .collect::<VertexSet>()
            .difference(&profile.others(player))
            .copied()
            .collect();
        let requirements = self.requirements(profile, player);

        let mut best: Option<Chain> = None;
        let mut offer = |c: Chain| {
            let better = match &best {
                None => true,
                Some(b) => (c.len(), &c) < (b.len(), b),
            };
            if better {
                best = Some(c);
            }
        };
        if let Ok(Some(tree)) = self.gh.steiner_tree_heuristic(&requirements, &available) {
            offer(tree.vertices);
        }
        if available.len() <= BEST_RESPONSE_EXHAUSTIVE {
            if let Some(c) = self.smallest_feasible(&requirements, &available, available.len()) {
                offer(c);
            }
        }
        if self.feasible_for(profile, player, current) {
            match &best {
                Some(b) if b.len() < current.len() => {}
                _ => return Some(current.clone()),
            }
        }
        best
    }

    /// Starting profile from the randomized shortest-path embedder.
    pub fn init_profile(&self, seed: u64) -> Option<Profile> {
        cmr_embed(&self.gp, &self.gh, seed, self.config.init_tries.max(1))
            .ok()?
            .embedding
            .map(Profile::from)
    }

    /// Deviation search for every player, in ascending player order. Only
    /// chains strictly smaller than the current one can lower a feasible
    /// player's cost, so the search is exhaustive whenever the player has at
    /// most [`CERTIFY_EXHAUSTIVE`] available vertices or its current chain
    /// has at most `certify_cap + 1` vertices.
    pub fn certify_nash(&self, profile: &Profile) -> Verdict {
        let mut capped = false;
        for player in 0..profile.chains.len() {
            let current = &profile.chains[player];
            let available: VertexSet = self
                .gh
                .vertices()
                .collect::<VertexSet>()
                .difference(&profile.others(player))
                .copied()
                .collect();
            let limit = if self.feasible_for(profile, player, current) {
                current.len() - 1
            } else {
                available.len()
            };
            let search = if available.len() <= CERTIFY_EXHAUSTIVE {
                limit
            } else {
                limit.min(self.config.certify_cap)
            };
            if search < limit {
                capped = true;
            }
            let requirements = self.requirements(profile, player);
            if let Some(chain) = self.smallest_feasible(&requirements, &available, search) {
                return Verdict::Improvable { player, chain };
            }
        }
        if capped {
            Verdict::Inconclusive
        } else {
            Verdict::Nash
        }
    }

    pub fn run_dynamics(&self, init: Profile) -> Result<DynamicsResult> {
        self.run_dynamics_observed(init, |_, _| {})
    }

    /// Iterated best response. Each pass visits every player once; a player
    /// switches only on a strict cost decrease. After a pass without moves
    /// the profile is certified: a certified improvement is applied as one
    /// more move and the passes resume. `observer` sees every accepted move
    /// together with the profile right after it.
    pub fn run_dynamics_observed(
        &self,
        init: Profile,
        mut observer: impl FnMut(&Move, &Profile),
    ) -> Result<DynamicsResult> {
        let report = verify_minor(&init.to_embedding(self.alpha), &self.gp, &self.gh)?;
        if !report.ok {
            return Err(Error::InvalidEmbedding(format!(
                "initial profile fails verification with {} violation(s)",
                report.violations.len()
            )));
        }
        let mut profile = init;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut order: Vec<usize> = self.gp.vertices().collect();
        let mut trace = vec![self.total_cost(&profile)];
        let mut moves = Vec::new();
        let mut passes = 0;
        let status = loop {
            if passes == self.config.max_passes {
                break DynamicsStatus::MaxPasses;
            }
            passes += 1;
            if self.config.order == PlayerOrder::Shuffled {
                order.shuffle(&mut rng);
            }
            let mut changed = false;
            for &player in &order {
                let Some(chain) = self.best_response(&profile, player) else {
                    continue;
                };
                if chain.len() < profile.chains[player].len() {
                    let m = self.apply(&mut profile, passes, player, chain, false);
                    observer(&m, &profile);
                    moves.push(m);
                    changed = true;
                }
            }
            trace.push(self.total_cost(&profile));
            if changed {
                continue;
            }
            match self.certify_nash(&profile) {
                Verdict::Nash => break DynamicsStatus::NashCertified,
                Verdict::Inconclusive => break DynamicsStatus::ConvergedUncertified,
                Verdict::Improvable { player, chain } => {
                    let m = self.apply(&mut profile, passes, player, chain, true);
                    observer(&m, &profile);
                    moves.push(m);
                    *trace.last_mut().unwrap() = self.total_cost(&profile);
                }
            }
        };
        let total = self.total_cost(&profile);
        Ok(DynamicsResult {
            profile: Some(profile),
            status,
            passes,
            total_cost: Some(total),
            trace,
            moves,
            order: self.config.order,
            seed: self.config.seed,
        })
    }

    fn apply(&self, profile: &mut Profile, pass: usize, player: usize, chain: Chain, from_certifier: bool) -> Move {
        let from_cost = self.player_cost(profile, player);
        profile.chains[player] = chain.clone();
        Move {
            pass,
            player,
            from_cost,
            to_cost: self.player_cost(profile, player),
            chain,
            from_certifier,
        }
    }

    /// Seeds a profile with `config.seed` and runs the dynamics from it.
    pub fn solve(&self) -> Result<DynamicsResult> {
        match self.init_profile(self.config.seed) {
            Some(init) => self.run_dynamics(init),
            None => Ok(DynamicsResult {
                profile: None,
                status: DynamicsStatus::Infeasible,
                passes: 0,
                total_cost: None,
                trace: Vec::new(),
                moves: Vec::new(),
                order: self.config.order,
                seed: self.config.seed,
            }),
        }
    }
}
