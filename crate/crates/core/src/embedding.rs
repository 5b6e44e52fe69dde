//! Compilations of a program graph into a hardware graph.
//!
//! An *ideal* compilation is an injective vertex map that sends program
//! edges to hardware edges. A *minor* embedding assigns every program vertex
//! a chain: a nonempty hardware vertex set inducing a connected subgraph.
//! Chains are pairwise disjoint, and every program edge must be witnessed by
//! at least one hardware edge between the two chains.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// Hardware vertices representing one program vertex.
pub type Chain = VertexSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "EmbeddingJson", try_from = "EmbeddingJson")]
pub struct Embedding {
    /// Cost of one chain edge; carried for reporting.
    pub alpha: f64,
    /// `chains[v]` for program vertex `v`.
    pub chains: Vec<Chain>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingJson {
    alpha: f64,
    chains: BTreeMap<usize, Vec<usize>>,
}

impl From<Embedding> for EmbeddingJson {
    fn from(e: Embedding) -> Self {
        EmbeddingJson {
            alpha: e.alpha,
            chains: e
                .chains
                .into_iter()
                .enumerate()
                .map(|(v, c)| (v, c.into_iter().collect()))
                .collect(),
        }
    }
}

impl TryFrom<EmbeddingJson> for Embedding {
    type Error = Error;

    fn try_from(raw: EmbeddingJson) -> Result<Self> {
        let chains = raw
            .chains
            .into_iter()
            .enumerate()
            .map(|(expected, (v, c))| {
                if v == expected {
                    Ok(c.into_iter().collect())
                } else {
                    Err(Error::InvalidEmbedding(format!("no chain given for program vertex {expected}")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Embedding { alpha: raw.alpha, chains })
    }
}

impl Embedding {
    pub fn new(alpha: f64, chains: Vec<Chain>) -> Self {
        Embedding { alpha, chains }
    }

    /// One singleton chain per program vertex.
    pub fn from_vertex_map(alpha: f64, map: &[usize]) -> Self {
        Embedding {
            alpha,
            chains: map.iter().map(|&h| Chain::from([h])).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn num_qubits(&self) -> usize {
        self.chains.iter().map(|c| c.len()).sum()
    }

    /// `alpha * (sum of chain sizes - number of chains)`: each chain pays
    /// for the edges of a spanning tree.
    pub fn total_cost(&self) -> f64 {
        self.alpha * (self.num_qubits() - self.chains.len()) as f64
    }

    pub fn max_chain_len(&self) -> usize {
        self.chains.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Chain length -> number of chains with that length.
    pub fn chain_length_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for c in &self.chains {
            *hist.entry(c.len()).or_insert(0) += 1;
        }
        hist
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    EmptyChain,
    DisconnectedChain,
    Overlap,
    MissingEdge,
    OutOfRange,
}

/// What a violation is about: one program vertex, a program edge, or a pair
/// of program vertices whose images collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Vertex(usize),
    Edge(usize, usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: Subject,
    /// Offending hardware vertex, for overlaps and out-of-range entries.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hardware: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        VerifyReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

fn violation(kind: ViolationKind, subject: Subject, hardware: Option<usize>) -> Violation {
    Violation { kind, subject, hardware }
}

/// Checks an ideal compilation: `map` must be injective, in range, and send
/// every program edge onto a hardware edge.
pub fn verify_ideal(map: &[usize], gp: &Graph, gh: &Graph) -> Result<VerifyReport> {
    if map.len() != gp.num_vertices() {
        return Err(Error::ShapeMismatch {
            expected: gp.num_vertices(),
            found: map.len(),
        });
    }
    let mut out = Vec::new();
    for (v, &h) in map.iter().enumerate() {
        if h >= gh.num_vertices() {
            out.push(violation(ViolationKind::OutOfRange, Subject::Vertex(v), Some(h)));
        }
    }
    for u in 0..map.len() {
        for v in u + 1..map.len() {
            if map[u] == map[v] {
                out.push(violation(ViolationKind::Overlap, Subject::Pair(u, v), Some(map[u])));
            }
        }
    }
    for &(u, v) in gp.edges() {
        if !gh.has_edge(map[u], map[v]) {
            out.push(violation(ViolationKind::MissingEdge, Subject::Edge(u, v), None));
        }
    }
    Ok(VerifyReport::from_violations(out))
}

/// Checks a minor embedding clause by clause and lists every failure.
pub fn verify_minor(e: &Embedding, gp: &Graph, gh: &Graph) -> Result<VerifyReport> {
    if e.chains.len() != gp.num_vertices() {
        return Err(Error::ShapeMismatch {
            expected: gp.num_vertices(),
            found: e.chains.len(),
        });
    }
    let nh = gh.num_vertices();
    let mut out = Vec::new();
    let mut owners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, chain) in e.chains.iter().enumerate() {
        if chain.is_empty() {
            out.push(violation(ViolationKind::EmptyChain, Subject::Vertex(v), None));
            continue;
        }
        let mut in_range = true;
        for &h in chain {
            if h >= nh {
                out.push(violation(ViolationKind::OutOfRange, Subject::Vertex(v), Some(h)));
                in_range = false;
            } else {
                owners.entry(h).or_default().push(v);
            }
        }
        if in_range && !gh.induces_connected(chain.iter().copied(), chain.len()) {
            out.push(violation(ViolationKind::DisconnectedChain, Subject::Vertex(v), None));
        }
    }
    for (&h, users) in &owners {
        for (k, &a) in users.iter().enumerate() {
            for &b in &users[k + 1..] {
                out.push(violation(ViolationKind::Overlap, Subject::Pair(a, b), Some(h)));
            }
        }
    }
    for &(u, v) in gp.edges() {
        let witnessed = e.chains[u]
            .iter()
            .filter(|&&h| h < nh)
            .any(|&h| gh.neighbors(h).iter().any(|w| e.chains[v].contains(w)));
        if !witnessed {
            out.push(violation(ViolationKind::MissingEdge, Subject::Edge(u, v), None));
        }
    }
    Ok(VerifyReport::from_violations(out))
}

/// Outcome of the bounded backtracking search for an ideal compilation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealSearch {
    Found(Vec<usize>),
    /// The search space was exhausted: no ideal compilation exists.
    NotFound,
    BudgetExceeded,
}

/// Backtracking search for an injective edge-preserving map. Program
/// vertices are assigned in ascending order, hardware candidates tried in
/// ascending order; `budget` bounds the number of tentative assignments.
pub fn search_ideal(gp: &Graph, gh: &Graph, budget: u64) -> Result<IdealSearch> {
    if budget == 0 {
        return Err(Error::InvalidParameter("search budget must be positive".into()));
    }
    let np = gp.num_vertices();
    if np > gh.num_vertices() {
        return Ok(IdealSearch::NotFound);
    }
    let mut state = IdealState {
        gp,
        gh,
        map: Vec::with_capacity(np),
        used: vec![false; gh.num_vertices()],
        budget,
    };
    Ok(match state.extend() {
        Some(true) => IdealSearch::Found(state.map),
        Some(false) => IdealSearch::NotFound,
        None => IdealSearch::BudgetExceeded,
    })
}

struct IdealState<'a> {
    gp: &'a Graph,
    gh: &'a Graph,
    map: Vec<usize>,
    used: Vec<bool>,
    budget: u64,
}

impl IdealState<'_> {
    /// `Some(found)` when this subtree was fully decided, `None` when the
    /// budget ran out.
    fn extend(&mut self) -> Option<bool> {
        let v = self.map.len();
        if v == self.gp.num_vertices() {
            return Some(true);
        }
        for h in self.gh.vertices() {
            if self.used[h] || self.gh.degree(h) < self.gp.degree(v) {
                continue;
            }
            let consistent = self.gp.neighbors(v)
                .iter()
                .filter(|&&u| u < v)
                .all(|&u| self.gh.has_edge(self.map[u], h));
            if !consistent {
                continue;
            }
            if self.budget == 0 {
                return None;
            }
            self.budget -= 1;
            self.map.push(h);
            self.used[h] = true;
            match self.extend() {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
            self.used[h] = false;
            self.map.pop();
        }
        Some(false)
    }
}

pub const BRUTE_FORCE_MAX_PROGRAM: usize = 4;
pub const BRUTE_FORCE_MAX_HARDWARE: usize = 10;

/// Exhaustive minimum-cost minor embedding for tiny instances.
///
/// Candidate embeddings are explored in increasing total qubit count; within
/// one count, chain tuples are visited in lexicographic order, so the first
/// hit is the lexicographically smallest optimum.
pub fn brute_force_min_embedding(gp: &Graph, gh: &Graph, alpha: f64) -> Result<Option<(Embedding, f64)>> {
    let (np, nh) = (gp.num_vertices(), gh.num_vertices());
    if np > BRUTE_FORCE_MAX_PROGRAM || nh > BRUTE_FORCE_MAX_HARDWARE {
        return Err(Error::TooLarge(format!(
            "{np} program and {nh} hardware vertices; limits are {BRUTE_FORCE_MAX_PROGRAM} and {BRUTE_FORCE_MAX_HARDWARE}"
        )));
    }
    if np == 0 {
        return Ok(Some((Embedding::new(alpha, Vec::new()), 0.0)));
    }
    if np > nh {
        return Ok(None);
    }
    let all: VertexSet = gh.vertices().collect();
    let mut candidates: Vec<Candidate> = gh
        .connected_subsets(&all, nh - np + 1)
        .into_iter()
        .map(|vertices| {
            let mask = vertices.iter().fold(0u32, |m, &v| m | 1 << v);
            let reach = vertices
                .iter()
                .flat_map(|&v| gh.neighbors(v))
                .fold(0u32, |m, &w| m | 1 << w);
            Candidate { vertices, mask, reach }
        })
        .collect();
    candidates.sort_by(|a, b| a.vertices.cmp(&b.vertices));

    let earlier_neighbors: Vec<Vec<usize>> = (0..np)
        .map(|v| gp.neighbors(v).iter().copied().filter(|&u| u < v).collect())
        .collect();
    for total in np..=nh {
        let mut search = BruteSearch {
            candidates: &candidates,
            earlier_neighbors: &earlier_neighbors,
            picked: Vec::with_capacity(np),
        };
        if search.extend(0, total) {
            let chains = search
                .picked
                .iter()
                .map(|&k| candidates[k].vertices.iter().copied().collect())
                .collect();
            let e = Embedding::new(alpha, chains);
            let cost = e.total_cost();
            return Ok(Some((e, cost)));
        }
    }
    Ok(None)
}

struct Candidate {
    vertices: Vec<usize>,
    mask: u32,
    reach: u32,
}

struct BruteSearch<'a> {
    candidates: &'a [Candidate],
    earlier_neighbors: &'a [Vec<usize>],
    picked: Vec<usize>,
}

impl BruteSearch<'_> {
    fn extend(&mut self, used: u32, remaining: usize) -> bool {
        let v = self.picked.len();
        let np = self.earlier_neighbors.len();
        if v == np {
            return remaining == 0;
        }
        let players_left = np - v - 1;
        for (k, c) in self.candidates.iter().enumerate() {
            let size = c.vertices.len();
            if size + players_left > remaining || (players_left == 0 && size != remaining) {
                continue;
            }
            if c.mask & used != 0 {
                continue;
            }
            let contacts = self.earlier_neighbors[v]
                .iter()
                .all(|&u| c.reach & self.candidates[self.picked[u]].mask != 0);
            if !contacts {
                continue;
            }
            self.picked.push(k);
            if self.extend(used | c.mask, remaining - size) {
                return true;
            }
            self.picked.pop();
        }
        false
    }
}
