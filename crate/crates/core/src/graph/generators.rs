use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// Named graph families used as program and hardware fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Cycle { n: usize },
    Complete { n: usize },
    Path { n: usize },
    Grid { rows: usize, cols: usize },
    /// Erdős–Rényi G(n, p): one independent coin flip per vertex pair,
    /// pairs visited in lexicographic order.
    Random { n: usize, p: f64, seed: u64 },
    /// `m x m` cells of K_{4,4}.
    Chimera { m: usize },
}

fn positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        Err(Error::InvalidParameter(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

impl Topology {
    pub fn build(&self) -> Result<Graph> {
        match *self {
            Topology::Cycle { n } => {
                positive("n", n)?;
                Graph::new(n, (0..n).filter_map(|i| {
                    let j = (i + 1) % n;
                    (i != j).then_some((i, j))
                }))
            }
            Topology::Complete { n } => {
                positive("n", n)?;
                Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
            }
            Topology::Path { n } => {
                positive("n", n)?;
                Graph::new(n, (1..n).map(|v| (v - 1, v)))
            }
            Topology::Grid { rows, cols } => {
                positive("rows", rows)?;
                positive("cols", cols)?;
                let id = |r: usize, c: usize| r * cols + c;
                let mut edges = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            edges.push((id(r, c), id(r, c + 1)));
                        }
                        if r + 1 < rows {
                            edges.push((id(r, c), id(r + 1, c)));
                        }
                    }
                }
                Graph::new(rows * cols, edges)
            }
            Topology::Random { n, p, seed } => {
                positive("n", n)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!("p = {p} is not in [0, 1]")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.gen::<f64>() < p {
                            edges.push((u, v));
                        }
                    }
                }
                Graph::new(n, edges)
            }
            Topology::Chimera { m } => chimera(m),
        }
    }
}

/// Qubit `k` of cell `(row, col)`: `k < 4` are horizontal, `k >= 4` vertical.
pub(crate) fn chimera_index(m: usize, row: usize, col: usize, k: usize) -> usize {
    8 * (row * m + col) + k
}

fn chimera(m: usize) -> Result<Graph> {
    positive("m", m)?;
    let mut edges = Vec::with_capacity(16 * m * m + 8 * m * (m - 1));
    for row in 0..m {
        for col in 0..m {
            for h in 0..4 {
                for v in 4..8 {
                    edges.push((chimera_index(m, row, col, h), chimera_index(m, row, col, v)));
                }
            }
            if col + 1 < m {
                for h in 0..4 {
                    edges.push((chimera_index(m, row, col, h), chimera_index(m, row, col + 1, h)));
                }
            }
            if row + 1 < m {
                for v in 4..8 {
                    edges.push((chimera_index(m, row, col, v), chimera_index(m, row + 1, col, v)));
                }
            }
        }
    }
    Graph::new(8 * m * m, edges)
}
