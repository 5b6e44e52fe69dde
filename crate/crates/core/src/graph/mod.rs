//! Undirected simple graphs over dense vertex ids `0..n`.
//!
//! The same type serves as program graph and hardware graph. Edges are kept
//! once each in canonical `(min, max)` order and adjacency lists are sorted,
//! so every traversal in this crate is deterministic.

mod generators;
mod io;
mod paths;

pub use generators::Topology;
pub use io::{parse_edge_list, to_dot, to_edge_list};
pub use paths::SteinerTree;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A set of vertex ids, iterated in ascending order.
pub type VertexSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are merged; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canonical = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            canonical.insert((u.min(v), u.max(v)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &canonical {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canonical.into_iter().collect(),
            adj,
        })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbours of `v`. Panics if `v` is out of range.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    pub(crate) fn check_set(&self, s: &VertexSet) -> Result<()> {
        match s.iter().next_back() {
            Some(&max) => self.check_vertex(max),
            None => Ok(()),
        }
    }

    /// True iff the subgraph induced by `s` is connected. The empty set is
    /// not connected; a singleton is.
    pub fn is_connected_subset(&self, s: &VertexSet) -> Result<bool> {
        self.check_set(s)?;
        Ok(self.induces_connected(s.iter().copied(), s.len()))
    }

    pub(crate) fn induces_connected(&self, members: impl Iterator<Item = usize>, len: usize) -> bool {
        let mut inside = vec![false; self.n];
        let mut start = None;
        for v in members {
            inside[v] = true;
            start.get_or_insert(v);
        }
        let Some(start) = start else {
            return false;
        };
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == len
    }

    /// True iff some edge joins a vertex of `a` to a vertex of `b`.
    pub fn touches(&self, a: &VertexSet, b: &VertexSet) -> bool {
        a.iter()
            .any(|&u| self.adj[u].iter().any(|w| b.contains(w)))
    }
}
