use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Graph, VertexSet};
use crate::error::{Error, Result};

/// A tree in a host graph: its vertex set plus the spanning edges used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerTree {
    pub vertices: VertexSet,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Minimum-hop path from `src` to any vertex of `dst` that never enters
    /// `forbidden`. Among equally short paths the lexicographically smallest
    /// vertex sequence wins.
    pub fn shortest_path(
        &self,
        src: usize,
        dst: &VertexSet,
        forbidden: &VertexSet,
    ) -> Result<Option<Vec<usize>>> {
        self.check_vertex(src)?;
        self.check_set(dst)?;
        self.check_set(forbidden)?;
        if dst.is_empty() {
            return Err(Error::InvalidParameter("destination set is empty".into()));
        }
        if forbidden.contains(&src) {
            return Err(Error::InvalidParameter(format!("source {src} is forbidden")));
        }
        let mut passable = vec![true; self.n];
        for &v in forbidden {
            passable[v] = false;
        }
        let targets: Vec<usize> = dst.iter().copied().filter(|&v| passable[v]).collect();
        Ok(self.route(&[src], &targets, &passable))
    }

    /// Shortest path from any of `sources` to any of `targets` through
    /// passable vertices, lexicographically smallest among ties. Sources and
    /// targets are assumed passable.
    pub(crate) fn route(&self, sources: &[usize], targets: &[usize], passable: &[bool]) -> Option<Vec<usize>> {
        let dist = self.distances_to(targets, passable);
        let start = sources
            .iter()
            .copied()
            .filter_map(|s| dist[s].map(|d| (d, s)))
            .min()?
            .1;
        let mut path = vec![start];
        let mut at = start;
        while let Some(d) = dist[at].filter(|&d| d > 0) {
            at = self.adj[at]
                .iter()
                .copied()
                .find(|&w| dist[w] == Some(d - 1))
                .expect("BFS layer predecessor");
            path.push(at);
        }
        Some(path)
    }

    fn distances_to(&self, targets: &[usize], passable: &[bool]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        for &t in targets {
            if dist[t].is_none() {
                dist[t] = Some(0);
                queue.push_back(t);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.adj[v] {
                if passable[w] && dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Heuristic smallest tree inside `allowed` that, for every terminal set,
    /// contains a vertex equal or adjacent to one of its members.
    ///
    /// Each vertex of the scarcest requirement's contact set is tried as a
    /// root; from it the tree repeatedly absorbs a shortest path to the
    /// nearest unmet requirement, then redundant leaves are pruned. The
    /// smallest resulting tree is returned (ties: smallest vertex set).
    /// With no terminals the smallest allowed vertex is returned alone.
    pub fn steiner_tree_heuristic(
        &self,
        terminals: &[VertexSet],
        allowed: &VertexSet,
    ) -> Result<Option<SteinerTree>> {
        self.check_set(allowed)?;
        for t in terminals {
            self.check_set(t)?;
        }
        let Some(&first) = allowed.iter().next() else {
            return Ok(None);
        };
        if terminals.is_empty() {
            return Ok(Some(SteinerTree {
                vertices: VertexSet::from([first]),
                edges: Vec::new(),
            }));
        }
        let mut passable = vec![false; self.n];
        for &v in allowed {
            passable[v] = true;
        }
        // contact[k] = allowed vertices that satisfy requirement k
        let contact: Vec<Vec<usize>> = terminals
            .iter()
            .map(|t| {
                allowed
                    .iter()
                    .copied()
                    .filter(|&u| t.contains(&u) || self.adj[u].iter().any(|w| t.contains(w)))
                    .collect()
            })
            .collect();
        if contact.iter().any(Vec::is_empty) {
            return Ok(None);
        }
        let scarcest = contact
            .iter()
            .enumerate()
            .min_by_key(|(k, c)| (c.len(), *k))
            .map(|(_, c)| c.clone())
            .unwrap();

        let mut satisfies = vec![Vec::new(); self.n];
        for (k, c) in contact.iter().enumerate() {
            for &u in c {
                satisfies[u].push(k);
            }
        }

        let mut best: Option<SteinerTree> = None;
        for root in scarcest {
            let Some(tree) = self.grow_tree(root, &contact, &satisfies, &passable) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => (tree.vertices.len(), &tree.vertices) < (b.vertices.len(), &b.vertices),
            };
            if better {
                best = Some(tree);
            }
        }
        Ok(best)
    }

    fn grow_tree(
        &self,
        root: usize,
        contact: &[Vec<usize>],
        satisfies: &[Vec<usize>],
        passable: &[bool],
    ) -> Option<SteinerTree> {
        let requirements = contact.len();
        let mut in_tree = vec![false; self.n];
        let mut members = vec![root];
        in_tree[root] = true;
        let mut met = vec![false; requirements];
        for &k in &satisfies[root] {
            met[k] = true;
        }
        let mut edges = Vec::new();
        while met.iter().any(|m| !m) {
            let mut is_target = vec![false; self.n];
            for (k, c) in contact.iter().enumerate() {
                if !met[k] {
                    for &u in c {
                        is_target[u] = true;
                    }
                }
            }
            let targets: Vec<usize> = (0..self.n).filter(|&u| is_target[u]).collect();
            let mut sources = members.clone();
            sources.sort_unstable();
            let path = self.route(&sources, &targets, passable)?;
            for pair in path.windows(2) {
                edges.push((pair[0].min(pair[1]), pair[0].max(pair[1])));
            }
            for &v in &path[1..] {
                in_tree[v] = true;
                members.push(v);
            }
            for &v in &path {
                for &k in &satisfies[v] {
                    met[k] = true;
                }
            }
        }

        // prune leaves whose removal leaves every requirement met
        let mut cover = vec![0usize; requirements];
        for &v in &members {
            for &k in &satisfies[v] {
                cover[k] += 1;
            }
        }
        loop {
            let mut removed = false;
            let mut ordered = members.clone();
            ordered.sort_unstable();
            for v in ordered {
                if members.len() == 1 {
                    break;
                }
                let incident = edges.iter().filter(|&&(a, b)| a == v || b == v).count();
                if incident > 1 || satisfies[v].iter().any(|&k| cover[k] == 1) {
                    continue;
                }
                for &k in &satisfies[v] {
                    cover[k] -= 1;
                }
                edges.retain(|&(a, b)| a != v && b != v);
                members.retain(|&m| m != v);
                in_tree[v] = false;
                removed = true;
            }
            if !removed {
                break;
            }
        }
        edges.sort_unstable();
        Some(SteinerTree {
            vertices: members.into_iter().collect(),
            edges,
        })
    }

    /// Calls `visit` once for every connected vertex subset of `allowed`
    /// with at most `max_size` vertices. Subsets arrive sorted ascending.
    ///
    /// This is the ESU enumeration: each subset is generated from its
    /// smallest vertex, extending only through vertices larger than it that
    /// are not yet adjacent to the partial subset.
    pub fn for_each_connected_subset<F: FnMut(&[usize])>(&self, allowed: &VertexSet, max_size: usize, mut visit: F) {
        if max_size == 0 {
            return;
        }
        let mut is_allowed = vec![false; self.n];
        for &v in allowed {
            if v < self.n {
                is_allowed[v] = true;
            }
        }
        let mut near = vec![0u32; self.n];
        let mut sub = Vec::with_capacity(max_size);
        let mut sorted = Vec::with_capacity(max_size);
        for &root in allowed {
            if root >= self.n {
                continue;
            }
            let ext: Vec<usize> = self.adj[root]
                .iter()
                .copied()
                .filter(|&u| u > root && is_allowed[u])
                .collect();
            sub.push(root);
            self.mark(root, &mut near, 1);
            self.extend_subset(&mut sub, ext, root, max_size, &is_allowed, &mut near, &mut sorted, &mut visit);
            self.mark(root, &mut near, -1);
            sub.pop();
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_subset<F: FnMut(&[usize])>(
        &self,
        sub: &mut Vec<usize>,
        mut ext: Vec<usize>,
        root: usize,
        max_size: usize,
        is_allowed: &[bool],
        near: &mut [u32],
        sorted: &mut Vec<usize>,
        visit: &mut F,
    ) {
        sorted.clear();
        sorted.extend_from_slice(sub);
        sorted.sort_unstable();
        visit(sorted);
        if sub.len() == max_size {
            return;
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &self.adj[w] {
                if u > root && is_allowed[u] && near[u] == 0 {
                    next.push(u);
                }
            }
            sub.push(w);
            self.mark(w, near, 1);
            self.extend_subset(sub, next, root, max_size, is_allowed, near, sorted, visit);
            self.mark(w, near, -1);
            sub.pop();
        }
    }

    fn mark(&self, v: usize, near: &mut [u32], delta: i32) {
        let apply = |x: &mut u32| *x = (*x as i32 + delta) as u32;
        apply(&mut near[v]);
        for &w in &self.adj[v] {
            apply(&mut near[w]);
        }
    }

    pub fn connected_subsets(&self, allowed: &VertexSet, max_size: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_connected_subset(allowed, max_size, |s| out.push(s.to_vec()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Topology;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    fn cycle6() -> Graph {
        Topology::Cycle { n: 6 }.build().unwrap()
    }

    #[test]
    fn shortest_path_lexicographic_tie_break() {
        let g = cycle6();
        assert_eq!(g.shortest_path(0, &set(&[3]), &set(&[])).unwrap(), Some(vec![0, 1, 2, 3]));
        assert_eq!(g.shortest_path(0, &set(&[3]), &set(&[1, 2])).unwrap(), Some(vec![0, 5, 4, 3]));
        assert_eq!(g.shortest_path(0, &set(&[3]), &set(&[1, 5])).unwrap(), None);
    }

    #[test]
    fn shortest_path_edge_cases() {
        let g = cycle6();
        assert_eq!(g.shortest_path(2, &set(&[2, 4]), &set(&[])).unwrap(), Some(vec![2]));
        assert_eq!(g.shortest_path(0, &set(&[2, 4]), &set(&[])).unwrap(), Some(vec![0, 1, 2]));
        assert!(g.shortest_path(0, &set(&[]), &set(&[])).is_err());
        assert!(g.shortest_path(0, &set(&[3]), &set(&[0])).is_err());
        assert!(g.shortest_path(7, &set(&[3]), &set(&[])).is_err());
        // a forbidden destination is unreachable
        assert_eq!(g.shortest_path(0, &set(&[3]), &set(&[3])).unwrap(), None);
    }

    #[test]
    fn steiner_bridges_two_chains_on_cycle() {
        let g = cycle6();
        let tree = g
            .steiner_tree_heuristic(&[set(&[0]), set(&[1])], &set(&[2, 3, 4, 5]))
            .unwrap()
            .unwrap();
        assert_eq!(tree.vertices, set(&[2, 3, 4, 5]));
        assert_eq!(tree.edges.len(), 3);
    }

    #[test]
    fn steiner_single_attachment_point() {
        let g = cycle6();
        let tree = g.steiner_tree_heuristic(&[set(&[0])], &set(&[1, 3])).unwrap().unwrap();
        assert_eq!(tree.vertices, set(&[1]));
        assert!(tree.edges.is_empty());
    }

    #[test]
    fn steiner_infeasible() {
        let g = cycle6();
        assert_eq!(g.steiner_tree_heuristic(&[set(&[0]), set(&[3])], &set(&[])).unwrap(), None);
        // 3 has no allowed neighbour
        assert_eq!(g.steiner_tree_heuristic(&[set(&[3])], &set(&[0, 1])).unwrap(), None);
        // contacts exist but cannot be joined inside allowed
        assert_eq!(g.steiner_tree_heuristic(&[set(&[0]), set(&[3])], &set(&[1, 4])).unwrap(), None);
    }

    #[test]
    fn esu_counts_on_small_graphs() {
        // path on 4 vertices: 4 + 3 + 2 + 1 connected intervals
        let p4 = Topology::Path { n: 4 }.build().unwrap();
        assert_eq!(p4.connected_subsets(&set(&[0, 1, 2, 3]), 4).len(), 10);
        // K4: every nonempty subset
        let k4 = Topology::Complete { n: 4 }.build().unwrap();
        assert_eq!(k4.connected_subsets(&set(&[0, 1, 2, 3]), 4).len(), 15);
        assert_eq!(k4.connected_subsets(&set(&[0, 1, 2, 3]), 2).len(), 10);
        assert!(k4.connected_subsets(&set(&[0, 1]), 0).is_empty());
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        (1usize..=9, 0.0f64..=1.0, any::<u64>())
            .prop_map(|(n, p, seed)| Topology::Random { n, p, seed }.build().unwrap())
    }

    /// BFS layering oracle: plain distances without tie-breaking.
    fn bfs_hops(g: &Graph, src: usize, dst: &VertexSet, forbidden: &VertexSet) -> Option<usize> {
        let mut dist = vec![usize::MAX; g.num_vertices()];
        dist[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            if dst.contains(&v) {
                return Some(dist[v]);
            }
            for &w in g.neighbors(v) {
                if !forbidden.contains(&w) && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        None
    }

    proptest! {
        #[test]
        fn shortest_path_is_minimal_and_valid(
            g in small_graph(),
            src_raw in any::<usize>(),
            dst_raw in proptest::collection::vec(any::<usize>(), 1..3),
            forb_raw in proptest::collection::vec(any::<usize>(), 0..3),
        ) {
            let n = g.num_vertices();
            let src = src_raw % n;
            let dst: VertexSet = dst_raw.iter().map(|d| d % n).collect();
            let forbidden: VertexSet = forb_raw.iter().map(|f| f % n).filter(|&f| f != src).collect();
            let got = g.shortest_path(src, &dst, &forbidden).unwrap();
            let want = bfs_hops(&g, src, &dst, &forbidden);
            match got {
                None => prop_assert_eq!(want, None),
                Some(path) => {
                    prop_assert_eq!(Some(path.len() - 1), want);
                    prop_assert_eq!(path[0], src);
                    prop_assert!(dst.contains(path.last().unwrap()));
                    for w in path.windows(2) {
                        prop_assert!(g.has_edge(w[0], w[1]));
                    }
                    for v in &path {
                        prop_assert!(!forbidden.contains(v));
                    }
                }
            }
        }

        #[test]
        fn esu_matches_bitmask_enumeration(g in small_graph(), cap in 1usize..=9) {
            let all: VertexSet = g.vertices().collect();
            let got: BTreeSet<Vec<usize>> = g.connected_subsets(&all, cap).into_iter().collect();
            let listed = g.connected_subsets(&all, cap).len();
            prop_assert_eq!(listed, got.len(), "duplicates emitted");
            let mut want = BTreeSet::new();
            for mask in 1u32..(1 << g.num_vertices()) {
                let s: Vec<usize> = (0..g.num_vertices()).filter(|&v| mask >> v & 1 == 1).collect();
                if s.len() <= cap && g.is_connected_subset(&s.iter().copied().collect()).unwrap() {
                    want.insert(s);
                }
            }
            prop_assert_eq!(got, want);
        }

        #[test]
        fn steiner_output_satisfies_requirements(
            g in small_graph(),
            picks in proptest::collection::vec(any::<usize>(), 1..4),
            allowed_mask in any::<u32>(),
        ) {
            let n = g.num_vertices();
            let terminals: Vec<VertexSet> = picks.iter().map(|p| VertexSet::from([p % n])).collect();
            let allowed: VertexSet = (0..n)
                .filter(|v| allowed_mask >> v & 1 == 1 && !terminals.iter().any(|t| t.contains(v)))
                .collect();
            if let Some(tree) = g.steiner_tree_heuristic(&terminals, &allowed).unwrap() {
                prop_assert!(tree.vertices.is_subset(&allowed));
                prop_assert!(g.is_connected_subset(&tree.vertices).unwrap());
                prop_assert_eq!(tree.edges.len() + 1, tree.vertices.len());
                for &(a, b) in &tree.edges {
                    prop_assert!(g.has_edge(a, b));
                    prop_assert!(tree.vertices.contains(&a) && tree.vertices.contains(&b));
                }
                for t in &terminals {
                    prop_assert!(g.touches(&tree.vertices, t));
                }
            }
        }
    }
}
