//! Immutable labeled undirected graphs and the elementary algorithms built on
//! them: disjoint union, connected components and node relabeling.

use crate::error::{Error, Result};

/// An undirected graph with non-negative integer node and edge labels.
///
/// Node ids are `0..node_count`. Neighbor lists are sorted and symmetric,
/// there are no self-loops and no parallel edges, and an edge carries the
/// same label in both orientations. Unlabeled inputs use label `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LabeledGraph {
    adjacency: Vec<Vec<u32>>,
    // parallel to `adjacency`
    adjacency_labels: Vec<Vec<u32>>,
    node_labels: Vec<u32>,
    edge_count: usize,
}

impl LabeledGraph {
    /// Edgeless graph on `node_count` nodes, all labeled `0`.
    pub fn empty(node_count: usize) -> Self {
        LabeledGraph {
            adjacency: vec![Vec::new(); node_count],
            adjacency_labels: vec![Vec::new(); node_count],
            node_labels: vec![0; node_count],
            edge_count: 0,
        }
    }

    /// Unlabeled graph from an edge list.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::with_labels(vec![0; node_count], edges.into_iter().map(|(u, v)| (u, v, 0)))
    }

    /// Labeled graph from node labels and `(u, v, label)` edges.
    ///
    /// An edge listed twice (in either orientation) with the same label is
    /// collapsed; listing it with two different labels is an error, as are
    /// self-loops and out-of-range endpoints.
    pub fn with_labels<I>(node_labels: Vec<u32>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let n = node_labels.len();
        if n > u32::MAX as usize {
            return Err(Error::invalid("graph has more than 2^32 nodes"));
        }
        let mut half_edges: Vec<(u32, u32, u32)> = Vec::new();
        for (u, v, label) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            half_edges.push((u as u32, v as u32, label));
            half_edges.push((v as u32, u as u32, label));
        }
        half_edges.sort_unstable();
        half_edges.dedup();
        for w in half_edges.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) given with labels {} and {}",
                    w[0].0, w[0].1, w[0].2, w[1].2
                )));
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        let mut adjacency_labels = vec![Vec::new(); n];
        for &(u, v, label) in &half_edges {
            adjacency[u as usize].push(v);
            adjacency_labels[u as usize].push(label);
        }
        Ok(LabeledGraph {
            adjacency,
            adjacency_labels,
            node_labels,
            edge_count: half_edges.len() / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbor ids of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    /// Labels of the edges to `neighbors(v)`, in the same order.
    #[inline]
    pub fn neighbor_edge_labels(&self, v: usize) -> &[u32] {
        &self.adjacency_labels[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    #[inline]
    pub fn node_label(&self, v: usize) -> u32 {
        self.node_labels[v]
    }

    pub fn node_labels(&self) -> &[u32] {
        &self.node_labels
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    /// Label of edge `{u, v}`, or `None` when the nodes are not adjacent.
    #[inline]
    pub fn edge_label(&self, u: usize, v: usize) -> Option<u32> {
        self.adjacency[u]
            .binary_search(&(v as u32))
            .ok()
            .map(|i| self.adjacency_labels[u][i])
    }

    /// Every undirected edge once, as `(u, v, label)` with `u < v`, in
    /// lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(u, nbrs)| {
            nbrs.iter()
                .zip(&self.adjacency_labels[u])
                .filter(move |(&v, _)| (v as usize) > u)
                .map(move |(&v, &l)| (u, v as usize, l))
        })
    }

    /// Degrees sorted ascending.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        d.sort_unstable();
        d
    }

    /// Node labels sorted ascending.
    pub fn label_multiset(&self) -> Vec<u32> {
        let mut l = self.node_labels.clone();
        l.sort_unstable();
        l
    }
}

/// Disjoint union `g ∪̇ h`: the nodes of `h` are shifted by `g.node_count()`.
pub fn disjoint_union(g: &LabeledGraph, h: &LabeledGraph) -> LabeledGraph {
    let offset = g.node_count() as u32;
    let mut out = g.clone();
    out.node_labels.extend_from_slice(&h.node_labels);
    out.adjacency_labels.extend(h.adjacency_labels.iter().cloned());
    out.adjacency.extend(
        h.adjacency
            .iter()
            .map(|nbrs| nbrs.iter().map(|&v| v + offset).collect::<Vec<_>>()),
    );
    out.edge_count += h.edge_count;
    out
}

/// Component id per node plus the number of components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    /// Contiguous ids `0..count`, numbered by smallest member node.
    pub ids: Vec<usize>,
    pub count: usize,
}

pub fn connected_components(g: &LabeledGraph) -> Components {
    let n = g.node_count();
    let mut uf = UnionFind::new(n);
    for (u, v, _) in g.edges() {
        uf.union(u, v);
    }
    let mut root_to_id = vec![usize::MAX; n];
    let mut count = 0;
    let ids = (0..n)
        .map(|v| {
            let r = uf.find(v);
            if root_to_id[r] == usize::MAX {
                root_to_id[r] = count;
                count += 1;
            }
            root_to_id[r]
        })
        .collect();
    Components { ids, count }
}

/// Relabels nodes so that node `u` becomes `perm[u]`; labels travel with
/// their nodes and edges.
pub fn apply_permutation(g: &LabeledGraph, perm: &[usize]) -> Result<LabeledGraph> {
    let n = g.node_count();
    if perm.len() != n {
        return Err(Error::invalid(format!(
            "permutation has length {}, graph has {n} nodes",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid("mapping is not a bijection on the node ids"));
        }
    }
    let mut labels = vec![0; n];
    for (u, &p) in perm.iter().enumerate() {
        labels[p] = g.node_label(u);
    }
    LabeledGraph::with_labels(labels, g.edges().map(|(u, v, l)| (perm[u], perm[v], l)))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> LabeledGraph {
        LabeledGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn rejects_self_loops_and_conflicting_labels() {
        assert!(LabeledGraph::from_edges(3, [(1, 1)]).is_err());
        assert!(LabeledGraph::from_edges(3, [(0, 3)]).is_err());
        assert!(LabeledGraph::with_labels(vec![0, 0], [(0, 1, 1), (1, 0, 2)]).is_err());
        let g = LabeledGraph::with_labels(vec![0, 0], [(0, 1, 4), (1, 0, 4)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_label(1, 0), Some(4));
    }

    #[test]
    fn union_of_two_squares() {
        let u = disjoint_union(&cycle(4), &cycle(4));
        assert_eq!(u.node_count(), 8);
        assert_eq!(u.edge_count(), 8);
        assert_eq!(connected_components(&u).count, 2);
        assert_eq!(disjoint_union(&cycle(5), &LabeledGraph::empty(0)), cycle(5));
    }

    #[test]
    fn component_counts() {
        assert_eq!(connected_components(&cycle(8)).count, 1);
        let c = connected_components(&LabeledGraph::empty(5));
        assert_eq!(c.count, 5);
        assert_eq!(c.ids, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rotating_a_cycle_gives_the_cycle() {
        let c8 = cycle(8);
        let rot: Vec<usize> = (0..8).map(|i| (i + 1) % 8).collect();
        assert_eq!(apply_permutation(&c8, &rot).unwrap(), c8);
        let id: Vec<usize> = (0..8).collect();
        assert_eq!(apply_permutation(&c8, &id).unwrap(), c8);
        assert!(apply_permutation(&c8, &[0, 0, 1, 2, 3, 4, 5, 6]).is_err());
        assert!(apply_permutation(&c8, &[0, 1]).is_err());
    }

    #[test]
    fn permutation_then_inverse() {
        let g = LabeledGraph::with_labels(vec![3, 1, 2, 0], [(0, 1, 5), (1, 2, 6), (2, 3, 7)]).unwrap();
        let perm = [2, 0, 3, 1];
        let mut inv = [0; 4];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let h = apply_permutation(&g, &perm).unwrap();
        assert_eq!(h.node_label(2), 3);
        assert_eq!(h.edge_label(2, 0), Some(5));
        assert_eq!(apply_permutation(&h, &inv).unwrap(), g);
    }
}
