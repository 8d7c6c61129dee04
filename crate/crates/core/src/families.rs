//! Generators for the graph pairs that separate the refinement variants,
//! with brute-force witnesses certifying that the pairs are non-isomorphic.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{disjoint_union, LabeledGraph};

/// The cycle `C_n`.
pub fn cycle(n: usize) -> Result<LabeledGraph> {
    if n < 3 {
        return Err(Error::invalid(format!("a cycle needs at least 3 nodes, got {n}")));
    }
    LabeledGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

/// `(C_{2(k+2)}, C_{k+2} ∪̇ C_{k+2})`.
pub fn cycle_pair(k: usize) -> Result<(LabeledGraph, LabeledGraph)> {
    check_k(k)?;
    let half = cycle(k + 2)?;
    Ok((cycle(2 * (k + 2))?, disjoint_union(&half, &half)))
}

/// `A_{k+2}`: two `(k+2)`-cycles joined by one edge. `B_{k+2}`: two
/// `(k+3)`-cycles sharing one edge. Both have `2(k+2)` nodes and
/// `2(k+2)+1` edges.
pub fn ab_pair(k: usize) -> Result<(LabeledGraph, LabeledGraph)> {
    check_k(k)?;
    let m = k + 2;
    let n = 2 * m;
    // A: cycles a_0..a_{m-1} and a_m..a_{2m-1}, bridge a_{m-1} a_m
    let mut a: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
    a.extend((0..m).map(|i| (m + i, m + (i + 1) % m)));
    a.push((m - 1, m));
    // B: the 2m-cycle b_0..b_{2m-1} with chord b_0 b_m
    let mut b: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    b.push((0, m));
    Ok((LabeledGraph::from_edges(n, a)?, LabeledGraph::from_edges(n, b)?))
}

/// Node layout of a CFI graph over `K_{k+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfiLayout {
    pub k: usize,
    /// Base edges `(u, v)` with `u < v`, lexicographic; index = edge id.
    pub base_edges: Vec<(usize, usize)>,
    /// `vertex_clouds[v]`: `(node id, subset bitmask over the edges incident
    /// to v in increasing id order)`.
    pub vertex_clouds: Vec<Vec<(usize, u32)>>,
    /// `edge_clouds[e] = (e^0, e^1)`.
    pub edge_clouds: Vec<(usize, usize)>,
}

impl CfiLayout {
    fn new(k: usize, odd_at_zero: bool) -> Self {
        let base_edges: Vec<(usize, usize)> = (0..=k).flat_map(|u| (u + 1..=k).map(move |v| (u, v))).collect();
        let mut next = 0;
        let vertex_clouds = (0..=k)
            .map(|v| {
                let want_odd = odd_at_zero && v == 0;
                (0..1u32 << k)
                    .filter(|s| (s.count_ones() % 2 == 1) == want_odd)
                    .map(|s| {
                        next += 1;
                        (next - 1, s)
                    })
                    .collect()
            })
            .collect();
        let edge_clouds = (0..base_edges.len())
            .map(|e| (next + 2 * e, next + 2 * e + 1))
            .collect();
        CfiLayout {
            k,
            base_edges,
            vertex_clouds,
            edge_clouds,
        }
    }

    pub fn node_count(&self) -> usize {
        self.vertex_clouds.iter().map(Vec::len).sum::<usize>() + 2 * self.base_edges.len()
    }

    /// Base edges incident to `v`, in increasing id order.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.base_edges.len())
            .filter(|&e| self.base_edges[e].0 == v || self.base_edges[e].1 == v)
            .collect()
    }

    /// Base vertex whose cloud contains `node`, if any.
    pub fn vertex_cloud_of(&self, node: usize) -> Option<usize> {
        self.vertex_clouds
            .iter()
            .position(|cloud| cloud.iter().any(|&(x, _)| x == node))
    }

    /// Whether `node` belongs to a vertex cloud.
    pub fn is_vertex_node(&self, node: usize) -> bool {
        node < self.node_count() - 2 * self.base_edges.len()
    }

    fn graph_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self.edge_clouds.clone();
        for (v, cloud) in self.vertex_clouds.iter().enumerate() {
            let incident = self.incident(v);
            for &(node, subset) in cloud {
                for (bit, &e) in incident.iter().enumerate() {
                    let (e0, e1) = self.edge_clouds[e];
                    edges.push((node, if subset >> bit & 1 == 1 { e1 } else { e0 }));
                }
            }
        }
        edges
    }
}

/// Largest `k` accepted by the CFI generators.
pub const MAX_CFI_K: usize = 20;

fn cfi_graph(k: usize, odd_at_zero: bool) -> Result<(LabeledGraph, CfiLayout)> {
    check_k(k)?;
    if k > MAX_CFI_K {
        return Err(Error::ResourceLimit {
            what: format!("CFI graph for k = {k}"),
            required: ((k as u128 + 1) << (k - 1)) * 8,
            budget: ((MAX_CFI_K as u128 + 1) << (MAX_CFI_K - 1)) * 8,
        });
    }
    let layout = CfiLayout::new(k, odd_at_zero);
    let g = LabeledGraph::from_edges(layout.node_count(), layout.graph_edges())?;
    Ok((g, layout))
}

/// The CFI pair `(G_k, H_k)` over `K_{k+1}`; `H_k` uses odd subsets at base
/// vertex `0`.
pub fn cfi_pair(k: usize) -> Result<(LabeledGraph, LabeledGraph)> {
    Ok((cfi_graph(k, false)?.0, cfi_graph(k, true)?.0))
}

pub fn cfi_layout(k: usize, odd_at_zero: bool) -> Result<CfiLayout> {
    Ok(cfi_graph(k, odd_at_zero)?.1)
}

/// `(X_k, Y_k)`: the CFI pair with cloud colors in which every edge is
/// subdivided into a path with `delta` edges (`delta - 1` auxiliary nodes).
///
/// Labels: `Red_v = v`, `Blue_e = k+1+e`; with `base = k+1+|E(K)|`, an
/// auxiliary node on an edge between the clouds of base edge `e` gets
/// `base+3e` if both ends are in the edge cloud, `base+3e+1` if one end is
/// in the cloud of the smaller endpoint of `e`, `base+3e+2` otherwise.
/// Auxiliary nodes follow the original nodes, edge by edge in lexicographic
/// order, each path numbered from its smaller end.
pub fn padded_colored_pair(k: usize, delta: usize) -> Result<(LabeledGraph, LabeledGraph)> {
    if delta <= 3 * k {
        return Err(Error::invalid(format!(
            "path length must exceed 3k = {}, got {delta}",
            3 * k
        )));
    }
    Ok((padded(k, delta, false)?, padded(k, delta, true)?))
}

fn padded(k: usize, delta: usize, odd_at_zero: bool) -> Result<LabeledGraph> {
    let (g, layout) = cfi_graph(k, odd_at_zero)?;
    let colors = padded_cloud_colors(&layout);
    let m = layout.base_edges.len() as u32;
    let base = k as u32 + 1 + m;
    // cloud colors are Red_v or Blue_e; recover the base edge of a Blue node
    let aux_color = |a: u32, b: u32| {
        let (lo, hi) = (a.min(b), a.max(b));
        let e = hi - (k as u32 + 1);
        if lo == hi {
            base + 3 * e
        } else if lo as usize == layout.base_edges[e as usize].0 {
            base + 3 * e + 1
        } else {
            base + 3 * e + 2
        }
    };
    let mut labels = colors.clone();
    let mut edges = Vec::new();
    for (u, v, _) in g.edges() {
        let color = aux_color(colors[u], colors[v]);
        let mut prev = u;
        for _ in 1..delta {
            labels.push(color);
            let node = labels.len() - 1;
            edges.push((prev, node, 0));
            prev = node;
        }
        edges.push((prev, v, 0));
    }
    LabeledGraph::with_labels(labels, edges)
}

fn padded_cloud_colors(layout: &CfiLayout) -> Vec<u32> {
    let mut colors = vec![0u32; layout.node_count()];
    for (v, cloud) in layout.vertex_clouds.iter().enumerate() {
        for &(node, _) in cloud {
            colors[node] = v as u32;
        }
    }
    for (e, &(e0, e1)) in layout.edge_clouds.iter().enumerate() {
        colors[e0] = (layout.k + 1 + e) as u32;
        colors[e1] = (layout.k + 1 + e) as u32;
    }
    colors
}

/// BFS distances from `source`.
fn distances(g: &LabeledGraph, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w as usize] == usize::MAX {
                dist[w as usize] = dist[u] + 1;
                queue.push_back(w as usize);
            }
        }
    }
    dist
}

/// Searches for `size` nodes among `candidates` that are pairwise related.
fn find_clique<F: Fn(usize, usize) -> bool>(candidates: &[usize], size: usize, related: F) -> Option<Vec<usize>> {
    fn extend<F: Fn(usize, usize) -> bool>(
        candidates: &[usize],
        start: usize,
        size: usize,
        chosen: &mut Vec<usize>,
        related: &F,
    ) -> bool {
        if chosen.len() == size {
            return true;
        }
        for i in start..candidates.len() {
            let c = candidates[i];
            if chosen.iter().all(|&x| related(x, c)) {
                chosen.push(c);
                if extend(candidates, i + 1, size, chosen, related) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    extend(candidates, 0, size, &mut chosen, &related).then_some(chosen)
}

/// A set of `size` nodes from distinct vertex clouds of a CFI graph at
/// pairwise distance exactly two.
pub fn find_distance_two_clique(g: &LabeledGraph, layout: &CfiLayout, size: usize) -> Option<Vec<usize>> {
    let candidates: Vec<usize> = (0..g.node_count()).filter(|&v| layout.is_vertex_node(v)).collect();
    let dist: Vec<Vec<usize>> = candidates.iter().map(|&v| distances(g, v)).collect();
    let pos = |v: usize| candidates.iter().position(|&c| c == v).unwrap();
    let cloud: Vec<Option<usize>> = (0..g.node_count()).map(|v| layout.vertex_cloud_of(v)).collect();
    find_clique(&candidates, size, |a, b| cloud[a] != cloud[b] && dist[pos(a)][b] == 2)
}

/// A set of `size` nodes from distinct vertex clouds of a padded CFI graph
/// in which every two nodes are joined by a path whose inner nodes are
/// auxiliary except for exactly one edge-cloud node. `layout` is the layout
/// of the underlying CFI graph.
pub fn find_colored_distance_clique(g: &LabeledGraph, layout: &CfiLayout, size: usize) -> Option<Vec<usize>> {
    let cloud_nodes = layout.node_count();
    // edge-cloud nodes reachable from v through auxiliary nodes only
    let reach = |v: usize| -> Vec<usize> {
        let mut found = Vec::new();
        let mut seen = vec![false; g.node_count()];
        seen[v] = true;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                let w = w as usize;
                if std::mem::replace(&mut seen[w], true) {
                    continue;
                }
                if w >= cloud_nodes {
                    queue.push_back(w);
                } else if !layout.is_vertex_node(w) {
                    found.push(w);
                }
            }
        }
        found.sort_unstable();
        found
    };
    let candidates: Vec<usize> = (0..cloud_nodes).filter(|&v| layout.is_vertex_node(v)).collect();
    let reached: Vec<Vec<usize>> = candidates.iter().map(|&v| reach(v)).collect();
    let cloud: Vec<Option<usize>> = candidates.iter().map(|&v| layout.vertex_cloud_of(v)).collect();
    find_clique(&candidates, size, |a, b| {
        cloud[a] != cloud[b] && reached[a].iter().any(|x| reached[b].binary_search(x).is_ok())
    })
}
