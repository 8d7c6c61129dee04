//! Independent oracles shared by the integration tests. Nothing here calls
//! the tuple engine or the refinement engine.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speqwl::refine::DirectedLabeledGraph;
use speqwl::{load_tudataset, GraphCollection, LabeledGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn mutag() -> GraphCollection {
    load_tudataset(data_dir().join("MUTAG"), "MUTAG").expect("MUTAG fixture loads")
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// `G(n, p)` with node labels drawn from `0..labels`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, labels: u32) -> LabeledGraph {
    let node_labels = (0..n).map(|_| rng.gen_range(0..labels.max(1))).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v, 0));
            }
        }
    }
    LabeledGraph::with_labels(node_labels, edges).unwrap()
}

fn adjacency_matrix(g: &LabeledGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v, _) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

fn is_connected(n: usize, a: &[Vec<bool>]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if a[u][v] && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Every connected unlabeled graph on `1..=max_n` nodes, one per
/// isomorphism class, by canonical adjacency bitmasks.
pub fn connected_graphs_up_to(max_n: usize) -> Vec<LabeledGraph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let perms = permutations(n);
        let mut seen = std::collections::HashSet::new();
        for mask in 0u64..1 << pairs.len() {
            let mut a = vec![vec![false; n]; n];
            for (b, &(u, v)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    a[u][v] = true;
                    a[v][u] = true;
                }
            }
            if !is_connected(n, &a) {
                continue;
            }
            let canonical = perms
                .iter()
                .map(|p| {
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|&(_, &(u, v))| a[p[u]][p[v]])
                        .fold(0u64, |acc, (b, _)| acc | 1 << b)
                })
                .max()
                .unwrap();
            if seen.insert(canonical) {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                out.push(LabeledGraph::from_edges(n, edges).unwrap());
            }
        }
    }
    out
}

/// Labeled isomorphism by trying every bijection; for tiny graphs only.
pub fn brute_isomorphic(g: &LabeledGraph, h: &LabeledGraph) -> bool {
    let n = g.node_count();
    if n != h.node_count() || g.edge_count() != h.edge_count() {
        return false;
    }
    if g.degree_sequence() != h.degree_sequence() || g.label_multiset() != h.label_multiset() {
        return false;
    }
    let (ag, ah) = (adjacency_matrix(g), adjacency_matrix(h));
    permutations(n).iter().any(|p| {
        (0..n).all(|u| g.node_label(u) == h.node_label(p[u]))
            && (0..n).all(|u| (0..n).all(|v| ag[u][v] == ah[p[u]][p[v]]))
            && g.edges().all(|(u, v, l)| h.edge_label(p[u], p[v]) == Some(l))
    })
}

/// Components of the subgraph induced by the distinct nodes of `t`, by
/// repeated flooding.
pub fn brute_component_count(g: &LabeledGraph, t: &[usize]) -> usize {
    let mut nodes: Vec<usize> = t.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let mut comp = vec![usize::MAX; nodes.len()];
    let mut count = 0;
    for start in 0..nodes.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = count;
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..nodes.len() {
                for b in 0..nodes.len() {
                    if comp[a] == count && comp[b] == usize::MAX && g.has_edge(nodes[a], nodes[b]) {
                        comp[b] = count;
                        changed = true;
                    }
                }
            }
        }
        count += 1;
    }
    count
}

/// All of `V(G)^k` in lexicographic order.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// `V(G)^k_s` by filtering every `k`-tuple.
pub fn brute_ks_tuples(g: &LabeledGraph, k: usize, s: usize) -> Vec<Vec<usize>> {
    all_tuples(g.node_count(), k)
        .into_iter()
        .filter(|t| brute_component_count(g, t) <= s)
        .collect()
}

/// Node labels plus, per ordered pair, `None` for equal nodes or the edge label.
pub type AtomicKey = (Vec<u32>, Vec<Vec<Option<Option<u32>>>>);

/// Position-fixed isomorphism type: equality pattern, adjacency with edge
/// labels, node labels.
pub fn brute_atomic_key(g: &LabeledGraph, t: &[usize]) -> AtomicKey {
    let labels = t.iter().map(|&v| g.node_label(v)).collect();
    let relation = t
        .iter()
        .map(|&a| {
            t.iter()
                .map(|&b| if a == b { None } else { Some(g.edge_label(a, b)) })
                .collect()
        })
        .collect();
    (labels, relation)
}

/// Whether `t_i ↦ u_i` is a labeled isomorphism of the induced subgraphs.
pub fn position_isomorphic(g: &LabeledGraph, t: &[usize], u: &[usize]) -> bool {
    let k = t.len();
    (0..k).all(|i| g.node_label(t[i]) == g.node_label(u[i]))
        && (0..k).all(|i| {
            (0..k).all(|j| (t[i] == t[j]) == (u[i] == u[j]) && g.edge_label(t[i], t[j]) == g.edge_label(u[i], u[j]))
        })
}

/// The `(k,s)`-tuple graph rebuilt from the definitions: nodes are the
/// brute-force tuples, labeled by atomic type; arcs `t → φ_j(t, w)` for
/// `w ∈ δ(t_j)` labeled `j`.
pub fn brute_tuple_digraph(g: &LabeledGraph, k: usize, s: usize) -> (Vec<Vec<usize>>, DirectedLabeledGraph) {
    let tuples = brute_ks_tuples(g, k, s);
    let index: std::collections::HashMap<Vec<usize>, usize> =
        tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut types = std::collections::HashMap::new();
    let labels: Vec<u32> = tuples
        .iter()
        .map(|t| {
            let key = brute_atomic_key(g, t);
            let next = types.len() as u32;
            *types.entry(key).or_insert(next)
        })
        .collect();
    let mut arcs = Vec::new();
    for (i, t) in tuples.iter().enumerate() {
        for j in 0..k {
            for &w in g.neighbors(t[j]) {
                let mut u = t.clone();
                u[j] = w as usize;
                if let Some(&target) = index.get(&u) {
                    arcs.push((i, target, j as u32 + 1));
                }
            }
        }
    }
    let digraph = DirectedLabeledGraph::new(labels, arcs).unwrap();
    (tuples, digraph)
}

/// Whether two colorings of the same index set induce the same partition.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut forward = std::collections::HashMap::new();
    let mut backward = std::collections::HashMap::new();
    a.iter()
        .zip(b)
        .all(|(x, y)| *forward.entry(x).or_insert(y) == y && *backward.entry(y).or_insert(x) == x)
}

/// Deterministic stand-in with the published ENZYMES shape: 600 graphs,
/// about 32.6 nodes and 62.1 edges on average, 3 node labels. A random
/// spanning tree makes every graph connected; extra edges are uniform.
pub fn enzymes_like(seed: u64) -> Vec<LabeledGraph> {
    let mut rng = rng(seed);
    (0..600)
        .map(|_| {
            let n: usize = rng.gen_range(10..=55);
            let target = ((n as f64) * 1.905).round() as usize;
            let max_edges = n * (n - 1) / 2;
            let mut edges = std::collections::BTreeSet::new();
            for v in 1..n {
                let u = rng.gen_range(0..v);
                edges.insert((u, v));
            }
            while edges.len() < target.min(max_edges) {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if u != v {
                    edges.insert((u.min(v), u.max(v)));
                }
            }
            let labels = (0..n).map(|_| rng.gen_range(0..3)).collect();
            LabeledGraph::with_labels(labels, edges.into_iter().map(|(u, v)| (u, v, 0))).unwrap()
        })
        .collect()
}

/// ENZYMES from `SPEQWL_DATA_DIR` or the fixture directory, if present.
pub fn enzymes() -> Option<GraphCollection> {
    let dirs = std::env::var_os("SPEQWL_DATA_DIR")
        .map(PathBuf::from)
        .into_iter()
        .chain([data_dir()]);
    for dir in dirs {
        let path = dir.join("ENZYMES");
        if path.join("ENZYMES_A.txt").exists() {
            return load_tudataset(&path, "ENZYMES").ok();
        }
    }
    None
}
