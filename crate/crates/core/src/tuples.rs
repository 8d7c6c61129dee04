//! Node tuples, their atomic types, enumeration of `(k,s)`-tuples and the
//! `(k,s)`-tuple graph whose edges are local `j`-neighbor relations.
//!
//! A `(k,s)`-tuple is a `k`-tuple of nodes whose induced subgraph has at most
//! `s` connected components. Tuples are stored as mixed-radix integer keys
//! (`key = Σ v_j · n^(k-1-j)`), so ascending key order is lexicographic tuple
//! order and replacing position `j` is a single addition.

use std::io::{self, Write};

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, UnionFind};

/// A `k`-tuple of node ids; repeats are allowed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeTuple(pub Vec<usize>);

impl NodeTuple {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `φ_j(v, w)` with a 0-based position `j`.
    pub fn replaced(&self, j: usize, w: usize) -> NodeTuple {
        let mut t = self.0.clone();
        t[j] = w;
        NodeTuple(t)
    }
}

/// Canonical code of the position-labeled isomorphism type of `G[t]`.
///
/// Layout: the node label of every position, then for each position pair
/// `i < j` one word: `0` if `t_i = t_j`, `1` if distinct and non-adjacent,
/// `2 + label` if adjacent through an edge with that label. Two tuples get
/// equal codes iff `t_i ↦ u_i` is a labeled isomorphism of the induced
/// subgraphs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicType(pub Vec<u32>);

pub fn atomic_type(g: &LabeledGraph, t: &[usize]) -> AtomicType {
    let mut code = Vec::with_capacity(t.len() * (t.len() + 1) / 2);
    atomic_type_into(g, t.iter().copied(), &mut code);
    AtomicType(code)
}

pub(crate) fn atomic_type_into<I>(g: &LabeledGraph, nodes: I, code: &mut Vec<u32>)
where
    I: Iterator<Item = usize> + Clone,
{
    code.clear();
    code.extend(nodes.clone().map(|v| g.node_label(v)));
    for (i, a) in nodes.clone().enumerate() {
        for b in nodes.clone().skip(i + 1) {
            code.push(if a == b {
                0
            } else {
                match g.edge_label(a, b) {
                    None => 1,
                    Some(l) => 2 + l,
                }
            });
        }
    }
}

/// Number of connected components of the subgraph induced by the distinct
/// nodes of `t`.
pub fn component_count(g: &LabeledGraph, t: &[usize]) -> usize {
    let mut distinct: Vec<usize> = t.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut uf = UnionFind::new(distinct.len());
    for i in 0..distinct.len() {
        for j in i + 1..distinct.len() {
            if g.has_edge(distinct[i], distinct[j]) {
                uf.union(i, j);
            }
        }
    }
    uf.set_count()
}

/// Mixed-radix encoding of `k`-tuples over `n` nodes into `u64` keys.
#[derive(Clone, Debug)]
pub(crate) struct TupleCodec {
    pub n: u64,
    pub k: usize,
    /// `pow[j] = n^(k-1-j)`
    pub pow: Vec<u64>,
    /// `n^k`
    pub space: u64,
}

impl TupleCodec {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let n64 = n as u64;
        let space = n64.checked_pow(k as u32).ok_or_else(|| Error::ResourceLimit {
            what: format!("{k}-tuple keys over {n} nodes"),
            required: (n as u128).saturating_pow(k as u32),
            budget: u64::MAX as u128,
        })?;
        let pow = (0..k).map(|j| n64.pow((k - 1 - j) as u32)).collect();
        Ok(TupleCodec { n: n64, k, pow, space })
    }

    #[inline]
    pub fn encode<I: IntoIterator<Item = u32>>(&self, nodes: I) -> u64 {
        nodes.into_iter().zip(&self.pow).map(|(v, p)| v as u64 * p).sum()
    }

    #[inline]
    pub fn node(&self, key: u64, j: usize) -> u32 {
        ((key / self.pow[j]) % self.n) as u32
    }

    #[inline]
    pub fn decode(&self, key: u64, out: &mut [u32]) {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.node(key, j);
        }
    }

    /// Key of `φ_j(t, w)` given the key of `t` and its current node at `j`.
    #[inline]
    pub fn replace(&self, key: u64, j: usize, old: u32, new: u32) -> u64 {
        key - old as u64 * self.pow[j] + new as u64 * self.pow[j]
    }
}

fn check_ks(k: usize, s: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if s == 0 || s > k {
        return Err(Error::invalid(format!("s must lie in [k] = 1..={k}, got {s}")));
    }
    Ok(())
}

/// All non-decreasing `len`-sequences over `0..n`, i.e. every multiset.
fn all_multisets(n: usize, len: usize, codec: &TupleCodec) -> Vec<u64> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0u32; len];
    loop {
        out.push(codec.encode(cur.iter().copied()));
        // advance to the next non-decreasing sequence
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if (cur[i] as usize) + 1 < n {
                let v = cur[i] + 1;
                for slot in &mut cur[i..] {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Keys (over a `k`-codec) of every sorted `(k,s)`-multiset, ascending.
fn ks_multiset_keys(g: &LabeledGraph, k: usize, s: usize) -> Result<Vec<u64>> {
    check_ks(k, s)?;
    let n = g.node_count();
    let seed_codec = TupleCodec::new(n, s)?;
    let seeds = all_multisets(n, s, &seed_codec);
    if s == k {
        return Ok(seeds);
    }

    // Algorithm 1, level by level: grow every multiset by a copy of one of
    // its nodes or a neighbor of one. Each level is de-duplicated.
    let mut level: FxHashSet<Vec<u32>> = FxHashSet::default();
    let mut buf = vec![0u32; s];
    for &key in &seeds {
        seed_codec.decode(key, &mut buf);
        level.insert(buf.clone());
    }
    for size in s..k {
        let mut next: FxHashSet<Vec<u32>> = FxHashSet::with_capacity_and_hasher(level.len() * 2, Default::default());
        for m in &level {
            let mut prev = u32::MAX;
            for &t in m {
                if t == prev {
                    continue;
                }
                prev = t;
                for &u in std::iter::once(&t).chain(g.neighbors(t as usize)) {
                    let mut grown = Vec::with_capacity(size + 1);
                    let pos = m.partition_point(|&x| x <= u);
                    grown.extend_from_slice(&m[..pos]);
                    grown.push(u);
                    grown.extend_from_slice(&m[pos..]);
                    next.insert(grown);
                }
            }
        }
        level = next;
    }
    let codec = TupleCodec::new(n, k)?;
    let mut keys: Vec<u64> = level.iter().map(|m| codec.encode(m.iter().copied())).collect();
    keys.sort_unstable();
    Ok(keys)
}

/// `S(G)^k_s`: every multiset of `k` nodes inducing at most `s` components,
/// each as a sorted node list, in lexicographic order.
pub fn enumerate_ks_multisets(g: &LabeledGraph, k: usize, s: usize) -> Result<Vec<Vec<usize>>> {
    let codec = TupleCodec::new(g.node_count(), k)?;
    let keys = ks_multiset_keys(g, k, s)?;
    let mut buf = vec![0u32; k];
    Ok(keys
        .into_iter()
        .map(|key| {
            codec.decode(key, &mut buf);
            buf.iter().map(|&v| v as usize).collect()
        })
        .collect())
}

/// Rearranges `xs` into the next lexicographic permutation; `false` once the
/// sequence is non-increasing.
fn next_permutation(xs: &mut [u32]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Sorted keys of `V(G)^k_s`.
fn ks_tuple_keys(g: &LabeledGraph, k: usize, s: usize, codec: &TupleCodec) -> Result<Vec<u64>> {
    if s == k {
        return Ok((0..codec.space).collect());
    }
    let multisets = ks_multiset_keys(g, k, s)?;
    let mut keys = Vec::with_capacity(multisets.len() * 2);
    let mut buf = vec![0u32; k];
    for m in multisets {
        codec.decode(m, &mut buf);
        loop {
            keys.push(codec.encode(buf.iter().copied()));
            if !next_permutation(&mut buf) {
                break;
            }
        }
    }
    keys.sort_unstable();
    Ok(keys)
}

/// `V(G)^k_s` in lexicographic order.
pub fn enumerate_ks_tuples(g: &LabeledGraph, k: usize, s: usize) -> Result<Vec<NodeTuple>> {
    check_ks(k, s)?;
    let codec = TupleCodec::new(g.node_count(), k)?;
    let keys = ks_tuple_keys(g, k, s, &codec)?;
    let mut buf = vec![0u32; k];
    Ok(keys
        .into_iter()
        .map(|key| {
            codec.decode(key, &mut buf);
            NodeTuple(buf.iter().map(|&v| v as usize).collect())
        })
        .collect())
}

/// `|V(G)^k_s|` without materializing tuples when `s = k`.
pub fn count_ks_tuples(g: &LabeledGraph, k: usize, s: usize) -> Result<u64> {
    check_ks(k, s)?;
    let codec = TupleCodec::new(g.node_count(), k)?;
    if s == k {
        return Ok(codec.space);
    }
    Ok(ks_tuple_keys(g, k, s, &codec)?.len() as u64)
}

/// The directed, position-labeled `(k,s)`-tuple graph restricted to local
/// edges: `t → φ_j(t, w)` with label `j` for every `w ∈ δ(t_j)` such that
/// `φ_j(t, w)` is again a `(k,s)`-tuple.
#[derive(Clone, Debug)]
pub struct TupleGraph<'g> {
    graph: &'g LabeledGraph,
    s: usize,
    codec: TupleCodec,
    keys: Vec<u64>,
    // CSR over (tuple, position) pairs
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

pub fn build_tuple_graph(g: &LabeledGraph, k: usize, s: usize) -> Result<TupleGraph<'_>> {
    check_ks(k, s)?;
    let codec = TupleCodec::new(g.node_count(), k)?;
    let keys = ks_tuple_keys(g, k, s, &codec)?;
    if keys.len() > u32::MAX as usize {
        return Err(Error::ResourceLimit {
            what: format!("({k},{s})-tuple graph"),
            required: keys.len() as u128 * 8,
            budget: u32::MAX as u128 * 8,
        });
    }

    let mut offsets = Vec::with_capacity(keys.len() * k + 1);
    let mut targets = Vec::new();
    offsets.push(0u32);
    let dense = s == k;
    for &key in &keys {
        for j in 0..k {
            let vj = codec.node(key, j);
            for &w in g.neighbors(vj as usize) {
                let nk = codec.replace(key, j, vj, w);
                let found = if dense {
                    Some(nk as usize)
                } else {
                    keys.binary_search(&nk).ok()
                };
                if let Some(idx) = found {
                    targets.push(idx as u32);
                }
            }
            let end = u32::try_from(targets.len()).map_err(|_| Error::ResourceLimit {
                what: format!("local edges of the ({k},{s})-tuple graph"),
                required: targets.len() as u128 * 4,
                budget: u32::MAX as u128 * 4,
            })?;
            offsets.push(end);
        }
    }
    Ok(TupleGraph {
        graph: g,
        s,
        codec,
        keys,
        offsets,
        targets,
    })
}

impl<'g> TupleGraph<'g> {
    pub fn graph(&self) -> &'g LabeledGraph {
        self.graph
    }

    pub fn k(&self) -> usize {
        self.codec.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of `(k,s)`-tuples.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn tuple(&self, idx: usize) -> NodeTuple {
        NodeTuple(
            (0..self.k())
                .map(|j| self.codec.node(self.keys[idx], j) as usize)
                .collect(),
        )
    }

    #[inline]
    pub(crate) fn key(&self, idx: usize) -> u64 {
        self.keys[idx]
    }

    pub(crate) fn codec(&self) -> &TupleCodec {
        &self.codec
    }

    /// 0-based node at position `j` of tuple `idx`.
    #[inline]
    pub fn node_at(&self, idx: usize, j: usize) -> usize {
        self.codec.node(self.keys[idx], j) as usize
    }

    pub fn index_of(&self, t: &[usize]) -> Option<usize> {
        if t.len() != self.k() || t.iter().any(|&v| v >= self.graph.node_count()) {
            return None;
        }
        let key = self.codec.encode(t.iter().map(|&v| v as u32));
        self.keys.binary_search(&key).ok()
    }

    /// Local `j`-neighbors with a 0-based position, unchecked.
    #[inline]
    pub(crate) fn local(&self, idx: usize, j: usize) -> &[u32] {
        let c = idx * self.k() + j;
        &self.targets[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }

    /// Local `j`-neighbors of tuple `idx` for a 1-based position `j ∈ [k]`.
    pub fn local_neighbors(&self, idx: usize, j: usize) -> Result<&[u32]> {
        if j == 0 || j > self.k() {
            return Err(Error::invalid(format!("position {j} outside [k] = 1..={}", self.k())));
        }
        if idx >= self.len() {
            return Err(Error::invalid(format!(
                "tuple index {idx} out of range ({} tuples)",
                self.len()
            )));
        }
        Ok(self.local(idx, j - 1))
    }

    pub fn local_edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn atomic_type(&self, idx: usize) -> AtomicType {
        let mut code = Vec::new();
        self.atomic_type_into(idx, &mut code);
        AtomicType(code)
    }

    pub(crate) fn atomic_type_into(&self, idx: usize, code: &mut Vec<u32>) {
        let key = self.keys[idx];
        atomic_type_into(
            self.graph,
            (0..self.k()).map(|j| self.codec.node(key, j) as usize),
            code,
        );
    }

    /// Whether every node of tuple `idx` lies in `range`.
    pub fn tuple_within(&self, idx: usize, range: std::ops::Range<usize>) -> bool {
        (0..self.k()).all(|j| range.contains(&self.node_at(idx, j)))
    }

    /// Connected components of the tuple graph with local edges taken as
    /// undirected.
    pub fn local_component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.len());
        for idx in 0..self.len() {
            for j in 0..self.k() {
                for &t in self.local(idx, j) {
                    uf.union(idx, t as usize);
                }
            }
        }
        uf.set_count()
    }

    /// Edge-list dump, one `source target position` line per local edge
    /// (positions 1-based), preceded by one `# tuple index: nodes` line per
    /// tuple.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for idx in 0..self.len() {
            let t = self.tuple(idx);
            let nodes: Vec<String> = t.0.iter().map(ToString::to_string).collect();
            writeln!(out, "# {idx}: {}", nodes.join(" "))?;
        }
        for idx in 0..self.len() {
            for j in 0..self.k() {
                for &t in self.local(idx, j) {
                    writeln!(out, "{idx} {t} {}", j + 1)?;
                }
            }
        }
        Ok(())
    }
}

/// All of `V(G)^k` without materialized edges; neighbors are computed by
/// index arithmetic. Used by the dense refinements (`δ-k-LWL`, `k-WL`).
#[derive(Clone, Debug)]
pub struct DenseTupleSpace<'g> {
    graph: &'g LabeledGraph,
    pub(crate) codec: TupleCodec,
}

impl<'g> DenseTupleSpace<'g> {
    pub fn new(graph: &'g LabeledGraph, k: usize) -> Result<Self> {
        check_ks(k, 1)?;
        let codec = TupleCodec::new(graph.node_count(), k)?;
        if codec.space > u32::MAX as u64 {
            return Err(Error::ResourceLimit {
                what: format!("dense {k}-tuple space over {} nodes", graph.node_count()),
                required: codec.space as u128 * 4,
                budget: u32::MAX as u128 * 4,
            });
        }
        Ok(DenseTupleSpace { graph, codec })
    }

    pub fn graph(&self) -> &'g LabeledGraph {
        self.graph
    }

    pub fn k(&self) -> usize {
        self.codec.k
    }

    pub fn len(&self) -> usize {
        self.codec.space as usize
    }

    pub fn is_empty(&self) -> bool {
        self.codec.space == 0
    }

    pub fn tuple(&self, idx: usize) -> NodeTuple {
        NodeTuple((0..self.k()).map(|j| self.codec.node(idx as u64, j) as usize).collect())
    }

    pub fn index_of(&self, t: &[usize]) -> usize {
        self.codec.encode(t.iter().map(|&v| v as u32)) as usize
    }

    pub(crate) fn atomic_type_into(&self, idx: usize, code: &mut Vec<u32>) {
        atomic_type_into(
            self.graph,
            (0..self.k()).map(|j| self.codec.node(idx as u64, j) as usize),
            code,
        );
    }

    pub fn tuple_within(&self, idx: usize, range: std::ops::Range<usize>) -> bool {
        (0..self.k()).all(|j| range.contains(&(self.codec.node(idx as u64, j) as usize)))
    }
}
