//! The coloring engine: initial colorings, one refinement round per
//! algorithm variant, the round driver and the distinguishing test.
//!
//! Every round compacts signatures through a [`ColorDictionary`]. A signature
//! always starts with a tag word naming the rule that produced it, followed by
//! the old color, so the new partition refines the old one.
//!
//! Per-round dictionaries make ids comparable between graphs: two tuples of
//! different graphs receive the same color at round `i` iff their signatures
//! agree, provided both graphs were refined with the same `i`-th dictionary.

use std::io::{self, Write};

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::{disjoint_union, LabeledGraph};
use crate::tuples::{build_tuple_graph, DenseTupleSpace, TupleGraph};

const TAG_ATOMIC: u32 = 0;
const TAG_LOCAL: u32 = 1;
const TAG_PLUS: u32 = 2;
const TAG_KWL: u32 = 3;
const TAG_FOLKLORE: u32 = 4;
const TAG_ONE_WL: u32 = 5;
const TAG_EDGE_LABELED: u32 = 6;
const TAG_NODE_LABEL: u32 = 7;

/// Default memory budget for dense tuple spaces: 3 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 3 << 30;

/// Environment variable overriding the dense memory budget, in bytes.
pub const MEMORY_BUDGET_ENV: &str = "SPEQWL_MEM_BUDGET_BYTES";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Color Refinement on nodes.
    OneWl,
    KWlOblivious,
    KWlFolklore,
    DeltaKLwl,
    DeltaKLwlPlus,
    KsLwl,
    KsLwlPlus,
    /// Color Refinement aggregating `(neighbor color, edge label)` pairs.
    EdgeLabeledOneWl,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::OneWl,
        Algorithm::KWlOblivious,
        Algorithm::KWlFolklore,
        Algorithm::DeltaKLwl,
        Algorithm::DeltaKLwlPlus,
        Algorithm::KsLwl,
        Algorithm::KsLwlPlus,
        Algorithm::EdgeLabeledOneWl,
    ];

    /// Lowercase hyphenated id used on the command line.
    pub fn id(self) -> &'static str {
        match self {
            Algorithm::OneWl => "1-wl",
            Algorithm::KWlOblivious => "k-wl",
            Algorithm::KWlFolklore => "k-fwl",
            Algorithm::DeltaKLwl => "delta-k-lwl",
            Algorithm::DeltaKLwlPlus => "delta-k-lwl-plus",
            Algorithm::KsLwl => "ks-lwl",
            Algorithm::KsLwlPlus => "ks-lwl-plus",
            Algorithm::EdgeLabeledOneWl => "edge-1-wl",
        }
    }

    pub fn from_id(id: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.id() == id)
    }

    pub fn is_plus(self) -> bool {
        matches!(self, Algorithm::DeltaKLwlPlus | Algorithm::KsLwlPlus)
    }

    /// Whether `s` is meaningful for this algorithm.
    pub fn uses_s(self) -> bool {
        matches!(self, Algorithm::KsLwl | Algorithm::KsLwlPlus)
    }

    /// Whether the algorithm colors nodes rather than `k`-tuples.
    pub fn is_node_level(self) -> bool {
        matches!(self, Algorithm::OneWl | Algorithm::EdgeLabeledOneWl)
    }

    /// Local variants without counts: a tuple only ever sees tuples of its
    /// own graph, so two graphs can be refined separately instead of on their
    /// disjoint union.
    fn is_component_local(self) -> bool {
        matches!(
            self,
            Algorithm::OneWl | Algorithm::EdgeLabeledOneWl | Algorithm::DeltaKLwl | Algorithm::KsLwl
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Iterations {
    Fixed(usize),
    UntilStable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Component bound; ignored unless the algorithm is a `(k,s)` variant.
    pub s: usize,
    pub iterations: Iterations,
    /// Use the `+` signature only in the final round. With
    /// [`Iterations::UntilStable`] the plain rule runs to stability and one
    /// `+` round is appended.
    pub plus_counts_last_iteration_only: bool,
    /// Byte budget for dense tuple spaces; `None` reads
    /// [`MEMORY_BUDGET_ENV`] and falls back to [`DEFAULT_MEMORY_BUDGET`].
    pub memory_budget: Option<u64>,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        RefinementConfig {
            algorithm: Algorithm::KsLwl,
            k: 2,
            s: 1,
            iterations: Iterations::Fixed(5),
            plus_counts_last_iteration_only: true,
            memory_budget: None,
        }
    }
}

impl RefinementConfig {
    pub fn new(algorithm: Algorithm, k: usize, s: usize) -> Self {
        RefinementConfig {
            algorithm,
            k,
            s,
            ..Default::default()
        }
    }

    pub fn ks_lwl(k: usize, s: usize) -> Self {
        Self::new(Algorithm::KsLwl, k, s)
    }

    pub fn with_iterations(mut self, iterations: Iterations) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn until_stable(self) -> Self {
        self.with_iterations(Iterations::UntilStable)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        match self.algorithm {
            Algorithm::OneWl | Algorithm::EdgeLabeledOneWl => {}
            Algorithm::KWlOblivious | Algorithm::KWlFolklore if k < 2 => {
                return Err(Error::invalid(format!("k-WL needs k >= 2, got {k}")));
            }
            _ if k == 0 => return Err(Error::invalid("k must be at least 1")),
            _ => {}
        }
        if self.algorithm.uses_s() && (self.s == 0 || self.s > k) {
            return Err(Error::invalid(format!("s must lie in [k] = 1..={k}, got {}", self.s)));
        }
        Ok(())
    }

    /// Effective dense memory budget in bytes.
    pub fn resolved_memory_budget(&self) -> u64 {
        self.memory_budget
            .or_else(|| {
                std::env::var(MEMORY_BUDGET_ENV)
                    .ok()
                    .and_then(|v| v.trim().parse().ok())
            })
            .unwrap_or(DEFAULT_MEMORY_BUDGET)
    }

    /// Short human-readable name such as `(3,1)-LWL` or `δ-2-LWL+`.
    pub fn label(&self) -> String {
        let (k, s) = (self.k, self.s);
        match self.algorithm {
            Algorithm::OneWl => "1-WL".into(),
            Algorithm::EdgeLabeledOneWl => "edge-labeled 1-WL".into(),
            Algorithm::KWlOblivious => format!("{k}-WL"),
            Algorithm::KWlFolklore => format!("{k}-FWL"),
            Algorithm::DeltaKLwl => format!("δ-{k}-LWL"),
            Algorithm::DeltaKLwlPlus => format!("δ-{k}-LWL+"),
            Algorithm::KsLwl => format!("({k},{s})-LWL"),
            Algorithm::KsLwlPlus => format!("({k},{s})-LWL+"),
        }
    }
}

/// Colors of one round, one compact id per tuple (or node).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub colors: Vec<u32>,
    pub round: usize,
}

impl Coloring {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Number of distinct colors.
    pub fn class_count(&self) -> usize {
        let mut seen = vec![false; self.max_color_bound()];
        let mut count = 0;
        for &c in &self.colors {
            if !std::mem::replace(&mut seen[c as usize], true) {
                count += 1;
            }
        }
        count
    }

    fn max_color_bound(&self) -> usize {
        self.colors.iter().max().map_or(0, |&c| c as usize + 1)
    }

    /// `(color, count)` pairs sorted by color.
    pub fn histogram(&self) -> Vec<(u32, u64)> {
        histogram(self.colors.iter().copied())
    }

    /// Whether both colorings induce the same partition of the same index set.
    pub fn same_partition(&self, other: &Coloring) -> bool {
        same_partition(&[self], &[other])
    }

    /// Whether equal colors in `self` imply equal colors in `coarser`.
    pub fn refines(&self, coarser: &Coloring) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut image: FxHashMap<u32, u32> = FxHashMap::default();
        self.colors
            .iter()
            .zip(&coarser.colors)
            .all(|(&fine, &coarse)| *image.entry(fine).or_insert(coarse) == coarse)
    }
}

pub(crate) fn histogram<I: Iterator<Item = u32>>(colors: I) -> Vec<(u32, u64)> {
    let mut counts: FxHashMap<u32, u64> = FxHashMap::default();
    for c in colors {
        *counts.entry(c).or_default() += 1;
    }
    let mut h: Vec<(u32, u64)> = counts.into_iter().collect();
    h.sort_unstable();
    h
}

/// Partition equality of two colorings of the same concatenated index set.
fn same_partition(a: &[&Coloring], b: &[&Coloring]) -> bool {
    let a_iter = a.iter().flat_map(|c| c.colors.iter().copied());
    let b_iter = b.iter().flat_map(|c| c.colors.iter().copied());
    let mut forward: FxHashMap<u32, u32> = FxHashMap::default();
    let mut backward: FxHashMap<u32, u32> = FxHashMap::default();
    let mut len_a = 0usize;
    let mut len_b = 0usize;
    for (x, y) in a_iter.zip(b_iter) {
        len_a += 1;
        len_b += 1;
        if *forward.entry(x).or_insert(y) != y || *backward.entry(y).or_insert(x) != x {
            return false;
        }
    }
    let total_a: usize = a.iter().map(|c| c.len()).sum();
    let total_b: usize = b.iter().map(|c| c.len()).sum();
    len_a == total_a && len_b == total_b && total_a == total_b
}

/// Injective map from signatures to compact color ids, assigned in
/// first-encounter order. `aux` interns sub-multisets (k-WL groups,
/// folklore vectors) in a separate id space.
#[derive(Clone, Debug, Default)]
pub struct ColorDictionary {
    colors: FxHashMap<Box<[u32]>, u32>,
    aux: FxHashMap<Box<[u32]>, u32>,
}

impl ColorDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of colors issued so far.
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn intern(&mut self, signature: &[u32]) -> u32 {
        intern_in(&mut self.colors, signature)
    }

    fn intern_aux(&mut self, key: &[u32]) -> u32 {
        intern_in(&mut self.aux, key)
    }
}

fn intern_in(map: &mut FxHashMap<Box<[u32]>, u32>, key: &[u32]) -> u32 {
    if let Some(&id) = map.get(key) {
        return id;
    }
    let id = map.len() as u32;
    map.insert(key.into(), id);
    id
}

fn compact<F>(len: usize, round: usize, dict: &mut ColorDictionary, mut signature: F) -> Coloring
where
    F: FnMut(usize, &mut Vec<u32>),
{
    let mut buf = Vec::new();
    let colors = (0..len)
        .map(|i| {
            buf.clear();
            signature(i, &mut buf);
            dict.intern(&buf)
        })
        .collect();
    Coloring { colors, round }
}

/// Appends `len, sorted items...` to `buf`.
fn push_sorted(buf: &mut Vec<u32>, scratch: &mut [u32]) {
    scratch.sort_unstable();
    buf.push(scratch.len() as u32);
    buf.extend_from_slice(scratch);
}

/// Sorted `(a, b)` pairs, flattened.
fn push_sorted_pairs(buf: &mut Vec<u32>, pairs: &mut [(u32, u32)]) {
    pairs.sort_unstable();
    buf.push(pairs.len() as u32);
    for &(a, b) in pairs.iter() {
        buf.push(a);
        buf.push(b);
    }
}

// ---------------------------------------------------------------------------
// (k,s)-tuple graph

/// Round-0 coloring of a tuple graph: one color per atomic type.
pub fn initial_coloring(tg: &TupleGraph<'_>) -> Coloring {
    initial_coloring_with(tg, &mut ColorDictionary::new())
}

fn initial_coloring_with(tg: &TupleGraph<'_>, dict: &mut ColorDictionary) -> Coloring {
    let mut code = Vec::new();
    compact(tg.len(), 0, dict, |i, buf| {
        tg.atomic_type_into(i, &mut code);
        buf.push(TAG_ATOMIC);
        buf.extend_from_slice(&code);
    })
}

/// One `(k,s)`-LWL round: old color plus, per position `j`, the multiset of
/// old colors over local `j`-neighbors inside the tuple graph.
pub fn refine_step_ks_lwl(tg: &TupleGraph<'_>, c: &Coloring) -> Coloring {
    ks_lwl_with(tg, c, &mut ColorDictionary::new())
}

fn ks_lwl_with(tg: &TupleGraph<'_>, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    let k = tg.k();
    let mut scratch = Vec::new();
    compact(tg.len(), c.round + 1, dict, |i, buf| {
        buf.push(TAG_LOCAL);
        buf.push(c.colors[i]);
        for j in 0..k {
            scratch.clear();
            scratch.extend(tg.local(i, j).iter().map(|&t| c.colors[t as usize]));
            push_sorted(buf, &mut scratch);
        }
    })
}

/// One `(k,s)`-LWL+ round: every local neighbor color is paired with the
/// number of `j`-neighbors (local or global, inside the tuple graph) of the
/// tuple that share that color.
pub fn refine_step_ks_lwl_plus(tg: &TupleGraph<'_>, c: &Coloring) -> Coloring {
    ks_lwl_plus_with(tg, c, &mut ColorDictionary::new())
}

/// `counts[j][x]`: tuples `y` of the tuple graph with `y = φ_j(x, w)` for some
/// `w` and `C(y) = C(x)`, `x` itself included.
///
/// All `j`-neighbors of `v` share the key of `v` with position `j` zeroed, so
/// for a `j`-neighbor `x` of `v` this is `#^j(v, x)`.
fn sparse_same_color_counts(tg: &TupleGraph<'_>, c: &Coloring) -> Vec<Vec<u32>> {
    let codec = tg.codec();
    let mut rows: Vec<(u64, u32, u32)> = Vec::with_capacity(tg.len());
    (0..tg.k())
        .map(|j| {
            rows.clear();
            rows.extend((0..tg.len()).map(|i| {
                let key = tg.key(i);
                let blank = key - codec.node(key, j) as u64 * codec.pow[j];
                (blank, c.colors[i], i as u32)
            }));
            rows.sort_unstable();
            let mut counts = vec![0u32; tg.len()];
            for run in rows.chunk_by(|a, b| a.0 == b.0 && a.1 == b.1) {
                for &(_, _, i) in run {
                    counts[i as usize] = run.len() as u32;
                }
            }
            counts
        })
        .collect()
}

fn ks_lwl_plus_with(tg: &TupleGraph<'_>, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    let counts = sparse_same_color_counts(tg, c);
    let mut pairs = Vec::new();
    compact(tg.len(), c.round + 1, dict, |i, buf| {
        buf.push(TAG_PLUS);
        buf.push(c.colors[i]);
        for (j, cnt) in counts.iter().enumerate() {
            pairs.clear();
            pairs.extend(tg.local(i, j).iter().map(|&t| (c.colors[t as usize], cnt[t as usize])));
            push_sorted_pairs(buf, &mut pairs);
        }
    })
}

// ---------------------------------------------------------------------------
// dense k-tuple spaces

pub fn initial_coloring_dense(space: &DenseTupleSpace<'_>) -> Coloring {
    initial_coloring_dense_with(space, &mut ColorDictionary::new())
}

fn initial_coloring_dense_with(space: &DenseTupleSpace<'_>, dict: &mut ColorDictionary) -> Coloring {
    let mut code = Vec::new();
    compact(space.len(), 0, dict, |i, buf| {
        space.atomic_type_into(i, &mut code);
        buf.push(TAG_ATOMIC);
        buf.extend_from_slice(&code);
    })
}

/// One `δ-k-LWL` round over all of `V(G)^k`.
pub fn refine_step_delta_k_lwl(space: &DenseTupleSpace<'_>, c: &Coloring) -> Coloring {
    delta_with(space, c, &mut ColorDictionary::new())
}

fn delta_with(space: &DenseTupleSpace<'_>, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    let g = space.graph();
    let codec = &space.codec;
    let mut scratch = Vec::new();
    compact(space.len(), c.round + 1, dict, |i, buf| {
        buf.push(TAG_LOCAL);
        buf.push(c.colors[i]);
        for j in 0..codec.k {
            let vj = codec.node(i as u64, j);
            scratch.clear();
            scratch.extend(
                g.neighbors(vj as usize)
                    .iter()
                    .map(|&w| c.colors[codec.replace(i as u64, j, vj, w) as usize]),
            );
            push_sorted(buf, &mut scratch);
        }
    })
}

/// Calls `f(members)` for every `j`-group of `V(G)^k`: the `n` tuples that
/// agree outside position `j`, ordered by the node at `j`.
fn for_each_group<F: FnMut(&[usize])>(space: &DenseTupleSpace<'_>, j: usize, mut f: F) {
    let codec = &space.codec;
    let n = codec.n as usize;
    let p = codec.pow[j] as usize;
    let mut members = vec![0usize; n];
    for hi in 0..space.len() / (p * n).max(1) {
        for lo in 0..p {
            let base = hi * p * n + lo;
            for (w, m) in members.iter_mut().enumerate() {
                *m = base + w * p;
            }
            f(&members);
        }
    }
}

fn dense_same_color_counts(space: &DenseTupleSpace<'_>, c: &Coloring) -> Vec<Vec<u32>> {
    let mut by_color: Vec<(u32, usize)> = Vec::new();
    (0..space.k())
        .map(|j| {
            let mut counts = vec![0u32; space.len()];
            for_each_group(space, j, |members| {
                by_color.clear();
                by_color.extend(members.iter().map(|&m| (c.colors[m], m)));
                by_color.sort_unstable();
                for run in by_color.chunk_by(|a, b| a.0 == b.0) {
                    for &(_, m) in run {
                        counts[m] = run.len() as u32;
                    }
                }
            });
            counts
        })
        .collect()
}

/// One `δ-k-LWL+` round: local neighbor colors paired with the number of
/// same-colored `j`-neighbors among all `n` replacements.
pub fn refine_step_delta_k_lwl_plus(space: &DenseTupleSpace<'_>, c: &Coloring) -> Coloring {
    delta_plus_with(space, c, &mut ColorDictionary::new())
}

fn delta_plus_with(space: &DenseTupleSpace<'_>, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    let g = space.graph();
    let codec = &space.codec;
    let counts = dense_same_color_counts(space, c);
    let mut pairs = Vec::new();
    compact(space.len(), c.round + 1, dict, |i, buf| {
        buf.push(TAG_PLUS);
        buf.push(c.colors[i]);
        for (j, cnt) in counts.iter().enumerate() {
            let vj = codec.node(i as u64, j);
            pairs.clear();
            pairs.extend(g.neighbors(vj as usize).iter().map(|&w| {
                let t = codec.replace(i as u64, j, vj, w) as usize;
                (c.colors[t], cnt[t])
            }));
            push_sorted_pairs(buf, &mut pairs);
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KWlMode {
    /// `S_j` is the multiset of colors of `φ_j(v, w)` over all nodes `w`.
    Oblivious,
    /// Aggregates, per node `w`, the vector `(C(φ_1(v,w)), …, C(φ_k(v,w)))`.
    Folklore,
}

pub fn refine_step_k_wl(space: &DenseTupleSpace<'_>, c: &Coloring, mode: KWlMode) -> Coloring {
    let mut dict = ColorDictionary::new();
    match mode {
        KWlMode::Oblivious => k_wl_with(space, c, &mut dict),
        KWlMode::Folklore => k_fwl_with(space, c, &mut dict),
    }
}

fn k_wl_with(space: &DenseTupleSpace<'_>, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    // every member of a j-group has the same S_j; intern it once per group
    let mut scratch = Vec::new();
    let group_ids: Vec<Vec<u32>> = (0..space.k())
        .map(|j| {
            let mut ids = vec![0u32; space.len()];
            for_each_group(space, j, |members| {
                scratch.clear();
                scratch.push(j as u32);
                scratch.extend(members.iter().map(|&m| c.colors[m]));
                scratch[1..].sort_unstable();
                let id = dict.intern_aux(&scratch);
                for &m in members {
                    ids[m] = id;
                }
            });
            ids
        })
        .collect();
    compact(space.len(), c.round + 1, dict, |i, buf| {
        buf.push(TAG_KWL);
        buf.push(c.colors[i]);
        buf.extend(group_ids.iter().map(|ids| ids[i]));
    })
}

fn k_fwl_with(space: &DenseTupleSpace<'_>, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    let codec = space.codec.clone();
    let n = codec.n as u32;
    let k = codec.k;
    let mut vector = vec![0u32; k];
    let mut ids = Vec::with_capacity(n as usize);
    let mut signatures: Vec<Box<[u32]>> = Vec::with_capacity(space.len());
    for i in 0..space.len() {
        ids.clear();
        for w in 0..n {
            for (j, slot) in vector.iter_mut().enumerate() {
                let vj = codec.node(i as u64, j);
                *slot = c.colors[codec.replace(i as u64, j, vj, w) as usize];
            }
            ids.push(dict.intern_aux(&vector));
        }
        ids.sort_unstable();
        let mut sig = Vec::with_capacity(ids.len() + 2);
        sig.push(TAG_FOLKLORE);
        sig.push(c.colors[i]);
        sig.extend_from_slice(&ids);
        signatures.push(sig.into());
    }
    compact(space.len(), c.round + 1, dict, |i, buf| {
        buf.extend_from_slice(&signatures[i]);
    })
}

// ---------------------------------------------------------------------------
// node-level refinement

/// Round-0 node coloring: one color per node label.
pub fn initial_coloring_nodes(g: &LabeledGraph) -> Coloring {
    initial_nodes_with(g, &mut ColorDictionary::new())
}

fn initial_nodes_with(g: &LabeledGraph, dict: &mut ColorDictionary) -> Coloring {
    // the atomic type of a 1-tuple is its node label
    compact(g.node_count(), 0, dict, |v, buf| {
        buf.push(TAG_ATOMIC);
        buf.push(g.node_label(v));
    })
}

/// One Color Refinement round: old color plus the multiset of neighbor colors.
pub fn refine_step_one_wl(g: &LabeledGraph, c: &Coloring) -> Coloring {
    one_wl_with(g, c, &mut ColorDictionary::new())
}

fn one_wl_with(g: &LabeledGraph, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    let mut scratch = Vec::new();
    compact(g.node_count(), c.round + 1, dict, |v, buf| {
        buf.push(TAG_ONE_WL);
        buf.push(c.colors[v]);
        scratch.clear();
        scratch.extend(g.neighbors(v).iter().map(|&u| c.colors[u as usize]));
        push_sorted(buf, &mut scratch);
    })
}

/// A directed graph with node labels and labeled out-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedLabeledGraph {
    node_labels: Vec<u32>,
    out: Vec<Vec<(u32, u32)>>,
}

impl DirectedLabeledGraph {
    /// Builds from `(source, target, label)` arcs; parallel arcs are kept.
    pub fn new<I>(node_labels: Vec<u32>, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let n = node_labels.len();
        let mut out = vec![Vec::new(); n];
        for (u, v, l) in arcs {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("arc ({u}, {v}) out of range for {n} nodes")));
            }
            out[u].push((v as u32, l));
        }
        for list in &mut out {
            list.sort_unstable();
        }
        Ok(DirectedLabeledGraph { node_labels, out })
    }

    /// Both orientations of every edge of `g`, keeping edge labels.
    pub fn from_undirected(g: &LabeledGraph) -> Self {
        let out = (0..g.node_count())
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .copied()
                    .zip(g.neighbor_edge_labels(v).iter().copied())
                    .collect()
            })
            .collect();
        DirectedLabeledGraph {
            node_labels: g.node_labels().to_vec(),
            out,
        }
    }

    /// The tuple graph as a directed graph: node labels are compacted atomic
    /// types, arc labels are 1-based positions.
    pub fn from_tuple_graph(tg: &TupleGraph<'_>) -> Self {
        let node_labels = initial_coloring(tg).colors;
        let out = (0..tg.len())
            .map(|i| {
                let mut arcs: Vec<(u32, u32)> = (0..tg.k())
                    .flat_map(|j| tg.local(i, j).iter().map(move |&t| (t, j as u32 + 1)))
                    .collect();
                arcs.sort_unstable();
                arcs
            })
            .collect();
        DirectedLabeledGraph { node_labels, out }
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn node_label(&self, v: usize) -> u32 {
        self.node_labels[v]
    }

    /// Sorted `(target, label)` pairs.
    pub fn out_arcs(&self, v: usize) -> &[(u32, u32)] {
        &self.out[v]
    }
}

pub fn initial_coloring_directed(g: &DirectedLabeledGraph) -> Coloring {
    initial_directed_with(g, &mut ColorDictionary::new())
}

fn initial_directed_with(g: &DirectedLabeledGraph, dict: &mut ColorDictionary) -> Coloring {
    compact(g.node_count(), 0, dict, |v, buf| {
        buf.push(TAG_NODE_LABEL);
        buf.push(g.node_label(v));
    })
}

/// One round of edge-labeled Color Refinement over out-neighbors.
pub fn refine_step_edge_labeled_one_wl(g: &DirectedLabeledGraph, c: &Coloring) -> Coloring {
    edge_labeled_with(g, c, &mut ColorDictionary::new())
}

fn edge_labeled_with(g: &DirectedLabeledGraph, c: &Coloring, dict: &mut ColorDictionary) -> Coloring {
    let mut pairs = Vec::new();
    compact(g.node_count(), c.round + 1, dict, |v, buf| {
        buf.push(TAG_EDGE_LABELED);
        buf.push(c.colors[v]);
        pairs.clear();
        pairs.extend(g.out_arcs(v).iter().map(|&(u, l)| (c.colors[u as usize], l)));
        push_sorted_pairs(buf, &mut pairs);
    })
}

// ---------------------------------------------------------------------------
// driver

/// The object a configured algorithm refines.
pub(crate) enum Domain<'g> {
    Sparse(TupleGraph<'g>),
    Dense(DenseTupleSpace<'g>),
    Nodes(&'g LabeledGraph),
    Directed(DirectedLabeledGraph),
}

impl<'g> Domain<'g> {
    pub(crate) fn build(g: &'g LabeledGraph, config: &RefinementConfig) -> Result<Self> {
        config.validate()?;
        let k = config.k;
        Ok(match config.algorithm {
            Algorithm::OneWl => Domain::Nodes(g),
            Algorithm::EdgeLabeledOneWl => Domain::Directed(DirectedLabeledGraph::from_undirected(g)),
            Algorithm::KsLwl | Algorithm::KsLwlPlus => Domain::Sparse(build_tuple_graph(g, k, config.s)?),
            Algorithm::DeltaKLwl | Algorithm::DeltaKLwlPlus | Algorithm::KWlOblivious | Algorithm::KWlFolklore => {
                check_dense_budget(g.node_count(), config)?;
                Domain::Dense(DenseTupleSpace::new(g, k)?)
            }
        })
    }

    pub(crate) fn len(&self) -> usize {
        match self {
            Domain::Sparse(tg) => tg.len(),
            Domain::Dense(space) => space.len(),
            Domain::Nodes(g) => g.node_count(),
            Domain::Directed(d) => d.node_count(),
        }
    }

    /// Node at 0-based position `j` of element `i`; node-level domains have
    /// the single position `0`.
    pub(crate) fn node_at(&self, i: usize, j: usize) -> usize {
        match self {
            Domain::Sparse(tg) => tg.node_at(i, j),
            Domain::Dense(space) => space.codec.node(i as u64, j) as usize,
            Domain::Nodes(_) | Domain::Directed(_) => i,
        }
    }

    pub(crate) fn positions(&self) -> usize {
        match self {
            Domain::Sparse(tg) => tg.k(),
            Domain::Dense(space) => space.k(),
            Domain::Nodes(_) | Domain::Directed(_) => 1,
        }
    }

    /// Per element: `0` if it lies within nodes `0..split`, `1` if within
    /// `split..`, `2` if mixed.
    fn sides(&self, split: usize) -> Vec<u8> {
        let side = |lo: bool, hi: bool| match (lo, hi) {
            (true, _) => 0,
            (false, true) => 1,
            _ => 2,
        };
        match self {
            Domain::Sparse(tg) => {
                let n = tg.graph().node_count();
                (0..tg.len())
                    .map(|i| side(tg.tuple_within(i, 0..split), tg.tuple_within(i, split..n)))
                    .collect()
            }
            Domain::Dense(space) => {
                let n = space.graph().node_count();
                (0..space.len())
                    .map(|i| side(space.tuple_within(i, 0..split), space.tuple_within(i, split..n)))
                    .collect()
            }
            _ => (0..self.len()).map(|v| u8::from(v >= split)).collect(),
        }
    }

    fn initial(&self, dict: &mut ColorDictionary) -> Coloring {
        match self {
            Domain::Sparse(tg) => initial_coloring_with(tg, dict),
            Domain::Dense(space) => initial_coloring_dense_with(space, dict),
            Domain::Nodes(g) => initial_nodes_with(g, dict),
            Domain::Directed(d) => initial_directed_with(d, dict),
        }
    }

    fn step(&self, algorithm: Algorithm, c: &Coloring, plus: bool, dict: &mut ColorDictionary) -> Coloring {
        match (self, algorithm) {
            (Domain::Sparse(tg), _) if plus => ks_lwl_plus_with(tg, c, dict),
            (Domain::Sparse(tg), _) => ks_lwl_with(tg, c, dict),
            (Domain::Dense(space), Algorithm::KWlOblivious) => k_wl_with(space, c, dict),
            (Domain::Dense(space), Algorithm::KWlFolklore) => k_fwl_with(space, c, dict),
            (Domain::Dense(space), _) if plus => delta_plus_with(space, c, dict),
            (Domain::Dense(space), _) => delta_with(space, c, dict),
            (Domain::Nodes(g), _) => one_wl_with(g, c, dict),
            (Domain::Directed(d), _) => edge_labeled_with(d, c, dict),
        }
    }
}

/// Rough peak bytes per dense tuple: two color arrays, plus per-position
/// count or group arrays for the variants that need them.
fn dense_bytes_per_tuple(config: &RefinementConfig) -> u128 {
    let k = config.k as u128;
    match config.algorithm {
        Algorithm::DeltaKLwl => 8,
        Algorithm::DeltaKLwlPlus | Algorithm::KWlOblivious => 8 + 4 * k,
        _ => 8 + 4 * k + 16,
    }
}

fn check_dense_budget(n: usize, config: &RefinementConfig) -> Result<()> {
    let tuples = (n as u128).saturating_pow(config.k as u32);
    let required = tuples.saturating_mul(dense_bytes_per_tuple(config));
    let budget = config.resolved_memory_budget() as u128;
    if required > budget {
        return Err(Error::ResourceLimit {
            what: format!("{} over {n} nodes ({tuples} tuples)", config.label()),
            required,
            budget,
        });
    }
    Ok(())
}

/// Whether round `round` (1-based) of a fixed schedule uses the `+` rule.
fn plus_in_fixed_round(config: &RefinementConfig, round: usize, last: usize) -> bool {
    config.algorithm.is_plus() && (!config.plus_counts_last_iteration_only || round == last)
}

/// Refines `domains` in lockstep, round `i` of every domain interning into
/// `dicts[i]`. `visit` sees each round's colorings and returns `false` to
/// stop early. Returns the number of refinement rounds run.
///
/// With [`Iterations::Fixed`] exactly that many rounds run. With
/// [`Iterations::UntilStable`] rounds run until the joint partition of all
/// domains stops changing (the stable round is reported too).
pub(crate) fn drive<F>(
    domains: &[Domain<'_>],
    config: &RefinementConfig,
    dicts: &mut Vec<ColorDictionary>,
    mut visit: F,
) -> usize
where
    F: FnMut(&[Coloring]) -> bool,
{
    let algorithm = config.algorithm;
    let dict = |dicts: &mut Vec<ColorDictionary>, r: usize| {
        if dicts.len() <= r {
            dicts.resize_with(r + 1, ColorDictionary::new);
        }
    };
    dict(dicts, 0);
    let mut current: Vec<Coloring> = domains.iter().map(|d| d.initial(&mut dicts[0])).collect();
    if !visit(&current) {
        return 0;
    }

    let total: usize = domains.iter().map(Domain::len).sum();
    let plus_last = algorithm.is_plus() && config.plus_counts_last_iteration_only;
    let mut round = 0;
    let mut plus_pending = false;
    loop {
        let plus = match config.iterations {
            Iterations::Fixed(h) => {
                if round >= h {
                    break;
                }
                plus_in_fixed_round(config, round + 1, h)
            }
            Iterations::UntilStable => {
                if round > total + 1 {
                    break;
                }
                plus_pending || (algorithm.is_plus() && !plus_last)
            }
        };
        round += 1;
        dict(dicts, round);
        let next: Vec<Coloring> = domains
            .iter()
            .zip(&current)
            .map(|(d, c)| d.step(algorithm, c, plus, &mut dicts[round]))
            .collect();
        let stable = same_partition(&current.iter().collect::<Vec<_>>(), &next.iter().collect::<Vec<_>>());
        if !visit(&next) {
            return round;
        }
        current = next;
        if config.iterations == Iterations::UntilStable {
            if plus_pending {
                break;
            }
            if stable {
                if plus_last {
                    plus_pending = true;
                } else {
                    break;
                }
            }
        }
    }
    round
}

/// Full round history of `config` on `g`, round 0 included.
pub fn run_to_stable(g: &LabeledGraph, config: &RefinementConfig) -> Result<Vec<Coloring>> {
    let domain = Domain::build(g, config)?;
    let mut history = Vec::new();
    drive(std::slice::from_ref(&domain), config, &mut Vec::new(), |cs| {
        history.push(cs[0].clone());
        true
    });
    Ok(history)
}

/// Round history of edge-labeled Color Refinement on a directed graph.
pub fn run_directed(g: &DirectedLabeledGraph, iterations: Iterations) -> Vec<Coloring> {
    let config = RefinementConfig {
        algorithm: Algorithm::EdgeLabeledOneWl,
        iterations,
        ..Default::default()
    };
    let domain = Domain::Directed(g.clone());
    let mut history = Vec::new();
    drive(std::slice::from_ref(&domain), &config, &mut Vec::new(), |cs| {
        history.push(cs[0].clone());
        true
    });
    history
}

/// Round history of `(k,s)`-LWL (or `+`) on a prebuilt tuple graph.
pub fn run_on_tuple_graph(tg: &TupleGraph<'_>, config: &RefinementConfig) -> Vec<Coloring> {
    let domain = Domain::Sparse(tg.clone());
    let mut history = Vec::new();
    drive(std::slice::from_ref(&domain), config, &mut Vec::new(), |cs| {
        history.push(cs[0].clone());
        true
    });
    history
}

/// Per round `(round, color, count)` lines.
pub fn write_histograms<W: Write>(history: &[Coloring], mut out: W) -> io::Result<()> {
    for c in history {
        for (color, count) in c.histogram() {
            writeln!(out, "{} {color} {count}", c.round)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Distinguish {
    pub distinguished: bool,
    /// First round whose color histograms differ.
    pub round: Option<usize>,
    /// Refinement rounds run before stopping.
    pub rounds_run: usize,
}

/// Whether `config` tells `g` and `h` apart: some color class has different
/// sizes in `V(G)^k` and `V(H)^k` when refining their disjoint union.
///
/// For local variants without counts a tuple of `G ∪̇ H` whose nodes all lie
/// in one graph only sees tuples of that graph, so the two graphs are
/// refined separately in lockstep with shared dictionaries; this avoids
/// materializing the mixed tuples. Other variants run on the union.
pub fn distinguish(g: &LabeledGraph, h: &LabeledGraph, config: &RefinementConfig) -> Result<Distinguish> {
    if !config.algorithm.is_component_local() {
        return distinguish_on_union(g, h, config);
    }
    let domains = [Domain::build(g, config)?, Domain::build(h, config)?];
    let mut found = None;
    let rounds_run = drive(&domains, config, &mut Vec::new(), |cs| {
        if histogram(cs[0].colors.iter().copied()) != histogram(cs[1].colors.iter().copied()) {
            found = Some(cs[0].round);
            return false;
        }
        true
    });
    Ok(Distinguish {
        distinguished: found.is_some(),
        round: found,
        rounds_run,
    })
}

/// [`distinguish`] computed on the materialized disjoint union.
pub fn distinguish_on_union(g: &LabeledGraph, h: &LabeledGraph, config: &RefinementConfig) -> Result<Distinguish> {
    let union = disjoint_union(g, h);
    let domain = Domain::build(&union, config)?;
    let sides = domain.sides(g.node_count());
    let mut found = None;
    let rounds_run = drive(std::slice::from_ref(&domain), config, &mut Vec::new(), |cs| {
        let side_hist = |s: u8| {
            histogram(
                cs[0]
                    .colors
                    .iter()
                    .zip(&sides)
                    .filter(|&(_, &x)| x == s)
                    .map(|(&c, _)| c),
            )
        };
        if side_hist(0) != side_hist(1) {
            found = Some(cs[0].round);
            return false;
        }
        true
    });
    Ok(Distinguish {
        distinguished: found.is_some(),
        round: found,
        rounds_run,
    })
}
