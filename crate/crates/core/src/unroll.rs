//! Unrolled trees of a tuple graph and an AHU-style isomorphism test for
//! rooted trees with node and edge labels.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::tuples::TupleGraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Tuple (or graph node) this tree node copies.
    pub source: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    /// Label of the edge from the parent; `None` at the root.
    pub edge_label: Option<u32>,
}

/// A rooted tree directed away from node `0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnrolledTree {
    pub nodes: Vec<TreeNode>,
    /// Label code per node.
    pub node_labels: Vec<Vec<u32>>,
}

impl UnrolledTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes at each depth.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        for node in &self.nodes {
            if sizes.len() <= node.depth {
                sizes.resize(node.depth + 1, 0);
            }
            sizes[node.depth] += 1;
        }
        sizes
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(format!("not a rooted tree: {msg}")));
        if self.nodes.is_empty() {
            return bad("no nodes".into());
        }
        if self.node_labels.len() != self.nodes.len() {
            return bad("label count differs from node count".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match (i, node.parent) {
                (0, None) if node.depth == 0 => {}
                (0, _) => return bad("node 0 must be a depth-0 root".into()),
                (_, None) => return bad(format!("node {i} has no parent")),
                // parents precede children, so following parents terminates
                (_, Some(p)) if p >= i => return bad(format!("node {i} has parent {p}")),
                (_, Some(p)) if self.nodes[p].depth + 1 != node.depth => {
                    return bad(format!("node {i} is not one level below its parent"))
                }
                (_, Some(_)) if node.edge_label.is_none() => return bad(format!("edge into node {i} has no label")),
                _ => {}
            }
        }
        Ok(())
    }
}

/// Unrolls the tuple graph around `root` to exactly `depth` levels: every
/// tree node at depth `d < depth` gets one child per local edge of its tuple,
/// labeled with the 1-based position. Node labels are atomic-type codes.
pub fn unroll(tg: &TupleGraph<'_>, root: usize, depth: usize) -> Result<UnrolledTree> {
    if root >= tg.len() {
        return Err(Error::invalid(format!(
            "root {root} out of range for {} tuples",
            tg.len()
        )));
    }
    let mut types: FxHashMap<usize, Vec<u32>> = FxHashMap::default();
    let mut label = |t: usize| types.entry(t).or_insert_with(|| tg.atomic_type(t).0).clone();
    let mut nodes = vec![TreeNode {
        source: root,
        depth: 0,
        parent: None,
        edge_label: None,
    }];
    let mut node_labels = vec![label(root)];
    let mut frontier = 0..1;
    for d in 0..depth {
        let start = nodes.len();
        for parent in frontier.clone() {
            let source = nodes[parent].source;
            for j in 0..tg.k() {
                for &t in tg.local(source, j) {
                    nodes.push(TreeNode {
                        source: t as usize,
                        depth: d + 1,
                        parent: Some(parent),
                        edge_label: Some(j as u32 + 1),
                    });
                    node_labels.push(label(t as usize));
                }
            }
        }
        frontier = start..nodes.len();
    }
    Ok(UnrolledTree { nodes, node_labels })
}

/// Node label and sorted `(edge label, child id)` list.
type ShapeKey = (Vec<u32>, Vec<(u32, u32)>);

/// Canonical ids of every node of each tree, from one shared interner.
fn canonical_ids(trees: &[&UnrolledTree]) -> Vec<Vec<u32>> {
    let mut interner: FxHashMap<ShapeKey, u32> = FxHashMap::default();
    trees
        .iter()
        .map(|t| {
            let mut children: Vec<Vec<(u32, u32)>> = vec![Vec::new(); t.len()];
            let mut ids = vec![0u32; t.len()];
            for i in (0..t.len()).rev() {
                let mut kids = std::mem::take(&mut children[i]);
                kids.sort_unstable();
                let next = interner.len() as u32;
                let id = *interner.entry((t.node_labels[i].clone(), kids)).or_insert(next);
                ids[i] = id;
                if let (Some(p), Some(l)) = (t.nodes[i].parent, t.nodes[i].edge_label) {
                    children[p].push((l, id));
                }
            }
            ids
        })
        .collect()
}

/// Whether a label-preserving isomorphism between the trees exists. With
/// `root_mapped` it must send root to root; otherwise any node of `t2` may
/// serve as the image of the root of `t1`, with edges read in their
/// original direction.
pub fn trees_isomorphic(t1: &UnrolledTree, t2: &UnrolledTree, root_mapped: bool) -> Result<bool> {
    t1.validate()?;
    t2.validate()?;
    if root_mapped {
        let ids = canonical_ids(&[t1, t2]);
        return Ok(ids[0][0] == ids[1][0]);
    }
    if t1.len() != t2.len() {
        return Ok(false);
    }
    // re-root t2 at every node with directions recorded in the edge labels
    let reroot = |t: &UnrolledTree, root: usize| -> UnrolledTree {
        let mut adj: Vec<Vec<(usize, u32)>> = vec![Vec::new(); t.len()];
        for (i, n) in t.nodes.iter().enumerate() {
            if let (Some(p), Some(l)) = (n.parent, n.edge_label) {
                adj[p].push((i, 2 * l));
                adj[i].push((p, 2 * l + 1));
            }
        }
        let mut order = vec![usize::MAX; t.len()];
        let mut nodes = vec![TreeNode {
            source: root,
            depth: 0,
            parent: None,
            edge_label: None,
        }];
        let mut labels = vec![t.node_labels[root].clone()];
        order[root] = 0;
        let mut head = 0;
        while head < nodes.len() {
            let u = nodes[head].source;
            for &(w, l) in &adj[u] {
                if order[w] == usize::MAX {
                    order[w] = nodes.len();
                    nodes.push(TreeNode {
                        source: w,
                        depth: nodes[head].depth + 1,
                        parent: Some(head),
                        edge_label: Some(l),
                    });
                    labels.push(t.node_labels[w].clone());
                }
            }
            head += 1;
        }
        UnrolledTree {
            nodes,
            node_labels: labels,
        }
    };
    let base = reroot(t1, 0);
    Ok((0..t2.len()).any(|r| {
        let other = reroot(t2, r);
        let ids = canonical_ids(&[&base, &other]);
        ids[0][0] == ids[1][0]
    }))
}
