//! Reader and writer for the TUDataset plain-text benchmark format.
//!
//! A dataset `NAME` is a directory holding `NAME_A.txt` (one directed edge
//! `u, v` per row, 1-based global node ids), `NAME_graph_indicator.txt` (the
//! 1-based graph id of every node) and optionally `NAME_node_labels.txt`,
//! `NAME_edge_labels.txt` (one label per row of `NAME_A.txt`),
//! `NAME_graph_labels.txt` and `NAME_graph_attributes.txt`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Per-graph prediction targets.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphTargets {
    /// Integer class labels from `_graph_labels.txt`.
    Classes(Vec<i64>),
    /// Real-valued vectors from `_graph_attributes.txt`.
    Values(Vec<Vec<f64>>),
}

impl GraphTargets {
    pub fn len(&self) -> usize {
        match self {
            GraphTargets::Classes(c) => c.len(),
            GraphTargets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Target of graph `i` rendered as text (used as the LIBSVM row label).
    pub fn label_text(&self, i: usize) -> String {
        match self {
            GraphTargets::Classes(c) => c[i].to_string(),
            GraphTargets::Values(v) => v[i].first().map(|x| x.to_string()).unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphCollection {
    pub graphs: Vec<LabeledGraph>,
    pub targets: Option<GraphTargets>,
}

impl GraphCollection {
    pub fn new(graphs: Vec<LabeledGraph>) -> Self {
        GraphCollection { graphs, targets: None }
    }

    pub fn with_targets(graphs: Vec<LabeledGraph>, targets: GraphTargets) -> Result<Self> {
        if targets.len() != graphs.len() {
            return Err(Error::invalid(format!(
                "{} targets for {} graphs",
                targets.len(),
                graphs.len()
            )));
        }
        Ok(GraphCollection {
            graphs,
            targets: Some(targets),
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn mean_node_count(&self) -> f64 {
        if self.graphs.is_empty() {
            return 0.0;
        }
        self.graphs.iter().map(|g| g.node_count()).sum::<usize>() as f64 / self.len() as f64
    }

    pub fn mean_edge_count(&self) -> f64 {
        if self.graphs.is_empty() {
            return 0.0;
        }
        self.graphs.iter().map(|g| g.edge_count()).sum::<usize>() as f64 / self.len() as f64
    }
}

fn file_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

fn read_optional(path: &Path) -> Result<Option<Vec<String>>> {
    if path.is_file() {
        read_lines(path).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_int<T: std::str::FromStr>(path: &Path, row: usize, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::format(path, format!("row {row}: cannot parse {s:?} as an integer")))
}

fn parse_label(path: &Path, row: usize, s: &str) -> Result<u32> {
    let v: i64 = parse_int(path, row, s)?;
    u32::try_from(v).map_err(|_| Error::format(path, format!("row {row}: label {v} is negative")))
}

/// Loads `dir/<name>_*.txt` into one graph per distinct graph-indicator value.
pub fn load_tudataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphCollection> {
    let dir = dir.as_ref();
    let a_path = file_path(dir, name, "A");
    let ind_path = file_path(dir, name, "graph_indicator");
    for p in [&a_path, &ind_path] {
        if !p.is_file() {
            return Err(Error::format(p, "mandatory file is missing"));
        }
    }

    let indicator: Vec<i64> = read_lines(&ind_path)?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_int(&ind_path, i + 1, l))
        .collect::<Result<_>>()?;
    let node_total = indicator.len();

    // distinct indicator values in ascending order become graphs 0..
    let graph_ids: BTreeMap<i64, usize> = {
        let mut ids: Vec<i64> = indicator.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().enumerate().map(|(i, g)| (g, i)).collect()
    };
    let graph_count = graph_ids.len();
    let mut graph_of = Vec::with_capacity(node_total);
    let mut local_of = Vec::with_capacity(node_total);
    let mut sizes = vec![0usize; graph_count];
    for g in &indicator {
        let gi = graph_ids[g];
        graph_of.push(gi);
        local_of.push(sizes[gi]);
        sizes[gi] += 1;
    }

    let node_label_path = file_path(dir, name, "node_labels");
    let mut node_labels: Vec<Vec<u32>> = sizes.iter().map(|&s| vec![0; s]).collect();
    if let Some(lines) = read_optional(&node_label_path)? {
        if lines.len() != node_total {
            return Err(Error::Consistency(format!(
                "{} node labels for {node_total} nodes",
                lines.len()
            )));
        }
        for (i, l) in lines.iter().enumerate() {
            node_labels[graph_of[i]][local_of[i]] = parse_label(&node_label_path, i + 1, l)?;
        }
    }

    let a_lines = read_lines(&a_path)?;
    let edge_label_path = file_path(dir, name, "edge_labels");
    let edge_labels: Option<Vec<u32>> = match read_optional(&edge_label_path)? {
        Some(lines) => {
            if lines.len() != a_lines.len() {
                return Err(Error::Consistency(format!(
                    "{} edge labels for {} edge rows",
                    lines.len(),
                    a_lines.len()
                )));
            }
            Some(
                lines
                    .iter()
                    .enumerate()
                    .map(|(i, l)| parse_label(&edge_label_path, i + 1, l))
                    .collect::<Result<_>>()?,
            )
        }
        None => None,
    };

    let mut directed: HashMap<(usize, usize), u32> = HashMap::with_capacity(a_lines.len());
    for (i, line) in a_lines.iter().enumerate() {
        let row = i + 1;
        let mut parts = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty());
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::format(
                &a_path,
                format!("row {row}: expected two node ids, got {line:?}"),
            ));
        };
        let u: usize = parse_int(&a_path, row, a)?;
        let v: usize = parse_int(&a_path, row, b)?;
        if u == 0 || v == 0 || u > node_total || v > node_total {
            return Err(Error::format(
                &a_path,
                format!("row {row}: node id out of range 1..={node_total}"),
            ));
        }
        if u == v {
            return Err(Error::format(&a_path, format!("row {row}: self-loop at node {u}")));
        }
        let (u, v) = (u - 1, v - 1);
        if graph_of[u] != graph_of[v] {
            return Err(Error::Consistency(format!(
                "row {row}: edge joins nodes of different graphs"
            )));
        }
        let label = edge_labels.as_ref().map_or(0, |l| l[i]);
        if let Some(&prev) = directed.get(&(u, v)) {
            if prev != label {
                return Err(Error::Consistency(format!(
                    "row {row}: repeated edge ({}, {}) with a different label",
                    u + 1,
                    v + 1
                )));
            }
        }
        directed.insert((u, v), label);
    }

    let mut edges: Vec<Vec<(usize, usize, u32)>> = vec![Vec::new(); graph_count];
    for (&(u, v), &label) in &directed {
        match directed.get(&(v, u)) {
            None => {
                return Err(Error::Consistency(format!(
                    "edge ({}, {}) has no reverse row",
                    u + 1,
                    v + 1
                )))
            }
            Some(&back) if back != label => {
                return Err(Error::Consistency(format!(
                    "edge ({}, {}) labeled {label} one way and {back} the other",
                    u + 1,
                    v + 1
                )))
            }
            _ => {}
        }
        if u < v {
            edges[graph_of[u]].push((local_of[u], local_of[v], label));
        }
    }

    let graphs = node_labels
        .into_iter()
        .zip(edges)
        .map(|(labels, e)| LabeledGraph::with_labels(labels, e))
        .collect::<Result<Vec<_>>>()?;

    let targets = read_targets(dir, name, graph_count)?;
    Ok(GraphCollection { graphs, targets })
}

fn read_targets(dir: &Path, name: &str, graph_count: usize) -> Result<Option<GraphTargets>> {
    let label_path = file_path(dir, name, "graph_labels");
    if let Some(lines) = read_optional(&label_path)? {
        if lines.len() != graph_count {
            return Err(Error::Consistency(format!(
                "{} graph labels for {graph_count} graphs",
                lines.len()
            )));
        }
        let labels = lines
            .iter()
            .enumerate()
            .map(|(i, l)| parse_int(&label_path, i + 1, l))
            .collect::<Result<_>>()?;
        return Ok(Some(GraphTargets::Classes(labels)));
    }
    let attr_path = file_path(dir, name, "graph_attributes");
    if let Some(lines) = read_optional(&attr_path)? {
        if lines.len() != graph_count {
            return Err(Error::Consistency(format!(
                "{} graph attribute rows for {graph_count} graphs",
                lines.len()
            )));
        }
        let mut values = Vec::with_capacity(lines.len());
        for (i, l) in lines.iter().enumerate() {
            let row = l
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::format(&attr_path, format!("row {}: bad number {x:?}", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        return Ok(Some(GraphTargets::Values(values)));
    }
    Ok(None)
}

/// Writes `collection` as `dir/<name>_*.txt`. Both orientations of every
/// edge are emitted; node and edge label files are always written.
pub fn write_tudataset(collection: &GraphCollection, dir: impl AsRef<Path>, name: &str) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let Some(i) = collection.graphs.iter().position(|g| g.node_count() == 0) {
        return Err(Error::invalid(format!(
            "graph {i} has no nodes and cannot be represented in TUDataset files"
        )));
    }

    let mut a = String::new();
    let mut edge_labels = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut offset = 0usize;
    for (gi, g) in collection.graphs.iter().enumerate() {
        for v in 0..g.node_count() {
            writeln!(indicator, "{}", gi + 1).unwrap();
            writeln!(node_labels, "{}", g.node_label(v)).unwrap();
            for (&w, &l) in g.neighbors(v).iter().zip(g.neighbor_edge_labels(v)) {
                writeln!(a, "{}, {}", offset + v + 1, offset + w as usize + 1).unwrap();
                writeln!(edge_labels, "{l}").unwrap();
            }
        }
        offset += g.node_count();
    }

    let mut files = vec![
        ("A", a),
        ("graph_indicator", indicator),
        ("node_labels", node_labels),
        ("edge_labels", edge_labels),
    ];
    match &collection.targets {
        Some(GraphTargets::Classes(c)) => {
            files.push(("graph_labels", c.iter().map(|x| format!("{x}\n")).collect()));
        }
        Some(GraphTargets::Values(v)) => {
            let body = v
                .iter()
                .map(|row| {
                    let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    format!("{}\n", cells.join(", "))
                })
                .collect();
            files.push(("graph_attributes", body));
        }
        None => {}
    }
    for (suffix, body) in files {
        let path = file_path(dir, name, suffix);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
