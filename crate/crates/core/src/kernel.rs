//! Explicit feature maps built from per-round color histograms, and the Gram
//! matrices they induce.
//!
//! A collection is refined graph by graph in collection order against one
//! dictionary per round, so equal signatures get equal colors everywhere.
//! The feature id of color `c` at round `i` is `offset_i + c`, where
//! `offset_i` is the number of colors issued in rounds before `i`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::refine::{drive, histogram, ColorDictionary, Domain, Iterations, RefinementConfig};

/// Sparse vector of `(feature id, count)` with strictly increasing ids and
/// positive counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseFeatureVector {
    pub entries: Vec<(u64, u64)>,
}

impl SparseFeatureVector {
    pub fn dot(&self, other: &SparseFeatureVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 as f64 * b[j].1 as f64;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// `id:count` pairs separated by spaces.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (n, (id, count)) in self.entries.iter().enumerate() {
            if n > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{id}:{count}");
        }
        s
    }
}

/// Feature vectors of a collection plus the per-round id offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureMaps {
    pub vectors: Vec<SparseFeatureVector>,
    /// `offsets[i]` is the first feature id of round `i`; the last entry is
    /// the total number of features.
    pub offsets: Vec<u64>,
}

impl FeatureMaps {
    pub fn rounds(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }
}

/// `(color, count)` pairs per round of one graph.
pub type RoundHistograms = Vec<Vec<(u32, u64)>>;

/// Per-round `(color, count)` histograms of every graph, refined against
/// shared per-round dictionaries. With [`Iterations::UntilStable`] every
/// graph runs the number of rounds the slowest graph needs.
pub fn round_histograms(
    graphs: &[LabeledGraph],
    config: &RefinementConfig,
) -> Result<(Vec<RoundHistograms>, Vec<usize>)> {
    config.validate()?;
    let config = match config.iterations {
        Iterations::Fixed(_) => config.clone(),
        Iterations::UntilStable => {
            let mut h = 0;
            for g in graphs {
                let domain = Domain::build(g, config)?;
                h = h.max(drive(std::slice::from_ref(&domain), config, &mut Vec::new(), |_| true));
            }
            config.clone().with_iterations(Iterations::Fixed(h))
        }
    };
    let mut dicts: Vec<ColorDictionary> = Vec::new();
    let mut all = Vec::with_capacity(graphs.len());
    for g in graphs {
        let domain = Domain::build(g, &config)?;
        let mut per_round = Vec::new();
        drive(std::slice::from_ref(&domain), &config, &mut dicts, |cs| {
            per_round.push(histogram(cs[0].colors.iter().copied()));
            true
        });
        all.push(per_round);
    }
    let sizes = dicts.iter().map(ColorDictionary::len).collect();
    Ok((all, sizes))
}

pub fn feature_maps(graphs: &[LabeledGraph], config: &RefinementConfig) -> Result<FeatureMaps> {
    let (histograms, sizes) = round_histograms(graphs, config)?;
    let mut offsets = vec![0u64];
    for size in &sizes {
        offsets.push(offsets.last().unwrap() + *size as u64);
    }
    let vectors = histograms
        .into_iter()
        .map(|rounds| SparseFeatureVector {
            entries: rounds
                .iter()
                .enumerate()
                .flat_map(|(r, h)| h.iter().map(move |&(c, n)| (r, c, n)))
                .map(|(r, c, n)| (offsets[r] + c as u64, n))
                .collect(),
        })
        .collect();
    Ok(FeatureMaps { vectors, offsets })
}

/// Feature vector of a single graph.
pub fn feature_map(g: &LabeledGraph, config: &RefinementConfig) -> Result<SparseFeatureVector> {
    Ok(feature_maps(std::slice::from_ref(g), config)?.vectors.remove(0))
}

/// For each position `i`, the final-round histogram over the tuples whose
/// `i`-th node is `v`. Node-level algorithms have one position.
pub fn node_feature_map(g: &LabeledGraph, config: &RefinementConfig, v: usize) -> Result<Vec<Vec<(u32, u64)>>> {
    if v >= g.node_count() {
        return Err(Error::invalid(format!(
            "node {v} out of range for {} nodes",
            g.node_count()
        )));
    }
    let domain = Domain::build(g, config)?;
    let mut last = None;
    drive(std::slice::from_ref(&domain), config, &mut Vec::new(), |cs| {
        last = Some(cs[0].clone());
        true
    });
    let last = last.expect("the initial round is always visited");
    Ok((0..domain.positions())
        .map(|j| {
            histogram(
                (0..domain.len())
                    .filter(|&i| domain.node_at(i, j) == v)
                    .map(|i| last.colors[i]),
            )
        })
        .collect())
}

/// Symmetric `n × n` kernel matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub size: usize,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl GramMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Pairwise dot products, optionally cosine-normalized with `0/0 = 0`.
pub fn gram_from_features(vectors: &[SparseFeatureVector], normalize: bool) -> GramMatrix {
    let n = vectors.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| vectors[i].dot(&vectors[j])).collect())
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + offset;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    if normalize {
        let diag: Vec<f64> = (0..n).map(|i| values[i * n + i]).collect();
        for i in 0..n {
            for j in 0..n {
                let d = (diag[i] * diag[j]).sqrt();
                values[i * n + j] = if d == 0.0 { 0.0 } else { values[i * n + j] / d };
            }
        }
        // exact unit diagonal and symmetry after rounding
        for i in 0..n {
            if diag[i] != 0.0 {
                values[i * n + i] = 1.0;
            }
            for j in 0..i {
                values[j * n + i] = values[i * n + j];
            }
        }
    }
    GramMatrix {
        size: n,
        values,
        normalized: normalize,
    }
}

pub fn gram_matrix(graphs: &[LabeledGraph], config: &RefinementConfig, normalize: bool) -> Result<GramMatrix> {
    Ok(gram_from_features(&feature_maps(graphs, config)?.vectors, normalize))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramFormat {
    Csv,
    /// `label 0:row 1:v1 2:v2 …` with 1-based row numbers.
    LibsvmPrecomputed,
}

/// Serializes `m`; LIBSVM rows use `labels[i]`, or `0` when absent.
pub fn format_gram<W: Write>(
    m: &GramMatrix,
    format: GramFormat,
    labels: Option<&[String]>,
    mut out: W,
) -> io::Result<()> {
    for i in 0..m.size {
        let mut line = String::new();
        match format {
            GramFormat::Csv => {
                for (j, v) in m.row(i).iter().enumerate() {
                    if j > 0 {
                        line.push(',');
                    }
                    let _ = write!(line, "{v}");
                }
            }
            GramFormat::LibsvmPrecomputed => {
                let label = labels.and_then(|l| l.get(i)).map_or("0", String::as_str);
                let _ = write!(line, "{label} 0:{}", i + 1);
                for (j, v) in m.row(i).iter().enumerate() {
                    let _ = write!(line, " {}:{v}", j + 1);
                }
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_gram(m: &GramMatrix, path: &Path, format: GramFormat, labels: Option<&[String]>) -> Result<()> {
    if m.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Gram matrix has non-finite entries"));
    }
    let mut buf = Vec::new();
    format_gram(m, format, labels, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a matrix written by [`write_gram`]; returns it with the LIBSVM
/// labels (empty for CSV).
pub fn read_gram(path: &Path, format: GramFormat) -> Result<(GramMatrix, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut size = None;
    for (n, line) in text.lines().enumerate() {
        let bad = |msg: &str| Error::format(path, format!("line {}: {msg}", n + 1));
        let row: Vec<f64> = match format {
            GramFormat::Csv => line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad("not a number")))
                .collect::<Result<_>>()?,
            GramFormat::LibsvmPrecomputed => {
                let mut fields = line.split_whitespace();
                labels.push(fields.next().ok_or_else(|| bad("empty row"))?.to_string());
                let mut row = Vec::new();
                for (idx, field) in fields.enumerate() {
                    let (key, v) = field.split_once(':').ok_or_else(|| bad("expected index:value"))?;
                    if key.parse::<usize>().ok() != Some(idx) {
                        return Err(bad("column indices must run 0, 1, 2, …"));
                    }
                    if idx > 0 {
                        row.push(v.parse::<f64>().map_err(|_| bad("not a number"))?);
                    }
                }
                row
            }
        };
        if *size.get_or_insert(row.len()) != row.len() {
            return Err(bad("ragged row"));
        }
        values.extend(row);
    }
    let size = size.unwrap_or(0);
    if values.len() != size * size {
        return Err(Error::format(path, "matrix is not square"));
    }
    Ok((
        GramMatrix {
            size,
            values,
            normalized: false,
        },
        labels,
    ))
}

/// One `id:count …` line per vector.
pub fn write_features<W: Write>(vectors: &[SparseFeatureVector], mut out: W) -> io::Result<()> {
    for v in vectors {
        writeln!(out, "{}", v.to_text())?;
    }
    Ok(())
}
