//! Graph storage: CSR adjacency, node features, labels and split masks.
//!
//! Adjacency is always undirected, deduplicated and free of self-loops.
//! Self-loops only appear in [`NormalizedAdjacency`] and in
//! [`CsrMatrix::with_self_loops`].

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Symmetric CSR adjacency without weights or self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Adjacency {
    /// Builds a symmetric, deduplicated, self-loop-free adjacency from an
    /// arbitrary (possibly directed, possibly repeated) edge list.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Ingestion(format!(
                    "edge ({u}, {v}) references a node outside 0..{num_nodes}"
                )));
            }
            if u == v {
                continue;
            }
            rows[u].push(v);
            rows[v].push(u);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self::from_sorted_rows(rows))
    }

    /// Adjacency of `num_nodes` isolated nodes.
    pub fn empty(num_nodes: usize) -> Self {
        Self {
            offsets: vec![0; num_nodes + 1],
            neighbors: Vec::new(),
        }
    }

    pub(crate) fn from_sorted_rows(rows: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for row in rows {
            neighbors.extend(row);
            offsets.push(neighbors.len());
        }
        Self { offsets, neighbors }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Ascending neighbor ids of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Undirected edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_nodes() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Mean node degree, self-loops excluded.
    pub fn average_degree(&self) -> f64 {
        self.neighbors.len() as f64 / self.num_nodes() as f64
    }

    /// Keeps only the edges for which `keep(u, v)` holds, evaluated once per
    /// undirected edge with `u < v`, in lexicographic edge order.
    pub fn retain_edges(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        let n = self.num_nodes();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for u in 0..n {
            for &v in self.neighbors(u) {
                if u < v && keep(u, v) {
                    rows[u].push(v);
                    rows[v].push(u);
                }
            }
        }
        // Pushes into rows[v] arrive in increasing u, rows[u] in increasing v,
        // but the two streams interleave, so sort once.
        for row in &mut rows {
            row.sort_unstable();
        }
        Self::from_sorted_rows(rows)
    }

    fn check_invariants(&self) -> Result<()> {
        let n = self.num_nodes();
        for i in 0..n {
            let row = self.neighbors(i);
            for (pos, &j) in row.iter().enumerate() {
                if j >= n {
                    return Err(Error::Validation(format!("node {i} has neighbor {j} >= {n}")));
                }
                if j == i {
                    return Err(Error::Validation(format!("self-loop stored at node {i}")));
                }
                if pos > 0 && row[pos - 1] >= j {
                    return Err(Error::Validation(format!(
                        "neighbors of node {i} are not strictly ascending"
                    )));
                }
                if !self.contains(j, i) {
                    return Err(Error::Validation(format!("edge ({i}, {j}) is not symmetric")));
                }
            }
        }
        Ok(())
    }
}

/// Weighted CSR matrix over the node set, used for sparse aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl CsrMatrix {
    /// `A + I` with unit weights.
    pub fn with_self_loops(adj: &Adjacency) -> Self {
        Self::self_loop_layout(adj, |_, _| 1.0)
    }

    fn self_loop_layout(adj: &Adjacency, weight: impl Fn(usize, usize) -> f64) -> Self {
        let n = adj.num_nodes();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(adj.neighbors.len() + n);
        let mut weights = Vec::with_capacity(adj.neighbors.len() + n);
        offsets.push(0);
        for i in 0..n {
            let row = adj.neighbors(i);
            let split = row.partition_point(|&j| j < i);
            for &j in row[..split].iter().chain(std::iter::once(&i)).chain(&row[split..]) {
                cols.push(j);
                weights.push(weight(i, j));
            }
            offsets.push(cols.len());
        }
        Self {
            offsets,
            cols,
            weights,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    /// `(column, weight)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()]
            .binary_search(&j)
            .ok()
            .map(|p| self.weights[r.start + p])
    }

    /// `self · x` for a row-major matrix `x` with `width` columns.
    pub fn matmul_dense(&self, x: &[f64], width: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.num_rows() * width];
        for i in 0..self.num_rows() {
            let dst = &mut out[i * width..(i + 1) * width];
            for (j, w) in self.row(i) {
                for (d, s) in dst.iter_mut().zip(&x[j * width..(j + 1) * width]) {
                    *d += w * s;
                }
            }
        }
        out
    }

    /// `selfᵀ · g`, accumulated into `out`.
    pub fn transpose_matmul_acc(&self, g: &[f64], width: usize, out: &mut [f64]) {
        for i in 0..self.num_rows() {
            let src = &g[i * width..(i + 1) * width];
            for (j, w) in self.row(i) {
                for (d, s) in out[j * width..(j + 1) * width].iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` with `d̂_i = degree(i) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency(CsrMatrix);

impl NormalizedAdjacency {
    pub fn new(adj: &Adjacency) -> Self {
        let deg: Vec<f64> = (0..adj.num_nodes()).map(|i| (adj.degree(i) + 1) as f64).collect();
        Self(CsrMatrix::self_loop_layout(adj, |i, j| 1.0 / (deg[i] * deg[j]).sqrt()))
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.0
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.0.get(i, j)
    }
}

/// Per-node targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labels {
    /// One class id per node.
    Single { num_classes: usize, ids: Vec<usize> },
    /// Row-major `N × num_labels` matrix of 0/1 flags.
    Multi { num_labels: usize, bits: Vec<u8> },
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Single { ids, .. } => ids.len(),
            Labels::Multi { num_labels, bits } => {
                if *num_labels == 0 {
                    0
                } else {
                    bits.len() / num_labels
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of classes (single-label) or label slots (multi-label).
    pub fn width(&self) -> usize {
        match self {
            Labels::Single { num_classes, .. } => *num_classes,
            Labels::Multi { num_labels, .. } => *num_labels,
        }
    }

    pub fn is_multi(&self) -> bool {
        matches!(self, Labels::Multi { .. })
    }

    pub fn gather(&self, ids: &[usize]) -> Labels {
        match self {
            Labels::Single { num_classes, ids: src } => Labels::Single {
                num_classes: *num_classes,
                ids: ids.iter().map(|&i| src[i]).collect(),
            },
            Labels::Multi { num_labels, bits } => Labels::Multi {
                num_labels: *num_labels,
                bits: ids
                    .iter()
                    .flat_map(|&i| bits[i * num_labels..(i + 1) * num_labels].iter().copied())
                    .collect(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Labels::Single { num_classes, ids } => {
                if let Some((i, c)) = ids.iter().enumerate().find(|(_, &c)| c >= *num_classes) {
                    return Err(Error::Validation(format!(
                        "node {i} has class {c} but only {num_classes} classes exist"
                    )));
                }
            }
            Labels::Multi { num_labels, bits } => {
                if *num_labels == 0 || bits.len() % num_labels != 0 {
                    return Err(Error::Validation("multi-label matrix is ragged".into()));
                }
                if bits.iter().any(|&b| b > 1) {
                    return Err(Error::Validation("multi-label flags must be 0 or 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Which split a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
    None,
}

/// Pairwise-disjoint train/validation/test membership, one entry per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Masks {
    splits: Vec<Split>,
}

impl Masks {
    pub fn new(splits: Vec<Split>) -> Self {
        Self { splits }
    }

    pub fn unassigned(num_nodes: usize) -> Self {
        Self {
            splits: vec![Split::None; num_nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    pub fn split(&self, i: usize) -> Split {
        self.splits[i]
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn mask(&self, which: Split) -> Vec<bool> {
        self.splits.iter().map(|&s| s == which).collect()
    }

    pub fn ids(&self, which: Split) -> Vec<usize> {
        (0..self.splits.len()).filter(|&i| self.splits[i] == which).collect()
    }

    pub fn count(&self, which: Split) -> usize {
        self.splits.iter().filter(|&&s| s == which).count()
    }

    pub fn gather(&self, ids: &[usize]) -> Masks {
        Masks {
            splits: ids.iter().map(|&i| self.splits[i]).collect(),
        }
    }
}

/// An immutable attributed graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Adjacency,
    features: Tensor,
    labels: Labels,
    masks: Masks,
}

impl Graph {
    /// Validates that all parts agree on the node count and that the
    /// adjacency invariants hold.
    pub fn new(adjacency: Adjacency, features: Tensor, labels: Labels, masks: Masks) -> Result<Self> {
        let n = adjacency.num_nodes();
        if features.rank() != 2 || features.rows() != n {
            return Err(Error::Validation(format!(
                "feature matrix {:?} does not have {n} rows",
                features.shape()
            )));
        }
        if labels.len() != n {
            return Err(Error::Validation(format!(
                "{} labels for {n} nodes",
                labels.len()
            )));
        }
        if masks.len() != n {
            return Err(Error::Validation(format!("{} mask entries for {n} nodes", masks.len())));
        }
        labels.validate()?;
        adjacency.check_invariants()?;
        Ok(Self {
            adjacency,
            features,
            labels,
            masks,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.num_nodes()
    }

    pub fn num_features(&self) -> usize {
        self.features.shape()[1]
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.adjacency.neighbors(i)
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn masks(&self) -> &Masks {
        &self.masks
    }

    pub fn average_degree(&self) -> f64 {
        self.adjacency.average_degree()
    }

    pub fn normalize_adjacency(&self) -> NormalizedAdjacency {
        NormalizedAdjacency::new(&self.adjacency)
    }

    /// Same graph with different split assignments.
    pub fn with_masks(&self, masks: Masks) -> Result<Self> {
        Graph::new(
            self.adjacency.clone(),
            self.features.clone(),
            self.labels.clone(),
            masks,
        )
    }

    /// Restricts the graph to `nodes`, reindexing them in ascending order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<SubGraph> {
        if nodes.is_empty() {
            return Err(Error::invalid("induced sub-graph of an empty node set"));
        }
        let n = self.num_nodes();
        let mut parent_ids = nodes.to_vec();
        parent_ids.sort_unstable();
        parent_ids.dedup();
        if let Some(&bad) = parent_ids.iter().find(|&&i| i >= n) {
            return Err(Error::Index { index: bad, len: n });
        }
        let mut id_map = vec![None; n];
        for (new, &old) in parent_ids.iter().enumerate() {
            id_map[old] = Some(new);
        }
        let rows = parent_ids
            .iter()
            .map(|&old| {
                self.neighbors(old)
                    .iter()
                    .filter_map(|&j| id_map[j])
                    .collect::<Vec<_>>()
            })
            .collect();
        let adjacency = Adjacency::from_sorted_rows(rows);

        let c = self.num_features();
        let mut feats = Vec::with_capacity(parent_ids.len() * c);
        for &old in &parent_ids {
            feats.extend_from_slice(self.features.row(old));
        }
        let features = Tensor::new(&[parent_ids.len(), c], feats)?;
        let graph = Graph {
            adjacency,
            features,
            labels: self.labels.gather(&parent_ids),
            masks: self.masks.gather(&parent_ids),
        };
        Ok(SubGraph {
            parent_ids,
            graph,
            id_map,
        })
    }
}

/// A node subset together with the graph it induces.
#[derive(Debug, Clone)]
pub struct SubGraph {
    parent_ids: Vec<usize>,
    graph: Graph,
    id_map: Vec<Option<usize>>,
}

impl SubGraph {
    /// Ascending parent node ids; position = local id.
    pub fn parent_ids(&self) -> &[usize] {
        &self.parent_ids
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    /// Local id of a parent node, if it was selected.
    pub fn local_id(&self, parent: usize) -> Option<usize> {
        self.id_map.get(parent).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.parent_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent_ids.is_empty()
    }
}
