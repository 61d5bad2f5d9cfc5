//! Graph layers built on the tape: GCN propagation, the linear graph
//! embedding, k-largest neighbour selection and the learnable graph
//! convolutional layer (LGCL).

use std::cmp::Ordering;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, CsrMatrix, NormalizedAdjacency};
use crate::optim::glorot_init;
use crate::tape::{check_rate, ParamId, ParamStore, Tape, Var, PAD};
use crate::tensor::Tensor;

/// Output non-linearity. Every layer defaults to the identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Activation {
    #[default]
    Identity,
    Relu,
}

impl Activation {
    fn apply(self, tape: &mut Tape, x: Var) -> Var {
        match self {
            Activation::Identity => x,
            Activation::Relu => tape.relu(x),
        }
    }
}

/// `σ(Â_norm · X · W)`.
#[derive(Debug, Clone)]
pub struct GcnLayer {
    pub weight: ParamId,
    pub activation: Activation,
}

impl GcnLayer {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        let w = glorot_init(&[in_dim, out_dim], in_dim, out_dim, rng);
        Self {
            weight: store.add(format!("{name}.weight"), w, true),
            activation: Activation::Identity,
        }
    }

    pub fn out_dim(&self, store: &ParamStore) -> usize {
        store.value(self.weight).shape()[1]
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        store: &ParamStore,
        x: Var,
        adj: &Arc<CsrMatrix>,
    ) -> Result<Var> {
        let w = tape.param(store, self.weight);
        let xw = tape.matmul(x, w)?;
        let out = tape.spmm(Arc::clone(adj), xw)?;
        Ok(self.activation.apply(tape, out))
    }
}

/// Convenience: normalise `adj` and run a GCN layer on it.
pub fn gcn_forward(
    tape: &mut Tape,
    store: &ParamStore,
    x: Var,
    adj: &NormalizedAdjacency,
    layer: &GcnLayer,
) -> Result<Var> {
    layer.forward(tape, store, x, &Arc::new(adj.matrix().clone()))
}

/// Linear projection `X₁ = X₀ W₀` without bias or activation.
#[derive(Debug, Clone)]
pub struct EmbeddingLayer {
    pub weight: ParamId,
}

impl EmbeddingLayer {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        let w = glorot_init(&[in_dim, out_dim], in_dim, out_dim, rng);
        Self {
            weight: store.add(format!("{name}.weight"), w, true),
        }
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var) -> Result<Var> {
        let w = tape.param(store, self.weight);
        tape.matmul(x, w)
    }
}

/// Where each value of a k-largest selection came from.
///
/// Entry `(node, slot, column)` holds the source row, or `None` for zero
/// padding. Slot 0 is always the node itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionRecord {
    k: usize,
    channels: usize,
    sources: Vec<u32>,
}

impl SelectionRecord {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_nodes(&self) -> usize {
        self.sources.len() / ((self.k + 1) * self.channels.max(1))
    }

    pub fn source(&self, node: usize, slot: usize, column: usize) -> Option<usize> {
        let s = self.sources[(node * (self.k + 1) + slot) * self.channels + column];
        (s != PAD).then_some(s as usize)
    }

    /// Flat `N × (k+1) × C` table with [`PAD`] for padding.
    pub fn raw(&self) -> &[u32] {
        &self.sources
    }

    fn into_raw(self) -> Vec<u32> {
        self.sources
    }
}

fn rank_desc(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Computes which rows feed each slot of the selection grid.
///
/// For every node and every feature column, neighbour values are ranked by
/// (value descending, neighbour id ascending); when the node has fewer than
/// `k` neighbours, zero entries pad the column up to `k` before ranking.
pub fn select_sources(x: &Tensor, adj: &Adjacency, k: usize) -> Result<SelectionRecord> {
    if k == 0 {
        return Err(Error::invalid("k-largest selection needs k >= 1"));
    }
    if x.rank() != 2 || x.rows() != adj.num_nodes() {
        return Err(Error::shape(format!(
            "selection input {:?} for {} nodes",
            x.shape(),
            adj.num_nodes()
        )));
    }
    let (n, c) = (x.rows(), x.shape()[1]);
    if n >= PAD as usize {
        return Err(Error::invalid("too many nodes for selection indices"));
    }
    let mut sources = vec![PAD; n * (k + 1) * c];
    let mut buf: Vec<(f64, u32)> = Vec::new();
    let data = x.data();
    for i in 0..n {
        let base = i * (k + 1) * c;
        sources[base..base + c].fill(i as u32);
        let nb = adj.neighbors(i);
        for col in 0..c {
            buf.clear();
            buf.extend(nb.iter().map(|&j| (data[j * c + col], j as u32)));
            if buf.len() < k {
                buf.resize(k, (0.0, PAD));
            } else if buf.len() > k {
                buf.select_nth_unstable_by(k - 1, rank_desc);
                buf.truncate(k);
            }
            buf.sort_unstable_by(rank_desc);
            for (slot, &(_, src)) in buf.iter().enumerate() {
                sources[base + (slot + 1) * c + col] = src;
            }
        }
    }
    Ok(SelectionRecord {
        k,
        channels: c,
        sources,
    })
}

/// `g(X, A, k)`: the `N × (k+1) × C` grid of each node's own row followed
/// by the `k` largest neighbour values per feature.
pub fn k_largest_select(x: &Tensor, adj: &Adjacency, k: usize) -> Result<(Tensor, SelectionRecord)> {
    let record = select_sources(x, adj, k)?;
    let c = x.shape()[1];
    let data = x.data();
    let values = record
        .raw()
        .iter()
        .enumerate()
        .map(|(e, &s)| if s == PAD { 0.0 } else { data[s as usize * c + e % c] })
        .collect();
    let grid = Tensor::new(&[x.rows(), k + 1, c], values)?;
    Ok((grid, record))
}

/// Selection recorded on the tape; the chosen indices are frozen for
/// backward.
pub fn k_largest_select_on_tape(tape: &mut Tape, x: Var, adj: &Adjacency, k: usize) -> Result<Var> {
    let record = select_sources(tape.value(x), adj, k)?;
    let (n, c) = (adj.num_nodes(), tape.value(x).shape()[1]);
    tape.gather_elements(x, record.into_raw(), &[n, k + 1, c])
}

/// Learnable graph convolutional layer: k-largest selection followed by two
/// valid 1-D convolutions of width `k/2 + 1` that reduce `k + 1` positions
/// to one.
#[derive(Debug, Clone)]
pub struct LgclLayer {
    pub k: usize,
    pub conv1: ParamId,
    pub bias1: ParamId,
    pub conv2: ParamId,
    pub bias2: ParamId,
    pub activation: Activation,
}

impl LgclLayer {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        k: usize,
        in_dim: usize,
        mid_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        check_k(k)?;
        let s = k / 2 + 1;
        let k1 = glorot_init(&[s, in_dim, mid_dim], s * in_dim, s * mid_dim, rng);
        let k2 = glorot_init(&[s, mid_dim, out_dim], s * mid_dim, s * out_dim, rng);
        Ok(Self {
            k,
            conv1: store.add(format!("{name}.conv1.kernel"), k1, true),
            bias1: store.add(format!("{name}.conv1.bias"), Tensor::zeros(&[mid_dim]), false),
            conv2: store.add(format!("{name}.conv2.kernel"), k2, true),
            bias2: store.add(format!("{name}.conv2.bias"), Tensor::zeros(&[out_dim]), false),
            activation: Activation::Identity,
        })
    }

    pub fn out_dim(&self, store: &ParamStore) -> usize {
        store.value(self.bias2).len()
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var, adj: &Adjacency) -> Result<Var> {
        let kernel_len = store.value(self.conv1).shape()[0];
        if kernel_len != self.k / 2 + 1 || store.value(self.conv2).shape()[0] != kernel_len {
            return Err(Error::shape(format!(
                "kernels of length {kernel_len} do not match k = {}",
                self.k
            )));
        }
        let grid = k_largest_select_on_tape(tape, x, adj, self.k)?;
        let (k1, b1) = (tape.param(store, self.conv1), tape.param(store, self.bias1));
        let h = tape.conv1d_valid(grid, k1, b1)?;
        let (k2, b2) = (tape.param(store, self.conv2), tape.param(store, self.bias2));
        let y = tape.conv1d_valid(h, k2, b2)?;
        let shape = tape.value(y).shape().to_vec();
        let out = tape.reshape(y, &[shape[0], shape[2]])?;
        Ok(self.activation.apply(tape, out))
    }
}

/// `k` must be even (kernel width `k/2 + 1` must be integral) and ≥ 2.
pub fn check_k(k: usize) -> Result<()> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::Config(format!("k = {k} must be even and at least 2")));
    }
    Ok(())
}

/// Channel-wise concatenation of a layer's input and output.
pub fn skip_concat(tape: &mut Tape, x_in: Var, x_out: Var) -> Result<Var> {
    tape.concat(x_in, x_out)
}

/// `out_i = x_i + Σ_{j ∈ N(i)} x_j`.
pub fn neighbor_sum_aggregate(tape: &mut Tape, x: Var, adj: &Adjacency) -> Result<Var> {
    tape.spmm(Arc::new(CsrMatrix::with_self_loops(adj)), x)
}

/// Drops each undirected edge independently with probability `rate`.
///
/// One coin is drawn per edge in lexicographic `(u, v)` order, so both
/// directions disappear together. Returns an unchanged copy when not
/// training or when `rate == 0`.
pub fn adjacency_dropout<R: Rng + ?Sized>(
    adj: &Adjacency,
    rate: f64,
    training: bool,
    rng: &mut R,
) -> Result<Adjacency> {
    check_rate(rate)?;
    if !training || rate == 0.0 {
        return Ok(adj.clone());
    }
    Ok(adj.retain_edges(|_, _| rng.random::<f64>() >= rate))
}
