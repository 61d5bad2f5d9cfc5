//! Reverse-mode differentiation over a linear tape.
//!
//! Every op appends a node holding its forward value and whatever it needs
//! for the backward pass. [`Tape::backward`] walks the nodes in exact reverse
//! order and accumulates gradients into the [`ParamStore`].

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::CsrMatrix;
use crate::tensor::Tensor;

/// Handle of a parameter inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A trainable tensor and its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    /// Whether L2 regularization applies (weights and kernels, not biases).
    pub decay: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    params: Vec<Parameter>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor, decay: bool) -> ParamId {
        let grad = Tensor::zeros(value.shape());
        self.params.push(Parameter {
            name: name.into(),
            value,
            grad,
            decay,
        });
        ParamId(self.params.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].grad
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter> {
        self.params.iter_mut()
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    /// Copies of all values, in id order.
    pub fn snapshot(&self) -> Vec<Tensor> {
        self.params.iter().map(|p| p.value.clone()).collect()
    }

    pub fn restore(&mut self, values: &[Tensor]) -> Result<()> {
        if values.len() != self.params.len() {
            return Err(Error::shape(format!(
                "snapshot has {} tensors, store has {}",
                values.len(),
                self.params.len()
            )));
        }
        for (p, v) in self.params.iter_mut().zip(values) {
            if p.value.shape() != v.shape() {
                return Err(Error::shape(format!(
                    "parameter {} expects {:?}, got {:?}",
                    p.name,
                    p.value.shape(),
                    v.shape()
                )));
            }
            p.value = v.clone();
        }
        Ok(())
    }
}

/// Handle of a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

/// Marks an output element of [`Tape::gather_elements`] that reads zero.
pub const PAD: u32 = u32::MAX;

enum Op {
    Constant,
    Param(ParamId),
    MatMul { a: Var, b: Var },
    SpMM { matrix: Arc<CsrMatrix>, x: Var },
    Conv1d { x: Var, kernel: Var, bias: Var },
    GatherRows { x: Var, idx: Vec<usize> },
    GatherElements { x: Var, sources: Vec<u32> },
    Concat { a: Var, b: Var },
    Dropout { x: Var, scale: Vec<f64> },
    AddBias { x: Var, bias: Var },
    Reshape { x: Var },
    Add { a: Var, b: Var },
    Scale { x: Var, factor: f64 },
    SumSquares { x: Var },
    Sum { x: Var },
    Relu { x: Var },
    SoftmaxCrossEntropy { logits: Var, probs: Vec<f64>, labels: Vec<usize>, rows: Vec<usize> },
    BceWithLogits { logits: Var, targets: Vec<f64>, rows: Vec<usize> },
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Record of one forward pass.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Scalar value of a one-element node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data()[0]
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let requires_grad = match op {
            Op::Param(_) => true,
            Op::Constant => false,
            _ => inputs.iter().any(|v| self.nodes[v.0].requires_grad),
        };
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// Records a value that receives no gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Constant, &[])
    }

    /// Records the current value of a parameter.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(store.value(id).clone(), Op::Param(id), &[])
    }

    /// `a · b` for `a: N×K`, `b: K×M`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::shape(format!("matmul {sa:?} x {sb:?}")));
        }
        let (n, k, m) = (sa[0], sa[1], sb[1]);
        let av = self.value(a).data();
        let bv = self.value(b).data();
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let dst = &mut out[i * m..(i + 1) * m];
            for (kk, &x) in av[i * k..(i + 1) * k].iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for (d, &w) in dst.iter_mut().zip(&bv[kk * m..(kk + 1) * m]) {
                    *d += x * w;
                }
            }
        }
        let value = Tensor::new(&[n, m], out)?;
        Ok(self.push(value, Op::MatMul { a, b }, &[a, b]))
    }

    /// `matrix · x` for a sparse `N×N` matrix and `x: N×C`.
    pub fn spmm(&mut self, matrix: Arc<CsrMatrix>, x: Var) -> Result<Var> {
        let sx = self.shape(x);
        if sx.len() != 2 || sx[0] != matrix.num_rows() {
            return Err(Error::shape(format!(
                "sparse {} x {} times {sx:?}",
                matrix.num_rows(),
                matrix.num_rows()
            )));
        }
        let c = sx[1];
        let out = matrix.matmul_dense(self.value(x).data(), c);
        let value = Tensor::new(&[matrix.num_rows(), c], out)?;
        Ok(self.push(value, Op::SpMM { matrix, x }, &[x]))
    }

    /// Valid (unpadded) 1-D cross-correlation plus bias.
    ///
    /// `x: N×L×Cin`, `kernel: S×Cin×Cout`, `bias: Cout` gives
    /// `N×(L−S+1)×Cout`.
    pub fn conv1d_valid(&mut self, x: Var, kernel: Var, bias: Var) -> Result<Var> {
        let (sx, sk, sb) = (self.shape(x), self.shape(kernel), self.shape(bias));
        if sx.len() != 3 || sk.len() != 3 || sx[2] != sk[1] {
            return Err(Error::shape(format!("conv1d input {sx:?} with kernel {sk:?}")));
        }
        if sb.len() != 1 || sb[0] != sk[2] {
            return Err(Error::shape(format!("conv1d bias {sb:?} for kernel {sk:?}")));
        }
        let (n, l, cin) = (sx[0], sx[1], sx[2]);
        let (s, cout) = (sk[0], sk[2]);
        if s > l || s == 0 {
            return Err(Error::shape(format!("kernel size {s} does not fit length {l}")));
        }
        let p = l - s + 1;
        let xv = self.value(x).data();
        let kv = self.value(kernel).data();
        let bv = self.value(bias).data();
        let mut out = vec![0.0; n * p * cout];
        for b in 0..n {
            for pos in 0..p {
                let dst = &mut out[(b * p + pos) * cout..(b * p + pos + 1) * cout];
                dst.copy_from_slice(bv);
                for tap in 0..s {
                    let src = &xv[(b * l + pos + tap) * cin..(b * l + pos + tap + 1) * cin];
                    for (ci, &xval) in src.iter().enumerate() {
                        if xval == 0.0 {
                            continue;
                        }
                        let w = &kv[(tap * cin + ci) * cout..(tap * cin + ci + 1) * cout];
                        for (d, &wv) in dst.iter_mut().zip(w) {
                            *d += xval * wv;
                        }
                    }
                }
            }
        }
        let value = Tensor::new(&[n, p, cout], out)?;
        Ok(self.push(value, Op::Conv1d { x, kernel, bias }, &[x, kernel, bias]))
    }

    /// Copies rows of `x` in `idx` order.
    pub fn gather_rows(&mut self, x: Var, idx: &[usize]) -> Result<Var> {
        let src = self.value(x);
        let n = src.rows();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::Index { index: bad, len: n });
        }
        let mut shape = src.shape().to_vec();
        shape[0] = idx.len();
        let mut out = Vec::with_capacity(idx.len() * src.row_len());
        for &i in idx {
            out.extend_from_slice(src.row(i));
        }
        let value = Tensor::new(&shape, out)?;
        Ok(self.push(
            value,
            Op::GatherRows {
                x,
                idx: idx.to_vec(),
            },
            &[x],
        ))
    }

    /// Element-level gather from a matrix `x: M×C`.
    ///
    /// Output element `e` of `shape` (whose last extent must be `C`) reads
    /// `x[sources[e], e mod C]`, or zero when `sources[e] == PAD`.
    pub fn gather_elements(&mut self, x: Var, sources: Vec<u32>, shape: &[usize]) -> Result<Var> {
        let sx = self.shape(x);
        if sx.len() != 2 || shape.last() != Some(&sx[1]) {
            return Err(Error::shape(format!("gather {sx:?} into {shape:?}")));
        }
        let (m, c) = (sx[0], sx[1]);
        if sources.len() != shape.iter().product::<usize>() {
            return Err(Error::shape("gather source count does not match output shape"));
        }
        let xv = self.value(x).data();
        let mut out = vec![0.0; sources.len()];
        for (e, &src) in sources.iter().enumerate() {
            if src != PAD {
                let r = src as usize;
                if r >= m {
                    return Err(Error::Index { index: r, len: m });
                }
                out[e] = xv[r * c + e % c];
            }
        }
        let value = Tensor::new(shape, out)?;
        Ok(self.push(value, Op::GatherElements { x, sources }, &[x]))
    }

    /// Channel-axis concatenation of two matrices with equal row counts.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[0] != sb[0] {
            return Err(Error::shape(format!("concat {sa:?} with {sb:?}")));
        }
        let (n, ca, cb) = (sa[0], sa[1], sb[1]);
        let (av, bv) = (self.value(a), self.value(b));
        let mut out = Vec::with_capacity(n * (ca + cb));
        for i in 0..n {
            out.extend_from_slice(av.row(i));
            out.extend_from_slice(bv.row(i));
        }
        let value = Tensor::new(&[n, ca + cb], out)?;
        Ok(self.push(value, Op::Concat { a, b }, &[a, b]))
    }

    /// Inverted dropout. Identity when not training or when `rate == 0`.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        x: Var,
        rate: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Var> {
        check_rate(rate)?;
        if !training || rate == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 / (1.0 - rate);
        let src = self.value(x);
        let scale: Vec<f64> = (0..src.len())
            .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
            .collect();
        let out = src.data().iter().zip(&scale).map(|(v, s)| v * s).collect();
        let value = Tensor::new(src.shape(), out)?;
        Ok(self.push(value, Op::Dropout { x, scale }, &[x]))
    }

    /// Adds a length-`C` bias to every row of `x: N×C`.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (sx, sb) = (self.shape(x), self.shape(bias));
        if sx.len() != 2 || sb.len() != 1 || sx[1] != sb[0] {
            return Err(Error::shape(format!("add bias {sb:?} to {sx:?}")));
        }
        let mut value = self.value(x).clone();
        let bv = self.value(bias).data().to_vec();
        for i in 0..value.rows() {
            for (d, b) in value.row_mut(i).iter_mut().zip(&bv) {
                *d += b;
            }
        }
        Ok(self.push(value, Op::AddBias { x, bias }, &[x, bias]))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(x).clone().reshape(shape)?;
        Ok(self.push(value, Op::Reshape { x }, &[x]))
    }

    /// Elementwise sum of two equal-shape values.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(format!(
                "add {:?} and {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        let mut value = self.value(a).clone();
        value.add_assign(self.value(b));
        Ok(self.push(value, Op::Add { a, b }, &[a, b]))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let mut value = self.value(x).clone();
        value.scale(factor);
        self.push(value, Op::Scale { x, factor }, &[x])
    }

    /// `Σ x²` as a one-element value.
    pub fn sum_squares(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().map(|v| v * v).sum();
        self.push(Tensor::scalar(s), Op::SumSquares { x }, &[x])
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let src = self.value(x);
        let out = src.data().iter().map(|v| v.max(0.0)).collect();
        let value = Tensor::new(src.shape(), out).expect("same shape");
        self.push(value, Op::Relu { x }, &[x])
    }

    /// `Σ x` as a one-element value.
    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).sum();
        self.push(Tensor::scalar(s), Op::Sum { x }, &[x])
    }

    /// Mean negative log-softmax of the labelled class over masked rows.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize], mask: &[bool]) -> Result<Var> {
        let sl = self.shape(logits);
        if sl.len() != 2 || labels.len() != sl[0] || mask.len() != sl[0] {
            return Err(Error::shape(format!(
                "cross entropy on {sl:?} with {} labels and {} mask entries",
                labels.len(),
                mask.len()
            )));
        }
        let (n, k) = (sl[0], sl[1]);
        let rows: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        if rows.is_empty() {
            return Err(Error::invalid("cross entropy over an empty mask"));
        }
        if let Some(&bad) = rows.iter().map(|&i| &labels[i]).find(|&&c| c >= k) {
            return Err(Error::invalid(format!("label {bad} with only {k} classes")));
        }
        let z = self.value(logits);
        let mut probs = Vec::with_capacity(rows.len() * k);
        let mut total = 0.0;
        for &i in &rows {
            let row = z.row(i);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
            let lse = max + sum.ln();
            total += lse - row[labels[i]];
            probs.extend(row.iter().map(|v| (v - lse).exp()));
        }
        let loss = total / rows.len() as f64;
        Ok(self.push(
            Tensor::scalar(loss),
            Op::SoftmaxCrossEntropy {
                logits,
                probs,
                labels: labels.to_vec(),
                rows,
            },
            &[logits],
        ))
    }

    /// Mean binary cross-entropy with logits over all entries of masked rows.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[f64], mask: &[bool]) -> Result<Var> {
        let sl = self.shape(logits);
        if sl.len() != 2 || targets.len() != sl[0] * sl[1] || mask.len() != sl[0] {
            return Err(Error::shape(format!(
                "bce on {sl:?} with {} targets and {} mask entries",
                targets.len(),
                mask.len()
            )));
        }
        if let Some(t) = targets.iter().find(|&&t| t != 0.0 && t != 1.0) {
            return Err(Error::invalid(format!("binary target {t} is not 0 or 1")));
        }
        let (n, k) = (sl[0], sl[1]);
        let rows: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        if rows.is_empty() {
            return Err(Error::invalid("bce over an empty mask"));
        }
        let z = self.value(logits).data();
        let mut total = 0.0;
        for &i in &rows {
            for j in 0..k {
                let (zv, t) = (z[i * k + j], targets[i * k + j]);
                total += zv.max(0.0) - zv * t + (-zv.abs()).exp().ln_1p();
            }
        }
        let loss = total / (rows.len() * k) as f64;
        Ok(self.push(
            Tensor::scalar(loss),
            Op::BceWithLogits {
                logits,
                targets: targets.to_vec(),
                rows,
            },
            &[logits],
        ))
    }

    /// Gradients of a scalar `loss` with respect to every recorded value.
    ///
    /// Entries for values that do not influence the loss, or that do not
    /// depend on any parameter, are `None`.
    pub fn gradients(&self, loss: Var) -> Result<Vec<Option<Tensor>>> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::shape("backward needs a one-element loss"));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else {
                continue;
            };
            self.backward_node(node, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(grads)
    }

    /// Accumulates `d loss / d θ` into the gradient of every parameter that
    /// was recorded on this tape.
    pub fn backward(&self, loss: Var, store: &mut ParamStore) -> Result<()> {
        let grads = self.gradients(loss)?;
        for (idx, g) in grads.into_iter().enumerate() {
            if let (Op::Param(id), Some(g)) = (&self.nodes[idx].op, g) {
                store.get_mut(*id).grad.add_assign(&g);
            }
        }
        Ok(())
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn backward_node(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let gd = g.data();
        match &node.op {
            Op::Constant | Op::Param(_) => {}
            Op::MatMul { a, b } => {
                let (av, bv) = (self.value(*a), self.value(*b));
                let (n, k, m) = (av.shape()[0], av.shape()[1], bv.shape()[1]);
                if self.wants(*a) {
                    let mut da = vec![0.0; n * k];
                    for i in 0..n {
                        let gi = &gd[i * m..(i + 1) * m];
                        for kk in 0..k {
                            let brow = &bv.data()[kk * m..(kk + 1) * m];
                            da[i * k + kk] = gi.iter().zip(brow).map(|(x, y)| x * y).sum();
                        }
                    }
                    accumulate(grads, *a, av.shape(), &da);
                }
                if self.wants(*b) {
                    let mut db = vec![0.0; k * m];
                    for i in 0..n {
                        let gi = &gd[i * m..(i + 1) * m];
                        for (kk, &x) in av.row(i).iter().enumerate() {
                            if x == 0.0 {
                                continue;
                            }
                            for (d, &gv) in db[kk * m..(kk + 1) * m].iter_mut().zip(gi) {
                                *d += x * gv;
                            }
                        }
                    }
                    accumulate(grads, *b, bv.shape(), &db);
                }
            }
            Op::SpMM { matrix, x } => {
                if self.wants(*x) {
                    let sx = self.value(*x).shape();
                    let mut dx = vec![0.0; sx[0] * sx[1]];
                    matrix.transpose_matmul_acc(gd, sx[1], &mut dx);
                    accumulate(grads, *x, sx, &dx);
                }
            }
            Op::Conv1d { x, kernel, bias } => {
                let (xv, kv) = (self.value(*x), self.value(*kernel));
                let (n, l, cin) = (xv.shape()[0], xv.shape()[1], xv.shape()[2]);
                let (s, cout) = (kv.shape()[0], kv.shape()[2]);
                let p = l - s + 1;
                let (xd, kd) = (xv.data(), kv.data());
                let want_x = self.wants(*x);
                let want_k = self.wants(*kernel);
                let mut dx = vec![0.0; if want_x { xd.len() } else { 0 }];
                let mut dk = vec![0.0; if want_k { kd.len() } else { 0 }];
                let mut db = vec![0.0; cout];
                for b in 0..n {
                    for pos in 0..p {
                        let go = &gd[(b * p + pos) * cout..(b * p + pos + 1) * cout];
                        for (d, &gv) in db.iter_mut().zip(go) {
                            *d += gv;
                        }
                        for tap in 0..s {
                            let xrow = (b * l + pos + tap) * cin;
                            for ci in 0..cin {
                                let widx = (tap * cin + ci) * cout;
                                let w = &kd[widx..widx + cout];
                                if want_x {
                                    dx[xrow + ci] += w.iter().zip(go).map(|(a, b)| a * b).sum::<f64>();
                                }
                                if want_k {
                                    let xval = xd[xrow + ci];
                                    if xval != 0.0 {
                                        for (d, &gv) in dk[widx..widx + cout].iter_mut().zip(go) {
                                            *d += xval * gv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                if want_x {
                    accumulate(grads, *x, xv.shape(), &dx);
                }
                if want_k {
                    accumulate(grads, *kernel, kv.shape(), &dk);
                }
                if self.wants(*bias) {
                    accumulate(grads, *bias, &[cout], &db);
                }
            }
            Op::GatherRows { x, idx } => {
                if self.wants(*x) {
                    let xv = self.value(*x);
                    let w = xv.row_len();
                    let mut dx = vec![0.0; xv.len()];
                    for (r, &i) in idx.iter().enumerate() {
                        for (d, &gv) in dx[i * w..(i + 1) * w].iter_mut().zip(&gd[r * w..(r + 1) * w]) {
                            *d += gv;
                        }
                    }
                    accumulate(grads, *x, xv.shape(), &dx);
                }
            }
            Op::GatherElements { x, sources } => {
                if self.wants(*x) {
                    let xv = self.value(*x);
                    let c = xv.shape()[1];
                    let mut dx = vec![0.0; xv.len()];
                    for (e, &src) in sources.iter().enumerate() {
                        if src != PAD {
                            dx[src as usize * c + e % c] += gd[e];
                        }
                    }
                    accumulate(grads, *x, xv.shape(), &dx);
                }
            }
            Op::Concat { a, b } => {
                let (sa, sb) = (self.value(*a).shape(), self.value(*b).shape());
                let (n, ca, cb) = (sa[0], sa[1], sb[1]);
                let w = ca + cb;
                if self.wants(*a) {
                    let da: Vec<f64> = (0..n).flat_map(|i| gd[i * w..i * w + ca].iter().copied()).collect();
                    accumulate(grads, *a, sa, &da);
                }
                if self.wants(*b) {
                    let db: Vec<f64> = (0..n).flat_map(|i| gd[i * w + ca..(i + 1) * w].iter().copied()).collect();
                    accumulate(grads, *b, sb, &db);
                }
            }
            Op::Dropout { x, scale } => {
                let dx: Vec<f64> = gd.iter().zip(scale).map(|(g, s)| g * s).collect();
                accumulate(grads, *x, g.shape(), &dx);
            }
            Op::AddBias { x, bias } => {
                if self.wants(*x) {
                    accumulate(grads, *x, g.shape(), gd);
                }
                if self.wants(*bias) {
                    let c = g.shape()[1];
                    let mut db = vec![0.0; c];
                    for i in 0..g.rows() {
                        for (d, &gv) in db.iter_mut().zip(g.row(i)) {
                            *d += gv;
                        }
                    }
                    accumulate(grads, *bias, &[c], &db);
                }
            }
            Op::Reshape { x } => {
                accumulate(grads, *x, self.value(*x).shape(), gd);
            }
            Op::Add { a, b } => {
                if self.wants(*a) {
                    accumulate(grads, *a, g.shape(), gd);
                }
                if self.wants(*b) {
                    accumulate(grads, *b, g.shape(), gd);
                }
            }
            Op::Scale { x, factor } => {
                let dx: Vec<f64> = gd.iter().map(|v| v * factor).collect();
                accumulate(grads, *x, g.shape(), &dx);
            }
            Op::Relu { x } => {
                let xv = self.value(*x);
                let dx: Vec<f64> = xv
                    .data()
                    .iter()
                    .zip(gd)
                    .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
                    .collect();
                accumulate(grads, *x, xv.shape(), &dx);
            }
            Op::Sum { x } => {
                let xv = self.value(*x);
                accumulate(grads, *x, xv.shape(), &vec![gd[0]; xv.len()]);
            }
            Op::SumSquares { x } => {
                let xv = self.value(*x);
                let dx: Vec<f64> = xv.data().iter().map(|v| 2.0 * v * gd[0]).collect();
                accumulate(grads, *x, xv.shape(), &dx);
            }
            Op::SoftmaxCrossEntropy {
                logits,
                probs,
                labels,
                rows,
            } => {
                let zs = self.value(*logits).shape();
                let k = zs[1];
                let factor = gd[0] / rows.len() as f64;
                let mut dz = vec![0.0; zs[0] * k];
                for (r, &i) in rows.iter().enumerate() {
                    for j in 0..k {
                        dz[i * k + j] = probs[r * k + j] * factor;
                    }
                    dz[i * k + labels[i]] -= factor;
                }
                accumulate(grads, *logits, zs, &dz);
            }
            Op::BceWithLogits { logits, targets, rows } => {
                let zv = self.value(*logits);
                let k = zv.shape()[1];
                let factor = gd[0] / (rows.len() * k) as f64;
                let z = zv.data();
                let mut dz = vec![0.0; z.len()];
                for &i in rows {
                    for j in 0..k {
                        let e = i * k + j;
                        dz[e] = (sigmoid(z[e]) - targets[e]) * factor;
                    }
                }
                accumulate(grads, *logits, zv.shape(), &dz);
            }
        }
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, shape: &[usize], delta: &[f64]) {
    match &mut grads[v.0] {
        Some(t) => {
            for (a, b) in t.data_mut().iter_mut().zip(delta) {
                *a += b;
            }
        }
        slot @ None => {
            *slot = Some(Tensor::new(shape, delta.to_vec()).expect("gradient shape matches value"));
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::invalid(format!("rate {rate} is outside [0, 1)")));
    }
    Ok(())
}
