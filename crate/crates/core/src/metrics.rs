//! Node-classification metrics.

use crate::error::{Error, Result};
use crate::graph::{Graph, Labels};
use crate::model::Model;
use crate::tape::sigmoid;
use crate::tensor::Tensor;

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of masked rows whose argmax equals the label.
pub fn accuracy(logits: &Tensor, labels: &[usize], mask: &[bool]) -> Result<f64> {
    check_rows(logits, mask)?;
    let mut total = 0usize;
    let mut correct = 0usize;
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        total += 1;
        if argmax(logits.row(i)) == labels[i] {
            correct += 1;
        }
    }
    if total == 0 {
        return Err(Error::invalid("accuracy over an empty mask"));
    }
    Ok(correct as f64 / total as f64)
}

/// True-positive, false-positive and false-negative counts pooled over
/// every (node, label) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `2PR / (P + R)`, zero when `P + R = 0`.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Pooled confusion counts with positive prediction `σ(z) ≥ threshold`.
pub fn multilabel_confusion(logits: &Tensor, bits: &[u8], mask: &[bool], threshold: f64) -> Result<Confusion> {
    check_rows(logits, mask)?;
    if bits.len() != logits.len() {
        return Err(Error::shape(format!(
            "{} targets for logits {:?}",
            bits.len(),
            logits.shape()
        )));
    }
    let k = logits.shape()[1];
    let mut c = Confusion::default();
    let mut rows = 0;
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        rows += 1;
        for j in 0..k {
            let predicted = sigmoid(logits.at(i, j)) >= threshold;
            match (predicted, bits[i * k + j] == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if rows == 0 {
        return Err(Error::invalid("micro-F1 over an empty mask"));
    }
    Ok(c)
}

pub fn micro_f1(logits: &Tensor, bits: &[u8], mask: &[bool], threshold: f64) -> Result<f64> {
    Ok(multilabel_confusion(logits, bits, mask, threshold)?.f1())
}

fn check_rows(logits: &Tensor, mask: &[bool]) -> Result<()> {
    if logits.rank() != 2 || logits.rows() != mask.len() {
        return Err(Error::shape(format!(
            "logits {:?} with {} mask entries",
            logits.shape(),
            mask.len()
        )));
    }
    Ok(())
}

pub fn evaluate_accuracy(model: &Model, g: &Graph, mask: &[bool]) -> Result<f64> {
    let Labels::Single { ids, .. } = g.labels() else {
        return Err(Error::invalid("accuracy needs single-label targets"));
    };
    accuracy(&model.predict(g)?, ids, mask)
}

pub fn evaluate_micro_f1(model: &Model, g: &Graph, mask: &[bool], threshold: f64) -> Result<f64> {
    let Labels::Multi { bits, .. } = g.labels() else {
        return Err(Error::invalid("micro-F1 needs multi-label targets"));
    };
    micro_f1(&model.predict(g)?, bits, mask, threshold)
}

/// Accuracy for single-label graphs, micro-F1 at 0.5 for multi-label ones.
pub fn evaluate(model: &Model, g: &Graph, mask: &[bool]) -> Result<f64> {
    let logits = model.predict(g)?;
    score(&logits, g.labels(), mask)
}

pub(crate) fn score(logits: &Tensor, labels: &Labels, mask: &[bool]) -> Result<f64> {
    match labels {
        Labels::Single { ids, .. } => accuracy(logits, ids, mask),
        Labels::Multi { bits, .. } => micro_f1(logits, bits, mask, 0.5),
    }
}
