//! Glorot initialisation, Adam and L2 regularisation.

use rand::distr::{Distribution, Uniform};
use rand::Rng;

use crate::error::{Error, Result};
use crate::tape::{ParamStore, Tape, Var};
use crate::tensor::Tensor;

/// I.i.d. uniform samples on `[-b, b]` with `b = √(6 / (fan_in + fan_out))`.
pub fn glorot_init<R: Rng + ?Sized>(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    let bound = glorot_bound(fan_in, fan_out);
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    let len = shape.iter().product();
    let data = (0..len).map(|_| dist.sample(rng)).collect();
    Tensor::new(shape, data).expect("length matches shape")
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in.max(1) + fan_out.max(1)) as f64).sqrt()
}

/// Bias-corrected Adam moments for every parameter in a store.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl AdamState {
    pub fn new(store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = store.iter().map(|p| Tensor::zeros(p.value.shape())).collect();
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// `θ ← θ − lr · m̂ / (√v̂ + ε)` using the gradients held in `store`.
    pub fn step(&mut self, store: &mut ParamStore, lr: f64) -> Result<()> {
        if store.len() != self.m.len() {
            return Err(Error::shape(format!(
                "optimizer tracks {} parameters, store has {}",
                self.m.len(),
                store.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for ((p, m), v) in store.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            if m.shape() != p.value.shape() {
                return Err(Error::shape(format!("moment shape mismatch for {}", p.name)));
            }
            let (value, grad) = (p.value.data_mut(), p.grad.data());
            for i in 0..value.len() {
                let g = grad[i];
                let mi = &mut m.data_mut()[i];
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                let vi = &mut v.data_mut()[i];
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let m_hat = m.data()[i] / c1;
                let v_hat = v.data()[i] / c2;
                if lr != 0.0 {
                    value[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
                }
            }
        }
        Ok(())
    }
}

/// Records `λ · Σ ‖W‖²` over the decayed parameters. `None` when `λ = 0` or
/// nothing decays.
pub fn l2_penalty(tape: &mut Tape, store: &ParamStore, lambda: f64) -> Result<Option<Var>> {
    if lambda == 0.0 {
        return Ok(None);
    }
    let mut total: Option<Var> = None;
    for id in store.ids() {
        if !store.get(id).decay {
            continue;
        }
        let w = tape.param(store, id);
        let sq = tape.sum_squares(w);
        total = Some(match total {
            None => sq,
            Some(acc) => tape.add(acc, sq)?,
        });
    }
    Ok(total.map(|t| tape.scale(t, lambda)))
}

/// Value of [`l2_penalty`] without a tape.
pub fn l2_value(store: &ParamStore, lambda: f64) -> f64 {
    lambda
        * store
            .iter()
            .filter(|p| p.decay)
            .map(|p| p.value.data().iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
}
