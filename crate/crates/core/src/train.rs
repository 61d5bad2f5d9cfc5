//! Training loop with Adam, L2 regularisation, sub-graph batches and early
//! stopping on the validation metric.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::{Graph, Split};
use crate::metrics::score;
use crate::model::Model;
use crate::optim::{l2_penalty, AdamState};
use crate::sampler::{select_subgraph, SamplerConfig, UNLIMITED};
use crate::tape::{ParamStore, Tape, Var};
use crate::tensor::Tensor;
use crate::Rng;

/// How each optimisation step sees the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Batching {
    WholeGraph,
    /// `batch_size` independently sampled sub-graphs per step; gradients are
    /// averaged across them.
    SubGraphs { sampler: SamplerConfig, batch_size: usize },
}

impl Batching {
    /// One sub-graph of at most `sub_graph_size` nodes grown from every
    /// labelled training node, without per-round caps.
    pub fn from_training_nodes(g: &Graph, sub_graph_size: usize) -> Self {
        let pool = g.masks().ids(Split::Train);
        let init = pool.len().min(sub_graph_size);
        Batching::SubGraphs {
            sampler: SamplerConfig::new(sub_graph_size, init, vec![UNLIMITED], pool),
            batch_size: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub batching: Batching,
    pub seed: u64,
    /// Attempts at drawing a sub-graph that contains a training node.
    pub max_resample: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            l2_lambda: 0.0005,
            max_epochs: 1000,
            patience: 100,
            batching: Batching::WholeGraph,
            seed: 0,
            max_resample: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} is invalid", self.learning_rate)));
        }
        if self.l2_lambda < 0.0 {
            return Err(Error::Config("L2 weight must be non-negative".into()));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if let Batching::SubGraphs { batch_size: 0, .. } = self.batching {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metric: f64,
    /// Wall-clock duration of the epoch.
    pub seconds: f64,
}

/// Optimiser moments and the early-stopping snapshot.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub adam: AdamState,
    pub best_val_metric: f64,
    pub best_epoch: usize,
    pub best_snapshot: Vec<Tensor>,
    pub epochs_since_improvement: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<EpochRecord>,
    pub best_val_metric: f64,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Runs one optimisation step and returns the mean batch loss.
pub fn train_step(model: &mut Model, g: &Graph, cfg: &TrainConfig, adam: &mut AdamState, rng: &mut Rng) -> Result<f64> {
    model.params_mut().zero_grad();
    let loss = match &cfg.batching {
        Batching::WholeGraph => accumulate_loss(model, g, cfg.l2_lambda, rng)?,
        Batching::SubGraphs { sampler, batch_size } => {
            let mut total = 0.0;
            for _ in 0..*batch_size {
                let sub = sample_with_training_nodes(g, sampler, cfg.max_resample, rng)?;
                total += accumulate_loss(model, sub.graph(), cfg.l2_lambda, rng)?;
            }
            let scale = 1.0 / *batch_size as f64;
            for p in model.params_mut().iter_mut() {
                p.grad.scale(scale);
            }
            total * scale
        }
    };
    adam.step(model.params_mut(), cfg.learning_rate)?;
    Ok(loss)
}

fn sample_with_training_nodes(
    g: &Graph,
    sampler: &SamplerConfig,
    retries: usize,
    rng: &mut Rng,
) -> Result<crate::graph::SubGraph> {
    for _ in 0..retries.max(1) {
        let sub = select_subgraph(g, sampler, rng)?;
        if sub.graph().masks().count(Split::Train) > 0 {
            return Ok(sub);
        }
    }
    Err(Error::invalid(format!(
        "no sampled sub-graph contained a training node after {} attempts",
        retries.max(1)
    )))
}

/// Forward + backward on one graph; gradients accumulate into the model.
fn accumulate_loss(model: &mut Model, g: &Graph, lambda: f64, rng: &mut Rng) -> Result<f64> {
    let mut tape = Tape::new();
    let loss = training_loss(&mut tape, model, g, lambda, true, rng)?;
    let value = tape.scalar(loss);
    tape.backward(loss, model.params_mut())?;
    Ok(value)
}

/// Records masked data loss plus L2 penalty on the training nodes of `g`.
pub fn training_loss(
    tape: &mut Tape,
    model: &Model,
    g: &Graph,
    lambda: f64,
    training: bool,
    rng: &mut Rng,
) -> Result<Var> {
    training_loss_with(tape, model, model.params(), g, lambda, training, rng)
}

/// [`training_loss`] with parameter values taken from `store`.
pub fn training_loss_with(
    tape: &mut Tape,
    model: &Model,
    store: &ParamStore,
    g: &Graph,
    lambda: f64,
    training: bool,
    rng: &mut Rng,
) -> Result<Var> {
    let logits = model.forward_with(store, tape, g, training, rng)?;
    let mask = g.masks().mask(Split::Train);
    let data = model.data_loss(tape, logits, g, &mask)?;
    match l2_penalty(tape, store, lambda)? {
        Some(l2) => tape.add(data, l2),
        None => Ok(data),
    }
}

/// Trains `model` on `g` and leaves it holding the parameters of the best
/// validation epoch.
///
/// Validation always runs on the whole graph without dropout. Improvement
/// means a strictly larger validation metric.
pub fn fit(g: &Graph, model: &mut Model, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if g.masks().count(Split::Train) == 0 {
        return Err(Error::invalid("graph has no training nodes"));
    }
    let val_mask = g.masks().mask(Split::Val);
    if !val_mask.contains(&true) {
        return Err(Error::invalid("graph has no validation nodes"));
    }
    let mut rng = crate::rng(cfg.seed);
    let mut state = TrainState {
        adam: AdamState::new(model.params()),
        best_val_metric: f64::NEG_INFINITY,
        best_epoch: 0,
        best_snapshot: model.params().snapshot(),
        epochs_since_improvement: 0,
    };
    let mut history = Vec::new();
    let mut stopped_early = false;
    for epoch in 1..=cfg.max_epochs {
        let start = Instant::now();
        let train_loss = train_step(model, g, cfg, &mut state.adam, &mut rng)?;
        let val_metric = score(&model.predict(g)?, g.labels(), &val_mask)?;
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_metric,
            seconds: start.elapsed().as_secs_f64(),
        });
        if val_metric > state.best_val_metric {
            state.best_val_metric = val_metric;
            state.best_epoch = epoch;
            state.best_snapshot = model.params().snapshot();
            state.epochs_since_improvement = 0;
        } else {
            state.epochs_since_improvement += 1;
            if state.epochs_since_improvement >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }
    model.params_mut().restore(&state.best_snapshot)?;
    Ok(TrainOutcome {
        history,
        best_val_metric: state.best_val_metric,
        best_epoch: state.best_epoch,
        stopped_early,
    })
}

/// Wall time of `epochs` training steps after `warmup` untimed ones.
/// Validation is not included.
pub fn time_training(g: &Graph, model: &mut Model, cfg: &TrainConfig, warmup: usize, epochs: usize) -> Result<Duration> {
    cfg.validate()?;
    let mut rng = crate::rng(cfg.seed);
    let mut adam = AdamState::new(model.params());
    for _ in 0..warmup {
        train_step(model, g, cfg, &mut adam, &mut rng)?;
    }
    let start = Instant::now();
    for _ in 0..epochs {
        train_step(model, g, cfg, &mut adam, &mut rng)?;
    }
    Ok(start.elapsed())
}
