//! Network assembly: graph embedding, a stack of LGCLs (or GCN layers) with
//! skip concatenation, neighbour-sum aggregation and a fully connected
//! classifier.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Labels, NormalizedAdjacency};
use crate::layers::{adjacency_dropout, check_k, neighbor_sum_aggregate, skip_concat, EmbeddingLayer, GcnLayer, LgclLayer};
use crate::optim::glorot_init;
use crate::tape::{ParamId, ParamStore, Tape, Var};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    /// `X₀ W₀`.
    Linear,
    /// A GCN layer over the normalised adjacency.
    Gcn,
}

/// What each stacked block is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Lgcl,
    /// GCN layers in place of LGCLs, everything else unchanged.
    Gcn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub embedding_kind: EmbeddingKind,
    pub layer_kind: LayerKind,
    pub num_layers: usize,
    pub k: usize,
    pub layer_out_dim: usize,
    /// Channels between the two convolutions of each LGCL; defaults to the
    /// mean of the layer's input and output widths.
    pub conv_mid_dim: Option<usize>,
    pub feature_dropout: f64,
    pub adjacency_dropout: f64,
    pub num_classes: usize,
    pub multi_label: bool,
}

impl ModelConfig {
    /// Citation-network setup with `num_layers` LGCLs (2 for Cora, 1 for
    /// Citeseer and Pubmed).
    pub fn citation(num_layers: usize, num_classes: usize) -> Self {
        Self {
            embed_dim: 32,
            embedding_kind: EmbeddingKind::Gcn,
            layer_kind: LayerKind::Lgcl,
            num_layers,
            k: 8,
            layer_out_dim: 8,
            conv_mid_dim: None,
            feature_dropout: 0.16,
            adjacency_dropout: 0.999,
            num_classes,
            multi_label: false,
        }
    }

    pub fn cora() -> Self {
        Self::citation(2, 7)
    }

    pub fn citeseer() -> Self {
        Self::citation(1, 6)
    }

    pub fn pubmed() -> Self {
        Self::citation(1, 3)
    }

    /// Protein-interaction setup: 121 labels, embedding 128, two LGCLs with
    /// k = 64.
    pub fn ppi() -> Self {
        Self {
            embed_dim: 128,
            embedding_kind: EmbeddingKind::Gcn,
            layer_kind: LayerKind::Lgcl,
            num_layers: 2,
            k: 64,
            layer_out_dim: 8,
            conv_mid_dim: None,
            feature_dropout: 0.9,
            adjacency_dropout: 0.999,
            num_classes: 121,
            multi_label: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 {
            return Err(Error::Config("at least one stacked layer is required".into()));
        }
        if self.layer_kind == LayerKind::Lgcl {
            check_k(self.k)?;
        }
        for (name, rate) in [
            ("feature dropout", self.feature_dropout),
            ("adjacency dropout", self.adjacency_dropout),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} {rate} is outside [0, 1)")));
            }
        }
        if self.embed_dim == 0 || self.layer_out_dim == 0 || self.num_classes == 0 {
            return Err(Error::Config("layer widths and class count must be positive".into()));
        }
        if self.conv_mid_dim == Some(0) {
            return Err(Error::Config("convolution width must be positive".into()));
        }
        Ok(())
    }

    /// Width after `layers` skip-concatenated blocks.
    pub fn width_after(&self, layers: usize) -> usize {
        self.embed_dim + layers * self.layer_out_dim
    }

    pub fn classifier_input_width(&self) -> usize {
        self.width_after(self.num_layers)
    }
}

#[derive(Debug, Clone)]
enum Embedding {
    Linear(EmbeddingLayer),
    Gcn(GcnLayer),
}

#[derive(Debug, Clone)]
enum Block {
    Lgcl(LgclLayer),
    Gcn(GcnLayer),
}

/// A built network and its parameters.
#[derive(Debug, Clone)]
pub struct Model {
    config: ModelConfig,
    input_dim: usize,
    params: ParamStore,
    embedding: Embedding,
    blocks: Vec<Block>,
    classifier_weight: ParamId,
    classifier_bias: ParamId,
}

impl Model {
    /// Builds the layer stack with Glorot-initialised weights and zero biases.
    pub fn build<R: Rng + ?Sized>(config: ModelConfig, input_dim: usize, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        let mut params = ParamStore::new();
        let embedding = match config.embedding_kind {
            EmbeddingKind::Linear => {
                Embedding::Linear(EmbeddingLayer::new(&mut params, "embed", input_dim, config.embed_dim, rng))
            }
            EmbeddingKind::Gcn => Embedding::Gcn(GcnLayer::new(&mut params, "embed", input_dim, config.embed_dim, rng)),
        };
        let mut blocks = Vec::with_capacity(config.num_layers);
        for l in 0..config.num_layers {
            let name = format!("layer{l}");
            let in_dim = config.width_after(l);
            let out_dim = config.layer_out_dim;
            blocks.push(match config.layer_kind {
                LayerKind::Lgcl => {
                    let mid = config.conv_mid_dim.unwrap_or((in_dim + out_dim).div_ceil(2));
                    Block::Lgcl(LgclLayer::new(&mut params, &name, config.k, in_dim, mid, out_dim, rng)?)
                }
                LayerKind::Gcn => Block::Gcn(GcnLayer::new(&mut params, &name, in_dim, out_dim, rng)),
            });
        }
        let width = config.classifier_input_width();
        let w = glorot_init(&[width, config.num_classes], width, config.num_classes, rng);
        let classifier_weight = params.add("classifier.weight", w, true);
        let classifier_bias = params.add("classifier.bias", Tensor::zeros(&[config.num_classes]), false);
        Ok(Self {
            config,
            input_dim,
            params,
            embedding,
            blocks,
            classifier_weight,
            classifier_bias,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Records a forward pass and returns the `N × num_classes` logits.
    ///
    /// In training mode, feature dropout is applied to the input of every
    /// layer and each layer that reads the adjacency draws its own edge
    /// dropout. Evaluation mode is deterministic and does not touch `rng`.
    pub fn forward<R: Rng + ?Sized>(&self, tape: &mut Tape, g: &Graph, training: bool, rng: &mut R) -> Result<Var> {
        self.forward_with(&self.params, tape, g, training, rng)
    }

    /// [`Model::forward`] reading parameter values from `store`, which must
    /// have the layout of [`Model::params`].
    pub fn forward_with<R: Rng + ?Sized>(
        &self,
        store: &ParamStore,
        tape: &mut Tape,
        g: &Graph,
        training: bool,
        rng: &mut R,
    ) -> Result<Var> {
        if store.len() != self.params.len() {
            return Err(Error::invalid("parameter store does not match the model"));
        }
        if g.num_features() != self.input_dim {
            return Err(Error::shape(format!(
                "model expects {} input features, graph has {}",
                self.input_dim,
                g.num_features()
            )));
        }
        let cfg = &self.config;
        let adj = g.adjacency();

        let x = tape.constant(g.features().clone());
        let x = tape.dropout(x, cfg.feature_dropout, training, rng)?;
        let mut h = match &self.embedding {
            Embedding::Linear(layer) => layer.forward(tape, store, x)?,
            Embedding::Gcn(layer) => {
                let dropped = adjacency_dropout(adj, cfg.adjacency_dropout, training, rng)?;
                let norm = Arc::new(NormalizedAdjacency::new(&dropped).matrix().clone());
                layer.forward(tape, store, x, &norm)?
            }
        };

        for block in &self.blocks {
            let input = tape.dropout(h, cfg.feature_dropout, training, rng)?;
            let dropped = adjacency_dropout(adj, cfg.adjacency_dropout, training, rng)?;
            let out = match block {
                Block::Lgcl(layer) => layer.forward(tape, store, input, &dropped)?,
                Block::Gcn(layer) => {
                    let norm = Arc::new(NormalizedAdjacency::new(&dropped).matrix().clone());
                    layer.forward(tape, store, input, &norm)?
                }
            };
            h = skip_concat(tape, h, out)?;
        }

        let dropped = adjacency_dropout(adj, cfg.adjacency_dropout, training, rng)?;
        let summed = neighbor_sum_aggregate(tape, h, &dropped)?;
        let summed = tape.dropout(summed, cfg.feature_dropout, training, rng)?;
        let w = tape.param(store, self.classifier_weight);
        let b = tape.param(store, self.classifier_bias);
        let z = tape.matmul(summed, w)?;
        tape.add_bias(z, b)
    }

    /// Masked data loss: softmax cross-entropy, or per-label binary
    /// cross-entropy for multi-label targets.
    pub fn data_loss(&self, tape: &mut Tape, logits: Var, g: &Graph, mask: &[bool]) -> Result<Var> {
        match g.labels() {
            Labels::Single { ids, num_classes } => {
                if *num_classes != self.config.num_classes || self.config.multi_label {
                    return Err(Error::Config(format!(
                        "model predicts {} classes, graph has {num_classes} single-label classes",
                        self.config.num_classes
                    )));
                }
                tape.softmax_cross_entropy(logits, ids, mask)
            }
            Labels::Multi { num_labels, bits } => {
                if *num_labels != self.config.num_classes || !self.config.multi_label {
                    return Err(Error::Config(format!(
                        "model predicts {} classes, graph has {num_labels} multi-label slots",
                        self.config.num_classes
                    )));
                }
                let targets: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
                tape.bce_with_logits(logits, &targets, mask)
            }
        }
    }

    /// Dropout-free logits for every node.
    pub fn predict(&self, g: &Graph) -> Result<Tensor> {
        let mut tape = Tape::new();
        // evaluation never draws from the stream
        let mut unused = crate::rng(0);
        let z = self.forward(&mut tape, g, false, &mut unused)?;
        Ok(tape.value(z).clone())
    }
}
