//! Multi-label training scored by micro-averaged F1.

use lgcn::data::{random_splits, MultiLabelPartition};
use lgcn::metrics::{multilabel_confusion, micro_f1};
use lgcn::{fit, rng, Labels, Model, ModelConfig, Split, TrainConfig};

fn main() -> lgcn::Result<()> {
    let mut r = rng(3);
    let g = MultiLabelPartition {
        communities: 5,
        nodes_per_community: 40,
        num_labels: 24,
        label_density: 0.3,
        p_in: 0.15,
        p_out: 0.01,
        feature_dim: 16,
        signal_strength: 1.5,
    }
    .generate(&mut r)?;
    let g = g.with_masks(random_splits(200, 80, 40, 80, &mut r)?)?;

    let cfg = ModelConfig {
        embed_dim: 16,
        k: 8,
        feature_dropout: 0.1,
        num_classes: 24,
        ..ModelConfig::ppi()
    };
    let mut model = Model::build(cfg, 16, &mut r)?;
    let train = TrainConfig {
        learning_rate: 0.01,
        max_epochs: 300,
        ..TrainConfig::default()
    };
    let out = fit(&g, &mut model, &train)?;

    let Labels::Multi { bits, .. } = g.labels() else { unreachable!() };
    let z = model.predict(&g)?;
    let test = g.masks().mask(Split::Test);
    let c = multilabel_confusion(&z, bits, &test, 0.5)?;
    println!("stopped after {} epochs, best validation F1 {:.3}", out.history.len(), out.best_val_metric);
    println!("test tp {} fp {} fn {}", c.tp, c.fp, c.fn_);
    println!("test micro-F1 {:.3}", micro_f1(&z, bits, &test, 0.5)?);
    Ok(())
}
