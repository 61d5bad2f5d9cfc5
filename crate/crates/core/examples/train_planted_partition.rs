//! Trains the LGCN and the GCN-layer baseline on a synthetic citation-like
//! graph, with whole-graph and sub-graph batches.

use lgcn::data::{gen_planted_partition, make_splits};
use lgcn::metrics::evaluate;
use lgcn::{fit, rng, Batching, LayerKind, Model, ModelConfig, Split, TrainConfig};

fn main() -> lgcn::Result<()> {
    let mut r = rng(0);
    let g = gen_planted_partition(5, 80, 0.05, 0.004, 64, 0.6, &mut r)?;
    let g = g.with_masks(make_splits(&g, 20, 100, 150, &mut r)?)?;
    println!("{} nodes, {} edges, {} features", g.num_nodes(), g.adjacency().num_edges(), g.num_features());

    let runs = [
        ("LGCN, whole graph", LayerKind::Lgcl, Batching::WholeGraph),
        ("LGCN, sub-graphs of 200", LayerKind::Lgcl, Batching::from_training_nodes(&g, 200)),
        ("GCN layers, whole graph", LayerKind::Gcn, Batching::WholeGraph),
    ];
    for (name, kind, batching) in runs {
        let cfg = ModelConfig {
            layer_kind: kind,
            ..ModelConfig::citation(2, 5)
        };
        let mut model = Model::build(cfg, g.num_features(), &mut rng(1))?;
        let train = TrainConfig {
            learning_rate: 0.01,
            max_epochs: 200,
            patience: 30,
            batching,
            ..TrainConfig::default()
        };
        let out = fit(&g, &mut model, &train)?;
        let test = evaluate(&model, &g, &g.masks().mask(Split::Test))?;
        println!(
            "{name:<26} epochs {:>3}  best val {:.3} (epoch {})  test {test:.3}",
            out.history.len(),
            out.best_val_metric,
            out.best_epoch
        );
    }
    Ok(())
}
