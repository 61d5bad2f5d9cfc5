//! Runs the citation-network protocol on a dataset file: five seeds of the
//! LGCN with sub-graph training and the same network with GCN layers.
//!
//! ```text
//! cargo run --release --example citation_benchmark -- path/to/cora.graph [cora|citeseer|pubmed]
//! ```

use lgcn::data::load_graph;
use lgcn::metrics::evaluate;
use lgcn::{fit, rng, Batching, LayerKind, Model, ModelConfig, Split, TrainConfig};

fn main() -> lgcn::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: citation_benchmark <dataset> [cora|citeseer|pubmed]");
        std::process::exit(2);
    };
    let g = load_graph(&path)?;
    let base = match args.next().as_deref().unwrap_or("cora") {
        "citeseer" => ModelConfig::citeseer(),
        "pubmed" => ModelConfig::pubmed(),
        _ => ModelConfig::cora(),
    };
    let base = ModelConfig { num_classes: g.labels().width(), ..base };
    let test = g.masks().mask(Split::Test);
    for (name, kind) in [("LGCN", LayerKind::Lgcl), ("GCN layers", LayerKind::Gcn)] {
        let mut scores = Vec::new();
        for seed in 0..5 {
            let cfg = ModelConfig { layer_kind: kind, ..base.clone() };
            let mut model = Model::build(cfg, g.num_features(), &mut rng(seed))?;
            let train = TrainConfig { seed, batching: Batching::from_training_nodes(&g, 2000), ..TrainConfig::default() };
            let out = fit(&g, &mut model, &train)?;
            let acc = evaluate(&model, &g, &test)?;
            println!("{name} seed {seed}: {} epochs, test accuracy {acc:.4}", out.history.len());
            scores.push(acc);
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let sd = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / scores.len() as f64).sqrt();
        println!("{name}: {:.2} ± {:.2} %", 100.0 * mean, 100.0 * sd);
    }
    Ok(())
}
