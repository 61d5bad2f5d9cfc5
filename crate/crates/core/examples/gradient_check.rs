//! Central finite differences against the tape gradient of the full model
//! loss, for both selection widths used in practice.

use lgcn::cli::random_check_graph;
use lgcn::gradcheck::{check_model, GradCheck};
use lgcn::{rng, Model, ModelConfig};

fn main() -> lgcn::Result<()> {
    for (nodes, k) in [(10, 2), (15, 4), (20, 4)] {
        let g = random_check_graph(nodes, 5, 3, 0.3, nodes as u64)?;
        let cfg = ModelConfig {
            embed_dim: 4,
            layer_out_dim: 3,
            k,
            feature_dropout: 0.0,
            adjacency_dropout: 0.0,
            ..ModelConfig::citation(2, 3)
        };
        let model = Model::build(cfg, 5, &mut rng(0))?;
        let report = check_model(&model, &g, 0.0005, GradCheck::default())?;
        println!(
            "{nodes} nodes, k = {k}: {} entries, max relative error {:.2e} (worst {:?})",
            report.entries_checked, report.max_rel_error, report.worst
        );
    }
    Ok(())
}
