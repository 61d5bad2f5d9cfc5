//! Generates a dataset, writes it in the text format, reads it back and
//! stores a checkpoint next to it.

use lgcn::data::{
    format_graph, gen_planted_partition, load_checkpoint_into, load_graph, make_splits, save_checkpoint, save_graph,
};
use lgcn::{rng, Model, ModelConfig, Split};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("lgcn-roundtrip-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let mut r = rng(5);
    let g = gen_planted_partition(2, 4, 0.8, 0.1, 3, 1.0, &mut r)?;
    let g = g.with_masks(make_splits(&g, 1, 2, 2, &mut r)?)?;
    let path = dir.join("tiny.graph");
    save_graph(&g, &path)?;
    print!("{}", format_graph(&g));

    let back = load_graph(&path)?;
    println!("reloaded: {} nodes, {} train / {} val / {} test", back.num_nodes(),
        back.masks().count(Split::Train), back.masks().count(Split::Val), back.masks().count(Split::Test));

    let cfg = ModelConfig { embed_dim: 4, layer_out_dim: 2, k: 2, ..ModelConfig::citation(1, 2) };
    let a = Model::build(cfg.clone(), 3, &mut rng(1))?;
    let ckpt = dir.join("model.ckpt");
    save_checkpoint(a.params(), &ckpt)?;
    let mut b = Model::build(cfg, 3, &mut rng(2))?;
    load_checkpoint_into(b.params_mut(), &ckpt)?;
    println!("checkpoint restores identical predictions: {}", a.predict(&back)? == b.predict(&back)?);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
