//! Breadth-first sub-graph selection: three initial nodes, at most five
//! new nodes in the first round and seven in every later round, capped at
//! fifteen nodes overall.

use lgcn::data::gen_planted_partition;
use lgcn::rng;
use lgcn::sampler::{select_nodes, select_subgraph, SamplerConfig};

fn main() -> lgcn::Result<()> {
    let g = gen_planted_partition(3, 20, 0.3, 0.05, 4, 1.0, &mut rng(1))?;
    let cfg = SamplerConfig::new(15, 3, vec![5, 7], (0..g.num_nodes()).collect());
    let sel = select_nodes(g.adjacency(), &cfg, &mut rng(2))?;
    for (round, nodes) in sel.rounds.iter().enumerate() {
        println!("round {round}: {nodes:?}");
    }
    let sub = select_subgraph(&g, &cfg, &mut rng(2))?;
    println!(
        "sub-graph: {} nodes, {} edges (parent has {} nodes, {} edges)",
        sub.len(),
        sub.graph().adjacency().num_edges(),
        g.num_nodes(),
        g.adjacency().num_edges()
    );
    println!("parent ids {:?}", sub.parent_ids());
    Ok(())
}
