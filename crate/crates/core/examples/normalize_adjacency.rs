//! Symmetric normalisation with self-loops on a few small graphs.

use lgcn::{Adjacency, Graph, Labels, Masks, Tensor};

fn show(name: &str, n: usize, edges: &[(usize, usize)]) -> lgcn::Result<()> {
    let adj = Adjacency::from_edges(n, edges)?;
    let g = Graph::new(
        adj,
        Tensor::zeros(&[n, 1]),
        Labels::Single { num_classes: 1, ids: vec![0; n] },
        Masks::unassigned(n),
    )?;
    let norm = g.normalize_adjacency();
    println!("{name} (average degree {:.2})", g.average_degree());
    for i in 0..n {
        let row: Vec<String> = norm.matrix().row(i).map(|(j, w)| format!("{j}:{w:.4}")).collect();
        println!("  row {i}: {}", row.join(" "));
    }
    Ok(())
}

fn main() -> lgcn::Result<()> {
    show("isolated node", 1, &[])?;
    show("two-node path", 2, &[(0, 1)])?;
    show("triangle", 3, &[(0, 1), (1, 2), (2, 0)])?;
    // duplicates, reversed pairs and self-loops in the input are dropped
    show("star", 4, &[(0, 1), (1, 0), (0, 2), (0, 3), (3, 3)])
}
