//! The reverse-mode tape on its own: a two-layer linear model on a
//! normalised adjacency with a masked cross-entropy loss.

use std::sync::Arc;

use lgcn::{rng, Adjacency, Graph, Labels, Masks, ParamStore, Tape, Tensor};
use lgcn::optim::glorot_init;

fn main() -> lgcn::Result<()> {
    let adj = Adjacency::from_edges(4, &[(0, 1), (1, 2), (2, 3)])?;
    let x = Tensor::new(&[4, 2], vec![1.0, 0.0, 0.5, 0.5, 0.0, 1.0, 0.2, 0.9])?;
    let g = Graph::new(adj, x.clone(), Labels::Single { num_classes: 2, ids: vec![0, 0, 1, 1] }, Masks::unassigned(4))?;
    let norm = Arc::new(g.normalize_adjacency().matrix().clone());

    let mut r = rng(0);
    let mut store = ParamStore::new();
    let w = store.add("w", glorot_init(&[2, 2], 2, 2, &mut r), true);
    let b = store.add("b", Tensor::zeros(&[2]), false);

    let mut tape = Tape::new();
    let input = tape.constant(x);
    let (wv, bv) = (tape.param(&store, w), tape.param(&store, b));
    let h = tape.spmm(norm, input)?;
    let h = tape.matmul(h, wv)?;
    let logits = tape.add_bias(h, bv)?;
    let loss = tape.softmax_cross_entropy(logits, &[0, 0, 1, 1], &[true, false, true, false])?;
    tape.backward(loss, &mut store)?;

    println!("tape holds {} nodes, loss {:.6}", tape.len(), tape.scalar(loss));
    println!("dL/dw = {:?}", store.grad(w).data());
    println!("dL/db = {:?}", store.grad(b).data());
    Ok(())
}
