//! One learnable graph convolutional layer with skip concatenation, run
//! forward and differentiated on a random graph.

use lgcn::layers::{skip_concat, LgclLayer};
use lgcn::{rng, Adjacency, ParamStore, Tape, Tensor};
use rand::Rng;

fn main() -> lgcn::Result<()> {
    let mut r = rng(7);
    let n = 12;
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| r.random_bool(0.25))
        .collect();
    let adj = Adjacency::from_edges(n, &edges)?;
    let x = Tensor::new(&[n, 6], (0..n * 6).map(|_| r.random_range(-1.0..1.0)).collect())?;

    let mut store = ParamStore::new();
    let layer = LgclLayer::new(&mut store, "lgcl", 4, 6, 5, 4, &mut r)?;
    let mut tape = Tape::new();
    let input = tape.constant(x);
    let out = layer.forward(&mut tape, &store, input, &adj)?;
    let joined = skip_concat(&mut tape, input, out)?;
    println!("layer output {:?}, after skip concat {:?}", tape.value(out).shape(), tape.value(joined).shape());

    let loss = tape.sum_squares(joined);
    tape.backward(loss, &mut store)?;
    for p in store.iter() {
        let norm = p.grad.data().iter().map(|g| g * g).sum::<f64>().sqrt();
        println!("{:<18} shape {:?} grad norm {norm:.4}", p.name, p.value.shape());
    }
    Ok(())
}
