#![allow(dead_code)]

use lgcn::{Adjacency, Tensor};
use rand::Rng;

/// G(n, p) edge list with `u < v`.
pub fn random_edges<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn random_adjacency<R: Rng>(n: usize, p: f64, rng: &mut R) -> Adjacency {
    Adjacency::from_edges(n, &random_edges(n, p, rng)).unwrap()
}

pub fn random_tensor<R: Rng>(shape: &[usize], rng: &mut R) -> Tensor {
    let len = shape.iter().product();
    Tensor::new(shape, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Dense 0/1 adjacency matrix.
pub fn dense(adj: &Adjacency) -> Vec<Vec<f64>> {
    let n = adj.num_nodes();
    let mut m = vec![vec![0.0; n]; n];
    for (u, v) in adj.edges() {
        m[u][v] = 1.0;
        m[v][u] = 1.0;
    }
    m
}

/// `m · x` for a dense square `m` and an `N × C` tensor.
pub fn dense_matmul(m: &[Vec<f64>], x: &Tensor) -> Vec<Vec<f64>> {
    let c = x.shape()[1];
    m.iter()
        .map(|row| {
            (0..c)
                .map(|j| row.iter().enumerate().map(|(k, w)| w * x.at(k, j)).sum())
                .collect()
        })
        .collect()
}

pub fn rows(t: &Tensor) -> Vec<Vec<f64>> {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}

pub fn assert_close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        assert_eq!(ra.len(), rb.len());
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            assert!((x - y).abs() <= tol, "entry ({i},{j}): {x} vs {y}");
        }
    }
}
