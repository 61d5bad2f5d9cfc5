#![allow(clippy::needless_range_loop)]

mod common;

use common::{dense, random_adjacency, random_edges, random_tensor};
use lgcn::graph::CsrMatrix;
use lgcn::{rng, Adjacency, Error, Graph, Labels, Masks, NormalizedAdjacency, Split};
use proptest::prelude::*;
use rand::Rng;

fn graph_on(adj: Adjacency, c: usize, seed: u64) -> Graph {
    let n = adj.num_nodes();
    let mut r = rng(seed);
    let ids = (0..n).map(|_| r.random_range(0..3)).collect();
    let splits = (0..n).map(|i| [Split::Train, Split::Val, Split::Test, Split::None][i % 4]).collect();
    Graph::new(
        adj,
        random_tensor(&[n, c], &mut r),
        Labels::Single { num_classes: 3, ids },
        Masks::new(splits),
    )
    .unwrap()
}

#[test]
fn from_edges_matches_boolean_matrix_oracle() {
    let mut r = rng(1);
    let n = 30;
    let edges: Vec<(usize, usize)> = (0..50).map(|_| (r.random_range(0..n), r.random_range(0..n))).collect();
    let adj = Adjacency::from_edges(n, &edges).unwrap();
    let mut m = vec![vec![false; n]; n];
    for &(u, v) in &edges {
        if u != v {
            m[u][v] = true;
            m[v][u] = true;
        }
    }
    for i in 0..n {
        let expect: Vec<usize> = (0..n).filter(|&j| m[i][j]).collect();
        assert_eq!(adj.neighbors(i), expect.as_slice());
    }
    let count = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| m[i][j]).count();
    assert_eq!(adj.num_edges(), count);
    assert!(matches!(
        Adjacency::from_edges(3, &[(0, 3)]),
        Err(Error::Ingestion(_))
    ));
}

#[test]
fn normalized_weights_hand_cases() {
    let path = Adjacency::from_edges(2, &[(0, 1)]).unwrap();
    let na = NormalizedAdjacency::new(&path);
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        assert_eq!(na.weight(i, j), Some(0.5));
    }
    let tri = Adjacency::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let na = NormalizedAdjacency::new(&tri);
    for i in 0..3 {
        for j in 0..3 {
            assert!((na.weight(i, j).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        }
    }
}

#[test]
fn normalized_adjacency_matches_dense_oracle() {
    let mut r = rng(2);
    for _ in 0..20 {
        let n = r.random_range(1..25);
        let adj = random_adjacency(n, 0.2, &mut r);
        let mut a = dense(&adj);
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let deg: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
        let na = NormalizedAdjacency::new(&adj);
        for i in 0..n {
            for j in 0..n {
                let expect = a[i][j] / (deg[i].sqrt() * deg[j].sqrt());
                let got = na.weight(i, j).unwrap_or(0.0);
                assert!((got - expect).abs() < 1e-15, "({i},{j})");
                assert_eq!(got.to_bits(), na.weight(j, i).unwrap_or(0.0).to_bits());
            }
        }
    }
}

fn row_sums(adj: &Adjacency) -> Vec<f64> {
    let na = NormalizedAdjacency::new(adj);
    (0..adj.num_nodes()).map(|i| na.matrix().row(i).map(|(_, w)| w).sum()).collect()
}

#[test]
fn constant_rows_preserved_exactly_on_regular_graphs() {
    let cycle: Vec<(usize, usize)> = (0..7).map(|i| (i, (i + 1) % 7)).collect();
    for adj in [
        Adjacency::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(),
        Adjacency::from_edges(7, &cycle).unwrap(),
        Adjacency::empty(4),
    ] {
        for s in row_sums(&adj) {
            assert!((s - 1.0).abs() < 1e-15, "{s}");
        }
    }
}

#[test]
fn connected_irregular_graphs_do_not_preserve_constant_rows() {
    // path 0-1-2: the end rows sum below one, the middle row above
    let sums = row_sums(&Adjacency::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
    assert!(sums[0] < 1.0 && sums[1] > 1.0, "{sums:?}");
    let mut r = rng(3);
    for _ in 0..20 {
        let n = 12;
        let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.extend(random_edges(n, 0.2, &mut r));
        let adj = Adjacency::from_edges(n, &edges).unwrap();
        let regular = (1..n).all(|i| adj.degree(i) == adj.degree(0));
        let preserved = row_sums(&adj).iter().all(|s| (s - 1.0).abs() < 1e-12);
        assert_eq!(regular, preserved);
    }
}

#[test]
fn average_degree_counts_edges() {
    let mut r = rng(4);
    for _ in 0..10 {
        let n = r.random_range(1..40);
        let edges = random_edges(n, 0.15, &mut r);
        let adj = Adjacency::from_edges(n, &edges).unwrap();
        assert!((adj.average_degree() - 2.0 * edges.len() as f64 / n as f64).abs() < 1e-12);
    }
}

#[test]
fn self_loop_matrix_is_a_plus_i() {
    let mut r = rng(5);
    let adj = random_adjacency(15, 0.3, &mut r);
    let m = CsrMatrix::with_self_loops(&adj);
    let d = dense(&adj);
    for i in 0..15 {
        for j in 0..15 {
            let expect = d[i][j] + if i == j { 1.0 } else { 0.0 };
            assert_eq!(m.get(i, j).unwrap_or(0.0), expect);
        }
    }
}

#[test]
fn induced_subgraph_matches_dense_submatrix() {
    let mut r = rng(6);
    for _ in 0..20 {
        let n = r.random_range(2..30);
        let g = graph_on(random_adjacency(n, 0.25, &mut r), 3, r.random());
        let mut set: Vec<usize> = (0..n).filter(|_| r.random_bool(0.5)).collect();
        if set.is_empty() {
            set.push(0);
        }
        let sub = g.induced_subgraph(&set).unwrap();
        let d = dense(g.adjacency());
        let ds = dense(sub.graph().adjacency());
        for (a, &pa) in set.iter().enumerate() {
            assert_eq!(sub.parent_ids()[a], pa);
            assert_eq!(sub.local_id(pa), Some(a));
            assert_eq!(sub.graph().features().row(a), g.features().row(pa));
            assert_eq!(sub.graph().masks().split(a), g.masks().split(pa));
            for (b, &pb) in set.iter().enumerate() {
                assert_eq!(ds[a][b], d[pa][pb]);
            }
        }
        assert_eq!(sub.graph().labels(), &g.labels().gather(&set));
    }
}

#[test]
fn induced_subgraph_errors() {
    let g = graph_on(Adjacency::from_edges(3, &[(0, 1)]).unwrap(), 2, 0);
    assert!(matches!(g.induced_subgraph(&[]), Err(Error::InvalidArgument(_))));
    assert!(matches!(g.induced_subgraph(&[0, 3]), Err(Error::Index { index: 3, .. })));
}

proptest! {
    #[test]
    fn induced_subgraph_with_full_local_set_is_idempotent(
        n in 1usize..20,
        p in 0.0f64..0.6,
        keep in proptest::collection::vec(any::<bool>(), 20),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let g = graph_on(random_adjacency(n, p, &mut r), 2, seed);
        let mut set: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
        if set.is_empty() {
            set.push(n - 1);
        }
        let once = g.induced_subgraph(&set).unwrap().into_graph();
        let all: Vec<usize> = (0..once.num_nodes()).collect();
        let twice = once.induced_subgraph(&all).unwrap().into_graph();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn adjacency_is_symmetric_sorted_and_loop_free(
        n in 1usize..25,
        raw in proptest::collection::vec((0usize..25, 0usize..25), 0..60),
    ) {
        let edges: Vec<_> = raw.into_iter().map(|(u, v)| (u % n, v % n)).collect();
        let adj = Adjacency::from_edges(n, &edges).unwrap();
        for i in 0..n {
            let nb = adj.neighbors(i);
            prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!nb.contains(&i));
            for &j in nb {
                prop_assert!(adj.contains(j, i));
            }
        }
    }
}
