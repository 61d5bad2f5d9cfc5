//! The k-largest neighbour selection that feeds every LGCL.
//!
//! A centre node with six neighbours and three features is reduced to a
//! fixed 5 x 3 grid for k = 4: the node's own row first, then the four
//! largest neighbour values of each column, ranked independently.

use lgcn::layers::k_largest_select;
use lgcn::{Adjacency, Tensor};

fn main() -> lgcn::Result<()> {
    #[rustfmt::skip]
    let x = Tensor::new(&[7, 3], vec![
        1.0, 2.0, 3.0, // centre
        9.0, 0.0, 1.0,
        6.0, 4.0, 0.0,
        5.0, 8.0, 2.0,
        3.0, 1.0, 7.0,
        0.0, 5.0, 3.0,
        0.0, 2.0, 6.0,
    ])?;
    let edges: Vec<(usize, usize)> = (1..7).map(|j| (0, j)).collect();
    let adj = Adjacency::from_edges(7, &edges)?;
    let k = 4;
    let (grid, record) = k_largest_select(&x, &adj, k)?;
    let c = x.row_len();
    println!("grid for node 0 (row 0 is the node itself):");
    for slot in 0..=k {
        let row: Vec<String> = (0..c).map(|j| format!("{:>4}", grid.data()[slot * c + j])).collect();
        println!("  {}", row.join(""));
    }
    let first: Vec<f64> = (1..=k).map(|s| grid.data()[s * c]).collect();
    println!("first feature keeps {first:?}");
    println!(
        "slot 1 of column 1 came from node {:?}",
        record.source(0, 1, 1)
    );

    // a leaf has a single neighbour, so three zero rows pad its grid
    let leaf: Vec<f64> = grid.data()[(k + 1) * c..2 * (k + 1) * c].to_vec();
    println!("leaf grid: {leaf:?}");
    Ok(())
}
