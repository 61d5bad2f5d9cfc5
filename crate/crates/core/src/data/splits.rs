//! Train / validation / test split construction.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Labels, Masks, Split};

/// Picks `per_class_train` labelled nodes from every class, then `val` and
/// `test` nodes uniformly from the remainder. The three sets are disjoint;
/// every other node is left unassigned.
pub fn make_splits<R: Rng + ?Sized>(
    g: &Graph,
    per_class_train: usize,
    val: usize,
    test: usize,
    rng: &mut R,
) -> Result<Masks> {
    let Labels::Single { num_classes, ids } = g.labels() else {
        return Err(Error::invalid("per-class splits need single-label targets"));
    };
    if per_class_train == 0 {
        return Err(Error::invalid("per-class training count must be at least 1"));
    }
    let n = g.num_nodes();
    let mut splits = vec![Split::None; n];
    for class in 0..*num_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| ids[i] == class).collect();
        if members.len() < per_class_train {
            return Err(Error::invalid(format!(
                "class {class} has {} nodes, {per_class_train} requested for training",
                members.len()
            )));
        }
        members.shuffle(rng);
        for &i in &members[..per_class_train] {
            splits[i] = Split::Train;
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&i| splits[i] == Split::None).collect();
    assign_rest(&mut splits, rest, val, test, rng)?;
    Ok(Masks::new(splits))
}

/// Uniform disjoint split of `num_nodes` nodes, for multi-label graphs.
pub fn random_splits<R: Rng + ?Sized>(
    num_nodes: usize,
    train: usize,
    val: usize,
    test: usize,
    rng: &mut R,
) -> Result<Masks> {
    if train == 0 {
        return Err(Error::invalid("training count must be at least 1"));
    }
    if train > num_nodes {
        return Err(Error::invalid(format!("{train} training nodes requested from {num_nodes}")));
    }
    let mut order: Vec<usize> = (0..num_nodes).collect();
    order.shuffle(rng);
    let mut splits = vec![Split::None; num_nodes];
    for &i in &order[..train] {
        splits[i] = Split::Train;
    }
    let mut rest = order[train..].to_vec();
    rest.sort_unstable();
    assign_rest(&mut splits, rest, val, test, rng)?;
    Ok(Masks::new(splits))
}

fn assign_rest<R: Rng + ?Sized>(
    splits: &mut [Split],
    mut rest: Vec<usize>,
    val: usize,
    test: usize,
    rng: &mut R,
) -> Result<()> {
    if rest.len() < val + test {
        return Err(Error::invalid(format!(
            "{} nodes remain after training selection, {} requested for validation and testing",
            rest.len(),
            val + test
        )));
    }
    rest.shuffle(rng);
    for &i in &rest[..val] {
        splits[i] = Split::Val;
    }
    for &i in &rest[val..val + test] {
        splits[i] = Split::Test;
    }
    Ok(())
}
