//! Planted-partition graphs with class-dependent Gaussian features.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Graph, Labels, Masks};
use crate::tensor::Tensor;

/// Single-label planted partition.
///
/// Node `i` belongs to class `i / nodes_per_class`. Each pair of nodes is
/// joined with probability `p_in` when they share a class and `p_out`
/// otherwise. Every class draws a mean vector with independent ±1 entries;
/// a node's features are its class mean plus standard normal noise divided
/// by `signal_strength`. All masks are unassigned.
pub fn gen_planted_partition<R: Rng + ?Sized>(
    num_classes: usize,
    nodes_per_class: usize,
    p_in: f64,
    p_out: f64,
    feature_dim: usize,
    signal_strength: f64,
    rng: &mut R,
) -> Result<Graph> {
    check_params(num_classes, nodes_per_class, p_in, p_out, feature_dim, signal_strength)?;
    let n = num_classes * nodes_per_class;
    let class: Vec<usize> = (0..n).map(|i| i / nodes_per_class).collect();
    let adjacency = planted_edges(&class, p_in, p_out, rng)?;
    let means = sign_vectors(num_classes, feature_dim, rng);
    let features = noisy_features(&class, &means, feature_dim, signal_strength, rng)?;
    Graph::new(
        adjacency,
        features,
        Labels::Single { num_classes, ids: class },
        Masks::unassigned(n),
    )
}

/// Multi-label planted partition: nodes fall into communities as in
/// [`gen_planted_partition`], and each community carries a random label
/// set (never empty) that every member inherits.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelPartition {
    pub communities: usize,
    pub nodes_per_community: usize,
    pub num_labels: usize,
    /// Probability that a community carries each label.
    pub label_density: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub signal_strength: f64,
}

impl MultiLabelPartition {
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph> {
        check_params(
            self.communities,
            self.nodes_per_community,
            self.p_in,
            self.p_out,
            self.feature_dim,
            self.signal_strength,
        )?;
        if self.num_labels == 0 || !(0.0..=1.0).contains(&self.label_density) {
            return Err(Error::invalid("need at least one label and a density in [0, 1]"));
        }
        let n = self.communities * self.nodes_per_community;
        let community: Vec<usize> = (0..n).map(|i| i / self.nodes_per_community).collect();
        let adjacency = planted_edges(&community, self.p_in, self.p_out, rng)?;
        let means = sign_vectors(self.communities, self.feature_dim, rng);
        let features = noisy_features(&community, &means, self.feature_dim, self.signal_strength, rng)?;

        let k = self.num_labels;
        let mut sets = vec![0u8; self.communities * k];
        for set in sets.chunks_mut(k) {
            for b in set.iter_mut() {
                *b = u8::from(rng.random_bool(self.label_density));
            }
            if !set.contains(&1) {
                set[rng.random_range(0..k)] = 1;
            }
        }
        let bits = community
            .iter()
            .flat_map(|&c| sets[c * k..(c + 1) * k].iter().copied())
            .collect();
        Graph::new(
            adjacency,
            features,
            Labels::Multi { num_labels: k, bits },
            Masks::unassigned(n),
        )
    }
}

fn check_params(
    groups: usize,
    per_group: usize,
    p_in: f64,
    p_out: f64,
    feature_dim: usize,
    signal_strength: f64,
) -> Result<()> {
    if !(0.0 <= p_out && p_out < p_in && p_in <= 1.0) {
        return Err(Error::invalid(format!(
            "edge probabilities must satisfy 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    if groups == 0 || per_group == 0 || feature_dim == 0 {
        return Err(Error::invalid("class count, class size and feature width must be positive"));
    }
    if !(signal_strength > 0.0 && signal_strength.is_finite()) {
        return Err(Error::invalid(format!("signal strength {signal_strength} must be positive")));
    }
    Ok(())
}

fn planted_edges<R: Rng + ?Sized>(group: &[usize], p_in: f64, p_out: f64, rng: &mut R) -> Result<Adjacency> {
    let n = group.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if group[u] == group[v] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Adjacency::from_edges(n, &edges)
}

fn sign_vectors<R: Rng + ?Sized>(count: usize, dim: usize, rng: &mut R) -> Vec<f64> {
    (0..count * dim)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect()
}

fn noisy_features<R: Rng + ?Sized>(
    group: &[usize],
    means: &[f64],
    dim: usize,
    signal_strength: f64,
    rng: &mut R,
) -> Result<Tensor> {
    let mut data = Vec::with_capacity(group.len() * dim);
    for &c in group {
        for j in 0..dim {
            let noise: f64 = rng.sample(StandardNormal);
            data.push(means[c * dim + j] + noise / signal_strength);
        }
    }
    Tensor::new(&[group.len(), dim], data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn rejects_bad_probabilities() {
        for (p_in, p_out) in [(0.5, 0.5), (0.2, 0.3), (1.5, 0.1), (0.5, -0.1)] {
            assert!(matches!(
                gen_planted_partition(2, 5, p_in, p_out, 3, 1.0, &mut rng(0)),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn no_cross_edges_when_p_out_zero() {
        let g = gen_planted_partition(3, 10, 1.0, 0.0, 2, 1.0, &mut rng(0)).unwrap();
        for (u, v) in g.adjacency().edges() {
            assert_eq!(u / 10, v / 10);
        }
        assert_eq!(g.adjacency().num_edges(), 3 * 45);
    }

    #[test]
    fn multi_label_sets_are_nonempty() {
        let g = MultiLabelPartition {
            communities: 4,
            nodes_per_community: 5,
            num_labels: 6,
            label_density: 0.0,
            p_in: 0.5,
            p_out: 0.05,
            feature_dim: 8,
            signal_strength: 2.0,
        }
        .generate(&mut rng(3))
        .unwrap();
        let Labels::Multi { bits, .. } = g.labels() else { unreachable!() };
        for row in bits.chunks(6) {
            assert_eq!(row.iter().filter(|&&b| b == 1).count(), 1);
        }
    }
}
