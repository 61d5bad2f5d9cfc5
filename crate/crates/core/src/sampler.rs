//! Breadth-first sub-graph selection for large-graph training.
//!
//! Starting from `init_count` nodes drawn from `init_pool`, the selection
//! repeatedly adds the first-order neighbours of the nodes added in the
//! previous round, capped per round and by the overall budget, until the
//! sub-graph reaches `sub_graph_size` nodes or the frontier runs dry.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Graph, SubGraph};

/// Per-round cap value meaning "no cap".
pub const UNLIMITED: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Maximum number of nodes in the sub-graph (`N_s`).
    pub sub_graph_size: usize,
    /// Number of initial nodes (`N_init`).
    pub init_count: usize,
    /// Per-round expansion caps (`N_m`); the last entry repeats once the
    /// schedule is exhausted. [`UNLIMITED`] disables a cap.
    pub per_iteration_cap: Vec<usize>,
    /// Candidates for the initial nodes.
    pub init_pool: Vec<usize>,
}

impl SamplerConfig {
    pub fn new(sub_graph_size: usize, init_count: usize, per_iteration_cap: Vec<usize>, init_pool: Vec<usize>) -> Self {
        Self {
            sub_graph_size,
            init_count,
            per_iteration_cap,
            init_pool,
        }
    }

    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        if self.init_count > self.sub_graph_size {
            return Err(Error::invalid(format!(
                "initial node count {} exceeds sub-graph size {}",
                self.init_count, self.sub_graph_size
            )));
        }
        if self.init_count == 0 {
            return Err(Error::invalid("initial node count must be at least 1"));
        }
        if self.per_iteration_cap.is_empty() || self.per_iteration_cap.contains(&0) {
            return Err(Error::invalid("per-iteration caps must be non-empty and at least 1"));
        }
        if self.init_pool.is_empty() {
            return Err(Error::invalid("initial node pool is empty"));
        }
        if self.init_pool.len() < self.init_count {
            return Err(Error::invalid(format!(
                "initial pool has {} nodes but {} are requested",
                self.init_pool.len(),
                self.init_count
            )));
        }
        if let Some(&bad) = self.init_pool.iter().find(|&&i| i >= num_nodes) {
            return Err(Error::Index {
                index: bad,
                len: num_nodes,
            });
        }
        Ok(())
    }

    fn cap(&self, round: usize) -> usize {
        let last = self.per_iteration_cap.len() - 1;
        self.per_iteration_cap[round.min(last)]
    }
}

/// Ascending union of the neighbours of `from` (may include members of
/// `from` itself).
pub fn bfs_frontier(adj: &Adjacency, from: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = from.iter().flat_map(|&i| adj.neighbors(i).iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Nodes chosen by [`select_nodes`], grouped by the round that added them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// Round 0 holds the initial nodes; each list is ascending.
    pub rounds: Vec<Vec<usize>>,
}

impl Selection {
    /// All selected nodes, ascending.
    pub fn nodes(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.rounds.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn len(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sorted uniform sample of `amount` items without replacement.
fn sample_sorted<R: Rng + ?Sized>(items: &[usize], amount: usize, rng: &mut R) -> Vec<usize> {
    let mut picked: Vec<usize> = index::sample(rng, items.len(), amount)
        .into_iter()
        .map(|i| items[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Runs the breadth-first selection and reports the nodes added per round.
pub fn select_nodes<R: Rng + ?Sized>(adj: &Adjacency, cfg: &SamplerConfig, rng: &mut R) -> Result<Selection> {
    cfg.validate(adj.num_nodes())?;
    let mut pool = cfg.init_pool.clone();
    pool.sort_unstable();
    pool.dedup();
    if pool.len() < cfg.init_count {
        return Err(Error::invalid(format!(
            "initial pool has {} distinct nodes but {} are requested",
            pool.len(),
            cfg.init_count
        )));
    }
    let mut in_set = vec![false; adj.num_nodes()];
    let init = sample_sorted(&pool, cfg.init_count, rng);
    for &i in &init {
        in_set[i] = true;
    }
    let mut size = init.len();
    let mut rounds = vec![init];
    let mut round = 0;
    while size < cfg.sub_graph_size && !rounds.last().is_some_and(Vec::is_empty) {
        let candidates = bfs_frontier(adj, rounds.last().expect("at least one round"));
        let mut added: Vec<usize> = candidates.into_iter().filter(|&i| !in_set[i]).collect();
        let cap = cfg.cap(round);
        if added.len() > cap {
            added = sample_sorted(&added, cap, rng);
        }
        if added.len() + size > cfg.sub_graph_size {
            let remaining = cfg.sub_graph_size - size;
            added = sample_sorted(&added, remaining, rng);
        }
        for &i in &added {
            in_set[i] = true;
        }
        size += added.len();
        rounds.push(added);
        round += 1;
    }
    if rounds.last().is_some_and(Vec::is_empty) && rounds.len() > 1 {
        rounds.pop();
    }
    Ok(Selection { rounds })
}

/// Samples a sub-graph and returns the graph it induces.
pub fn select_subgraph<R: Rng + ?Sized>(g: &Graph, cfg: &SamplerConfig, rng: &mut R) -> Result<SubGraph> {
    let selection = select_nodes(g.adjacency(), cfg, rng)?;
    g.induced_subgraph(&selection.nodes())
}
