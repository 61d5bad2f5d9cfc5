//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! straight to stdout so the summary survives output capture.
//!
//! Criteria 4 to 6 need the Cora and Citeseer citation graphs converted to
//! the crate's dataset format (`cora.graph`, `citeseer.graph`, with the
//! standard 140/500/1000 and 120/500/1000 masks) in the directory named by
//! `LGCN_DATA_DIR`. Without them those criteria report FAIL and are not
//! asserted.

mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::random_adjacency;
use lgcn::cli::{command, execute, random_check_graph};
use lgcn::data::{load_graph, random_splits, save_graph, MultiLabelPartition};
use lgcn::gradcheck::{check_model, GradCheck};
use lgcn::layers::k_largest_select;
use lgcn::metrics::{evaluate, micro_f1};
use lgcn::sampler::{select_nodes, SamplerConfig, UNLIMITED};
use lgcn::train::time_training;
use lgcn::{
    fit, rng, Adjacency, Batching, Graph, LayerKind, Model, ModelConfig, Split, Tensor, TrainConfig,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    /// False when the criterion could not be evaluated at all.
    evaluated: bool,
}

fn report(id: usize, name: &str, pass: bool, detail: String) -> Outcome {
    let line = format!("acceptance {id} {} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    Outcome { pass, evaluated: true }
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (i, nodes) in [10usize, 13, 16, 20].into_iter().enumerate() {
        for k in [2, 4] {
            let seed = (i * 10 + k) as u64;
            let g = random_check_graph(nodes, 5, 3, 0.3, seed).unwrap();
            let cfg = ModelConfig {
                embed_dim: 4,
                layer_out_dim: 3,
                k,
                feature_dropout: 0.0,
                adjacency_dropout: 0.0,
                ..ModelConfig::citation(2, 3)
            };
            let model = Model::build(cfg, 5, &mut rng(seed)).unwrap();
            let r = check_model(&model, &g, 0.0005, GradCheck::default()).unwrap();
            worst = worst.max(r.max_rel_error);
            checked += r.entries_checked;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "gradient check",
        worst <= 1e-4 && secs < 10.0,
        format!("max rel error {worst:.2e} over {checked} entries (<= 1e-4), {secs:.2} s (< 10 s)"),
    )
}

/// Column slots of node 0 in a star whose leaves carry `leaf_values`.
fn star_slots(leaf_values: &[Vec<f64>], own: &[f64], k: usize) -> Vec<Vec<f64>> {
    let n = leaf_values.len();
    let c = own.len();
    let edges: Vec<(usize, usize)> = (1..=n).map(|j| (0, j)).collect();
    let adj = Adjacency::from_edges(n + 1, &edges).unwrap();
    let mut data = own.to_vec();
    leaf_values.iter().for_each(|r| data.extend(r));
    let x = Tensor::new(&[n + 1, c], data).unwrap();
    let (grid, _) = k_largest_select(&x, &adj, k).unwrap();
    (0..=k).map(|s| (0..c).map(|col| grid.data()[s * c + col]).collect()).collect()
}

fn selection_oracle() -> Outcome {
    let mut r = rng(2);
    let mut mismatches = 0;
    let mut small = 0;
    let mut empty = 0;
    for _ in 0..1000 {
        let k = r.random_range(1..=8);
        let n = r.random_range(0..=12);
        let c = r.random_range(1..=4);
        small += usize::from(n < k);
        empty += usize::from(n == 0);
        let value = |r: &mut lgcn::Rng| f64::from(r.random_range(-3i8..=3)) * 0.5;
        let leaves: Vec<Vec<f64>> = (0..n).map(|_| (0..c).map(|_| value(&mut r)).collect()).collect();
        let own: Vec<f64> = (0..c).map(|_| value(&mut r)).collect();
        let got = star_slots(&leaves, &own, k);
        let ok = got[0] == own
            && (0..c).all(|col| {
                let mut column: Vec<f64> = leaves.iter().map(|l| l[col]).collect();
                column.resize(column.len().max(k), 0.0);
                column.sort_by(|a, b| b.total_cmp(a));
                column.truncate(k);
                (0..k).all(|s| got[s + 1][col] == column[s])
            });
        mismatches += usize::from(!ok);
    }
    let golden: Vec<Vec<f64>> = [9.0, 6.0, 5.0, 3.0, 0.0, 0.0].iter().map(|&v| vec![v]).collect();
    let slots: Vec<f64> = star_slots(&golden, &[1.0], 4)[1..].iter().map(|s| s[0]).collect();
    report(
        2,
        "k-largest selection",
        mismatches == 0 && slots == [9.0, 6.0, 5.0, 3.0],
        format!(
            "{mismatches}/1000 mismatches ({small} with n < k, {empty} with n = 0); golden column {slots:?}"
        ),
    )
}

fn sampler_invariants() -> Outcome {
    let mut r = rng(3);
    let mut violations = Vec::new();
    for run in 0..1000 {
        let n = r.random_range(2..40);
        let adj = random_adjacency(n, r.random_range(0.02..0.4), &mut r);
        let pool: Vec<usize> = (0..n).filter(|_| r.random_bool(0.5)).chain([0]).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let init = r.random_range(1..=pool.len());
        let ns = r.random_range(init..=n);
        let mut caps: Vec<usize> = (0..r.random_range(1..4)).map(|_| r.random_range(1..8)).collect();
        if r.random_bool(0.3) {
            caps.push(UNLIMITED);
        }
        let cfg = SamplerConfig::new(ns, init, caps.clone(), pool.clone());
        let seed = r.random::<u64>();
        let sel = select_nodes(&adj, &cfg, &mut rng(seed)).unwrap();
        let again = select_nodes(&adj, &cfg, &mut rng(seed)).unwrap();
        let nodes = sel.nodes();
        let mut bad = Vec::new();
        if sel != again {
            bad.push("non-deterministic");
        }
        if nodes.len() > ns {
            bad.push("size above N_s");
        }
        if sel.rounds[0].len() != init || !sel.rounds[0].iter().all(|v| pool.contains(v) && nodes.contains(v)) {
            bad.push("initial set");
        }
        for (round, added) in sel.rounds.iter().enumerate().skip(1) {
            let cap = caps[(round - 1).min(caps.len() - 1)];
            if added.len() > cap {
                bad.push("cap exceeded");
            }
            if !added.iter().all(|&v| sel.rounds[round - 1].iter().any(|&u| adj.contains(u, v))) {
                bad.push("not reachable from previous round");
            }
        }
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            bad.push("duplicate node");
        }
        if !bad.is_empty() {
            violations.push(format!("run {run}: {}", bad.join(", ")));
        }
    }
    let adj = random_adjacency(60, 0.3, &mut rng(0));
    let fig = SamplerConfig::new(15, 3, vec![5, 7], (0..60).collect());
    let sel = select_nodes(&adj, &fig, &mut rng(0)).unwrap();
    let sizes: Vec<usize> = sel.rounds.iter().map(Vec::len).collect();
    report(
        3,
        "sampler invariants",
        violations.is_empty() && sizes == [3, 5, 7],
        format!(
            "{} of 1000 runs violate an invariant{}; scenario rounds {sizes:?} total {}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default(),
            sel.len()
        ),
    )
}

fn not_evaluated(id: usize, name: &str, reason: &str) -> Outcome {
    let out = report(id, name, false, format!("not evaluated: {reason}"));
    Outcome { evaluated: false, ..out }
}

fn data_file(name: &str) -> Result<PathBuf, String> {
    let dir = std::env::var_os("LGCN_DATA_DIR").ok_or("LGCN_DATA_DIR is not set")?;
    let path = Path::new(&dir).join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(format!("{} not found", path.display()))
    }
}

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

fn mean_test_accuracy(g: &Graph, model_cfg: &ModelConfig, batching: &Batching) -> f64 {
    let test = g.masks().mask(Split::Test);
    let total: f64 = SEEDS
        .iter()
        .map(|&seed| {
            let mut model = Model::build(model_cfg.clone(), g.num_features(), &mut rng(seed)).unwrap();
            let cfg = TrainConfig {
                seed,
                batching: batching.clone(),
                ..TrainConfig::default()
            };
            fit(g, &mut model, &cfg).unwrap();
            evaluate(&model, g, &test).unwrap()
        })
        .sum();
    total / SEEDS.len() as f64
}

struct Citation {
    cora: Graph,
    lgcn_sub: f64,
}

fn citation_reproduction() -> (Outcome, Option<Citation>) {
    let name = "citation accuracy";
    let cora = match data_file("cora.graph") {
        Ok(p) => load_graph(p).unwrap(),
        Err(e) => return (not_evaluated(4, name, &e), None),
    };
    let citeseer = match data_file("citeseer.graph") {
        Ok(p) => load_graph(p).unwrap(),
        Err(e) => return (not_evaluated(4, name, &e), None),
    };
    let sub = Batching::from_training_nodes(&cora, 2000);
    let lgcn_sub = mean_test_accuracy(&cora, &ModelConfig::cora(), &sub);
    let gcn_cfg = ModelConfig {
        layer_kind: LayerKind::Gcn,
        ..ModelConfig::cora()
    };
    let gcn = mean_test_accuracy(&cora, &gcn_cfg, &sub);
    let cs = mean_test_accuracy(&citeseer, &ModelConfig::citeseer(), &Batching::from_training_nodes(&citeseer, 2000));
    let out = report(
        4,
        name,
        lgcn_sub >= 0.81 && gcn >= 0.79 && cs >= 0.70,
        format!("Cora LGCN {lgcn_sub:.4} (>= 0.81), Cora GCN swap {gcn:.4} (>= 0.79), Citeseer LGCN {cs:.4} (>= 0.70)"),
    );
    (out, Some(Citation { cora, lgcn_sub }))
}

fn subgraph_parity(c: Option<&Citation>) -> Outcome {
    let name = "sub-graph parity";
    let Some(c) = c else {
        return not_evaluated(5, name, "citation data unavailable");
    };
    let whole = mean_test_accuracy(&c.cora, &ModelConfig::cora(), &Batching::WholeGraph);
    let timed = |batching: Batching| {
        let mut model = Model::build(ModelConfig::cora(), c.cora.num_features(), &mut rng(0)).unwrap();
        let cfg = TrainConfig {
            batching,
            ..TrainConfig::default()
        };
        time_training(&c.cora, &mut model, &cfg, 5, 100).unwrap().as_secs_f64()
    };
    let t_sub = timed(Batching::from_training_nodes(&c.cora, 2000));
    let t_whole = timed(Batching::WholeGraph);
    let gap = (c.lgcn_sub - whole).abs();
    report(
        5,
        name,
        gap <= 0.015 && t_sub < t_whole,
        format!(
            "sub-graph {:.4} vs whole {whole:.4}, gap {gap:.4} (<= 0.015); {t_sub:.2} s vs {t_whole:.2} s per 100 epochs",
            c.lgcn_sub
        ),
    )
}

fn k_sensitivity(c: Option<&Citation>) -> Outcome {
    let name = "k sensitivity";
    let Some(c) = c else {
        return not_evaluated(6, name, "citation data unavailable");
    };
    let sub = Batching::from_training_nodes(&c.cora, 2000);
    let at = |k: usize| {
        mean_test_accuracy(
            &c.cora,
            &ModelConfig {
                k,
                ..ModelConfig::cora()
            },
            &sub,
        )
    };
    let (k2, k32) = (at(2), at(32));
    let k8 = c.lgcn_sub;
    report(
        6,
        name,
        k8 >= k2 && k8 >= k32,
        format!("k=2 {k2:.4}, k=8 {k8:.4}, k=32 {k32:.4} (k=8 highest)"),
    )
}

fn multi_label_substitute() -> Outcome {
    // (a) pooled micro-F1 against an explicit count
    let mut r = rng(7);
    let mut f1_mismatch = 0;
    for _ in 0..1000 {
        let (n, l) = (r.random_range(1..15), r.random_range(1..10));
        let z = Tensor::new(&[n, l], (0..n * l).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
        let bits: Vec<u8> = (0..n * l).map(|_| u8::from(r.random_bool(0.3))).collect();
        let mask: Vec<bool> = (0..n).map(|i| i == 0 || r.random_bool(0.6)).collect();
        let (mut tp, mut fp, mut fn_) = (0u32, 0u32, 0u32);
        for i in (0..n).filter(|&i| mask[i]) {
            for j in 0..l {
                let p = 1.0 / (1.0 + (-z.at(i, j)).exp()) >= 0.5;
                let t = bits[i * l + j] == 1;
                tp += u32::from(p && t);
                fp += u32::from(p && !t);
                fn_ += u32::from(!p && t);
            }
        }
        let expect = if tp == 0 { 0.0 } else { f64::from(2 * tp) / f64::from(2 * tp + fp + fn_) };
        f1_mismatch += usize::from((micro_f1(&z, &bits, &mask, 0.5).unwrap() - expect).abs() > 1e-12);
    }

    // (b) full-size shapes with a sampled gradient check
    let mut r = rng(8);
    let ppi = MultiLabelPartition {
        communities: 4,
        nodes_per_community: 50,
        num_labels: 121,
        label_density: 0.3,
        p_in: 0.1,
        p_out: 0.01,
        feature_dim: 50,
        signal_strength: 1.0,
    }
    .generate(&mut r)
    .unwrap();
    let masks = random_splits(200, 100, 50, 50, &mut r).unwrap();
    let ppi = ppi.with_masks(masks).unwrap();
    let cfg = ModelConfig {
        feature_dropout: 0.0,
        adjacency_dropout: 0.0,
        ..ModelConfig::ppi()
    };
    let model = Model::build(cfg, 50, &mut r).unwrap();
    let shape_ok = model.predict(&ppi).map(|z| z.shape() == [200, 121]).unwrap_or(false);
    let check = GradCheck {
        max_entries_per_param: Some(3),
        ..GradCheck::default()
    };
    let grad = check_model(&model, &ppi, 0.0005, check).unwrap();

    // (c) held-out micro-F1 after training on a small multi-label partition
    let mut r = rng(9);
    let g = MultiLabelPartition {
        communities: 4,
        nodes_per_community: 50,
        num_labels: 20,
        label_density: 0.3,
        p_in: 0.15,
        p_out: 0.01,
        feature_dim: 16,
        signal_strength: 2.0,
    }
    .generate(&mut r)
    .unwrap();
    let g = g.with_masks(random_splits(200, 80, 40, 80, &mut r).unwrap()).unwrap();
    let small = ModelConfig {
        embed_dim: 16,
        k: 4,
        layer_out_dim: 8,
        feature_dropout: 0.1,
        num_classes: 20,
        multi_label: true,
        ..ModelConfig::ppi()
    };
    let mut model = Model::build(small, 16, &mut r).unwrap();
    let train = TrainConfig {
        learning_rate: 0.01,
        max_epochs: 300,
        ..TrainConfig::default()
    };
    fit(&g, &mut model, &train).unwrap();
    let f1 = evaluate(&model, &g, &g.masks().mask(Split::Test)).unwrap();

    report(
        7,
        "multi-label substitute",
        f1_mismatch == 0 && shape_ok && grad.max_rel_error <= 1e-4 && f1 >= 0.90,
        format!(
            "(a) {f1_mismatch}/1000 F1 mismatches; (b) shapes {}, max rel error {:.2e} over {} entries (<= 1e-4); (c) held-out micro-F1 {f1:.4} (>= 0.90)",
            if shape_ok { "ok" } else { "wrong" },
            grad.max_rel_error,
            grad.entries_checked
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(10);
    let g = lgcn::data::gen_planted_partition(3, 40, 0.15, 0.02, 12, 1.0, &mut r).unwrap();
    let masks = lgcn::data::make_splits(&g, 10, 30, 50, &mut r).unwrap();
    let data = dir.path().join("d.graph");
    save_graph(&g.with_masks(masks).unwrap(), &data).unwrap();
    let run = || {
        let argv = [
            "lgcn", "train", "--dataset", data.to_str().unwrap(), "--out", dir.path().to_str().unwrap(),
            "--seed", "42", "--epochs", "40", "--subgraph", "60", "--k", "4", "--embed", "8",
        ];
        let m = command().try_get_matches_from(argv).unwrap();
        let mut buf = Vec::new();
        execute(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let run_dir = text.lines().find_map(|l| l.strip_prefix("run_dir ")).unwrap().to_owned();
        std::fs::read(Path::new(&run_dir).join("history.txt")).unwrap()
    };
    let (a, b) = (run(), run());
    report(
        8,
        "determinism",
        a == b && !a.is_empty(),
        format!("histories of {} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    )
}

#[test]
fn acceptance() {
    let mut outcomes = vec![gradient_correctness(), selection_oracle(), sampler_invariants()];
    let (c4, citation) = citation_reproduction();
    outcomes.push(c4);
    outcomes.push(subgraph_parity(citation.as_ref()));
    outcomes.push(k_sensitivity(citation.as_ref()));
    outcomes.push(multi_label_substitute());
    outcomes.push(cli_determinism());
    let failed: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.evaluated && !o.pass)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
