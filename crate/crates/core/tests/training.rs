mod common;

use common::random_tensor;
use lgcn::cli::random_check_graph;
use lgcn::data::{gen_planted_partition, make_splits, MultiLabelPartition};
use lgcn::gradcheck::{check_model, finite_diff_check, GradCheck};
use lgcn::metrics::{accuracy, argmax, evaluate, micro_f1, multilabel_confusion};
use lgcn::optim::{glorot_bound, glorot_init, l2_penalty, l2_value, AdamState};
use lgcn::train::{train_step, training_loss};
use lgcn::{
    fit, rng, Batching, Error, Graph, Labels, Model, ModelConfig, ParamStore, Split, Tape, TrainConfig, Tensor,
};
use proptest::prelude::*;
use rand::Rng;

fn planted(seed: u64, signal: f64) -> Graph {
    let mut r = rng(seed);
    let g = gen_planted_partition(3, 30, 0.2, 0.02, 16, signal, &mut r).unwrap();
    let masks = make_splits(&g, 10, 20, 30, &mut r).unwrap();
    g.with_masks(masks).unwrap()
}

fn small_config(classes: usize) -> ModelConfig {
    ModelConfig {
        embed_dim: 8,
        layer_out_dim: 4,
        k: 4,
        ..ModelConfig::citation(2, classes)
    }
}

#[test]
fn glorot_bound_range_mean_and_variance() {
    assert_eq!(glorot_bound(3, 3), 1.0);
    let t = glorot_init(&[100_000], 3, 3, &mut rng(1));
    assert!(t.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    let n = t.len() as f64;
    let mean = t.sum() / n;
    let var = t.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.01, "mean {mean}");
    assert!((var - 1.0 / 3.0).abs() < 0.01, "variance {var}");
    let b = glorot_bound(1433, 32);
    assert!((b - (6.0f64 / 1465.0).sqrt()).abs() < 1e-15);
}

#[test]
fn adam_hand_evaluated_first_step() {
    let mut store = ParamStore::new();
    let id = store.add("theta", Tensor::scalar(2.0), true);
    let mut adam = AdamState::new(&store);
    store.get_mut(id).grad = Tensor::scalar(1.0);
    adam.step(&mut store, 0.1).unwrap();
    // m̂ = 1, v̂ = 1, so Δθ = −0.1 / (1 + 1e-8)
    assert!((store.value(id).data()[0] - (2.0 - 0.1 / (1.0 + 1e-8))).abs() < 1e-15);
    assert_eq!(adam.step_count(), 1);
}

#[test]
fn adam_zero_gradient_and_constant_gradient() {
    let mut store = ParamStore::new();
    let id = store.add("w", Tensor::new(&[2], vec![0.5, -0.5]).unwrap(), true);
    let mut adam = AdamState::new(&store);
    adam.step(&mut store, 0.1).unwrap();
    assert_eq!(store.value(id).data(), &[0.5, -0.5]);

    let mut adam = AdamState::new(&store);
    let mut prev = store.value(id).data().to_vec();
    for _ in 0..200 {
        store.get_mut(id).grad = Tensor::new(&[2], vec![0.3, -2.0]).unwrap();
        adam.step(&mut store, 0.01).unwrap();
        let now = store.value(id).data().to_vec();
        let d0 = prev[0] - now[0];
        let d1 = now[1] - prev[1];
        assert!(d0 > 0.0 && d1 > 0.0);
        assert!((d0 - 0.01).abs() < 1e-6 && (d1 - 0.01).abs() < 1e-6);
        prev = now;
    }
}

#[test]
fn l2_values_and_gradient() {
    let mut store = ParamStore::new();
    let w = store.add("w", Tensor::new(&[1], vec![3.0]).unwrap(), true);
    store.add("b", Tensor::new(&[1], vec![7.0]).unwrap(), false);
    assert_eq!(l2_value(&store, 0.5), 4.5);
    assert_eq!(l2_value(&store, 0.0), 0.0);
    let mut tape = Tape::new();
    assert!(l2_penalty(&mut tape, &store, 0.0).unwrap().is_none());
    let p = l2_penalty(&mut tape, &store, 0.5).unwrap().unwrap();
    assert_eq!(tape.scalar(p), 4.5);
    tape.backward(p, &mut store).unwrap();
    assert_eq!(store.grad(w).data(), &[3.0]);

    let mut store = ParamStore::new();
    let id = store.add("w", random_tensor(&[3, 4], &mut rng(2)), true);
    let report = finite_diff_check(&mut store, GradCheck::default(), |s, tape| {
        Ok(l2_penalty(tape, s, 0.0005)?.unwrap())
    })
    .unwrap();
    assert!(report.max_rel_error < 1e-6, "{report:?}");
    let expect: Vec<f64> = store.value(id).data().iter().map(|v| 2.0 * 0.0005 * v).collect();
    for (g, e) in store.grad(id).data().iter().zip(expect) {
        assert!((g - e).abs() < 1e-18);
    }
}

#[test]
fn zero_learning_rate_step_leaves_parameters_bit_identical() {
    let g = planted(3, 1.0);
    let mut model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
    let before = model.params().snapshot();
    let cfg = TrainConfig {
        learning_rate: 0.0,
        ..TrainConfig::default()
    };
    let mut adam = AdamState::new(model.params());
    for _ in 0..3 {
        train_step(&mut model, &g, &cfg, &mut adam, &mut rng(1)).unwrap();
    }
    for (a, b) in before.iter().zip(model.params().snapshot()) {
        let bits_a: Vec<u64> = a.data().iter().map(|v| v.to_bits()).collect();
        let bits_b: Vec<u64> = b.data().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits_a, bits_b);
    }
}

#[test]
fn regularised_loss_strictly_exceeds_data_loss() {
    let g = planted(4, 1.0);
    let model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
    let loss = |lambda: f64| {
        let mut tape = Tape::new();
        let l = training_loss(&mut tape, &model, &g, lambda, false, &mut rng(0)).unwrap();
        tape.scalar(l)
    };
    assert!(loss(0.0005) > loss(0.0));
    assert!((loss(0.0005) - loss(0.0) - l2_value(model.params(), 0.0005)).abs() < 1e-12);
}

#[test]
fn full_model_gradient_on_ten_node_graph() {
    for (seed, k) in [(1, 2), (2, 4), (3, 4)] {
        let g = random_check_graph(10, 5, 3, 0.3, seed).unwrap();
        let cfg = ModelConfig {
            embed_dim: 4,
            layer_out_dim: 3,
            k,
            feature_dropout: 0.0,
            adjacency_dropout: 0.0,
            ..ModelConfig::citation(2, 3)
        };
        let model = Model::build(cfg, 5, &mut rng(seed)).unwrap();
        let report = check_model(&model, &g, 0.0005, GradCheck::default()).unwrap();
        assert!(report.max_rel_error <= 1e-4, "{report:?}");
    }
}

#[test]
fn linear_embedding_and_gcn_stack_gradients() {
    let g = random_check_graph(12, 4, 2, 0.3, 7).unwrap();
    for (emb, kind) in [
        (lgcn::EmbeddingKind::Linear, lgcn::LayerKind::Lgcl),
        (lgcn::EmbeddingKind::Gcn, lgcn::LayerKind::Gcn),
    ] {
        let cfg = ModelConfig {
            embed_dim: 3,
            layer_out_dim: 2,
            k: 2,
            embedding_kind: emb,
            layer_kind: kind,
            feature_dropout: 0.0,
            adjacency_dropout: 0.0,
            ..ModelConfig::citation(2, 2)
        };
        let model = Model::build(cfg, 4, &mut rng(0)).unwrap();
        let report = check_model(&model, &g, 0.0005, GradCheck::default()).unwrap();
        assert!(report.max_rel_error <= 1e-4, "{report:?}");
    }
}

#[test]
fn evaluation_is_pure() {
    let g = planted(5, 1.0);
    let model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
    let before = model.params().snapshot();
    let a = model.predict(&g).unwrap();
    let b = model.predict(&g).unwrap();
    assert_eq!(a, b);
    assert_eq!(before, model.params().snapshot());
    let mut tape = Tape::new();
    let z = model.forward(&mut tape, &g, false, &mut rng(123)).unwrap();
    assert_eq!(tape.value(z), &a);
}

#[test]
fn separable_planted_partition_reaches_full_training_accuracy() {
    let g = planted(6, 3.0);
    let mut model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
    let cfg = TrainConfig::default();
    let mut adam = AdamState::new(model.params());
    let mut r = rng(0);
    let train = g.masks().mask(Split::Train);
    let Labels::Single { ids, .. } = g.labels() else { unreachable!() };
    let mut reached = None;
    for epoch in 1..=200 {
        train_step(&mut model, &g, &cfg, &mut adam, &mut r).unwrap();
        if accuracy(&model.predict(&g).unwrap(), ids, &train).unwrap() == 1.0 {
            reached = Some(epoch);
            break;
        }
    }
    assert!(reached.is_some(), "training accuracy never reached 1.0");
}

#[test]
fn patience_one_with_frozen_weights_stops_after_two_epochs() {
    let g = planted(7, 1.0);
    let mut model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.0,
        patience: 1,
        ..TrainConfig::default()
    };
    let out = fit(&g, &mut model, &cfg).unwrap();
    assert_eq!(out.history.len(), 2);
    assert!(out.stopped_early);
}

#[test]
fn fit_is_deterministic_and_restores_best_snapshot() {
    let g = planted(8, 1.0);
    let run = || {
        let mut model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
        let cfg = TrainConfig {
            max_epochs: 60,
            patience: 20,
            learning_rate: 0.01,
            seed: 5,
            ..TrainConfig::default()
        };
        let out = fit(&g, &mut model, &cfg).unwrap();
        (model, out)
    };
    let (m1, o1) = run();
    let (m2, o2) = run();
    let strip = |o: &lgcn::TrainOutcome| -> Vec<(usize, u64, u64)> {
        o.history.iter().map(|r| (r.epoch, r.train_loss.to_bits(), r.val_metric.to_bits())).collect()
    };
    assert_eq!(strip(&o1), strip(&o2));
    assert_eq!(m1.params().snapshot(), m2.params().snapshot());

    let mut best = f64::NEG_INFINITY;
    for r in &o1.history {
        let next = best.max(r.val_metric);
        assert!(next >= best);
        best = next;
    }
    assert_eq!(best, o1.best_val_metric);
    assert_eq!(o1.history[o1.best_epoch - 1].val_metric, o1.best_val_metric);
    let val = g.masks().mask(Split::Val);
    assert_eq!(evaluate(&m1, &g, &val).unwrap(), o1.best_val_metric);
}

#[test]
fn sub_graph_training_runs_and_learns() {
    let g = planted(9, 2.0);
    let mut model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
    let cfg = TrainConfig {
        batching: Batching::from_training_nodes(&g, 40),
        max_epochs: 100,
        learning_rate: 0.01,
        ..TrainConfig::default()
    };
    let out = fit(&g, &mut model, &cfg).unwrap();
    assert!(out.best_val_metric > 0.8, "{}", out.best_val_metric);
    let test = g.masks().mask(Split::Test);
    assert!(evaluate(&model, &g, &test).unwrap() > 0.8);
}

#[test]
fn fit_rejects_graphs_without_training_or_validation_nodes() {
    let g = planted(10, 1.0);
    let none = g.with_masks(lgcn::Masks::unassigned(g.num_nodes())).unwrap();
    let mut model = Model::build(small_config(3), 16, &mut rng(0)).unwrap();
    assert!(matches!(fit(&none, &mut model, &TrainConfig::default()), Err(Error::InvalidArgument(_))));
}

#[test]
fn ppi_shaped_forward_and_backward() {
    let mut r = rng(11);
    let g = MultiLabelPartition {
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
    let masks = lgcn::data::random_splits(200, 100, 50, 50, &mut r).unwrap();
    let g = g.with_masks(masks).unwrap();
    let mut model = Model::build(ModelConfig::ppi(), 50, &mut r).unwrap();
    assert_eq!(model.config().classifier_input_width(), 128 + 16);
    let z = model.predict(&g).unwrap();
    assert_eq!(z.shape(), &[200, 121]);
    let mut adam = AdamState::new(model.params());
    let loss = train_step(&mut model, &g, &TrainConfig::default(), &mut adam, &mut r).unwrap();
    assert!(loss.is_finite());
}

#[test]
fn cora_shapes() {
    let m = Model::build(ModelConfig::cora(), 1433, &mut rng(0)).unwrap();
    let w = m.params().find("embed.weight").unwrap();
    assert_eq!(m.params().value(w).shape(), &[1433, 32]);
    let c = m.params().find("classifier.weight").unwrap();
    assert_eq!(m.params().value(c).shape(), &[48, 7]);
    let k1 = m.params().find("layer0.conv1.kernel").unwrap();
    assert_eq!(m.params().value(k1).shape()[0], 5);
}

fn count_correct(z: &Tensor, labels: &[usize], mask: &[bool]) -> (usize, usize) {
    let mut hits = 0;
    let mut total = 0;
    for i in 0..z.rows() {
        if mask[i] {
            total += 1;
            let row = z.row(i);
            let best = (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b });
            hits += usize::from(best == labels[i]);
        }
    }
    (hits, total)
}

proptest! {
    #[test]
    fn accuracy_matches_counting_oracle(rows in 1usize..30, k in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let z = Tensor::new(&[rows, k], (0..rows * k).map(|_| f64::from(r.random_range(0..4u8))).collect()).unwrap();
        let labels: Vec<usize> = (0..rows).map(|_| r.random_range(0..k)).collect();
        let mut mask: Vec<bool> = (0..rows).map(|_| r.random_bool(0.7)).collect();
        mask[0] = true;
        let (hits, total) = count_correct(&z, &labels, &mask);
        prop_assert_eq!(accuracy(&z, &labels, &mask).unwrap(), hits as f64 / total as f64);
        prop_assert_eq!(argmax(z.row(0)), (0..k).fold(0, |b, j| if z.at(0, j) > z.at(0, b) { j } else { b }));
    }

    #[test]
    fn micro_f1_matches_pooled_counts(rows in 1usize..20, k in 1usize..8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let z = random_tensor(&[rows, k], &mut r);
        let bits: Vec<u8> = (0..rows * k).map(|_| u8::from(r.random_bool(0.4))).collect();
        let mut mask: Vec<bool> = (0..rows).map(|_| r.random_bool(0.7)).collect();
        mask[0] = true;
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for i in 0..rows {
            if !mask[i] {
                continue;
            }
            for j in 0..k {
                let pred = 1.0 / (1.0 + (-z.at(i, j)).exp()) >= 0.5;
                let truth = bits[i * k + j] == 1;
                tp += f64::from(u8::from(pred && truth));
                fp += f64::from(u8::from(pred && !truth));
                fn_ += f64::from(u8::from(!pred && truth));
            }
        }
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let rc = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if p + rc > 0.0 { 2.0 * p * rc / (p + rc) } else { 0.0 };
        prop_assert!((micro_f1(&z, &bits, &mask, 0.5).unwrap() - f1).abs() < 1e-12);
        let c = multilabel_confusion(&z, &bits, &mask, 0.5).unwrap();
        prop_assert_eq!(c.tp as f64, tp);
    }
}
