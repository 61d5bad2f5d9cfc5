//! Command-line interface behind the `lgcn` binary.
//!
//! Every option can also be given in a flat `key = value` file passed with
//! `--config`; keys are the long flag names without the leading dashes.
//! Flags given on the command line win over the file, and keys the
//! subcommand does not know are rejected.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::data::checkpoint::write_atomic;
use crate::data::{
    format_graph, gen_planted_partition, load_checkpoint_into, load_graph, make_splits, random_splits,
    save_checkpoint, MultiLabelPartition,
};
use crate::error::{Error, Result};
use crate::gradcheck::{check_model, GradCheck};
use crate::graph::{Adjacency, Graph, Labels, Masks, Split};
use crate::metrics::score;
use crate::model::{EmbeddingKind, LayerKind, Model, ModelConfig};
use crate::sampler::{select_subgraph, SamplerConfig, UNLIMITED};
use crate::tensor::Tensor;
use crate::train::{fit, time_training, Batching, TrainConfig};

const MODEL_KEYS: &[&str] = &[
    "k",
    "lgcl-layers",
    "embed",
    "layer-out",
    "conv-mid",
    "embedding",
    "layer-kind",
    "feature-dropout",
    "adj-dropout",
];

fn opt(name: &'static str, default: Option<&'static str>, help: &'static str) -> Arg {
    let arg = Arg::new(name).long(name).num_args(1).help(help);
    match default {
        Some(d) => arg.default_value(d),
        None => arg,
    }
}

fn flag(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).action(ArgAction::SetTrue).help(help)
}

fn common(cmd: Command) -> Command {
    cmd.arg(opt("config", None, "flat key=value file with option values"))
        .arg(opt("seed", Some("0"), "random seed"))
}

fn model_args(cmd: Command) -> Command {
    cmd.arg(opt("k", Some("8"), "neighbours selected per feature (even)"))
        .arg(opt("lgcl-layers", Some("2"), "number of stacked layers"))
        .arg(opt("embed", Some("32"), "embedding width"))
        .arg(opt("layer-out", Some("8"), "output channels of each stacked layer"))
        .arg(opt("conv-mid", Some("auto"), "channels between the two convolutions"))
        .arg(opt("embedding", Some("gcn"), "embedding layer: gcn or linear"))
        .arg(opt("layer-kind", Some("lgcl"), "stacked layer type: lgcl or gcn"))
        .arg(opt("feature-dropout", Some("0.16"), "dropout rate on layer inputs"))
        .arg(opt("adj-dropout", Some("0.999"), "edge dropout rate"))
}

fn optim_args(cmd: Command) -> Command {
    cmd.arg(opt("lr", Some("0.1"), "Adam learning rate"))
        .arg(opt("l2", Some("0.0005"), "L2 weight on weight matrices and kernels"))
        .arg(opt("subgraph", Some("0"), "sub-graph size N_s; 0 trains on the whole graph"))
        .arg(opt("ninit", Some("all"), "initial nodes per sub-graph, drawn from the training nodes"))
        .arg(opt("nm", Some("all"), "comma-separated per-round caps; `all` for no cap"))
        .arg(opt("batch-size", Some("1"), "sub-graphs per step"))
}

pub fn command() -> Command {
    let train = optim_args(model_args(common(Command::new("train").about("train a model and write a run directory"))))
        .arg(opt("dataset", None, "dataset file"))
        .arg(opt("epochs", Some("1000"), "maximum epochs"))
        .arg(opt("patience", Some("100"), "early-stopping patience"))
        .arg(opt("out", Some("."), "parent directory of the run directory"))
        .arg(flag("timing", "record wall-clock seconds per epoch in the history"));
    let eval = model_args(common(Command::new("eval").about("evaluate a checkpoint")))
        .arg(opt("dataset", None, "dataset file"))
        .arg(opt("checkpoint", None, "checkpoint file written by train"))
        .arg(opt("split", Some("test"), "train, val or test"));
    let sample = common(Command::new("sample").about("write a BFS-sampled sub-graph"))
        .arg(opt("dataset", None, "dataset file"))
        .arg(opt("ninit", Some("1"), "initial nodes"))
        .arg(opt("nm", Some("all"), "comma-separated per-round caps; `all` for no cap"))
        .arg(opt("ns", None, "maximum sub-graph size"))
        .arg(opt("pool", Some("all"), "initial-node pool: all or train"))
        .arg(opt("out", Some("sample.graph"), "output dataset file"));
    let bench = optim_args(model_args(common(
        Command::new("bench").about("time sub-graph against whole-graph training"),
    )))
    .arg(opt("dataset", None, "dataset file"))
    .arg(opt("epochs", Some("100"), "timed epochs"))
    .arg(opt("warmup", Some("5"), "untimed epochs before timing"))
    .mut_arg("subgraph", |a| a.default_value("2000"));
    let gradcheck = common(Command::new("gradcheck").about("finite-difference check of the full model on a random graph"))
        .arg(opt("nodes", Some("10"), "nodes in the random graph"))
        .arg(opt("k", Some("4"), "neighbours selected per feature"))
        .arg(opt("features", Some("5"), "input features"))
        .arg(opt("classes", Some("3"), "classes"))
        .arg(opt("lgcl-layers", Some("2"), "stacked layers"))
        .arg(opt("edge-prob", Some("0.3"), "edge probability"))
        .arg(opt("tol", Some("1e-4"), "maximum accepted relative error"));
    let gen = common(Command::new("gen").about("write a synthetic planted-partition dataset"))
        .arg(opt("classes", Some("3"), "classes (communities when multi-label)"))
        .arg(opt("nodes-per-class", Some("100"), "nodes per class"))
        .arg(opt("p-in", Some("0.05"), "intra-class edge probability"))
        .arg(opt("p-out", Some("0.005"), "inter-class edge probability"))
        .arg(opt("features", Some("16"), "feature width"))
        .arg(opt("signal", Some("1"), "signal strength"))
        .arg(opt("train-per-class", Some("20"), "training nodes per class"))
        .arg(opt("val", Some("100"), "validation nodes"))
        .arg(opt("test", Some("100"), "test nodes"))
        .arg(flag("multi-label", "generate multi-label targets"))
        .arg(opt("labels", Some("10"), "label count when multi-label"))
        .arg(opt("label-density", Some("0.3"), "probability a community carries each label"))
        .arg(opt("out", None, "output dataset file"));
    Command::new("lgcn")
        .about("Node classification with learnable graph convolutional layers")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommands([train, eval, sample, bench, gradcheck, gen])
}

/// Resolved option values for one subcommand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Merges defaults, the `--config` file and command-line flags, in
    /// increasing precedence.
    pub fn resolve(cmd: &Command, matches: &ArgMatches) -> Result<Self> {
        let known: Vec<&str> = cmd
            .get_arguments()
            .map(|a| a.get_id().as_str())
            .filter(|&id| id != "config" && id != "help")
            .collect();
        let file = match matches.get_one::<String>("config") {
            Some(path) => parse_config(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?, &known)?,
            None => BTreeMap::new(),
        };
        let mut values = BTreeMap::new();
        for &id in &known {
            let from_cli = matches.value_source(id) == Some(ValueSource::CommandLine);
            let is_flag = matches!(
                cmd.get_arguments().find(|a| a.get_id() == id).map(Arg::get_action),
                Some(ArgAction::SetTrue)
            );
            let value = if from_cli {
                Some(cli_value(matches, id, is_flag))
            } else if let Some(v) = file.get(id) {
                Some(v.clone())
            } else if matches.contains_id(id) {
                Some(cli_value(matches, id, is_flag))
            } else {
                None
            };
            if let Some(v) = value {
                values.insert(id.to_string(), v);
            }
        }
        Ok(Self { values })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get_str(key)
            .ok_or_else(|| Error::Config(format!("--{key} is required")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.trim()
            .parse()
            .map_err(|_| Error::Config(format!("--{key}: invalid value `{raw}`")))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.get(key)
    }

    /// `key=value` lines in key order.
    pub fn to_text(&self) -> String {
        self.values.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k}={v}");
            s
        })
    }
}

fn cli_value(matches: &ArgMatches, id: &str, is_flag: bool) -> String {
    if is_flag {
        matches.get_flag(id).to_string()
    } else {
        matches.get_one::<String>(id).cloned().unwrap_or_default()
    }
}

/// Parses a flat config file; `#` starts a comment.
pub fn parse_config(text: &str, known: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        if !known.contains(&key) {
            return Err(Error::Config(format!("config line {}: unknown key `{key}`", i + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit status. Output goes to stdout, errors to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    match execute(&matches, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Dispatches parsed arguments; returns the exit status for checks that
/// complete but fail (gradcheck above tolerance).
pub fn execute(matches: &ArgMatches, out: &mut dyn Write) -> Result<i32> {
    let (name, sub) = matches.subcommand().ok_or_else(|| Error::Config("missing subcommand".into()))?;
    let root = command();
    let cmd = root
        .find_subcommand(name)
        .ok_or_else(|| Error::Config(format!("unknown subcommand `{name}`")))?;
    let s = Settings::resolve(cmd, sub)?;
    match name {
        "train" => cmd_train(&s, out).map(|_| 0),
        "eval" => cmd_eval(&s, out).map(|_| 0),
        "sample" => cmd_sample(&s, out).map(|_| 0),
        "bench" => cmd_bench(&s, out).map(|_| 0),
        "gradcheck" => cmd_gradcheck(&s, out),
        "gen" => cmd_gen(&s, out).map(|_| 0),
        other => Err(Error::Config(format!("unknown subcommand `{other}`"))),
    }
}

fn emit(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

/// Model configuration for `g` from the model keys of `s`.
pub fn model_config(s: &Settings, g: &Graph) -> Result<ModelConfig> {
    let (num_classes, multi_label) = match g.labels() {
        Labels::Single { num_classes, .. } => (*num_classes, false),
        Labels::Multi { num_labels, .. } => (*num_labels, true),
    };
    let mut cfg = ModelConfig::citation(s.get("lgcl-layers")?, num_classes);
    cfg.multi_label = multi_label;
    cfg.k = s.get("k")?;
    cfg.embed_dim = s.get("embed")?;
    cfg.layer_out_dim = s.get("layer-out")?;
    cfg.conv_mid_dim = match s.require("conv-mid")? {
        "auto" => None,
        _ => Some(s.get("conv-mid")?),
    };
    cfg.embedding_kind = match s.require("embedding")? {
        "gcn" => EmbeddingKind::Gcn,
        "linear" => EmbeddingKind::Linear,
        other => return Err(Error::Config(format!("--embedding: expected gcn or linear, got `{other}`"))),
    };
    cfg.layer_kind = match s.require("layer-kind")? {
        "lgcl" => LayerKind::Lgcl,
        "gcn" => LayerKind::Gcn,
        other => return Err(Error::Config(format!("--layer-kind: expected lgcl or gcn, got `{other}`"))),
    };
    cfg.feature_dropout = s.get("feature-dropout")?;
    cfg.adjacency_dropout = s.get("adj-dropout")?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `all` or a comma-separated list of caps.
pub fn parse_caps(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|t| match t.trim() {
            "all" | "inf" => Ok(UNLIMITED),
            t => t
                .parse()
                .map_err(|_| Error::Config(format!("--nm: invalid cap `{t}`"))),
        })
        .collect()
}

fn train_config(s: &Settings, g: &Graph, max_epochs: usize, patience: usize) -> Result<TrainConfig> {
    let sub_graph_size: usize = s.get("subgraph")?;
    let batching = if sub_graph_size == 0 {
        Batching::WholeGraph
    } else {
        let pool = g.masks().ids(Split::Train);
        let init = match s.require("ninit")? {
            "all" => pool.len().min(sub_graph_size),
            _ => s.get("ninit")?,
        };
        Batching::SubGraphs {
            sampler: SamplerConfig::new(sub_graph_size, init, parse_caps(s.require("nm")?)?, pool),
            batch_size: s.get("batch-size")?,
        }
    };
    let cfg = TrainConfig {
        learning_rate: s.get("lr")?,
        l2_lambda: s.get("l2")?,
        max_epochs,
        patience,
        batching,
        seed: s.get("seed")?,
        ..TrainConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Seeds model initialisation on a stream separate from training.
fn init_rng(seed: u64) -> crate::Rng {
    let mut r = crate::rng(seed);
    r.set_stream(1);
    r
}

fn cmd_train(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let g = load_graph(s.require("dataset")?)?;
    let model_cfg = model_config(s, &g)?;
    let train_cfg = train_config(s, &g, s.get("epochs")?, s.get("patience")?)?;
    let timing = s.flag("timing")?;
    let seed: u64 = s.get("seed")?;
    let mut model = Model::build(model_cfg, g.num_features(), &mut init_rng(seed))?;
    let outcome = fit(&g, &mut model, &train_cfg)?;

    let mut history = String::new();
    for r in &outcome.history {
        let seconds = if timing { r.seconds } else { 0.0 };
        let _ = writeln!(history, "{} {} {} {}", r.epoch, r.train_loss, r.val_metric, seconds);
    }
    let test_mask = g.masks().mask(Split::Test);
    let test_metric = if test_mask.contains(&true) {
        score(&model.predict(&g)?, g.labels(), &test_mask)?
    } else {
        f64::NAN
    };

    let parent = PathBuf::from(s.require("out")?);
    let run_dir = fresh_run_dir(&parent, seed)?;
    let staging = parent.join(format!(
        ".{}.partial",
        run_dir.file_name().and_then(|n| n.to_str()).unwrap_or("run")
    ));
    let written = (|| -> Result<()> {
        std::fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        write_atomic(&staging.join("history.txt"), &history)?;
        write_atomic(&staging.join("config.txt"), &s.to_text())?;
        save_checkpoint(model.params(), staging.join("checkpoint.ckpt"))?;
        write_atomic(&staging.join("summary.txt"), &format!("test_metric {test_metric}\n"))?;
        std::fs::rename(&staging, &run_dir).map_err(|e| Error::io(&run_dir, e))
    })();
    if let Err(e) = written {
        let _ = std::fs::remove_dir_all(&staging);
        return Err(e);
    }
    emit(out, format!("run_dir {}", run_dir.display()))?;
    emit(out, format!("epochs {}", outcome.history.len()))?;
    emit(out, format!("best_epoch {}", outcome.best_epoch))?;
    emit(out, format!("best_val_metric {}", outcome.best_val_metric))?;
    emit(out, format!("test_metric {test_metric}"))
}

/// `run-<seed>-<unix seconds>`, suffixed when that name is taken.
fn fresh_run_dir(parent: &Path, seed: u64) -> Result<PathBuf> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let base = format!("run-{seed}-{stamp}");
    let mut dir = parent.join(&base);
    let mut n = 1;
    while dir.exists() {
        n += 1;
        dir = parent.join(format!("{base}-{n}"));
    }
    Ok(dir)
}

fn cmd_eval(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let g = load_graph(s.require("dataset")?)?;
    let ckpt = PathBuf::from(s.require("checkpoint")?);
    let s = with_run_config(s, &ckpt)?;
    let mut model = Model::build(model_config(&s, &g)?, g.num_features(), &mut init_rng(0))?;
    load_checkpoint_into(model.params_mut(), &ckpt)?;
    let split = match s.require("split")? {
        "train" => Split::Train,
        "val" => Split::Val,
        "test" => Split::Test,
        other => return Err(Error::Config(format!("--split: expected train, val or test, got `{other}`"))),
    };
    let metric = score(&model.predict(&g)?, g.labels(), &g.masks().mask(split))?;
    let name = match split {
        Split::Train => "train",
        Split::Val => "val",
        _ => "test",
    };
    emit(out, format!("{name}_metric {metric}"))
}

/// Fills model keys not given explicitly from the `config.txt` written
/// next to a checkpoint by `train`.
fn with_run_config(s: &Settings, ckpt: &Path) -> Result<Settings> {
    let path = ckpt.with_file_name("config.txt");
    let Ok(text) = std::fs::read_to_string(&path) else {
        return Ok(s.clone());
    };
    let mut merged = s.clone();
    let defaults = command()
        .find_subcommand("eval")
        .map(|c| Settings::resolve(c, &c.clone().get_matches_from(["eval"])))
        .transpose()?
        .unwrap_or_default();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            if MODEL_KEYS.contains(&k) && s.get_str(k) == defaults.get_str(k) {
                merged.values.insert(k.to_string(), v.to_string());
            }
        }
    }
    Ok(merged)
}

fn cmd_sample(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let g = load_graph(s.require("dataset")?)?;
    let pool = match s.require("pool")? {
        "all" => (0..g.num_nodes()).collect(),
        "train" => g.masks().ids(Split::Train),
        other => return Err(Error::Config(format!("--pool: expected all or train, got `{other}`"))),
    };
    let cfg = SamplerConfig::new(s.get("ns")?, s.get("ninit")?, parse_caps(s.require("nm")?)?, pool);
    let sub = select_subgraph(&g, &cfg, &mut crate::rng(s.get("seed")?))?;
    let path = PathBuf::from(s.require("out")?);
    write_atomic(&path, &format_graph(sub.graph()))?;
    emit(out, format!("nodes {}", sub.len()))?;
    emit(out, format!("edges {}", sub.graph().adjacency().num_edges()))?;
    emit(out, format!("wrote {}", path.display()))
}

fn cmd_bench(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let g = load_graph(s.require("dataset")?)?;
    let epochs: usize = s.get("epochs")?;
    let warmup: usize = s.get("warmup")?;
    let model = Model::build(model_config(s, &g)?, g.num_features(), &mut init_rng(s.get("seed")?))?;
    let sub_cfg = train_config(s, &g, epochs, 1)?;
    if sub_cfg.batching == Batching::WholeGraph {
        return Err(Error::Config("--subgraph must be positive for bench".into()));
    }
    let whole_cfg = TrainConfig {
        batching: Batching::WholeGraph,
        ..sub_cfg.clone()
    };
    let per_100 = |d: std::time::Duration| d.as_secs_f64() * 100.0 / epochs.max(1) as f64;
    let sub = time_training(&g, &mut model.clone(), &sub_cfg, warmup, epochs)?;
    let whole = time_training(&g, &mut model.clone(), &whole_cfg, warmup, epochs)?;
    emit(out, format!("subgraph_seconds_per_100_epochs {}", per_100(sub)))?;
    emit(out, format!("whole_graph_seconds_per_100_epochs {}", per_100(whole)))
}

/// Random graph with uniform features, random labels and every node in the
/// training mask.
pub fn random_check_graph(nodes: usize, features: usize, classes: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    use rand::Rng as _;
    let mut rng = crate::rng(seed);
    let mut edges = Vec::new();
    for u in 0..nodes {
        for v in u + 1..nodes {
            if rng.random_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    let x: Vec<f64> = (0..nodes * features).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ids = (0..nodes).map(|_| rng.random_range(0..classes)).collect();
    Graph::new(
        Adjacency::from_edges(nodes, &edges)?,
        Tensor::new(&[nodes, features], x)?,
        Labels::Single { num_classes: classes, ids },
        Masks::new(vec![Split::Train; nodes]),
    )
}

fn cmd_gradcheck(s: &Settings, out: &mut dyn Write) -> Result<i32> {
    let seed: u64 = s.get("seed")?;
    let edge_prob: f64 = s.get("edge-prob")?;
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Config("--edge-prob must lie in [0, 1]".into()));
    }
    let g = random_check_graph(s.get("nodes")?, s.get("features")?, s.get("classes")?, edge_prob, seed)?;
    let cfg = ModelConfig {
        embed_dim: 4,
        layer_out_dim: 3,
        k: s.get("k")?,
        num_layers: s.get("lgcl-layers")?,
        feature_dropout: 0.0,
        adjacency_dropout: 0.0,
        ..ModelConfig::citation(1, s.get("classes")?)
    };
    let model = Model::build(cfg, g.num_features(), &mut init_rng(seed))?;
    let report = check_model(&model, &g, TrainConfig::default().l2_lambda, GradCheck::default())?;
    let tol: f64 = s.get("tol")?;
    emit(out, format!("entries_checked {}", report.entries_checked))?;
    emit(out, format!("max_rel_error {:e}", report.max_rel_error))?;
    if report.max_rel_error <= tol {
        Ok(0)
    } else {
        if let Some((name, idx)) = &report.worst {
            emit(out, format!("worst {name}[{idx}]"))?;
        }
        Ok(1)
    }
}

fn cmd_gen(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let mut rng = crate::rng(s.get("seed")?);
    let classes: usize = s.get("classes")?;
    let per_class: usize = s.get("nodes-per-class")?;
    let (p_in, p_out): (f64, f64) = (s.get("p-in")?, s.get("p-out")?);
    let (features, signal): (usize, f64) = (s.get("features")?, s.get("signal")?);
    let (train, val, test): (usize, usize, usize) = (s.get("train-per-class")?, s.get("val")?, s.get("test")?);
    let path = PathBuf::from(s.require("out")?);
    let g = if s.flag("multi-label")? {
        let g = MultiLabelPartition {
            communities: classes,
            nodes_per_community: per_class,
            num_labels: s.get("labels")?,
            label_density: s.get("label-density")?,
            p_in,
            p_out,
            feature_dim: features,
            signal_strength: signal,
        }
        .generate(&mut rng)?;
        let masks = random_splits(g.num_nodes(), train * classes, val, test, &mut rng)?;
        g.with_masks(masks)?
    } else {
        let g = gen_planted_partition(classes, per_class, p_in, p_out, features, signal, &mut rng)?;
        let masks = make_splits(&g, train, val, test, &mut rng)?;
        g.with_masks(masks)?
    };
    write_atomic(&path, &format_graph(&g))?;
    emit(out, format!("nodes {}", g.num_nodes()))?;
    emit(out, format!("edges {}", g.adjacency().num_edges()))?;
    emit(out, format!("wrote {}", path.display()))
}
