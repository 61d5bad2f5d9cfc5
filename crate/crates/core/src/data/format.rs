//! Plain-text dataset format.
//!
//! ```text
//! GRAPHv1 N C K ML
//! dense v1 ... vC            (or: sparse i1:v1 i2:v2 ...)   × N
//! EDGES E
//! u v                                                      × E
//! class-id                   (or: id;id;... when ML = 1)   × N
//! train|val|test|none                                      × N
//! ```
//!
//! Writing is canonical: nodes in id order, each undirected edge once as
//! `(min, max)` in lexicographic order, rows stored sparse when at most
//! half their entries are non-zero, and reals in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Graph, Labels, Masks, Split};
use crate::tensor::Tensor;

const MAGIC: &str = "GRAPHv1";

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text)
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_graph(g)).map_err(|e| Error::io(path, e))
}

pub fn format_graph(g: &Graph) -> String {
    let (n, c) = (g.num_nodes(), g.num_features());
    let (k, ml) = match g.labels() {
        Labels::Single { num_classes, .. } => (*num_classes, 0),
        Labels::Multi { num_labels, .. } => (*num_labels, 1),
    };
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {n} {c} {k} {ml}");
    for i in 0..n {
        let row = g.features().row(i);
        let nnz = row.iter().filter(|&&v| v != 0.0).count();
        if 2 * nnz <= c {
            out.push_str("sparse");
            for (j, v) in row.iter().enumerate().filter(|(_, &v)| v != 0.0) {
                let _ = write!(out, " {j}:{v}");
            }
        } else {
            out.push_str("dense");
            for v in row {
                let _ = write!(out, " {v}");
            }
        }
        out.push('\n');
    }
    let edges = g.adjacency().edges();
    let _ = writeln!(out, "EDGES {}", edges.len());
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    match g.labels() {
        Labels::Single { ids, .. } => {
            for id in ids {
                let _ = writeln!(out, "{id}");
            }
        }
        Labels::Multi { num_labels, bits } => {
            for row in bits.chunks(*num_labels) {
                let ids: Vec<String> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b == 1)
                    .map(|(j, _)| j.to_string())
                    .collect();
                let _ = writeln!(out, "{}", ids.join(";"));
            }
        }
    }
    for &s in g.masks().splits() {
        out.push_str(split_name(s));
        out.push('\n');
    }
    out
}

pub fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Val => "val",
        Split::Test => "test",
        Split::None => "none",
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim_end_matches('\r')))
            }
            None => Err(Error::Parse {
                line: self.last + 1,
                msg: format!("unexpected end of file, expected {what}"),
            }),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (ln, header) = lines.next("header")?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 5 || tok[0] != MAGIC {
        return Err(parse_err(ln, format!("expected `{MAGIC} N C K ML`")));
    }
    let n: usize = parse_num(tok[1], ln, "node count")?;
    let c: usize = parse_num(tok[2], ln, "feature count")?;
    let k: usize = parse_num(tok[3], ln, "class count")?;
    let multi = match tok[4] {
        "0" => false,
        "1" => true,
        other => return Err(parse_err(ln, format!("multi-label flag must be 0 or 1, got `{other}`"))),
    };

    let mut features = vec![0.0; n * c];
    for i in 0..n {
        let (ln, line) = lines.next("feature row")?;
        let mut parts = line.split_whitespace();
        let row = &mut features[i * c..(i + 1) * c];
        match parts.next() {
            Some("dense") => {
                let vals: Vec<&str> = parts.collect();
                if vals.len() != c {
                    return Err(Error::Validation(format!(
                        "line {ln}: dense row has {} values, header says {c}",
                        vals.len()
                    )));
                }
                for (d, v) in row.iter_mut().zip(vals) {
                    *d = parse_num(v, ln, "feature value")?;
                }
            }
            Some("sparse") => {
                for entry in parts {
                    let (j, v) = entry
                        .split_once(':')
                        .ok_or_else(|| parse_err(ln, format!("sparse entry `{entry}` is not index:value")))?;
                    let j: usize = parse_num(j, ln, "feature index")?;
                    if j >= c {
                        return Err(parse_err(ln, format!("feature index {j} >= {c}")));
                    }
                    row[j] = parse_num(v, ln, "feature value")?;
                }
            }
            Some("EDGES") => {
                return Err(Error::Validation(format!(
                    "line {ln}: found {i} feature rows, header says {n}"
                )))
            }
            _ => return Err(parse_err(ln, "expected `dense` or `sparse` feature row")),
        }
    }

    let (ln, line) = lines.next("EDGES line")?;
    let e: usize = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["EDGES", count] => parse_num(count, ln, "edge count")?,
        [first, ..] if *first == "dense" || *first == "sparse" => {
            return Err(Error::Validation(format!(
                "line {ln}: more feature rows than the {n} stated in the header"
            )))
        }
        _ => return Err(parse_err(ln, "expected `EDGES E`")),
    };
    let mut edges = Vec::with_capacity(e);
    for _ in 0..e {
        let (ln, line) = lines.next("edge")?;
        let mut parts = line.split_whitespace();
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(ln, "expected `u v`"));
        };
        let u: usize = parse_num(u, ln, "node id")?;
        let v: usize = parse_num(v, ln, "node id")?;
        if u >= n || v >= n {
            return Err(parse_err(ln, format!("edge ({u}, {v}) references a node >= {n}")));
        }
        edges.push((u, v));
    }

    let labels = if multi {
        let mut bits = vec![0u8; n * k];
        for i in 0..n {
            let (ln, line) = lines.next("label line")?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            for tok in line.split(';') {
                let j: usize = parse_num(tok.trim(), ln, "label id")?;
                if j >= k {
                    return Err(parse_err(ln, format!("label id {j} >= {k}")));
                }
                bits[i * k + j] = 1;
            }
        }
        Labels::Multi { num_labels: k, bits }
    } else {
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = lines.next("label line")?;
            let id: usize = parse_num(line.trim(), ln, "class id")?;
            if id >= k {
                return Err(parse_err(ln, format!("class id {id} >= {k}")));
            }
            ids.push(id);
        }
        Labels::Single { num_classes: k, ids }
    };

    let mut splits = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, line) = lines.next("mask line")?;
        splits.push(match line.trim() {
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            "none" => Split::None,
            other => return Err(parse_err(ln, format!("unknown mask `{other}`"))),
        });
    }
    while let Ok((ln, line)) = lines.next("") {
        if !line.trim().is_empty() {
            return Err(Error::Validation(format!("line {ln}: trailing content after the mask block")));
        }
    }

    let adjacency = Adjacency::from_edges(n, &edges)?;
    let features = Tensor::new(&[n, c], features)?;
    Graph::new(adjacency, features, labels, Masks::new(splits))
}
