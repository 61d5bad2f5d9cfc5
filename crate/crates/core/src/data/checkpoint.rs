//! Parameter checkpoints.
//!
//! ```text
//! CKPTv1
//! name rank d1 .. dr
//! v1 v2 ... (product of dims values)
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tape::ParamStore;
use crate::tensor::Tensor;

const MAGIC: &str = "CKPTv1";

pub fn format_checkpoint(store: &ParamStore) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    for p in store.iter() {
        let shape = p.value.shape();
        let _ = write!(out, "{} {}", p.name, shape.len());
        for d in shape {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
        let values: Vec<String> = p.value.data().iter().map(f64::to_string).collect();
        out.push_str(&values.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_checkpoint(text: &str) -> Result<Vec<(String, Tensor)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected `{MAGIC}`") }),
    }
    let mut out = Vec::new();
    while let Some((ln, header)) = lines.next() {
        if header.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: ln, msg };
        let tok: Vec<&str> = header.split_whitespace().collect();
        let rank: usize = tok
            .get(1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("expected `name rank d1 .. dr`".into()))?;
        if tok.len() != 2 + rank {
            return Err(bad(format!("rank {rank} needs {rank} dimensions")));
        }
        let shape = tok[2..]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| bad(format!("invalid dimension `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        let (vln, values) = lines.next().ok_or_else(|| Error::Parse {
            line: ln + 1,
            msg: format!("missing values for `{}`", tok[0]),
        })?;
        let data = values
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: vln,
                    msg: format!("invalid value `{t}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tensor = Tensor::new(&shape, data).map_err(|e| Error::Validation(format!("line {vln}: {e}")))?;
        out.push((tok[0].to_string(), tensor));
    }
    Ok(out)
}

/// Writes through a temporary sibling file so a failed write never leaves a
/// truncated checkpoint behind.
pub fn save_checkpoint(store: &ParamStore, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &format_checkpoint(store))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Vec<(String, Tensor)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text)
}

/// Replaces every parameter of `store` with the tensor of the same name.
/// Names and shapes must match exactly; on error `store` is unchanged.
pub fn load_checkpoint_into(store: &mut ParamStore, path: impl AsRef<Path>) -> Result<()> {
    let entries = read_checkpoint(path)?;
    if entries.len() != store.len() {
        return Err(Error::Validation(format!(
            "checkpoint holds {} tensors, model has {} parameters",
            entries.len(),
            store.len()
        )));
    }
    let mut values = Vec::with_capacity(entries.len());
    for p in store.iter() {
        let (_, t) = entries
            .iter()
            .find(|(n, _)| *n == p.name)
            .ok_or_else(|| Error::Validation(format!("checkpoint is missing `{}`", p.name)))?;
        if t.shape() != p.value.shape() {
            return Err(Error::Validation(format!(
                "`{}` has shape {:?} in the checkpoint, {:?} in the model",
                p.name,
                t.shape(),
                p.value.shape()
            )));
        }
        values.push(t.clone());
    }
    store.restore(&values)
}

pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    if let Err(e) = std::fs::write(&tmp, contents).and_then(|_| std::fs::rename(&tmp, path)) {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}
