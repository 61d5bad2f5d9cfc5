//! Central finite-difference oracle for tape gradients.

use crate::error::Result;
use crate::graph::Graph;
use crate::model::Model;
use crate::tape::{ParamStore, Tape, Var};
use crate::train::training_loss_with;

/// Settings for [`finite_diff_check`].
#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    /// Perturbation applied in each direction.
    pub eps: f64,
    /// Denominator floor for the relative error, so entries whose true
    /// gradient is zero are compared in absolute terms.
    pub abs_floor: f64,
    /// Check at most this many evenly spaced entries per parameter.
    pub max_entries_per_param: Option<usize>,
}

impl Default for GradCheck {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            abs_floor: 1e-6,
            max_entries_per_param: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// `max |analytic − numeric| / max(|analytic|, |numeric|, abs_floor)`.
    pub max_rel_error: f64,
    /// Parameter name and flat index of the worst entry.
    pub worst: Option<(String, usize)>,
    pub entries_checked: usize,
}

/// Compares tape gradients of `loss` with central differences
/// `(f(θ+eps) − f(θ−eps)) / 2eps` for every parameter entry.
///
/// `loss` must be deterministic: it is re-run twice per checked entry.
/// Parameter gradients are overwritten with the analytic gradient.
pub fn finite_diff_check<F>(store: &mut ParamStore, cfg: GradCheck, mut loss: F) -> Result<GradCheckReport>
where
    F: FnMut(&ParamStore, &mut Tape) -> Result<Var>,
{
    store.zero_grad();
    let mut tape = Tape::new();
    let out = loss(store, &mut tape)?;
    tape.backward(out, store)?;
    drop(tape);

    let mut eval = |store: &ParamStore| -> Result<f64> {
        let mut tape = Tape::new();
        let out = loss(store, &mut tape)?;
        Ok(tape.scalar(out))
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        entries_checked: 0,
    };
    let ids: Vec<_> = store.ids().collect();
    for id in ids {
        let len = store.value(id).len();
        let step = match cfg.max_entries_per_param {
            Some(m) if m > 0 && len > m => len.div_ceil(m),
            _ => 1,
        };
        for e in (0..len).step_by(step) {
            let analytic = store.grad(id).data()[e];
            let orig = store.value(id).data()[e];
            store.get_mut(id).value.data_mut()[e] = orig + cfg.eps;
            let plus = eval(store)?;
            store.get_mut(id).value.data_mut()[e] = orig - cfg.eps;
            let minus = eval(store)?;
            store.get_mut(id).value.data_mut()[e] = orig;

            let numeric = (plus - minus) / (2.0 * cfg.eps);
            let denom = analytic.abs().max(numeric.abs()).max(cfg.abs_floor);
            let rel = (analytic - numeric).abs() / denom;
            report.entries_checked += 1;
            if report.worst.is_none() || rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = Some((store.get(id).name.clone(), e));
            }
        }
    }
    Ok(report)
}

/// Checks the full training loss of `model` on `g` (data loss on the
/// training mask plus `lambda`-weighted L2) with dropout disabled. The
/// model itself is left untouched.
pub fn check_model(model: &Model, g: &Graph, lambda: f64, cfg: GradCheck) -> Result<GradCheckReport> {
    let mut store = model.params().clone();
    let mut unused = crate::rng(0);
    finite_diff_check(&mut store, cfg, |s, tape| {
        training_loss_with(tape, model, s, g, lambda, false, &mut unused)
    })
}
