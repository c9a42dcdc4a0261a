use serde::{Deserialize, Serialize};

use crate::error::{invalid, MetapError, Result};
use crate::funcspace::{value_norm, FunctionDescriptor, Value, Window};
use crate::par;
use crate::quad::{adaptive, QuadOptions};

/// Settings for [`stepanov_bound_scan`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Anchors are spaced `window_len / cells_per_window` apart.
    pub cells_per_window: usize,
    pub quad: QuadOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            cells_per_window: 8,
            quad: QuadOptions { abs_tol: 1e-10, rel_tol: 1e-6, max_depth: 40, max_intervals: 20_000, initial_panels: 1 },
        }
    }
}

/// Running maxima of `int_t^{t+L} ||f||^p` over anchors `t in [0, T]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepanovScan {
    pub t_grid: Vec<f64>,
    pub maxima: Vec<f64>,
    /// Anchor attaining each maximum.
    pub argmax: Vec<f64>,
    /// Cells whose quadrature hit the depth cap or interval budget, per `T`.
    pub unconverged_cells: Vec<usize>,
    pub window_len: f64,
    pub p: f64,
}

impl StepanovScan {
    pub fn converged(&self) -> bool {
        self.unconverged_cells.iter().all(|&c| c == 0)
    }
}

pub fn stepanov_bound_scan(
    f: &FunctionDescriptor,
    p: f64,
    window_len: f64,
    t_grid: &[f64],
    opts: &ScanOptions,
) -> Result<StepanovScan> {
    crate::pseudometrics::check_p(p)?;
    if f.dim() != 1 {
        return Err(MetapError::Unsupported("Stepanov bound scans are one-dimensional".into()));
    }
    if !(window_len > 0.0) || !window_len.is_finite() {
        return Err(invalid(format!("window length must be positive, got {window_len}")));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("T grid must be non-negative and strictly increasing"));
    }
    let k = opts.cells_per_window.max(1);
    let cell = window_len / k as f64;
    let tmax = *t_grid.last().expect("non-empty");
    if !f.domain().covers(&Window::interval(0.0, tmax + window_len)?) {
        return Err(MetapError::Domain { point: vec![tmax + window_len] });
    }
    let anchors = (tmax / cell).floor() as usize + 1;
    let cells = anchors + k - 1;
    let integrand = |x: f64| {
        let mut v = Value::new();
        f.eval_into(&[x], &mut v);
        let m = value_norm(&v);
        if p == 1.0 {
            m
        } else {
            m.powf(p)
        }
    };
    let quads = par::map_range(cells, |c| {
        let a = c as f64 * cell;
        let r = adaptive(integrand, a, a + cell, &opts.quad);
        (r.value, r.converged)
    });
    let mut maxima = Vec::with_capacity(t_grid.len());
    let mut argmax = Vec::with_capacity(t_grid.len());
    let mut unconverged_cells = Vec::with_capacity(t_grid.len());
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0.0;
    let mut bad = 0usize;
    let mut next = 0usize;
    let mut window: f64 = quads[..k].iter().map(|q| q.0).sum();
    bad += quads[..k].iter().filter(|q| !q.1).count();
    for &t in t_grid {
        let last = ((t / cell).floor() as usize).min(anchors - 1);
        while next <= last {
            if next > 0 {
                window = quads[next..next + k].iter().map(|q| q.0).sum();
                if !quads[next + k - 1].1 {
                    bad += 1;
                }
            }
            if window > best {
                best = window;
                best_at = next as f64 * cell;
            }
            next += 1;
        }
        maxima.push(best);
        argmax.push(best_at);
        unconverged_cells.push(bad);
    }
    Ok(StepanovScan { t_grid: t_grid.to_vec(), maxima, argmax, unconverged_cells, window_len, p })
}
