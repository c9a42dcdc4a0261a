//! Bohr means, frequency candidates, trigonometric fits and approximation
//! error curves.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, MetapError, Result};
use crate::funcspace::{
    haraux_window_tail, semi_anti_derivative_tail, FunctionDescriptor, Node, SeriesFamily, TrigPolynomial, TrigTerm,
    Value, Window, C64,
};
use crate::gennorms::Gauge;
use crate::par;
use crate::pseudometrics::MetricFamily;

/// Default averaging half-width.
pub const DEFAULT_T: f64 = 1e4;
/// Nodes per unit length for mean quadrature.
pub const MEAN_DENSITY: f64 = 8.0;
/// Cap on tensor-grid nodes for multi-dimensional means.
const MAX_MEAN_NODES: f64 = 4.0e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrCoefficient {
    pub lambda: Vec<f64>,
    pub t: f64,
    pub value: Value,
    /// `|a_T - a_{T/2}|` from the same samples.
    pub richardson_delta: f64,
}

/// `(2T)^{-n} int_{[-T,T]^n} f(t) e^{-i<lambda,t>} dt` by composite trapezoid,
/// with the `T/2` mean taken on the central quarter of the same nodes.
pub fn bohr_coefficient(f: &FunctionDescriptor, lambda: &[f64], t: f64) -> Result<BohrCoefficient> {
    let n = f.dim();
    if lambda.len() != n {
        return Err(invalid("frequency dimension differs from the domain dimension"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("averaging half-width must be positive, got {t}")));
    }
    let w = Window::new(vec![-t; n], vec![t; n])?;
    if !f.domain().covers(&w) {
        return Err(MetapError::Domain { point: w.hi });
    }
    let per_axis = (2.0 * t * MEAN_DENSITY).min(MAX_MEAN_NODES.powf(1.0 / n as f64));
    let cells = (4.0 * (per_axis / 4.0).ceil()).max(4.0) as usize;
    let h = 2.0 * t / cells as f64;
    let d = f.codomain_dim();
    let axis_weight = |i: usize, lo: usize, hi: usize| -> f64 {
        if i < lo || i > hi {
            0.0
        } else if i == lo || i == hi {
            0.5 * h
        } else {
            h
        }
    };
    let total: usize = (cells + 1).pow(n as u32);
    let contrib = par::map_range(total, |flat| {
        let mut idx = vec![0usize; n];
        let mut r = flat;
        for j in (0..n).rev() {
            idx[j] = r % (cells + 1);
            r /= cells + 1;
        }
        let p: Vec<f64> = idx.iter().map(|&i| -t + i as f64 * h).collect();
        let mut v = Value::new();
        f.eval_into(&p, &mut v);
        let ph: f64 = lambda.iter().zip(&p).map(|(l, x)| l * x).sum();
        let e = C64::cis(-ph);
        let wf: f64 = idx.iter().map(|&i| axis_weight(i, 0, cells)).product();
        let wh: f64 = idx.iter().map(|&i| axis_weight(i, cells / 4, 3 * cells / 4)).product();
        (v.into_iter().map(|x| x * e).collect::<Value>(), wf, wh)
    });
    let mut full = vec![C64::new(0.0, 0.0); d];
    let mut half = vec![C64::new(0.0, 0.0); d];
    for (v, wf, wh) in &contrib {
        for k in 0..d {
            full[k] += v[k] * *wf;
            half[k] += v[k] * *wh;
        }
    }
    let vol = (2.0 * t).powi(n as i32);
    let vol_half = t.powi(n as i32);
    let value: Value = full.iter().map(|x| x / vol).collect();
    let half: Value = half.iter().map(|x| x / vol_half).collect();
    let richardson_delta = value.iter().zip(&half).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok(BohrCoefficient { lambda: lambda.to_vec(), t, value, richardson_delta })
}

/// Declared frequencies where the descriptor has them; otherwise the
/// strongest peaks of a zero-padded periodogram. Capped at `budget`.
pub fn frequency_candidates(f: &FunctionDescriptor, budget: usize) -> Result<Vec<Vec<f64>>> {
    if budget == 0 {
        return Ok(Vec::new());
    }
    match f.node() {
        Node::Series { family, trunc } => return Ok(family.frequencies(*trunc, budget).into_iter().map(|w| vec![w]).collect()),
        Node::Closed(c) => return Ok(c.frequencies(budget).into_iter().map(|w| vec![w]).collect()),
        _ => {}
    }
    if let Some(p) = f.as_trig_polynomial() {
        return Ok(p.frequencies().into_iter().take(budget).collect());
    }
    if f.dim() != 1 {
        return Err(MetapError::Unsupported("spectral peak search is one-dimensional".into()));
    }
    spectral_peaks(f, budget)
}

/// Sampling span and step used for spectral estimates of non-declared inputs.
const SPECTRAL_SPAN: f64 = 256.0;
const SPECTRAL_STEP: f64 = 1.0 / 16.0;
const ZERO_PAD: usize = 8;

fn spectral_peaks(f: &FunctionDescriptor, budget: usize) -> Result<Vec<Vec<f64>>> {
    let (a, b) = match f.node() {
        Node::Tabulated { xs, .. } => (xs[0], xs[xs.len() - 1]),
        _ => match f.domain() {
            crate::funcspace::Domain::Box { window } => (window.lo[0], window.hi[0]),
            crate::funcspace::Domain::Whole { .. } => (0.0, SPECTRAL_SPAN),
        },
    };
    let span = b - a;
    if !(span > 0.0) {
        return Err(invalid("spectral estimate needs a non-degenerate sampling range"));
    }
    let m = ((span / SPECTRAL_STEP).floor() as usize).clamp(16, 1 << 20);
    let h = span / m as f64;
    let len = (m * ZERO_PAD).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for (i, slot) in buf.iter_mut().take(m).enumerate() {
        let x = a + i as f64 * h;
        // Hann taper
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (m - 1) as f64).cos();
        *slot = f.eval1(x) * w;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();
    let freq = |k: usize| -> f64 {
        let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
        2.0 * PI * kk / (len as f64 * h)
    };
    let mut peaks: Vec<(f64, usize)> = (0..len)
        .filter(|&k| {
            let l = power[(k + len - 1) % len];
            let r = power[(k + 1) % len];
            power[k] > l && power[k] >= r
        })
        .map(|k| (power[k], k))
        .collect();
    peaks.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    Ok(peaks.into_iter().take(budget).map(|(_, k)| vec![freq(k)]).collect())
}

/// Trigonometric polynomial with Bohr-mean coefficients at `freqs`.
pub fn fit_trig_polynomial(f: &FunctionDescriptor, freqs: &[Vec<f64>], t: f64) -> Result<TrigPolynomial> {
    for (i, a) in freqs.iter().enumerate() {
        if freqs[..i].iter().any(|b| b == a) {
            return Err(invalid(format!("duplicate frequency {a:?}")));
        }
    }
    let coefs = freqs.iter().map(|l| bohr_coefficient(f, l, t)).collect::<Result<Vec<_>>>()?;
    let terms = freqs
        .iter()
        .zip(coefs)
        .map(|(l, c)| TrigTerm { freq: l.clone(), coef: c.value })
        .collect();
    TrigPolynomial::new(f.dim(), f.codomain_dim(), terms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCurve {
    pub gauge: String,
    pub indices: Vec<usize>,
    pub errors: Vec<f64>,
    pub bounds: Vec<Option<f64>>,
}

impl ApproximationCurve {
    /// Every attached bound dominates its error within `tol`.
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.errors.iter().zip(&self.bounds).all(|(e, b)| b.is_none_or(|b| *e <= b + tol))
    }
}

/// `gauge(f, P_k)` for each approximant, with optional analytic bounds.
pub fn approximation_curve(
    f: &FunctionDescriptor,
    approximants: &[(usize, FunctionDescriptor)],
    gauge: &Gauge,
    bound: impl Fn(usize) -> Option<f64>,
) -> Result<ApproximationCurve> {
    let errors = approximants.iter().map(|(_, p)| gauge.measure(f, p)).collect::<Result<Vec<_>>>()?;
    Ok(ApproximationCurve {
        gauge: gauge.name(),
        indices: approximants.iter().map(|(k, _)| *k).collect(),
        errors,
        bounds: approximants.iter().map(|(k, _)| bound(*k)).collect(),
    })
}

/// `sum_{m>n} 2/(m 2^m)`.
pub fn haraux_derivative_tail(n: usize) -> f64 {
    let mut s = 0.0f64;
    let mut m = n + 1;
    loop {
        let term = 2.0 / (m as f64 * 2f64.powi(m as i32));
        if term < 1e-20 * s.max(1e-300) || m > n + 1100 {
            return s;
        }
        s += term;
        m += 1;
    }
}

/// Analytic bound on `gauge(f, f_n)` for the full series against its
/// `n`-partial sum, when one is known for the gauge.
pub fn series_tail_bound(family: SeriesFamily, n: usize, gauge: &Gauge) -> Option<f64> {
    let Gauge::Metric { spec } = gauge else { return None };
    let r = spec
        .support()
        .lo
        .iter()
        .chain(spec.support().hi.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let sup = match family {
        SeriesFamily::Haraux => haraux_window_tail(n, r),
        f => f.tail_bound(n),
    };
    let var = match family {
        SeriesFamily::SemiAnti | SeriesFamily::SemiAntiReal => Some(2.0 * semi_anti_derivative_tail(n)),
        SeriesFamily::Haraux => Some(haraux_derivative_tail(n)),
        SeriesFamily::Gevrey { .. } => None,
    };
    match &spec.family {
        MetricFamily::WeightedSup { nu } if nu.is_unit() => Some(sup),
        MetricFamily::BvpComposite { .. } => Some(sup + var?),
        MetricFamily::BvpSlow { .. } => var,
        MetricFamily::ArctanSup => Some(sup),
        _ => None,
    }
}

/// Approximation curve of a series against its partial sums at `ns`.
pub fn partial_sum_curve(f: &FunctionDescriptor, ns: &[usize], gauge: &Gauge) -> Result<ApproximationCurve> {
    let (family, trunc) = f
        .series_info()
        .ok_or_else(|| MetapError::Kind("partial-sum curves need a series descriptor".into()))?;
    let approximants = ns
        .iter()
        .map(|&n| Ok((n, crate::funcspace::truncate_series(f, n)?.0)))
        .collect::<Result<Vec<_>>>()?;
    approximation_curve(f, &approximants, gauge, |n| {
        // f - f_n holds terms n+1..=trunc, dominated by the infinite tail
        if n < trunc {
            series_tail_bound(family, n, gauge)
        } else {
            Some(0.0)
        }
    })
}
