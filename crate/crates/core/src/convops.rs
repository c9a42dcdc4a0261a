//! Infinite convolution products `F(t) = int_0^inf R(s) f(t - s) ds`, the
//! Gaussian heat semigroup and class-preservation reports.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MetapError, Result};
use crate::funcspace::{
    translate, value_norm, FunctionDescriptor, Growth, Multiplier, Node, TrigPolynomial, Value, WeightFunction, C64,
};
use crate::gennorms::Gauge;
use crate::grid::AxisGrid;
use crate::par;
use crate::quad::{adaptive, QuadOptions};

/// Scalar kernel `R(s)`, `s > 0`, standing in for `||R(s)||`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum Kernel {
    /// `e^{-mu s}`.
    ExpDecay { mu: f64 },
    /// `M s^{beta-1} / (1 + s^gamma)`.
    PowerBound { m: f64, beta: f64, gamma: f64 },
    /// `(4 pi t0)^{-n/2} e^{-s^2 / (4 t0)}`.
    Heat { t0: f64, n: usize },
    /// Piecewise linear on `xs`, zero outside.
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::ExpDecay { mu } if *mu > 0.0 && mu.is_finite() => Ok(()),
            Kernel::ExpDecay { mu } => Err(invalid(format!("exp_decay needs mu > 0, got {mu}"))),
            Kernel::PowerBound { m, beta, gamma } => {
                if !(*m > 0.0) || !(*beta > 0.0 && *beta <= 1.0) || !(*gamma > 1.0) || !gamma.is_finite() {
                    return Err(invalid(format!(
                        "power_bound needs M > 0, beta in (0,1], gamma > 1; got M={m}, beta={beta}, gamma={gamma}"
                    )));
                }
                Ok(())
            }
            Kernel::Heat { t0, n } => {
                if !(*t0 > 0.0) || !t0.is_finite() {
                    return Err(invalid(format!("heat kernel needs t0 > 0, got {t0}")));
                }
                if !(1..=2).contains(n) {
                    return Err(MetapError::Unsupported(format!("heat kernel in dimension {n}")));
                }
                Ok(())
            }
            Kernel::Table { xs, ys } => {
                if xs.len() < 2 || xs.len() != ys.len() {
                    return Err(invalid("kernel table needs at least two nodes and matching lengths"));
                }
                if xs[0] < 0.0 || xs.windows(2).any(|w| !(w[1] > w[0])) || !xs.iter().all(|x| x.is_finite()) {
                    return Err(invalid("kernel table nodes must be finite, non-negative and increasing"));
                }
                if ys.iter().any(|y| !(*y >= 0.0) || !y.is_finite()) {
                    return Err(invalid("kernel table values must be finite and non-negative"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Kernel::ExpDecay { mu } => (-mu * s).exp(),
            Kernel::PowerBound { m, beta, gamma } => m * s.powf(beta - 1.0) / (1.0 + s.powf(*gamma)),
            Kernel::Heat { t0, n } => (4.0 * PI * t0).powf(-(*n as f64) / 2.0) * (-s * s / (4.0 * t0)).exp(),
            Kernel::Table { xs, ys } => {
                if s < xs[0] || s > xs[xs.len() - 1] {
                    0.0
                } else {
                    crate::funcspace::interp_linear(xs, ys, s)
                }
            }
        }
    }

    /// `int_0^inf R`.
    pub fn mass(&self) -> f64 {
        match self {
            Kernel::ExpDecay { mu } => 1.0 / mu,
            Kernel::PowerBound { m, beta, gamma } => m * PI / (gamma * (PI * beta / gamma).sin()),
            Kernel::Heat { t0, n } => (4.0 * PI * t0).powf(-(*n as f64) / 2.0) * (PI * t0).sqrt(),
            Kernel::Table { xs, ys } => xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum(),
        }
    }

    /// Upper bound on `int_S^inf R`.
    pub fn tail_bound(&self, s: f64) -> f64 {
        match self {
            Kernel::ExpDecay { mu } => (-mu * s).exp() / mu,
            Kernel::PowerBound { m, beta, gamma } => {
                if s <= 0.0 {
                    self.mass()
                } else {
                    m * s.powf(beta - gamma) / (gamma - beta)
                }
            }
            Kernel::Heat { t0, n } => {
                if s <= 0.0 {
                    self.mass()
                } else {
                    (4.0 * PI * t0).powf(-(*n as f64) / 2.0) * (2.0 * t0 / s) * (-s * s / (4.0 * t0)).exp()
                }
            }
            Kernel::Table { xs, .. } => {
                if s >= xs[xs.len() - 1] {
                    0.0
                } else {
                    self.mass()
                }
            }
        }
    }

    /// Smallest truncation point `S` on a doubling search with `sup_f * tail(S) <= tol`.
    pub fn truncation(&self, sup_f: f64, tol: f64) -> Result<f64> {
        if let Kernel::Table { xs, .. } = self {
            return Ok(xs[xs.len() - 1]);
        }
        if let Kernel::ExpDecay { mu } = self {
            let s = ((sup_f / (mu * tol)).ln() / mu).max(0.0);
            return Ok(s);
        }
        let mut s = 1.0;
        while sup_f * self.tail_bound(s) > tol {
            s *= 2.0;
            if s > 1e15 {
                return Err(MetapError::Numeric(format!("no admissible truncation for tolerance {tol}")));
            }
        }
        Ok(s)
    }

    /// Power-bound tail against a growth envelope `M (1 + s)^b`.
    fn truncation_with_growth(&self, growth: Growth, t_abs: f64, tol: f64) -> Result<f64> {
        match self {
            Kernel::PowerBound { m, beta, gamma } => {
                if growth.b >= gamma - beta {
                    return Err(invalid(format!(
                        "growth exponent {} is not below gamma - beta = {}",
                        growth.b,
                        gamma - beta
                    )));
                }
                // |f(t - s)| <= M (1 + |t|)^b (1 + s)^b and (1 + s)^b <= 2^b s^b for s >= 1
                let lead = growth.m * (1.0 + t_abs).powf(growth.b) * 2f64.powf(growth.b) * m;
                let e = beta - gamma + growth.b;
                let mut s = 1.0f64;
                while lead * s.powf(e) / (-e) > tol {
                    s *= 2.0;
                    if s > 1e15 {
                        return Err(MetapError::Numeric(format!("no admissible truncation for tolerance {tol}")));
                    }
                }
                Ok(s)
            }
            _ => {
                if growth.b > 0.0 {
                    let lead = growth.m * (1.0 + t_abs).powf(growth.b);
                    let mut s = self.truncation(lead, tol)?;
                    while lead * (1.0 + s).powf(growth.b) * self.tail_bound(s) > tol {
                        s *= 2.0;
                        if s > 1e15 {
                            return Err(MetapError::Numeric(format!("no admissible truncation for tolerance {tol}")));
                        }
                    }
                    Ok(s)
                } else {
                    self.truncation(growth.m, tol)
                }
            }
        }
    }
}

/// Quadrature settings for kernel transforms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvOptions {
    pub tail_tol: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial panels per unit length of the truncated range.
    pub panels_per_unit: f64,
}

impl Default for ConvOptions {
    fn default() -> Self {
        ConvOptions { tail_tol: 1e-10, rel_tol: 1e-10, abs_tol: 1e-12, panels_per_unit: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    /// `int_0^inf R(s) f(t - s) ds`.
    OneSided,
    /// `int_{R^n} R(|y|) f(t - y) dy`.
    Whole,
}

/// Lazily evaluated kernel transform of `inner`.
#[derive(Clone, Debug)]
pub struct KernelTransform {
    pub kernel: Kernel,
    pub inner: FunctionDescriptor,
    pub opts: ConvOptions,
    pub mode: TransformMode,
    growth: Growth,
}

impl KernelTransform {
    pub fn new(kernel: Kernel, inner: FunctionDescriptor, opts: ConvOptions, mode: TransformMode) -> Result<Self> {
        kernel.validate()?;
        let growth = inner
            .growth()
            .ok_or_else(|| invalid("input has neither a sup bound nor growth metadata"))?;
        Self::with_growth(kernel, inner, opts, mode, growth)
    }

    pub fn with_growth(
        kernel: Kernel,
        inner: FunctionDescriptor,
        opts: ConvOptions,
        mode: TransformMode,
        growth: Growth,
    ) -> Result<Self> {
        kernel.validate()?;
        if !(opts.tail_tol > 0.0) {
            return Err(invalid("tail tolerance must be positive"));
        }
        if !inner.domain().is_whole() {
            return Err(MetapError::Unsupported("kernel transforms need a function on the whole space".into()));
        }
        match (mode, &kernel) {
            (TransformMode::OneSided, _) if inner.dim() != 1 => {
                return Err(MetapError::Unsupported("one-sided convolution is one-dimensional".into()))
            }
            (TransformMode::Whole, Kernel::Heat { n, .. }) if *n != inner.dim() => {
                return Err(invalid("heat kernel dimension differs from the function's"))
            }
            (TransformMode::Whole, Kernel::Heat { .. }) => {}
            (TransformMode::Whole, _) => return Err(MetapError::Unsupported("whole-space transforms use the heat kernel".into())),
            _ => {}
        }
        if growth.b > 0.0 {
            kernel.truncation_with_growth(growth, 0.0, opts.tail_tol)?;
        }
        Ok(KernelTransform { kernel, inner, opts, mode, growth })
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn sup_bound(&self) -> Option<f64> {
        let m = self.inner.sup_bound()?;
        let mass = match self.mode {
            TransformMode::OneSided => self.kernel.mass(),
            TransformMode::Whole => 1.0,
        };
        Some(m * mass)
    }

    pub fn eval_into(&self, t: &[f64], out: &mut Value) {
        match self.mode {
            TransformMode::OneSided => self.one_sided(t[0], out),
            TransformMode::Whole => self.whole(t, out),
        }
    }

    fn cutoff(&self, t_abs: f64) -> f64 {
        self.kernel
            .truncation_with_growth(self.growth, t_abs, self.opts.tail_tol)
            .unwrap_or(f64::INFINITY)
    }

    fn quad_opts(&self, len: f64) -> QuadOptions {
        QuadOptions {
            abs_tol: self.opts.abs_tol,
            rel_tol: self.opts.rel_tol,
            max_depth: 40,
            max_intervals: 200_000,
            initial_panels: (len * self.opts.panels_per_unit).ceil().clamp(1.0, 65536.0) as usize,
        }
    }

    fn one_sided(&self, t: f64, out: &mut Value) {
        let s_max = self.cutoff(t.abs());
        let f = &self.inner;
        let val = match &self.kernel {
            Kernel::PowerBound { m, beta, gamma } => {
                // s = u^{1/beta}
                let (m, beta, gamma) = (*m, *beta, *gamma);
                let u_max = s_max.powf(beta);
                let g = move |u: f64| {
                    let s = u.powf(1.0 / beta);
                    let mut v = Value::new();
                    f.eval_into(&[t - s], &mut v);
                    let w = m / (beta * (1.0 + s.powf(gamma)));
                    for x in v.iter_mut() {
                        *x *= w;
                    }
                    v
                };
                adaptive(g, 0.0, u_max, &self.quad_opts(u_max.max(s_max))).value
            }
            kernel => {
                let lo = match kernel {
                    Kernel::Table { xs, .. } => xs[0],
                    _ => 0.0,
                };
                let g = |s: f64| {
                    let mut v = Value::new();
                    f.eval_into(&[t - s], &mut v);
                    let w = kernel.eval(s);
                    for x in v.iter_mut() {
                        *x *= w;
                    }
                    v
                };
                adaptive(g, lo, s_max, &self.quad_opts(s_max - lo)).value
            }
        };
        out.clear();
        out.extend(val);
    }

    fn whole(&self, t: &[f64], out: &mut Value) {
        let Kernel::Heat { t0, n } = self.kernel else { unreachable!("validated on construction") };
        let tn: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = heat_radius(t0, self.growth, tn, HEAT_TAIL);
        let f = &self.inner;
        let norm = (4.0 * PI * t0).powf(-(n as f64) / 2.0);
        if n == 1 {
            let g = |y: f64| {
                let mut v = Value::new();
                f.eval_into(&[t[0] - y], &mut v);
                let w = norm * (-y * y / (4.0 * t0)).exp();
                for x in v.iter_mut() {
                    *x *= w;
                }
                v
            };
            let val = adaptive(g, -r, r, &self.quad_opts(2.0 * r)).value;
            out.clear();
            out.extend(val);
        } else {
            let h = (t0.sqrt() / 8.0).min(0.05);
            let grid = AxisGrid::covering(-r, r, 1.0 / h).expect("positive radius");
            let mut acc = vec![C64::new(0.0, 0.0); f.codomain_dim()];
            let mut v = Value::new();
            for i in 0..grid.n {
                let y0 = grid.node(i);
                for j in 0..grid.n {
                    let y1 = grid.node(j);
                    f.eval_into(&[t[0] - y0, t[1] - y1], &mut v);
                    let w = grid.weight(i) * grid.weight(j) * norm * (-(y0 * y0 + y1 * y1) / (4.0 * t0)).exp();
                    for (a, x) in acc.iter_mut().zip(v.iter()) {
                        *a += x * w;
                    }
                }
            }
            out.clear();
            out.extend(acc);
        }
    }
}

/// Gaussian tail target for the heat quadrature.
pub const HEAT_TAIL: f64 = 1e-8;

/// `sqrt(4 t0 ln(1/eps))`, enlarged until the Gaussian tail times the growth envelope is below `eps`.
pub fn heat_radius(t0: f64, growth: Growth, t_abs: f64, eps: f64) -> f64 {
    let mut r = (4.0 * t0 * (1.0 / eps).ln()).sqrt();
    let lead = growth.m.max(1.0) * (1.0 + t_abs).powf(growth.b);
    while lead * (1.0 + r).powf(growth.b) * (-r * r / (4.0 * t0)).exp() > eps {
        r *= 1.1;
    }
    r
}

/// `F(t) = int_{-inf}^t R(t - s) f(s) ds`; trig inputs with `exp_decay` map exactly
/// via `e^{i w t} -> e^{i w t} / (mu + i w)`.
pub fn infinite_convolution(kernel: &Kernel, f: &FunctionDescriptor, opts: ConvOptions) -> Result<FunctionDescriptor> {
    kernel.validate()?;
    if let (Kernel::ExpDecay { mu }, Some(p)) = (kernel, f.as_trig_polynomial()) {
        if p.dim() == 1 {
            let mu = *mu;
            return Ok(FunctionDescriptor::trig(p.map_coefs(|t| C64::new(1.0, 0.0) / C64::new(mu, t.freq[0]))));
        }
    }
    Ok(FunctionDescriptor::kernel_transform(KernelTransform::new(kernel.clone(), f.clone(), opts, TransformMode::OneSided)?))
}

/// Quadrature-only variant of [`infinite_convolution`] with an explicit growth envelope.
pub fn infinite_convolution_quad(
    kernel: &Kernel,
    f: &FunctionDescriptor,
    opts: ConvOptions,
    growth: Option<Growth>,
) -> Result<FunctionDescriptor> {
    let kt = match growth {
        Some(g) => KernelTransform::with_growth(kernel.clone(), f.clone(), opts, TransformMode::OneSided, g)?,
        None => KernelTransform::new(kernel.clone(), f.clone(), opts, TransformMode::OneSided)?,
    };
    Ok(FunctionDescriptor::kernel_transform(kt))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatMethod {
    Analytic,
    Quadrature,
}

/// Multiplies each term `c e^{i<l,x>}` by `e^{-|l|^2 t0}`.
pub fn heat_multiplier(p: &TrigPolynomial, t0: f64) -> TrigPolynomial {
    p.map_coefs(|t| {
        let l2: f64 = t.freq.iter().map(|x| x * x).sum();
        C64::new((-l2 * t0).exp(), 0.0)
    })
}

/// Heat semigroup `(4 pi t0)^{-n/2} int e^{-|y|^2/(4 t0)} f(x - y) dy`.
pub fn heat_apply(
    f: &FunctionDescriptor,
    t0: f64,
    method: HeatMethod,
    growth: Option<Growth>,
) -> Result<FunctionDescriptor> {
    let n = f.dim();
    let kernel = Kernel::Heat { t0, n };
    kernel.validate()?;
    match method {
        HeatMethod::Analytic => {
            let p = f
                .as_trig_polynomial()
                .ok_or_else(|| MetapError::Kind("analytic heat path needs a trigonometric polynomial".into()))?;
            Ok(FunctionDescriptor::trig(heat_multiplier(&p, t0)))
        }
        HeatMethod::Quadrature => {
            let opts = ConvOptions { tail_tol: HEAT_TAIL, rel_tol: 1e-11, abs_tol: 1e-13, panels_per_unit: 2.0 };
            let kt = match growth {
                Some(g) => KernelTransform::with_growth(kernel, f.clone(), opts, TransformMode::Whole, g)?,
                None => KernelTransform::new(kernel, f.clone(), opts, TransformMode::Whole)?,
            };
            Ok(FunctionDescriptor::kernel_transform(kt))
        }
    }
}

/// Residuals of `f(. + tau) - c f` before and after a convolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub gauge: String,
    pub tau: Vec<f64>,
    pub c: C64,
    pub residual_in: f64,
    pub residual_out: f64,
    pub mass: f64,
    /// `residual_out / (mass * residual_in)`; zero when both residuals vanish.
    pub ratio: f64,
    pub tolerance: f64,
    /// Output matches the kernel applied to the input at probe points.
    pub provenance_ok: bool,
    pub passed: bool,
}

/// Widens metric windows and Stepanov outer windows to the left by `lookback`.
fn widen(gauge: &Gauge, lookback: f64) -> Result<Gauge> {
    Ok(match gauge {
        Gauge::Metric { spec } => {
            let mut w = spec.window.clone();
            w.lo[0] -= lookback;
            Gauge::Metric { spec: spec.with_window(w) }
        }
        Gauge::Stepanov { spec, outer } => {
            let mut w = outer.clone();
            w.lo[0] -= lookback;
            Gauge::Stepanov { spec: spec.clone(), outer: w }
        }
        g => g.clone(),
    })
}

fn provenance(kernel: &Kernel, f_in: &FunctionDescriptor, f_out: &FunctionDescriptor, probes: &[f64]) -> bool {
    if let Node::KernelTransform(k) = f_out.node() {
        if &k.kernel == kernel && k.mode == TransformMode::OneSided {
            return true;
        }
    }
    let Ok(reference) = infinite_convolution(kernel, f_in, ConvOptions::default()) else { return false };
    let scale = f_in.sup_bound().unwrap_or(1.0).max(1.0) * kernel.mass();
    probes.iter().all(|&t| {
        let mut a = Value::new();
        let mut b = Value::new();
        reference.eval_into(&[t], &mut a);
        f_out.eval_into(&[t], &mut b);
        let d: Value = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        a.len() == b.len() && value_norm(&d) <= 1e-6 * scale
    })
}

/// Compares `gauge(F(. + tau), c F)` with `mass * gauge(f(. + tau), c f)`.
///
/// The input residual is measured on the gauge window widened to the left
/// by `lookback`, covering the history the convolution draws on.
#[allow(clippy::too_many_arguments)]
pub fn preservation_report(
    f_in: &FunctionDescriptor,
    f_out: &FunctionDescriptor,
    kernel: &Kernel,
    gauge: &Gauge,
    tau: &[f64],
    c: &Multiplier,
    lookback: f64,
    tolerance: f64,
) -> Result<PreservationReport> {
    kernel.validate()?;
    let residual = |f: &FunctionDescriptor, g: &Gauge| -> Result<f64> { g.measure(&translate(f, tau)?, &f.scale(c.c)) };
    let residual_in = residual(f_in, &widen(gauge, lookback)?)?;
    let residual_out = residual(f_out, gauge)?;
    let mass = kernel.mass();
    let ratio = if residual_out == 0.0 {
        0.0
    } else {
        residual_out / (mass * residual_in)
    };
    let probes: Vec<f64> = (0..5).map(|k| 7.3 * k as f64 - 3.1).collect();
    let provenance_ok = f_in.dim() == 1 && provenance(kernel, f_in, f_out, &probes);
    let passed = residual_out <= mass * residual_in + tolerance;
    Ok(PreservationReport {
        gauge: gauge.name(),
        tau: tau.to_vec(),
        c: c.c,
        residual_in,
        residual_out,
        mass,
        ratio,
        tolerance,
        provenance_ok,
        passed,
    })
}

/// `int_{[-t,t]^n} nu^p <= M0 t^{a p}` along a grid of `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightGrowthReport {
    pub t_grid: Vec<f64>,
    pub integrals: Vec<f64>,
    pub bounds: Vec<f64>,
    pub passed: bool,
}

pub fn weight_growth_check(nu: &WeightFunction, p: f64, a: f64, m0: f64, t_grid: &[f64]) -> Result<WeightGrowthReport> {
    nu.validate()?;
    crate::pseudometrics::check_p(p)?;
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("t grid must be positive"));
    }
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-10, initial_panels: 16, ..QuadOptions::default() };
    let integrals = par::map_slice(t_grid, |&t| {
        let g = |s: f64| nu.eval(&[s]).powf(p);
        adaptive(g, -t, 0.0, &opts).value + adaptive(g, 0.0, t, &opts).value
    });
    let bounds: Vec<f64> = t_grid.iter().map(|t| m0 * t.powf(a * p)).collect();
    let passed = integrals.iter().zip(&bounds).all(|(i, b)| i <= b);
    Ok(WeightGrowthReport { t_grid: t_grid.to_vec(), integrals, bounds, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{Domain, SeriesFamily, Window};
    use crate::pseudometrics::{MetricFamily, PseudometricSpec};
    use std::sync::Arc;

    fn quad_exp(f: &FunctionDescriptor) -> FunctionDescriptor {
        infinite_convolution_quad(&Kernel::ExpDecay { mu: 1.0 }, f, ConvOptions::default(), None).unwrap()
    }

    #[test]
    fn exp_decay_closed_form_and_quadrature_agree() {
        for w in [0.0, 1.0, 3.0] {
            let f = FunctionDescriptor::exp_i(w);
            let fast = infinite_convolution(&Kernel::ExpDecay { mu: 1.0 }, &f, ConvOptions::default()).unwrap();
            let slow = quad_exp(&f);
            for t in [-2.0, 0.0, 1.5, 10.0] {
                let want = C64::cis(w * t) / C64::new(1.0, w);
                assert!((fast.eval1(t) - want).norm() < 1e-14);
                assert!((slow.eval1(t) - want).norm() < 1e-8, "w={w} t={t}");
            }
        }
        let one = quad_exp(&FunctionDescriptor::constant(C64::new(1.0, 0.0)));
        assert!((one.eval1(3.0) - 1.0).norm() < 1e-9);
    }

    #[test]
    fn power_bound_mass_and_tail() {
        let k = Kernel::PowerBound { m: 1.0, beta: 0.5, gamma: 2.0 };
        let num = adaptive(|u: f64| 2.0 / (1.0 + u.powi(4)), 0.0, 1e3, &QuadOptions { initial_panels: 64, ..QuadOptions::default() });
        assert!((k.mass() - num.value).abs() < 1e-6);
        for s in [1.0f64, 4.0, 100.0] {
            let exact = adaptive(|u: f64| 2.0 / (1.0 + u.powi(4)), s.sqrt(), 1e4, &QuadOptions { initial_panels: 64, ..QuadOptions::default() });
            assert!(exact.value <= k.tail_bound(s));
        }
    }

    #[test]
    fn power_bound_halved_tolerance_self_consistency() {
        let k = Kernel::PowerBound { m: 1.0, beta: 0.5, gamma: 2.0 };
        let tol = 1e-6;
        let a = infinite_convolution_quad(&k, &FunctionDescriptor::sin(), ConvOptions { tail_tol: tol, ..ConvOptions::default() }, None).unwrap();
        let b = infinite_convolution_quad(&k, &FunctionDescriptor::sin(), ConvOptions { tail_tol: tol / 2.0, ..ConvOptions::default() }, None).unwrap();
        for t in [0.0, 1.0, 5.0] {
            assert!((a.eval1(t) - b.eval1(t)).norm() <= 2.0 * tol);
        }
    }

    #[test]
    fn polynomial_growth_needs_room_under_gamma_minus_beta() {
        let lin = FunctionDescriptor::custom(
            "t",
            Domain::Whole { dim: 1 },
            1,
            None,
            Arc::new(|t: &[f64], out: &mut Value| {
                out.clear();
                out.push(C64::new(t[0], 0.0));
            }),
        );
        let k = Kernel::PowerBound { m: 1.0, beta: 0.5, gamma: 2.0 };
        assert!(infinite_convolution_quad(&k, &lin, ConvOptions::default(), None).is_err());
        assert!(infinite_convolution_quad(&k, &lin, ConvOptions::default(), Some(Growth { m: 1.0, b: 2.0 })).is_err());
        let f = infinite_convolution_quad(&k, &lin, ConvOptions { tail_tol: 1e-6, ..ConvOptions::default() }, Some(Growth { m: 1.0, b: 1.0 })).unwrap();
        assert!(f.eval1(0.0).re.is_finite());
    }

    #[test]
    fn convolution_is_linear() {
        let f = FunctionDescriptor::real_trig(&[(1.0, 1.0, 0.0)]).unwrap();
        let g = FunctionDescriptor::real_trig(&[(2.5, 0.0, 1.0)]).unwrap();
        let combo = FunctionDescriptor::linear_combination(vec![(C64::new(2.0, 0.0), f.clone()), (C64::new(-0.5, 0.0), g.clone())]).unwrap();
        let (cf, cg, cc) = (quad_exp(&f), quad_exp(&g), quad_exp(&combo));
        for t in [0.0, 2.0, 7.0] {
            assert!((cc.eval1(t) - (2.0 * cf.eval1(t) - 0.5 * cg.eval1(t))).norm() < 1e-8);
        }
    }

    #[test]
    fn heat_paths() {
        let e = FunctionDescriptor::exp_i(1.0);
        let a = heat_apply(&e, 1.0, HeatMethod::Analytic, None).unwrap();
        assert!((a.eval1(0.0).re - (-1.0f64).exp()).abs() < 1e-15);
        let q = heat_apply(&e, 1.0, HeatMethod::Quadrature, None).unwrap();
        for x in [0.0, 0.7, 3.0] {
            assert!((q.eval1(x) - a.eval1(x)).norm() < 1e-6);
        }
        for t0 in [0.5, 1.0, 2.0] {
            let one = heat_apply(&FunctionDescriptor::constant(C64::new(1.0, 0.0)), t0, HeatMethod::Quadrature, None).unwrap();
            assert!((one.eval1(1.3) - 1.0).norm() <= 1e-6);
        }
        assert!(heat_apply(&FunctionDescriptor::series(SeriesFamily::Gevrey { s: 2.0 }, Some(4)).unwrap(), 1.0, HeatMethod::Analytic, None).is_err());
    }

    #[test]
    fn heat_two_dimensional_quadrature() {
        let p = TrigPolynomial::new(2, 1, vec![crate::funcspace::TrigTerm { freq: vec![1.0, 0.5], coef: smallvec::smallvec![C64::new(1.0, 0.0)] }]).unwrap();
        let f = FunctionDescriptor::trig(p);
        let a = heat_apply(&f, 0.5, HeatMethod::Analytic, None).unwrap();
        let q = heat_apply(&f, 0.5, HeatMethod::Quadrature, None).unwrap();
        let x = [0.3, -1.2];
        let d: f64 = (a.eval(&x).unwrap()[0] - q.eval(&x).unwrap()[0]).norm();
        assert!(d < 1e-6);
        assert!(heat_apply(&FunctionDescriptor::exp_i(1.0), 1.0, HeatMethod::Quadrature, None).is_ok());
    }

    #[test]
    fn heat_semigroup_on_coefficients() {
        let p = TrigPolynomial::scalar(&[(1.0, C64::new(1.0, 0.5)), (2.0, C64::new(-0.3, 0.0))]).unwrap();
        let lhs = heat_multiplier(&heat_multiplier(&p, 0.3), 0.7);
        let rhs = heat_multiplier(&p, 1.0);
        for (a, b) in lhs.terms().iter().zip(rhs.terms()) {
            assert!((a.coef[0] - b.coef[0]).norm() < 1e-15);
        }
    }

    #[test]
    fn preservation_at_exact_period() {
        let f = FunctionDescriptor::exp_i(1.0);
        let k = Kernel::ExpDecay { mu: 1.0 };
        let out = infinite_convolution(&k, &f, ConvOptions::default()).unwrap();
        let spec = PseudometricSpec::new(MetricFamily::BvpComposite { p: 1.0 }, Window::interval(0.0, 20.0).unwrap(), 16.0).unwrap();
        let r = preservation_report(&f, &out, &k, &Gauge::Metric { spec }, &[2.0 * PI], &Multiplier::one(), 10.0, 1e-9).unwrap();
        assert!(r.passed && r.provenance_ok);
        assert!(r.residual_out < 1e-12);
        let wrong = FunctionDescriptor::exp_i(2.0);
        let spec = PseudometricSpec::new(MetricFamily::sup(), Window::interval(0.0, 20.0).unwrap(), 16.0).unwrap();
        let r = preservation_report(&f, &wrong, &k, &Gauge::Metric { spec }, &[1.0], &Multiplier::one(), 10.0, 1e-9).unwrap();
        assert!(!r.provenance_ok);
    }

    #[test]
    fn weight_growth_closed_form() {
        let nu = WeightFunction::PowerRadial { b: 0.5 };
        let grid = [10.0, 20.0, 40.0, 80.0];
        let r = weight_growth_check(&nu, 1.0, 1.5, 2.0, &grid).unwrap();
        assert!(r.passed);
        for (t, i) in grid.iter().zip(&r.integrals) {
            let exact = (4.0 / 3.0) * ((1.0 + t).powf(1.5) - 1.0);
            assert!((i - exact).abs() < 1e-8 * exact);
        }
        assert!(!weight_growth_check(&nu, 1.0, 1.5, 1.0, &grid).unwrap().passed);
    }
}
