//! Stepanov, equi-Weyl and Besicovitch seminorms, the Besicovitch
//! pseudometric and Stepanov-boundedness scans.
//!
//! Inner integrals use composite trapezoid sums on a uniform node grid that
//! is shared by all anchors, so a window integral over `[t, t + l]` equals
//! the sum of its unit-cell integrals up to round-off.

mod scan;

use serde::{Deserialize, Serialize};

pub use scan::{stepanov_bound_scan, StepanovScan, ScanOptions};

use crate::error::{invalid, MetapError, Result};
use crate::funcspace::{value_norm, FunctionDescriptor, ScalarMap, Value, WeightFunction, Window};
use crate::grid::{geometric_grid as geo, AxisGrid, TensorGrid};
use crate::par;
use crate::pseudometrics::{check_p, distance_value, sample_axis, PseudometricSpec};

/// Default geometric grid `T0 r^k`: `T0 = 10`, `r = 2`, 12 points.
pub const DEFAULT_T0: f64 = 10.0;
pub const DEFAULT_RATIO: f64 = 2.0;
pub const DEFAULT_POINTS: usize = 12;

pub fn geometric_grid(t0: f64, r: f64, count: usize) -> Result<Vec<f64>> {
    geo(t0, r, count)
}

pub fn default_t_grid() -> Vec<f64> {
    geo(DEFAULT_T0, DEFAULT_RATIO, DEFAULT_POINTS).expect("valid defaults")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormFamily {
    Stepanov,
    Weyl,
    Besicovitch,
}

/// Outer weight `F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scaling", rename_all = "snake_case")]
pub enum OuterScaling {
    Unit,
    Constant { c: f64 },
    /// `t^{-a}` (Besicovitch radius `t`).
    PowerDecay { a: f64 },
    /// `l^{-n/p}` (Weyl window length `l`).
    WeylDefault,
}

impl OuterScaling {
    fn factor(&self, x: f64, n: usize, p: f64) -> f64 {
        match *self {
            OuterScaling::Unit => 1.0,
            OuterScaling::Constant { c } => c,
            OuterScaling::PowerDecay { a } => x.powf(-a),
            OuterScaling::WeylDefault => x.powf(-(n as f64) / p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormSpec {
    pub family: SeminormFamily,
    pub p: f64,
    /// Cell `Omega` (Stepanov, Weyl).
    pub cell: Window,
    /// Comparator `phi`, monotone with `phi(0) = 0`.
    pub phi: ScalarMap,
    pub outer: OuterScaling,
    /// Inner weight `nu`, evaluated at the cell offset `s` (Stepanov, Weyl)
    /// or at the absolute point (Besicovitch).
    pub nu: WeightFunction,
    /// Quadrature nodes per unit length.
    pub grid_density: f64,
    /// Anchors per unit length for outer suprema.
    pub anchor_density: f64,
}

impl SeminormSpec {
    fn base(family: SeminormFamily, p: f64, outer: OuterScaling, grid_density: f64) -> Result<Self> {
        let s = SeminormSpec {
            family,
            p,
            cell: Window::interval(0.0, 1.0)?,
            phi: ScalarMap::identity(),
            outer,
            nu: WeightFunction::one(),
            grid_density,
            anchor_density: 16.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// `sup_t ||h||_{L^p(t + [0,1])}`.
    pub fn stepanov(p: f64) -> Result<Self> {
        Self::base(SeminormFamily::Stepanov, p, OuterScaling::Unit, 64.0)
    }

    /// `l^{-1/p} sup_t ||h||_{L^p(t + [0,l])}`.
    pub fn weyl(p: f64) -> Result<Self> {
        Self::base(SeminormFamily::Weyl, p, OuterScaling::WeylDefault, 64.0)
    }

    /// `t^{-a} ||h||_{L^p([-t,t])}`.
    pub fn besicovitch(p: f64, a: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(invalid(format!("Besicovitch exponent must be >= 0, got {a}")));
        }
        Self::base(SeminormFamily::Besicovitch, p, OuterScaling::PowerDecay { a }, 16.0)
    }

    pub fn with_cell(mut self, cell: Window) -> Result<Self> {
        self.cell = cell;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phi(mut self, phi: ScalarMap) -> Result<Self> {
        self.phi = phi;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nu(mut self, nu: WeightFunction) -> Result<Self> {
        self.nu = nu;
        self.validate()?;
        Ok(self)
    }

    pub fn with_grid_density(mut self, g: f64) -> Result<Self> {
        self.grid_density = g;
        self.validate()?;
        Ok(self)
    }

    pub fn with_anchor_density(mut self, a: f64) -> Result<Self> {
        self.anchor_density = a;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        self.phi.validate_comparator()?;
        self.nu.validate()?;
        if !(self.cell.volume() > 0.0) {
            return Err(invalid("cell must have positive volume"));
        }
        for d in [self.grid_density, self.anchor_density] {
            if !(d > 0.0) || !d.is_finite() {
                return Err(invalid(format!("densities must be positive, got {d}")));
            }
        }
        Ok(())
    }

    /// `phi(||v||)^p * nu^p`.
    #[inline]
    fn integrand(&self, v: &Value, nu: f64) -> f64 {
        let x = self.phi.apply_real(value_norm(v)) * nu;
        if self.p == 1.0 {
            x
        } else {
            x.powf(self.p)
        }
    }

    fn root(&self, x: f64) -> f64 {
        if self.p == 1.0 {
            x
        } else {
            x.powf(1.0 / self.p)
        }
    }

    fn expect(&self, family: SeminormFamily) -> Result<()> {
        if self.family == family {
            Ok(())
        } else {
            Err(MetapError::Kind(format!("expected a {family:?} spec, got {:?}", self.family)))
        }
    }

    /// Nodes per unit, rounded to a multiple of the anchor density.
    fn node_layout(&self) -> (usize, usize) {
        let a = self.anchor_density.round().max(1.0) as usize;
        let stride = (self.grid_density / a as f64).round().max(1.0) as usize;
        (a * stride, stride)
    }
}

/// Seminorm values along an abscissa grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormCurve {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub limit_estimate: f64,
    pub estimator: String,
}

/// Max over the final third of the grid (at least one point).
pub fn tail_max(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let start = values.len() - values.len().div_ceil(3);
    values[start..].iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl SeminormCurve {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>) -> Self {
        let limit_estimate = tail_max(&values);
        SeminormCurve { abscissae, values, limit_estimate, estimator: "max over final third of the grid".into() }
    }
}

/// Samples `s -> f(t + s)` over the cell grid.
#[derive(Clone, Debug)]
pub struct WindowSample {
    pub offsets: Vec<Vec<f64>>,
    pub values: Vec<Value>,
}

pub fn bochner_transform(f: &FunctionDescriptor, t: &[f64], cell: &Window, density: f64) -> Result<WindowSample> {
    if t.len() != cell.dim() || f.dim() != cell.dim() {
        return Err(invalid("anchor, cell and function dimensions differ"));
    }
    let shifted = cell.shifted(t);
    if !f.domain().covers(&shifted) {
        return Err(MetapError::Domain { point: t.to_vec() });
    }
    let grid = TensorGrid::covering(cell, density)?;
    let offsets = grid.points();
    let values = par::map_slice(&offsets, |s| {
        let p: Vec<f64> = s.iter().zip(t).map(|(a, b)| a + b).collect();
        let mut out = Value::new();
        f.eval_into(&p, &mut out);
        out
    });
    Ok(WindowSample { offsets, values })
}

fn check_outer(h: &FunctionDescriptor, outer: &Window, cell: &Window, extra: f64) -> Result<()> {
    if outer.dim() != cell.dim() || h.dim() != cell.dim() {
        return Err(invalid("outer window, cell and function dimensions differ"));
    }
    let need = Window {
        lo: outer.lo.iter().zip(&cell.lo).map(|(a, c)| a + c).collect(),
        hi: outer.hi.iter().zip(&cell.hi).map(|(b, c)| b + c + extra).collect(),
    };
    if !h.domain().covers(&need) {
        return Err(MetapError::Domain { point: need.hi });
    }
    Ok(())
}

/// Integrals of the inner integrand over `t_j + scale * cell` for anchors
/// `t_j = a + j / anchors_per_unit` on a one-dimensional outer window.
fn window_integrals_1d(h: &FunctionDescriptor, spec: &SeminormSpec, outer: &Window, scale: f64) -> Result<Vec<f64>> {
    let (nodes_per_unit, stride) = spec.node_layout();
    let g = nodes_per_unit as f64;
    let c0 = spec.cell.lo[0] * scale;
    let len = (spec.cell.hi[0] - spec.cell.lo[0]) * scale;
    let m = (len * g).round().max(1.0) as usize;
    let (a, b) = (outer.lo[0], outer.hi[0]);
    let anchors = ((b - a) * g / stride as f64).round() as usize + 1;
    let cells = (anchors - 1) * stride + m;
    let grid = AxisGrid::with_step(a + c0, nodes_per_unit, cells);
    let samples = sample_axis(h, &grid);
    let weights: Vec<f64> = if spec.nu.is_unit() {
        vec![1.0; m + 1]
    } else {
        (0..=m).map(|i| spec.nu.eval(&[c0 + i as f64 / g])).collect()
    };
    let vals: Vec<f64> = if spec.nu.is_unit() {
        samples.iter().map(|v| spec.integrand(v, 1.0)).collect()
    } else {
        Vec::new()
    };
    let hstep = 1.0 / g;
    Ok(par::map_range(anchors, |j| {
        let base = j * stride;
        let mut s = 0.0;
        for i in 0..=m {
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            let v = if spec.nu.is_unit() { vals[base + i] } else { spec.integrand(&samples[base + i], weights[i]) };
            s += w * v;
        }
        s * hstep
    }))
}

fn window_integrals_nd(h: &FunctionDescriptor, spec: &SeminormSpec, outer: &Window, scale: f64) -> Result<Vec<f64>> {
    let anchors = TensorGrid::covering(outer, spec.anchor_density)?;
    let cell = Window {
        lo: spec.cell.lo.iter().map(|x| x * scale).collect(),
        hi: spec.cell.hi.iter().map(|x| x * scale).collect(),
    };
    let cg = TensorGrid::covering(&cell, spec.grid_density)?;
    let offsets = cg.points();
    let nus: Vec<f64> = offsets.iter().map(|s| spec.nu.eval(s)).collect();
    Ok(par::map_range(anchors.len(), |k| {
        let mut t = Vec::new();
        anchors.point(k, &mut t);
        let mut out = Value::new();
        let mut s = 0.0;
        for (idx, off) in offsets.iter().enumerate() {
            let p: Vec<f64> = off.iter().zip(&t).map(|(a, b)| a + b).collect();
            h.eval_into(&p, &mut out);
            s += cg.weight(idx) * spec.integrand(&out, nus[idx]);
        }
        s
    }))
}

fn window_integrals(h: &FunctionDescriptor, spec: &SeminormSpec, outer: &Window, scale: f64) -> Result<Vec<f64>> {
    if spec.cell.dim() == 1 {
        window_integrals_1d(h, spec, outer, scale)
    } else {
        window_integrals_nd(h, spec, outer, scale)
    }
}

/// `F * sup_t (int_Omega phi(||h(t+s)||)^p nu(s)^p ds)^{1/p}` over anchors of `outer_window`.
pub fn stepanov_seminorm(h: &FunctionDescriptor, spec: &SeminormSpec, outer_window: &Window) -> Result<f64> {
    spec.expect(SeminormFamily::Stepanov)?;
    check_outer(h, outer_window, &spec.cell, 0.0)?;
    let ints = window_integrals(h, spec, outer_window, 1.0)?;
    let top = ints.into_iter().fold(0.0, f64::max);
    let n = spec.cell.dim();
    Ok(spec.outer.factor(1.0, n, spec.p) * spec.root(top))
}

/// For each `l`: `F(l) * sup_t ||h||_{L^p(t + l Omega)}`.
pub fn weyl_seminorm_curve(
    h: &FunctionDescriptor,
    spec: &SeminormSpec,
    outer_window: &Window,
    l_grid: &[f64],
) -> Result<SeminormCurve> {
    spec.expect(SeminormFamily::Weyl)?;
    if l_grid.iter().any(|l| !(*l > 0.0)) || l_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("l grid must be positive and strictly increasing"));
    }
    let lmax = l_grid.last().copied().unwrap_or(1.0);
    check_outer(h, outer_window, &spec.cell, 0.0)?;
    let span = spec.cell.hi.iter().zip(&spec.cell.lo).map(|(b, a)| b - a).fold(0.0, f64::max);
    if !h.domain().is_whole() {
        check_outer(h, outer_window, &spec.cell, (lmax - 1.0) * span)?;
    }
    let n = spec.cell.dim();
    let mut values = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let ints = window_integrals(h, spec, outer_window, l)?;
        let top = ints.into_iter().fold(0.0, f64::max);
        values.push(spec.outer.factor(l, n, spec.p) * spec.root(top));
    }
    Ok(SeminormCurve::new(l_grid.to_vec(), values))
}

/// For each `t`: `F(t) (int_{[-t,t]^n} phi(||h||)^p nu^p)^{1/p}`.
pub fn besicovitch_seminorm_curve(h: &FunctionDescriptor, spec: &SeminormSpec, t_grid: &[f64]) -> Result<SeminormCurve> {
    spec.expect(SeminormFamily::Besicovitch)?;
    if t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("t grid must be positive and strictly increasing"));
    }
    let n = h.dim();
    let tmax = t_grid.last().copied().unwrap_or(0.0);
    let full = Window::new(vec![-tmax; n], vec![tmax; n])?;
    if !h.domain().covers(&full) {
        return Err(MetapError::Domain { point: full.hi });
    }
    let integrals = if n == 1 { besicovitch_shells(h, spec, t_grid)? } else { besicovitch_boxes(h, spec, t_grid)? };
    let values = t_grid
        .iter()
        .zip(&integrals)
        .map(|(&t, &i)| spec.outer.factor(t, n, spec.p) * spec.root(i))
        .collect();
    Ok(SeminormCurve::new(t_grid.to_vec(), values))
}

fn shell_integral(h: &FunctionDescriptor, spec: &SeminormSpec, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let grid = AxisGrid::covering(a, b, spec.grid_density)?;
    let vals = par::map_range(grid.n, |i| {
        let x = grid.node(i);
        let mut out = Value::new();
        h.eval_into(&[x], &mut out);
        grid.weight(i) * spec.integrand(&out, spec.nu.eval(&[x]))
    });
    Ok(vals.into_iter().sum())
}

fn besicovitch_shells(h: &FunctionDescriptor, spec: &SeminormSpec, t_grid: &[f64]) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        acc += shell_integral(h, spec, -t, -prev)? + shell_integral(h, spec, prev, t)?;
        prev = t;
        out.push(acc);
    }
    Ok(out)
}

/// Points per axis cap for multi-dimensional Besicovitch boxes.
const MAX_AXIS_NODES: f64 = 2048.0;

fn besicovitch_boxes(h: &FunctionDescriptor, spec: &SeminormSpec, t_grid: &[f64]) -> Result<Vec<f64>> {
    let n = h.dim();
    t_grid
        .iter()
        .map(|&t| {
            let w = Window::new(vec![-t; n], vec![t; n])?;
            let density = spec.grid_density.min(MAX_AXIS_NODES / (2.0 * t));
            let grid = TensorGrid::covering(&w, density)?;
            let vals = par::map_range(grid.len(), |k| {
                let mut p = Vec::new();
                grid.point(k, &mut p);
                let mut out = Value::new();
                h.eval_into(&p, &mut out);
                grid.weight(k) * spec.integrand(&out, spec.nu.eval(&p))
            });
            Ok(vals.into_iter().sum())
        })
        .collect()
}

/// `d_B(f, g)`: limit estimate of the Besicovitch curve of `f - g`.
pub fn besicovitch_pseudometric(
    f: &FunctionDescriptor,
    g: &FunctionDescriptor,
    spec: &SeminormSpec,
    t_grid: &[f64],
) -> Result<f64> {
    Ok(besicovitch_seminorm_curve(&f.sub(g)?, spec, t_grid)?.limit_estimate)
}

/// A distance-like gauge: a pseudometric or one of the seminorms applied to `f - g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gauge", rename_all = "snake_case")]
pub enum Gauge {
    Metric { spec: PseudometricSpec },
    Stepanov { spec: SeminormSpec, outer: Window },
    Weyl { spec: SeminormSpec, outer: Window, l_grid: Vec<f64> },
    Besicovitch { spec: SeminormSpec, t_grid: Vec<f64> },
}

impl Gauge {
    pub fn measure(&self, f: &FunctionDescriptor, g: &FunctionDescriptor) -> Result<f64> {
        match self {
            Gauge::Metric { spec } => distance_value(spec, f, g),
            Gauge::Stepanov { spec, outer } => stepanov_seminorm(&f.sub(g)?, spec, outer),
            Gauge::Weyl { spec, outer, l_grid } => Ok(weyl_seminorm_curve(&f.sub(g)?, spec, outer, l_grid)?.limit_estimate),
            Gauge::Besicovitch { spec, t_grid } => besicovitch_pseudometric(f, g, spec, t_grid),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Gauge::Metric { spec } => spec.family.name().to_string(),
            Gauge::Stepanov { .. } => "stepanov".into(),
            Gauge::Weyl { .. } => "weyl".into(),
            Gauge::Besicovitch { .. } => "besicovitch".into(),
        }
    }

    /// Region translated copies of the function must be evaluable on.
    pub fn support(&self) -> Option<Window> {
        match self {
            Gauge::Metric { spec } => Some(spec.support()),
            Gauge::Stepanov { spec, outer } => Some(Window {
                lo: outer.lo.iter().zip(&spec.cell.lo).map(|(a, c)| a + c).collect(),
                hi: outer.hi.iter().zip(&spec.cell.hi).map(|(b, c)| b + c).collect(),
            }),
            _ => None,
        }
    }
}
