//! Immutable symbolic descriptors of functions `Lambda ⊆ R^n -> C^d`.
//!
//! Descriptors are cheap to clone (shared children live behind `Arc`) and
//! evaluation is a pure function of the descriptor and the point. Sums over
//! terms use a fixed pairwise tree, so a value never depends on how callers
//! schedule evaluations.

mod json;
mod scalar;
mod series;
mod trig;
mod weight;

use std::fmt;
use std::sync::Arc;

pub use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use json::{descriptor_from_json, descriptor_to_json};
pub(crate) use scalar::interp_linear;
pub use scalar::{ScalarMap, ScalarMapFamily};
pub use series::{
    digamma, gevrey_block, gevrey_g, gevrey_psi, gevrey_psi_max, gevrey_sum, harmonic, haraux_window_tail,
    semi_anti_derivative_tail, trigamma, zeta, ClosedForm, SeriesFamily,
};
pub use trig::{TrigPolynomial, TrigTerm};
pub use weight::WeightFunction;

use crate::convops::KernelTransform;
use crate::error::{invalid, MetapError, Result};
use crate::pseudometrics::{distance_value, PseudometricSpec};

/// A point of the codomain `C^d`.
pub type Value = SmallVec<[C64; 2]>;

pub fn zero_value(d: usize) -> Value {
    smallvec::smallvec![C64::new(0.0, 0.0); d]
}

/// Euclidean norm of a codomain value.
#[inline]
pub fn value_norm(v: &Value) -> f64 {
    if v.len() == 1 {
        v[0].norm()
    } else {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sums `term(0..n)` along a fixed balanced tree with leaf blocks of 8.
pub fn pairwise_sum(n: usize, term: &(dyn Fn(usize) -> C64 + Sync)) -> C64 {
    fn rec(lo: usize, hi: usize, term: &(dyn Fn(usize) -> C64 + Sync)) -> C64 {
        if hi - lo <= 8 {
            let mut s = C64::new(0.0, 0.0);
            for k in lo..hi {
                s += term(k);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, term) + rec(mid, hi, term)
        }
    }
    rec(0, n, term)
}

/// Closed box `prod [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid("window bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(invalid(format!("malformed window {lo:?}..{hi:?}")));
        }
        Ok(Window { lo, hi })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        t.len() == self.dim() && t.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        if self.dim() != other.dim() {
            return None;
        }
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        lo.iter().zip(&hi).all(|(a, b)| a <= b).then_some(Window { lo, hi })
    }

    pub fn shifted(&self, tau: &[f64]) -> Window {
        Window {
            lo: self.lo.iter().zip(tau).map(|(a, t)| a + t).collect(),
            hi: self.hi.iter().zip(tau).map(|(b, t)| b + t).collect(),
        }
    }
}

/// Domain of a descriptor: a box or all of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Whole { dim: usize },
    Box { window: Window },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Whole { dim } => *dim,
            Domain::Box { window } => window.dim(),
        }
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        match self {
            Domain::Whole { dim } => t.len() == *dim,
            Domain::Box { window } => window.contains(t),
        }
    }

    pub fn covers(&self, w: &Window) -> bool {
        match self {
            Domain::Whole { dim } => *dim == w.dim(),
            Domain::Box { window } => window.contains_window(w),
        }
    }

    pub fn is_whole(&self) -> bool {
        matches!(self, Domain::Whole { .. })
    }

    pub fn intersect(&self, other: &Domain) -> Result<Domain> {
        if self.dim() != other.dim() {
            return Err(MetapError::IncompatibleDomains(format!(
                "dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        match (self, other) {
            (Domain::Whole { .. }, d) | (d, Domain::Whole { .. }) => Ok(d.clone()),
            (Domain::Box { window: a }, Domain::Box { window: b }) => a
                .intersect(b)
                .map(|window| Domain::Box { window })
                .ok_or_else(|| MetapError::IncompatibleDomains("disjoint boxes".into())),
        }
    }
}

/// Scalar relation `rho = cI`, optionally with one multiplier per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub c: C64,
    pub per_axis: Option<Vec<C64>>,
}

impl Multiplier {
    pub fn new(c: C64) -> Result<Self> {
        if c == C64::new(0.0, 0.0) || !c.is_finite() {
            return Err(invalid("multiplier must be finite and non-zero"));
        }
        Ok(Multiplier { c, per_axis: None })
    }

    pub fn real(c: f64) -> Result<Self> {
        Self::new(C64::new(c, 0.0))
    }

    pub fn one() -> Self {
        Multiplier { c: C64::new(1.0, 0.0), per_axis: None }
    }

    pub fn per_axis(cs: Vec<C64>) -> Result<Self> {
        let first = *cs.first().ok_or_else(|| invalid("empty per-axis multiplier list"))?;
        for c in &cs {
            Self::new(*c)?;
        }
        Ok(Multiplier { c: first, per_axis: Some(cs) })
    }

    pub fn modulus(&self) -> f64 {
        self.c.norm()
    }

    pub fn is_unit(&self) -> bool {
        (self.modulus() - 1.0).abs() <= 4.0 * f64::EPSILON
    }

    /// Multiplier attached to axis `j`.
    pub fn axis(&self, j: usize) -> C64 {
        self.per_axis.as_ref().and_then(|v| v.get(j).copied()).unwrap_or(self.c)
    }

    /// `c^m` for an integer `m`.
    pub fn pow(&self, m: i64) -> C64 {
        self.c.powi(m as i32)
    }
}

/// Pointwise closure used for user-supplied functions.
pub type CustomFn = Arc<dyn Fn(&[f64], &mut Value) + Send + Sync>;

/// Coarse classification of descriptors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorKind {
    TrigPoly,
    Series,
    ClosedForm,
    KernelTransform,
    ScalarComposed,
    Tabulated,
    Translated,
    Combination,
    Modulated,
    Custom,
}

#[derive(Clone)]
pub enum Node {
    TrigPoly(TrigPolynomial),
    Series { family: SeriesFamily, trunc: usize },
    Closed(ClosedForm),
    KernelTransform(Arc<KernelTransform>),
    ScalarComposed { map: ScalarMap, inner: Arc<FunctionDescriptor> },
    /// One-dimensional samples with linear interpolation.
    Tabulated { xs: Arc<Vec<f64>>, values: Arc<Vec<Value>> },
    Translated { shift: Vec<f64>, inner: Arc<FunctionDescriptor> },
    Combination(Vec<(C64, FunctionDescriptor)>),
    Modulated { freq: Vec<f64>, inner: Arc<FunctionDescriptor> },
    Custom { name: String, f: CustomFn, sup: Option<f64> },
}

/// Pointwise growth envelope `|f(t)| <= m (1 + |t|)^b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub m: f64,
    pub b: f64,
}

#[derive(Clone)]
pub struct FunctionDescriptor {
    domain: Domain,
    codim: usize,
    node: Node,
}

impl fmt::Debug for FunctionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionDescriptor({:?}, dim={}, codim={})", self.kind(), self.dim(), self.codim)
    }
}

impl FunctionDescriptor {
    pub fn trig(p: TrigPolynomial) -> Self {
        FunctionDescriptor { domain: Domain::Whole { dim: p.dim() }, codim: p.codim(), node: Node::TrigPoly(p) }
    }

    /// `e^{i freq t}` on the line.
    pub fn exp_i(freq: f64) -> Self {
        Self::trig(TrigPolynomial::scalar(&[(freq, C64::new(1.0, 0.0))]).expect("finite"))
    }

    pub fn constant(c: C64) -> Self {
        Self::trig(TrigPolynomial::scalar(&[(0.0, c)]).expect("finite"))
    }

    pub fn zero() -> Self {
        Self::trig(TrigPolynomial::zero(1, 1))
    }

    /// `sum_k (a_k cos(w_k t) + b_k sin(w_k t))` as an exact trig polynomial.
    pub fn real_trig(terms: &[(f64, f64, f64)]) -> Result<Self> {
        let mut out = Vec::new();
        for &(w, a, b) in terms {
            // a cos + b sin = ((a - ib)/2) e^{iwt} + ((a + ib)/2) e^{-iwt}
            out.push((w, C64::new(a / 2.0, -b / 2.0)));
            out.push((-w, C64::new(a / 2.0, b / 2.0)));
        }
        Ok(Self::trig(TrigPolynomial::scalar(&out)?))
    }

    pub fn sin() -> Self {
        Self::real_trig(&[(1.0, 0.0, 1.0)]).expect("finite")
    }

    pub fn cos() -> Self {
        Self::real_trig(&[(1.0, 1.0, 0.0)]).expect("finite")
    }

    pub fn series(family: SeriesFamily, trunc: Option<usize>) -> Result<Self> {
        if let SeriesFamily::Gevrey { s } = family {
            if !(s > 1.0) {
                return Err(invalid(format!("Gevrey order must exceed 1, got {s}")));
            }
        }
        Ok(FunctionDescriptor {
            domain: Domain::Whole { dim: 1 },
            codim: 1,
            node: Node::Series { family, trunc: trunc.unwrap_or_else(|| family.default_trunc()) },
        })
    }

    pub fn closed(form: ClosedForm) -> Result<Self> {
        if let ClosedForm::GevreyBlock { s, n } = form {
            if !(s > 1.0) || n == 0 {
                return Err(invalid("Gevrey block needs s > 1 and n >= 1"));
            }
        }
        Ok(FunctionDescriptor { domain: Domain::Whole { dim: 1 }, codim: 1, node: Node::Closed(form) })
    }

    pub fn tabulated(xs: Vec<f64>, values: Vec<Value>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(invalid("tabulated function needs >= 2 samples and matching lengths"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("tabulated abscissae must be strictly increasing"));
        }
        let codim = values[0].len();
        if codim == 0 || values.iter().any(|v| v.len() != codim) {
            return Err(invalid("tabulated values must share a non-zero dimension"));
        }
        let window = Window::interval(xs[0], xs[xs.len() - 1])?;
        Ok(FunctionDescriptor {
            domain: Domain::Box { window },
            codim,
            node: Node::Tabulated { xs: Arc::new(xs), values: Arc::new(values) },
        })
    }

    /// Wraps a closure; `sup` is an optional declared bound on `|f|`.
    pub fn custom(name: &str, domain: Domain, codim: usize, sup: Option<f64>, f: CustomFn) -> Self {
        FunctionDescriptor { domain, codim, node: Node::Custom { name: name.to_string(), f, sup } }
    }

    pub fn kernel_transform(kt: KernelTransform) -> Self {
        let domain = kt.inner.domain.clone();
        let codim = kt.inner.codim;
        FunctionDescriptor { domain, codim, node: Node::KernelTransform(Arc::new(kt)) }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn codomain_dim(&self) -> usize {
        self.codim
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn kind(&self) -> DescriptorKind {
        match &self.node {
            Node::TrigPoly(_) => DescriptorKind::TrigPoly,
            Node::Series { .. } => DescriptorKind::Series,
            Node::Closed(_) => DescriptorKind::ClosedForm,
            Node::KernelTransform(_) => DescriptorKind::KernelTransform,
            Node::ScalarComposed { .. } => DescriptorKind::ScalarComposed,
            Node::Tabulated { .. } => DescriptorKind::Tabulated,
            Node::Translated { .. } => DescriptorKind::Translated,
            Node::Combination(_) => DescriptorKind::Combination,
            Node::Modulated { .. } => DescriptorKind::Modulated,
            Node::Custom { .. } => DescriptorKind::Custom,
        }
    }

    /// Evaluates without a domain check; callers guarantee `t` lies in the domain.
    pub fn eval_into(&self, t: &[f64], out: &mut Value) {
        match &self.node {
            Node::TrigPoly(p) => p.eval_into(t, out),
            Node::Series { family, trunc } => {
                out.clear();
                out.push(family.eval(*trunc, t[0]));
            }
            Node::Closed(c) => {
                out.clear();
                out.push(C64::new(c.eval(t[0]), 0.0));
            }
            Node::KernelTransform(k) => k.eval_into(t, out),
            Node::ScalarComposed { map, inner } => {
                let mut tmp = Value::new();
                inner.eval_into(t, &mut tmp);
                map.apply(&tmp, out);
            }
            Node::Tabulated { xs, values } => {
                let x = t[0];
                let n = xs.len();
                let k = (xs.partition_point(|&a| a <= x).max(1) - 1).min(n - 2);
                let w = ((x - xs[k]) / (xs[k + 1] - xs[k])).clamp(0.0, 1.0);
                out.clear();
                out.extend(values[k].iter().zip(values[k + 1].iter()).map(|(a, b)| a + (b - a) * w));
            }
            Node::Translated { shift, inner } => {
                let s: SmallVec<[f64; 4]> = t.iter().zip(shift).map(|(a, b)| a + b).collect();
                inner.eval_into(&s, out);
            }
            Node::Combination(parts) => {
                out.clear();
                out.extend(std::iter::repeat_n(C64::new(0.0, 0.0), self.codim));
                let mut tmp = Value::new();
                for (c, f) in parts {
                    f.eval_into(t, &mut tmp);
                    for (o, v) in out.iter_mut().zip(tmp.iter()) {
                        *o += c * v;
                    }
                }
            }
            Node::Modulated { freq, inner } => {
                inner.eval_into(t, out);
                let ph: f64 = freq.iter().zip(t).map(|(l, x)| l * x).sum();
                let e = C64::cis(ph);
                for v in out.iter_mut() {
                    *v *= e;
                }
            }
            Node::Custom { f, .. } => f(t, out),
        }
    }

    /// Checked evaluation at one point.
    pub fn eval(&self, t: &[f64]) -> Result<Value> {
        if !self.domain.contains(t) {
            return Err(MetapError::Domain { point: t.to_vec() });
        }
        let mut out = Value::new();
        self.eval_into(t, &mut out);
        Ok(out)
    }

    /// First component at a one-dimensional point, unchecked.
    #[inline]
    pub fn eval1(&self, t: f64) -> C64 {
        let mut out = Value::new();
        self.eval_into(&[t], &mut out);
        out[0]
    }

    /// Declared bound on `sup |f|`, if any.
    pub fn sup_bound(&self) -> Option<f64> {
        let b = match &self.node {
            Node::TrigPoly(p) => p.coef_norm_sum(),
            Node::Series { family, trunc } => family.sup_bound(*trunc),
            Node::Closed(c) => c.sup_bound(),
            Node::KernelTransform(k) => k.sup_bound()?,
            Node::ScalarComposed { map, inner } => match &map.family {
                ScalarMapFamily::Identity | ScalarMapFamily::Abs => inner.sup_bound()?,
                ScalarMapFamily::Power { alpha } => inner.sup_bound()?.powf(*alpha),
                ScalarMapFamily::Sign => (self.codim as f64).sqrt(),
                ScalarMapFamily::Arctan => (self.codim as f64).sqrt() * std::f64::consts::FRAC_PI_2,
                ScalarMapFamily::MonotoneTable { ys, .. } => ys.iter().fold(0.0f64, |m, y| m.max(y.abs())),
            },
            Node::Tabulated { values, .. } => values.iter().map(value_norm).fold(0.0, f64::max),
            Node::Translated { inner, .. } => inner.sup_bound()?,
            Node::Combination(parts) => {
                let mut s = 0.0;
                for (c, f) in parts {
                    s += c.norm() * f.sup_bound()?;
                }
                s
            }
            Node::Modulated { inner, .. } => inner.sup_bound()?,
            Node::Custom { sup, .. } => (*sup)?,
        };
        b.is_finite().then_some(b)
    }

    /// Polynomial growth envelope, when known.
    pub fn growth(&self) -> Option<Growth> {
        if let Some(m) = self.sup_bound() {
            return Some(Growth { m, b: 0.0 });
        }
        match &self.node {
            Node::KernelTransform(k) => k.inner.growth(),
            Node::Translated { shift, inner } => inner.growth().map(|g| {
                let s: f64 = shift.iter().map(|x| x * x).sum::<f64>().sqrt();
                Growth { m: g.m * (1.0 + s).powf(g.b), b: g.b }
            }),
            _ => None,
        }
    }

    /// Exact trigonometric form, for trig polynomials and trig-representable
    /// series, translates and linear combinations of those.
    pub fn as_trig_polynomial(&self) -> Option<TrigPolynomial> {
        match &self.node {
            Node::TrigPoly(p) => Some(p.clone()),
            Node::Series { family, trunc } => TrigPolynomial::scalar(&family.trig_terms(*trunc)?).ok(),
            Node::Translated { shift, inner } => Some(inner.as_trig_polynomial()?.translate(shift)),
            Node::Combination(parts) => {
                let mut acc = TrigPolynomial::zero(self.dim(), self.codim);
                for (c, f) in parts {
                    acc = acc.add_scaled(&f.as_trig_polynomial()?, *c).ok()?;
                }
                Some(acc)
            }
            Node::Modulated { freq, inner } => inner.as_trig_polynomial()?.modulate(freq).ok(),
            _ => None,
        }
    }

    /// `sum_k c_k f_k` on the intersection of the domains.
    pub fn linear_combination(parts: Vec<(C64, FunctionDescriptor)>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("empty linear combination"))?;
        let codim = first.1.codim;
        let mut domain = first.1.domain.clone();
        for (_, f) in &parts[1..] {
            if f.codim != codim {
                return Err(MetapError::IncompatibleDomains(format!(
                    "codomain dimensions {codim} and {}",
                    f.codim
                )));
            }
            domain = domain.intersect(&f.domain)?;
        }
        let mut flat = Vec::with_capacity(parts.len());
        for (c, f) in parts {
            match f.node {
                Node::Combination(inner) => flat.extend(inner.into_iter().map(|(d, g)| (c * d, g))),
                _ => flat.push((c, f)),
            }
        }
        Ok(FunctionDescriptor { domain, codim, node: Node::Combination(flat) })
    }

    /// `self - other`.
    pub fn sub(&self, other: &FunctionDescriptor) -> Result<Self> {
        Self::linear_combination(vec![(C64::new(1.0, 0.0), self.clone()), (C64::new(-1.0, 0.0), other.clone())])
    }

    /// `c * self`.
    pub fn scale(&self, c: C64) -> Self {
        if let Node::TrigPoly(p) = &self.node {
            return Self::trig(p.scale(c));
        }
        Self::linear_combination(vec![(c, self.clone())]).expect("single part")
    }

    /// `e^{i<freq, t>} * self`.
    pub fn modulate(&self, freq: &[f64]) -> Result<Self> {
        if freq.len() != self.dim() {
            return Err(invalid("modulation frequency has the wrong dimension"));
        }
        if let Node::TrigPoly(p) = &self.node {
            return Ok(Self::trig(p.modulate(freq)?));
        }
        Ok(FunctionDescriptor {
            domain: self.domain.clone(),
            codim: self.codim,
            node: Node::Modulated { freq: freq.to_vec(), inner: Arc::new(self.clone()) },
        })
    }

    /// Restricts the domain to a box.
    pub fn restrict(&self, window: &Window) -> Result<Self> {
        let domain = self.domain.intersect(&Domain::Box { window: window.clone() })?;
        Ok(FunctionDescriptor { domain, codim: self.codim, node: self.node.clone() })
    }

    /// Series family and truncation level, for series descriptors.
    pub fn series_info(&self) -> Option<(SeriesFamily, usize)> {
        match &self.node {
            Node::Series { family, trunc } => Some((*family, *trunc)),
            _ => None,
        }
    }
}

/// Evaluates `desc` at every point, in order.
pub fn evaluate(desc: &FunctionDescriptor, points: &[Vec<f64>]) -> Result<Vec<Value>> {
    if let Some(bad) = points.iter().find(|p| !desc.domain.contains(p)) {
        return Err(MetapError::Domain { point: bad.clone() });
    }
    Ok(crate::par::map_slice(points, |p| {
        let mut out = Value::new();
        desc.eval_into(p, &mut out);
        out
    }))
}

/// `t -> desc(t + tau)`. On a box `Lambda` the result lives on
/// `{t in Lambda : t + tau in Lambda}`; an empty set is an error.
pub fn translate(desc: &FunctionDescriptor, tau: &[f64]) -> Result<FunctionDescriptor> {
    if tau.len() != desc.dim() {
        return Err(invalid(format!("shift of dimension {} for a {}-dimensional domain", tau.len(), desc.dim())));
    }
    let domain = match &desc.domain {
        Domain::Whole { dim } => Domain::Whole { dim: *dim },
        Domain::Box { window } => {
            let back = window.shifted(&tau.iter().map(|x| -x).collect::<Vec<_>>());
            let w = window
                .intersect(&back)
                .ok_or_else(|| MetapError::TranslationLeavesDomain { shift: tau.to_vec() })?;
            Domain::Box { window: w }
        }
    };
    let node = match &desc.node {
        Node::TrigPoly(p) => Node::TrigPoly(p.translate(tau)),
        Node::Translated { shift, inner } => Node::Translated {
            shift: shift.iter().zip(tau).map(|(a, b)| a + b).collect(),
            inner: inner.clone(),
        },
        Node::Combination(parts) => {
            let mut out = Vec::with_capacity(parts.len());
            for (c, f) in parts {
                out.push((*c, translate(f, tau)?));
            }
            Node::Combination(out)
        }
        Node::ScalarComposed { map, inner } => {
            Node::ScalarComposed { map: map.clone(), inner: Arc::new(translate(inner, tau)?) }
        }
        _ => Node::Translated { shift: tau.to_vec(), inner: Arc::new(desc.clone()) },
    };
    Ok(FunctionDescriptor { domain, codim: desc.codim, node })
}

/// `t -> map(desc(t))`.
pub fn compose_scalar(desc: &FunctionDescriptor, map: &ScalarMap) -> FunctionDescriptor {
    if matches!(map.family, ScalarMapFamily::Identity) {
        return desc.clone();
    }
    FunctionDescriptor {
        domain: desc.domain.clone(),
        codim: map.output_dim(desc.codim),
        node: Node::ScalarComposed { map: map.clone(), inner: Arc::new(desc.clone()) },
    }
}

/// Partial sum to `n` terms together with the analytic sup-norm tail bound.
pub fn truncate_series(desc: &FunctionDescriptor, n: usize) -> Result<(FunctionDescriptor, f64)> {
    match &desc.node {
        Node::Series { family, .. } => {
            let tail = family.tail_bound(n);
            let f = if n == 0 {
                FunctionDescriptor::zero()
            } else {
                FunctionDescriptor::series(*family, Some(n))?
            };
            Ok((f, tail))
        }
        _ => Err(MetapError::Kind(format!("truncate_series needs a series, got {:?}", desc.kind()))),
    }
}

/// `distance(spec, desc(. + omega), c * desc)`.
pub fn periodicity_residual(
    desc: &FunctionDescriptor,
    omega: &[f64],
    c: &Multiplier,
    spec: &PseudometricSpec,
) -> Result<f64> {
    let shifted = translate(desc, omega)?;
    let target = desc.scale(c.c);
    distance_value(spec, &shifted, &target)
}
