//! Sampled pseudometrics on descriptors and numeric checks of the space
//! axioms a generalized almost-periodicity analysis relies on.

mod axioms;
mod pvar;

use serde::{Deserialize, Serialize};

pub use axioms::{check_space_axioms, AxiomEntry, AxiomReport};
pub use pvar::{p_variation, p_variation_pow_by, p_variation_values};

use crate::error::{invalid, MetapError, Result};
use crate::funcspace::{value_norm, FunctionDescriptor, TrigPolynomial, Value, WeightFunction, Window};
use crate::grid::{AxisGrid, TensorGrid};
use crate::par;

/// Terms `2^{-k}` of the exhaustion series kept before the tail drops below `1e-12`.
pub const EXHAUSTION_TERMS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricFamily {
    /// `sup ||f - g|| nu`
    WeightedSup { nu: WeightFunction },
    /// `(int ||f - g||^p nu^p)^{1/p}`
    WeightedLp { nu: WeightFunction, p: f64 },
    /// `sup_t (||f - g||(t) + V_p(f - g; [t-1, t+1]))`
    BvpComposite { p: f64 },
    /// `sup_t V_p(f - g; [t-1, t+1])`
    BvpSlow { p: f64 },
    /// `sup |arctan f - arctan g|`, on moduli unless the function is real.
    ArctanSup,
    /// `sum_k 2^{-k} s_k / (1 + s_k)`, `s_k` the sup over `[-k, k]^n`.
    CompactExhaustion,
    /// 0 when the sampled values coincide, 1 otherwise.
    DiscreteUnit,
}

impl MetricFamily {
    pub fn sup() -> Self {
        MetricFamily::WeightedSup { nu: WeightFunction::one() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricFamily::WeightedSup { .. } => "weighted_sup",
            MetricFamily::WeightedLp { .. } => "weighted_lp",
            MetricFamily::BvpComposite { .. } => "bvp_composite",
            MetricFamily::BvpSlow { .. } => "bvp_slow",
            MetricFamily::ArctanSup => "arctan_sup",
            MetricFamily::CompactExhaustion => "compact_exhaustion",
            MetricFamily::DiscreteUnit => "discrete_unit",
        }
    }

    /// One instance of every family, with representative parameters.
    pub fn catalogue() -> Vec<MetricFamily> {
        vec![
            MetricFamily::sup(),
            MetricFamily::WeightedSup { nu: WeightFunction::PowerRadial { b: -0.5 } },
            MetricFamily::WeightedLp { nu: WeightFunction::one(), p: 2.0 },
            MetricFamily::BvpComposite { p: 1.0 },
            MetricFamily::BvpComposite { p: 2.0 },
            MetricFamily::BvpSlow { p: 1.0 },
            MetricFamily::ArctanSup,
            MetricFamily::CompactExhaustion,
            MetricFamily::DiscreteUnit,
        ]
    }

    fn is_bv(&self) -> bool {
        matches!(self, MetricFamily::BvpComposite { .. } | MetricFamily::BvpSlow { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudometricSpec {
    pub family: MetricFamily,
    pub window: Window,
    /// Sample points per unit length.
    pub grid_density: f64,
}

impl PseudometricSpec {
    pub fn new(family: MetricFamily, window: Window, grid_density: f64) -> Result<Self> {
        if !(grid_density > 0.0) || !grid_density.is_finite() {
            return Err(invalid(format!("grid density must be positive, got {grid_density}")));
        }
        match &family {
            MetricFamily::WeightedSup { nu } => nu.validate()?,
            MetricFamily::WeightedLp { nu, p } => {
                nu.validate()?;
                check_p(*p)?;
            }
            MetricFamily::BvpComposite { p } | MetricFamily::BvpSlow { p } => {
                check_p(*p)?;
                if window.dim() != 1 {
                    return Err(MetapError::Unsupported("p-variation metrics need a one-dimensional window".into()));
                }
            }
            _ => {}
        }
        Ok(PseudometricSpec { family, window, grid_density })
    }

    /// Region the descriptors must be evaluable on.
    pub fn support(&self) -> Window {
        if self.family.is_bv() {
            Window { lo: vec![self.window.lo[0] - 1.0], hi: vec![self.window.hi[0] + 1.0] }
        } else {
            self.window.clone()
        }
    }

    pub fn with_density(&self, density: f64) -> Self {
        PseudometricSpec { grid_density: density, ..self.clone() }
    }

    pub fn with_window(&self, window: Window) -> Self {
        PseudometricSpec { window, ..self.clone() }
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent p must be a finite real >= 1, got {p}")))
    }
}

/// A distance together with its grid and a refinement estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceValue {
    pub value: f64,
    /// Grid spacing used for `value`.
    pub grid_used: f64,
    /// `|value(h/2) - value(h)|` from an actual halved-spacing re-evaluation.
    pub refinement_delta: f64,
}

/// Samples `f` at the nodes of `grid`, in node order.
pub fn sample_axis(f: &FunctionDescriptor, grid: &AxisGrid) -> Vec<Value> {
    par::map_range(grid.n, |i| {
        let mut out = Value::new();
        f.eval_into(&[grid.node(i)], &mut out);
        out
    })
}

pub fn sample_tensor(f: &FunctionDescriptor, grid: &TensorGrid) -> Vec<Value> {
    par::map_range(grid.len(), |k| {
        let mut p = Vec::with_capacity(grid.dim());
        grid.point(k, &mut p);
        let mut out = Value::new();
        f.eval_into(&p, &mut out);
        out
    })
}

fn check_pair(spec: &PseudometricSpec, f: &FunctionDescriptor, g: &FunctionDescriptor) -> Result<()> {
    let support = spec.support();
    for (name, h) in [("first", f), ("second", g)] {
        if h.dim() != support.dim() {
            return Err(MetapError::IncompatibleDomains(format!(
                "{name} function is {}-dimensional, window is {}-dimensional",
                h.dim(),
                support.dim()
            )));
        }
        if !h.domain().covers(&support) {
            return Err(MetapError::IncompatibleDomains(format!("{name} function does not cover {support:?}")));
        }
    }
    if f.codomain_dim() != g.codomain_dim() {
        return Err(MetapError::IncompatibleDomains("codomain dimensions differ".into()));
    }
    Ok(())
}

/// Distance with a halved-spacing refinement check.
pub fn distance(spec: &PseudometricSpec, f: &FunctionDescriptor, g: &FunctionDescriptor) -> Result<DistanceValue> {
    let value = distance_value(spec, f, g)?;
    let fine = distance_value(&spec.with_density(2.0 * spec.grid_density), f, g)?;
    Ok(DistanceValue { value, grid_used: grid_spacing(spec), refinement_delta: (fine - value).abs() })
}

/// `||f||` as the distance to the zero function.
pub fn norm_value(spec: &PseudometricSpec, f: &FunctionDescriptor) -> Result<f64> {
    let zero = FunctionDescriptor::trig(TrigPolynomial::zero(f.dim(), f.codomain_dim()));
    distance_value(spec, f, &zero)
}

fn grid_spacing(spec: &PseudometricSpec) -> f64 {
    if spec.family.is_bv() {
        1.0 / bv_steps(spec.grid_density) as f64
    } else {
        TensorGrid::covering(&spec.window, spec.grid_density).map(|g| g.spacing()).unwrap_or(0.0)
    }
}

fn bv_steps(density: f64) -> usize {
    density.ceil().max(1.0) as usize
}

/// Single-pass distance on the spec's grid.
pub fn distance_value(spec: &PseudometricSpec, f: &FunctionDescriptor, g: &FunctionDescriptor) -> Result<f64> {
    check_pair(spec, f, g)?;
    match &spec.family {
        MetricFamily::BvpComposite { p } => bv_distance(spec, f, g, *p, true),
        MetricFamily::BvpSlow { p } => bv_distance(spec, f, g, *p, false),
        family => {
            let grid = TensorGrid::covering(&spec.window, spec.grid_density)?;
            let fs = sample_tensor(f, &grid);
            let gs = sample_tensor(g, &grid);
            Ok(grid_distance(family, &spec.window, &grid, &fs, &gs, f, g))
        }
    }
}

fn diff_norm(a: &Value, b: &Value) -> f64 {
    pvar::increment(a, b)
}

fn grid_distance(
    family: &MetricFamily,
    window: &Window,
    grid: &TensorGrid,
    fs: &[Value],
    gs: &[Value],
    f: &FunctionDescriptor,
    g: &FunctionDescriptor,
) -> f64 {
    let mut p = Vec::with_capacity(grid.dim());
    match family {
        MetricFamily::WeightedSup { nu } => {
            let mut s = 0.0f64;
            for k in 0..fs.len() {
                grid.point(k, &mut p);
                s = s.max(diff_norm(&fs[k], &gs[k]) * nu.eval(&p));
            }
            // isolated weight atoms are invisible to the grid
            if window.dim() == 1 {
                let (mut a, mut b) = (Value::new(), Value::new());
                for (&x, _) in nu.atoms().iter().zip(0..) {
                    if window.contains(&[x]) {
                        f.eval_into(&[x], &mut a);
                        g.eval_into(&[x], &mut b);
                        s = s.max(diff_norm(&a, &b) * nu.eval(&[x]));
                    }
                }
            }
            s
        }
        MetricFamily::WeightedLp { nu, p: ex } => {
            let mut s = 0.0;
            for k in 0..fs.len() {
                grid.point(k, &mut p);
                let v = diff_norm(&fs[k], &gs[k]) * nu.eval(&p);
                s += grid.weight(k) * v.powf(*ex);
            }
            s.powf(1.0 / ex)
        }
        MetricFamily::ArctanSup => {
            let real_f = is_real(fs);
            let real_g = is_real(gs);
            let lift = |v: &Value, real: bool| if real { v[0].re.atan() } else { value_norm(v).atan() };
            let mut s = 0.0f64;
            for k in 0..fs.len() {
                s = s.max((lift(&fs[k], real_f) - lift(&gs[k], real_g)).abs());
            }
            s
        }
        MetricFamily::CompactExhaustion => {
            let mut level_sup = vec![0.0f64; EXHAUSTION_TERMS + 1];
            for k in 0..fs.len() {
                grid.point(k, &mut p);
                let r = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let level = (r.ceil().max(1.0) as usize).min(EXHAUSTION_TERMS + 1);
                if level <= EXHAUSTION_TERMS {
                    let d = diff_norm(&fs[k], &gs[k]);
                    level_sup[level] = level_sup[level].max(d);
                }
            }
            let mut s = 0.0;
            let mut run = 0.0f64;
            for (k, lv) in level_sup.iter().enumerate().skip(1) {
                run = run.max(*lv);
                s += 0.5f64.powi(k as i32) * run / (1.0 + run);
            }
            s
        }
        MetricFamily::DiscreteUnit => {
            let same = fs.iter().zip(gs).all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| x == y));
            if same {
                0.0
            } else {
                1.0
            }
        }
        MetricFamily::BvpComposite { .. } | MetricFamily::BvpSlow { .. } => unreachable!("handled on the BV path"),
    }
}

fn is_real(vs: &[Value]) -> bool {
    vs.iter().all(|v| v.len() == 1 && v[0].im == 0.0)
}

/// Anchors `a + j/K` on `[a, b]`, window nodes spaced `1/K` on `[a-1, b+1]`.
fn bv_distance(spec: &PseudometricSpec, f: &FunctionDescriptor, g: &FunctionDescriptor, p: f64, composite: bool) -> Result<f64> {
    let k = bv_steps(spec.grid_density);
    let (a, b) = (spec.window.lo[0], spec.window.hi[0]);
    let anchor_cells = ((b - a) * k as f64).round() as usize;
    let grid = AxisGrid::with_step(a - 1.0, k, anchor_cells + 2 * k);
    let fs = sample_axis(f, &grid);
    let gs = sample_axis(g, &grid);
    let h: Vec<Value> = fs
        .iter()
        .zip(&gs)
        .map(|(x, y)| x.iter().zip(y.iter()).map(|(u, v)| u - v).collect())
        .collect();
    Ok(bv_sup(&h, k, anchor_cells + 1, p, composite))
}

/// `max_j (|h[j+k]| + V_p(h[j..=j+2k]))` over `anchors` anchors.
pub(crate) fn bv_sup(h: &[Value], k: usize, anchors: usize, p: f64, composite: bool) -> f64 {
    let point = |j: usize| if composite { value_norm(&h[j + k]) } else { 0.0 };
    let per_anchor: Vec<f64> = if p == 1.0 {
        let mut prefix = Vec::with_capacity(h.len());
        prefix.push(0.0);
        let mut acc = 0.0;
        for w in h.windows(2) {
            acc += pvar::increment(&w[1], &w[0]);
            prefix.push(acc);
        }
        (0..anchors).map(|j| point(j) + (prefix[j + 2 * k] - prefix[j])).collect()
    } else {
        par::map_range(anchors, |j| point(j) + p_variation_values(&h[j..=j + 2 * k], p))
    };
    per_anchor.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{translate, SeriesFamily, C64};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spec(family: MetricFamily, a: f64, b: f64, density: f64) -> PseudometricSpec {
        PseudometricSpec::new(family, Window::interval(a, b).unwrap(), density).unwrap()
    }

    #[test]
    fn self_distance_is_zero_for_every_family() {
        let f = FunctionDescriptor::series(SeriesFamily::SemiAnti, Some(50)).unwrap();
        for fam in all_families() {
            let d = distance_value(&spec(fam.clone(), 0.0, 10.0, 16.0), &f, &f).unwrap();
            assert_eq!(d, 0.0, "{}", fam.name());
        }
    }

    pub(crate) fn all_families() -> Vec<MetricFamily> {
        MetricFamily::catalogue()
    }

    #[test]
    fn arctan_of_large_constant() {
        let d = distance_value(
            &spec(MetricFamily::ArctanSup, 0.0, 1.0, 8.0),
            &FunctionDescriptor::zero(),
            &FunctionDescriptor::constant(C64::new(1e6, 0.0)),
        )
        .unwrap();
        assert!((d - 1e6f64.atan()).abs() < 1e-15);
        assert!((d - (PI / 2.0 - 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn bv_composite_of_constant_shift() {
        let f = FunctionDescriptor::sin();
        let kappa = C64::new(0.75, 0.0);
        let g = FunctionDescriptor::linear_combination(vec![
            (C64::new(1.0, 0.0), f.clone()),
            (C64::new(1.0, 0.0), FunctionDescriptor::constant(kappa)),
        ])
        .unwrap();
        let d = distance_value(&spec(MetricFamily::BvpComposite { p: 1.0 }, 0.0, 5.0, 32.0), &f, &g).unwrap();
        assert!((d - 0.75).abs() < 1e-12);
    }

    #[test]
    fn exhaustion_truncates_below_threshold() {
        let tail: f64 = 0.5f64.powi(EXHAUSTION_TERMS as i32);
        assert!(tail < 1e-12);
    }

    #[test]
    fn bv_requires_one_dimension() {
        let w = Window::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(PseudometricSpec::new(MetricFamily::BvpSlow { p: 1.0 }, w, 4.0).is_err());
    }

    #[test]
    fn incompatible_domains_rejected() {
        let xs = vec![0.0, 1.0];
        let vs = vec![smallvec::smallvec![C64::new(0.0, 0.0)], smallvec::smallvec![C64::new(1.0, 0.0)]];
        let tab = FunctionDescriptor::tabulated(xs, vs).unwrap();
        let s = spec(MetricFamily::sup(), 0.0, 3.0, 4.0);
        assert!(matches!(distance_value(&s, &tab, &tab), Err(MetapError::IncompatibleDomains(_))));
    }

    #[test]
    fn weighted_sup_sees_spikes() {
        let nu = WeightFunction::Spikes { points: vec![0.3141], values: vec![50.0] };
        let s = spec(MetricFamily::WeightedSup { nu }, 0.0, 1.0, 4.0);
        let d = distance_value(&s, &FunctionDescriptor::constant(C64::new(1.0, 0.0)), &FunctionDescriptor::zero()).unwrap();
        assert_eq!(d, 50.0);
    }

    #[test]
    fn refinement_delta_is_small_for_smooth_inputs() {
        let f = FunctionDescriptor::series(SeriesFamily::Haraux, Some(30)).unwrap();
        let g = FunctionDescriptor::series(SeriesFamily::Haraux, Some(5)).unwrap();
        let dv = distance(&spec(MetricFamily::BvpSlow { p: 1.0 }, 0.0, 20.0, 64.0), &f, &g).unwrap();
        assert!(dv.refinement_delta < 1e-4 * dv.value.max(1e-3));
        assert!((dv.grid_used - 1.0 / 64.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn bv_translation_invariance(tau in -40.0f64..40.0) {
            // anchors at spacing 1/K; shifts by whole grid steps keep the anchor set aligned
            let k = 16.0;
            let tau = (tau * k).round() / k;
            let f = FunctionDescriptor::real_trig(&[(1.0, 1.0, 0.5), (0.37, 0.0, 2.0)]).unwrap();
            let g = FunctionDescriptor::real_trig(&[(2.0, 0.3, 0.0)]).unwrap();
            let s = spec(MetricFamily::BvpComposite { p: 2.0 }, -30.0, 30.0, k);
            let base = distance_value(&s, &f, &g).unwrap();
            let ft = translate(&f, &[tau]).unwrap();
            let gt = translate(&g, &[tau]).unwrap();
            let shifted = distance_value(&s.with_window(Window::interval(-30.0 - tau, 30.0 - tau).unwrap()), &ft, &gt).unwrap();
            prop_assert!((base - shifted).abs() < 1e-9, "{} vs {}", base, shifted);
        }
    }
}
