//! Adaptive Boole quadrature and composite trapezoid helpers.
//!
//! Each interval carries the 5-point closed Newton–Cotes (Boole) value over
//! its two halves and an error estimate from Richardson extrapolation and an
//! off-grid Gauss-Legendre check. The interval
//! with the largest estimate is bisected until the summed estimate meets the
//! tolerance. Ties break on position and the final sum runs left to right,
//! so results are bitwise reproducible.

use crate::funcspace::{Value, C64};

/// Values that can be integrated: real scalars, complex scalars and
/// small complex vectors.
pub trait QuadValue: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    /// `self += w * other`
    fn add_scaled(&mut self, other: &Self, w: f64);
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * w;
    }
    fn norm(&self) -> f64 {
        C64::norm(*self)
    }
}

impl QuadValue for Value {
    fn zero_like(&self) -> Self {
        self.iter().map(|_| C64::new(0.0, 0.0)).collect()
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b * w;
        }
    }
    fn norm(&self) -> f64 {
        self.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Tolerances and limits for [`adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Cap on accepted plus pending intervals; exceeding it stops refinement.
    pub max_intervals: usize,
    /// Equal panels the range is split into before adaptation starts.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-6,
            max_depth: 40,
            max_intervals: 200_000,
            initial_panels: 1,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    /// Sum of the accepted local error estimates.
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
    /// False when the depth cap or the interval budget was hit.
    pub converged: bool,
}

struct Panel<T> {
    a: f64,
    b: f64,
    depth: u32,
    /// Samples at `a + k (b - a) / 8`, `k = 0..=8`.
    f: [T; 9],
    value: T,
    est: f64,
}

fn boole<T: QuadValue>(f: &[T], len: f64) -> T {
    let mut s = f[0].zero_like();
    let w = len / 90.0;
    s.add_scaled(&f[0], 7.0 * w);
    s.add_scaled(&f[1], 32.0 * w);
    s.add_scaled(&f[2], 12.0 * w);
    s.add_scaled(&f[3], 32.0 * w);
    s.add_scaled(&f[4], 7.0 * w);
    s
}

fn diff_norm<T: QuadValue>(a: &T, b: &T) -> f64 {
    let mut d = a.clone();
    d.add_scaled(b, -1.0);
    d.norm()
}

const GL_NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] = [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];

/// Error estimate is the larger of the Richardson defect and the gap to a
/// 5-point Gauss-Legendre value on off-grid nodes.
fn panel<T: QuadValue>(a: f64, b: f64, depth: u32, f: [T; 9], eval: &mut impl FnMut(f64) -> T) -> Panel<T> {
    let mid = 0.5 * (a + b);
    let whole = boole(&[f[0].clone(), f[2].clone(), f[4].clone(), f[6].clone(), f[8].clone()], b - a);
    let mut halves = boole(&f[0..5], mid - a);
    halves.add_scaled(&boole(&f[4..9], b - mid), 1.0);
    let mut value = halves.clone();
    value.add_scaled(&halves, 1.0 / 63.0);
    value.add_scaled(&whole, -1.0 / 63.0);
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut gl = value.zero_like();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        gl.add_scaled(&eval(c + r * x), w * r);
    }
    let est = (diff_norm(&halves, &whole) / 63.0).max(diff_norm(&value, &gl));
    let est = if est.is_finite() { est } else { f64::INFINITY };
    Panel { a, b, depth, f, value, est }
}

/// Heap key: larger error first, then leftmost.
#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Integrates `f` over `[a, b]`.
pub fn adaptive<T, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let total = b - a;
    let panels = opts.initial_panels.max(1);
    let mut evaluations = 0usize;
    let mut eval = |x: f64| {
        evaluations += 1;
        f(x)
    };
    if total == 0.0 {
        let z = eval(a).zero_like();
        return QuadResult { value: z, error: 0.0, evaluations, intervals: 0, converged: true };
    }
    let pos = |x: f64| (((x - a) / total) * (1u64 << 52) as f64) as usize;
    let mut slots: Vec<Option<Panel<T>>> = Vec::with_capacity(panels);
    let mut heap = std::collections::BinaryHeap::new();
    let mut err_sum = 0.0;
    let mut mag_sum = 0.0;
    for k in 0..panels {
        let pa = a + total * k as f64 / panels as f64;
        let pb = if k + 1 == panels { b } else { a + total * (k + 1) as f64 / panels as f64 };
        let h = (pb - pa) / 8.0;
        let fv: [T; 9] = std::array::from_fn(|i| if i == 8 { eval(pb) } else { eval(pa + h * i as f64) });
        let p = panel(pa, pb, 0, fv, &mut eval);
        err_sum += p.est;
        mag_sum += p.value.norm();
        heap.push((Key(p.est, pos(pa)), slots.len()));
        slots.push(Some(p));
    }
    let mut live = panels;
    let mut converged = true;
    let mut frozen_err = 0.0;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * mag_sum);
        if err_sum <= target {
            break;
        }
        if frozen_err > target {
            converged = false;
            break;
        }
        let Some((_, idx)) = heap.pop() else {
            converged = false;
            break;
        };
        if live + 1 > opts.max_intervals {
            converged = false;
            break;
        }
        let p = slots[idx].take().expect("live slot");
        if p.depth + 1 >= opts.max_depth || !p.est.is_finite() {
            frozen_err += p.est;
            slots[idx] = Some(p);
            continue;
        }
        let mid = 0.5 * (p.a + p.b);
        let h = (p.b - p.a) / 16.0;
        let [f0, f1, f2, f3, f4, f5, f6, f7, f8] = p.f;
        let lf = [
            f0,
            eval(p.a + h),
            f1,
            eval(p.a + 3.0 * h),
            f2,
            eval(p.a + 5.0 * h),
            f3,
            eval(p.a + 7.0 * h),
            f4.clone(),
        ];
        let rf = [
            f4,
            eval(mid + h),
            f5,
            eval(mid + 3.0 * h),
            f6,
            eval(mid + 5.0 * h),
            f7,
            eval(mid + 7.0 * h),
            f8,
        ];
        let l = panel(p.a, mid, p.depth + 1, lf, &mut eval);
        let r = panel(mid, p.b, p.depth + 1, rf, &mut eval);
        err_sum += l.est + r.est - p.est;
        mag_sum += l.value.norm() + r.value.norm() - p.value.norm();
        heap.push((Key(l.est, pos(l.a)), idx));
        slots[idx] = Some(l);
        heap.push((Key(r.est, pos(r.a)), slots.len()));
        slots.push(Some(r));
        live += 1;
    }
    let mut leaves: Vec<Panel<T>> = slots.into_iter().flatten().collect();
    leaves.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = leaves[0].value.zero_like();
    let mut error = 0.0;
    for l in &leaves {
        value.add_scaled(&l.value, 1.0);
        error += l.est;
    }
    QuadResult { value, error, evaluations, intervals: leaves.len(), converged }
}

/// Composite trapezoid over uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (0.5 * (values[0] + values[n - 1]) + inner)
        }
    }
}

/// Prefix sums of trapezoid cell integrals: `out[k]` integrates the first `k` cells.
pub fn trapezoid_prefix(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len().max(1));
    out.push(0.0);
    let mut acc = 0.0;
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_of_degree_five_is_exact() {
        let r = adaptive(|x: f64| x.powi(5) - 2.0 * x * x, 0.0, 2.0, &QuadOptions::default());
        assert!((r.value - (64.0 / 6.0 - 16.0 / 3.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn near_singular_peak() {
        let opts = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, ..Default::default() };
        let r = adaptive(|x: f64| 1.0 / (x + 1e-12).sqrt(), 0.0, 1.0, &opts);
        let exact = 2.0 * ((1.0 + 1e-12f64).sqrt() - 1e-6);
        assert!((r.value - exact).abs() < 1e-8, "{}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn complex_oscillation() {
        let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, initial_panels: 8, ..Default::default() };
        let r = adaptive(|x: f64| C64::from_polar(1.0, 3.0 * x), 0.0, 10.0, &opts);
        let exact = (C64::from_polar(1.0, 30.0) - 1.0) / C64::new(0.0, 3.0);
        assert!((r.value - exact).norm() < 1e-10);
    }

    #[test]
    fn depth_cap_flags_non_convergence() {
        let opts = QuadOptions { max_depth: 3, abs_tol: 1e-14, rel_tol: 0.0, ..Default::default() };
        let r = adaptive(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &opts);
        assert!(!r.converged);
    }

    #[test]
    fn trapezoid_prefix_is_additive() {
        let v: Vec<f64> = (0..11).map(|i| (i as f64 * 0.3).cos()).collect();
        let p = trapezoid_prefix(&v, 0.1);
        assert!((p[10] - trapezoid(&v, 0.1)).abs() < 1e-15);
        assert!((p[10] - p[4] - trapezoid(&v[4..], 0.1)).abs() < 1e-15);
    }
}
