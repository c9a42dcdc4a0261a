//! epsilon-period scans and the Bohr, Doss, semi-periodic and normality
//! checks with `rho = cI`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, MetapError, Result};
use crate::funcspace::{translate, FunctionDescriptor, Multiplier, C64};
use crate::gennorms::{besicovitch_seminorm_curve, Gauge, SeminormSpec};
use crate::par;

/// Residual `gauge(f(. + tau), c f)`.
pub fn translate_residual(f: &FunctionDescriptor, tau: &[f64], c: C64, gauge: &Gauge) -> Result<f64> {
    gauge.measure(&translate(f, tau)?, &f.scale(c))
}

/// A maximal run of consecutive sub-epsilon grid points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodCluster {
    pub lo: f64,
    pub hi: f64,
    /// Golden-section minimiser of the residual on `[lo - step, hi + step]`.
    pub center: f64,
    pub center_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodScanReport {
    pub c: C64,
    pub epsilon: f64,
    pub scan_range: (f64, f64),
    pub step: f64,
    /// Unit direction of the scanned translations.
    pub direction: Vec<f64>,
    pub taus: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Grid points with residual `<= epsilon`, ascending.
    pub periods: Vec<f64>,
    pub clusters: Vec<PeriodCluster>,
    /// Largest gap between consecutive periods; `+inf` when fewer than two.
    pub max_gap: f64,
    /// A boundary gap is at least `max_gap`, so the inclusion length may be truncated by the range.
    pub boundary_censored: bool,
}

impl PeriodScanReport {
    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }
}

const GOLDEN_ITERS: usize = 60;

fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
        if b - a <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans `tau = a + k step` along `direction` (default the first axis).
#[allow(clippy::too_many_arguments)]
pub fn scan_eps_periods(
    f: &FunctionDescriptor,
    gauge: &Gauge,
    c: &Multiplier,
    epsilon: f64,
    range: (f64, f64),
    step: f64,
    direction: Option<&[f64]>,
) -> Result<PeriodScanReport> {
    if !(epsilon > 0.0) || !(step > 0.0) || !(range.1 >= range.0) || !range.0.is_finite() || !range.1.is_finite() {
        return Err(invalid("need epsilon > 0, step > 0 and a finite range a <= b"));
    }
    let n = f.dim();
    let dir: Vec<f64> = match direction {
        Some(d) => {
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if d.len() != n || !(norm > 0.0) {
                return Err(invalid("direction must be a non-zero vector of the domain dimension"));
            }
            d.iter().map(|x| x / norm).collect()
        }
        None => {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        }
    };
    let count = ((range.1 - range.0) / step + 1e-9).floor() as usize + 1;
    let taus: Vec<f64> = (0..count).map(|k| range.0 + k as f64 * step).collect();
    let at = |t: f64| -> Result<f64> {
        let tau: Vec<f64> = dir.iter().map(|d| d * t).collect();
        translate_residual(f, &tau, c.c, gauge)
    };
    let residuals = par::try_map_range(count, |k| at(taus[k]))?;
    let periods: Vec<f64> = taus.iter().zip(&residuals).filter(|(_, r)| **r <= epsilon).map(|(t, _)| *t).collect();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (k, r) in residuals.iter().enumerate() {
        if *r <= epsilon {
            match runs.last_mut() {
                Some(run) if run.1 + 1 == k => run.1 = k,
                _ => runs.push((k, k)),
            }
        }
    }
    let clusters = par::try_map_range(runs.len(), |i| -> Result<PeriodCluster> {
        let (s, e) = runs[i];
        let lo = (taus[s] - step).max(range.0);
        let hi = (taus[e] + step).min(range.1);
        let (mut center, mut center_residual) = (taus[s], residuals[s]);
        if hi > lo {
            let (x, v) = golden_min(lo, hi, |t| at(t).unwrap_or(f64::INFINITY));
            if v < center_residual {
                center = x;
                center_residual = v;
            }
        }
        for k in s..=e {
            if residuals[k] < center_residual {
                center = taus[k];
                center_residual = residuals[k];
            }
        }
        Ok(PeriodCluster { lo: taus[s], hi: taus[e], center, center_residual })
    })?;
    let max_gap = if periods.len() < 2 {
        f64::INFINITY
    } else {
        periods.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    };
    let boundary_censored = match (periods.first(), periods.last()) {
        (Some(first), Some(last)) => first - range.0 >= max_gap || range.1 - last >= max_gap,
        _ => true,
    };
    Ok(PeriodScanReport {
        c: c.c,
        epsilon,
        scan_range: range,
        step,
        direction: dir,
        taus,
        residuals,
        periods,
        clusters,
        max_gap,
        boundary_censored,
    })
}

/// Empirical inclusion length: the largest gap between consecutive periods
/// or between a period and the range boundary; the range width for one period.
pub fn relative_density(report: &PeriodScanReport) -> Result<f64> {
    let (a, b) = report.scan_range;
    match report.periods.as_slice() {
        [] => Err(MetapError::EmptyPeriodSet),
        [_] => Ok(b - a),
        ps => {
            let first = ps[0] - a;
            let last = b - ps[ps.len() - 1];
            Ok(report.max_gap.max(first).max(last))
        }
    }
}

/// Besicovitch limit estimate of `f(. + tau) - c f`.
pub fn doss_period_check(
    f: &FunctionDescriptor,
    tau: &[f64],
    c: &Multiplier,
    spec: &SeminormSpec,
    t_grid: &[f64],
) -> Result<f64> {
    let h = translate(f, tau)?.sub(&f.scale(c.c))?;
    Ok(besicovitch_seminorm_curve(&h, spec, t_grid)?.limit_estimate)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemiType {
    /// `m in N`.
    One,
    /// `m in Z`.
    Two,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiPeriodicityReport {
    pub semi_type: SemiType,
    /// `(axis j, m, residual)` in scan order.
    pub residuals: Vec<(usize, i64, f64)>,
    pub max_residual: f64,
    pub argmax: (usize, i64),
}

/// `max_{j, m} gauge(F(. + m omega_j e_j), c_j^m F)`.
pub fn semi_periodicity_check(
    f: &FunctionDescriptor,
    c: &Multiplier,
    omega: &[f64],
    gauge: &Gauge,
    m_range: (i64, i64),
    semi_type: SemiType,
) -> Result<SemiPeriodicityReport> {
    let n = f.dim();
    if omega.len() != n || omega.iter().any(|w| *w == 0.0 || !w.is_finite()) {
        return Err(invalid("need one non-zero finite omega per axis"));
    }
    if let Some(cs) = &c.per_axis {
        if cs.len() != n {
            return Err(invalid("per-axis multiplier length differs from the dimension"));
        }
    }
    if semi_type == SemiType::Two && !f.domain().is_whole() {
        return Err(MetapError::Unsupported("type-2 semi-periodicity needs the whole space as domain".into()));
    }
    let (lo, hi) = m_range;
    let lo = if semi_type == SemiType::One { lo.max(1) } else { lo };
    if hi < lo {
        return Err(invalid("empty m range"));
    }
    let mut jobs = Vec::new();
    for j in 0..n {
        for m in lo..=hi {
            if m != 0 {
                jobs.push((j, m));
            }
        }
    }
    let vals = par::try_map_range(jobs.len(), |k| {
        let (j, m) = jobs[k];
        let mut tau = vec![0.0; n];
        tau[j] = m as f64 * omega[j];
        let cm = C64::powi(&c.axis(j), m as i32);
        translate_residual(f, &tau, cm, gauge)
    })?;
    let mut max_residual = 0.0;
    let mut argmax = jobs.first().copied().unwrap_or((0, lo));
    for (&(j, m), &v) in jobs.iter().zip(&vals) {
        if v > max_residual {
            max_residual = v;
            argmax = (j, m);
        }
    }
    let residuals = jobs.iter().zip(&vals).map(|(&(j, m), &v)| (j, m, v)).collect();
    Ok(SemiPeriodicityReport { semi_type, residuals, max_residual, argmax })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub translates: Vec<Vec<f64>>,
    /// Selected subsequence, ascending.
    pub indices: Vec<usize>,
    /// Pairwise residuals on the subsequence.
    pub matrix: Vec<Vec<f64>>,
    /// Largest entry of `matrix`.
    pub cauchy_epsilon: f64,
}

/// Greedy largest cluster of translates with pairwise residual `<= eps`;
/// each seed grows by index order and ties go to the lowest seed.
#[allow(clippy::needless_range_loop)]
pub fn normality_check(
    f: &FunctionDescriptor,
    translates: &[Vec<f64>],
    gauge: &Gauge,
    eps: f64,
) -> Result<NormalityReport> {
    if translates.is_empty() {
        return Err(invalid("need at least one translate"));
    }
    if !(eps > 0.0) {
        return Err(invalid("Cauchy epsilon must be positive"));
    }
    let k = translates.len();
    let shifted = translates.iter().map(|b| translate(f, b)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let vals = par::try_map_range(pairs.len(), |p| {
        let (i, j) = pairs[p];
        gauge.measure(&shifted[i], &shifted[j])
    })?;
    let mut d = vec![vec![0.0; k]; k];
    for (&(i, j), &v) in pairs.iter().zip(&vals) {
        d[i][j] = v;
        d[j][i] = v;
    }
    let mut best: Vec<usize> = vec![0];
    for seed in 0..k {
        let mut cluster = vec![seed];
        for j in 0..k {
            if j != seed && cluster.iter().all(|&m| d[m][j] <= eps) {
                cluster.push(j);
            }
        }
        if cluster.len() > best.len() {
            best = cluster;
        }
    }
    best.sort_unstable();
    let matrix: Vec<Vec<f64>> = best.iter().map(|&i| best.iter().map(|&j| d[i][j]).collect()).collect();
    let cauchy_epsilon = matrix.iter().flatten().copied().fold(0.0, f64::max);
    Ok(NormalityReport { translates: translates.to_vec(), indices: best, matrix, cauchy_epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_get;
    use crate::funcspace::{SeriesFamily, Window};
    use crate::gennorms::{default_t_grid, SeminormSpec};
    use crate::pseudometrics::{MetricFamily, PseudometricSpec};
    use std::f64::consts::PI;

    fn sup(a: f64, b: f64) -> Gauge {
        Gauge::Metric { spec: PseudometricSpec::new(MetricFamily::sup(), Window::interval(a, b).unwrap(), 32.0).unwrap() }
    }

    #[test]
    fn sine_scan_matches_closed_form_residual() {
        let f = FunctionDescriptor::sin();
        let r = scan_eps_periods(&f, &sup(0.0, 20.0), &Multiplier::one(), 0.1, (0.0, 30.0), 0.01, None).unwrap();
        for (t, v) in r.taus.iter().zip(&r.residuals) {
            // sup_t |sin(t + tau) - sin t| = 2 |sin(tau/2)|, attained on a dense enough grid
            assert!((v - 2.0 * (t / 2.0).sin().abs()).abs() < 2e-3, "tau={t}");
        }
        assert_eq!(r.clusters.len(), 5);
        for (k, c) in r.clusters.iter().enumerate() {
            assert!((c.center - 2.0 * PI * k as f64).abs() < 1e-2);
            let half = 2.0 * (0.05f64).asin();
            if k > 0 {
                assert!((0.5 * (c.hi - c.lo) - half).abs() < 0.02);
            }
        }
        let l = relative_density(&r).unwrap();
        assert!((l - 2.0 * PI).abs() < 0.05 * 2.0 * PI);
    }

    #[test]
    fn constant_every_tau_is_a_period() {
        let f = FunctionDescriptor::constant(C64::new(2.0, 0.0));
        let r = scan_eps_periods(&f, &sup(0.0, 5.0), &Multiplier::one(), 1e-3, (0.0, 3.0), 0.25, None).unwrap();
        assert_eq!(r.periods.len(), r.taus.len());
        assert!((r.max_gap - 0.25).abs() < 1e-15);
        assert!((relative_density(&r).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_and_single_period_sets() {
        let f = FunctionDescriptor::sin();
        let r = scan_eps_periods(&f, &sup(0.0, 10.0), &Multiplier::one(), 0.01, (1.0, 5.0), 0.5, None).unwrap();
        assert!(r.is_empty() && r.max_gap.is_infinite());
        assert!(matches!(relative_density(&r), Err(MetapError::EmptyPeriodSet)));
        let r = scan_eps_periods(&f, &sup(0.0, 10.0), &Multiplier::one(), 0.01, (0.0, 5.0), 0.5, None).unwrap();
        assert_eq!(r.periods, vec![0.0]);
        assert_eq!(relative_density(&r).unwrap(), 5.0);
    }

    #[test]
    fn semi_anti_partial_anti_period() {
        let f = FunctionDescriptor::series(SeriesFamily::SemiAnti, Some(4)).unwrap();
        let tau = 945.0 * PI;
        let v = translate_residual(&f, &[tau], C64::new(-1.0, 0.0), &sup(0.0, 50.0)).unwrap();
        assert!(v < 1e-12);
    }

    #[test]
    fn exact_period_multiples_are_found() {
        let f = FunctionDescriptor::exp_i(1.0 / 3.0);
        let r = scan_eps_periods(&f, &sup(0.0, 10.0), &Multiplier::real(-1.0).unwrap(), 1e-9, (0.0, 60.0 * PI), 3.0 * PI, None).unwrap();
        assert_eq!(r.periods.len(), 10);
        for (k, t) in r.periods.iter().enumerate() {
            assert!((t - (6 * k + 3) as f64 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn doss_examples() {
        let spec = SeminormSpec::besicovitch(1.0, 1.0).unwrap();
        let g = default_t_grid();
        let e = FunctionDescriptor::exp_i(1.0);
        assert!(doss_period_check(&e, &[2.0 * PI], &Multiplier::one(), &spec, &g).unwrap() < 1e-12);
        assert!(doss_period_check(&e, &[PI], &Multiplier::real(-1.0).unwrap(), &spec, &g).unwrap() < 1e-12);
        let h = corpus_get("haraux", Some(30)).unwrap().descriptor;
        let tau = 2f64.powi(10) * 2.0 * PI;
        let v = doss_period_check(&h, &[tau], &Multiplier::one(), &spec, &crate::gennorms::geometric_grid(10.0, 2.0, 8).unwrap()).unwrap();
        // terms m > 10 contribute at most 2/m each to t^{-1} int |.|
        let bound: f64 = (11..=30).map(|m| 2.0 * 2.0 / m as f64).sum();
        assert!(v <= bound);
        // domination by the sup residual times d_B(1, 0) = 2
        let s = translate_residual(&h, &[tau], C64::new(1.0, 0.0), &sup(-1280.0, 1280.0)).unwrap();
        assert!(v <= s * 2.0 + 1e-9);
    }

    #[test]
    fn semi_periodicity_examples() {
        let g = sup(0.0, 20.0);
        let e = FunctionDescriptor::exp_i(1.0);
        let r = semi_periodicity_check(&e, &Multiplier::one(), &[2.0 * PI], &g, (1, 50), SemiType::One).unwrap();
        assert!(r.max_residual < 1e-12);
        assert_eq!(r.residuals.len(), 50);
        let r = semi_periodicity_check(&FunctionDescriptor::sin(), &Multiplier::one(), &[1.0], &g, (1, 50), SemiType::One).unwrap();
        assert!(r.max_residual > 1.0);
        let cos = FunctionDescriptor::cos();
        let r = semi_periodicity_check(&cos, &Multiplier::one(), &[0.7], &sup(-20.0, 20.0), (-5, 5), SemiType::Two).unwrap();
        for m in 1..=5i64 {
            let a = r.residuals.iter().find(|x| x.1 == m).unwrap().2;
            let b = r.residuals.iter().find(|x| x.1 == -m).unwrap().2;
            assert!((a - b).abs() < 1e-2);
        }
        let boxed = cos.restrict(&Window::interval(0.0, 100.0).unwrap()).unwrap();
        assert!(semi_periodicity_check(&boxed, &Multiplier::one(), &[0.7], &g, (-5, 5), SemiType::Two).is_err());
    }

    #[test]
    fn normality_examples() {
        let e = FunctionDescriptor::exp_i(1.0);
        let g = sup(0.0, 10.0);
        let full: Vec<Vec<f64>> = (1..=10).map(|k| vec![2.0 * PI * k as f64]).collect();
        let r = normality_check(&e, &full, &g, 1e-9).unwrap();
        assert_eq!(r.indices.len(), 10);
        assert!(r.cauchy_epsilon < 1e-9);
        // brute force: |e^{ij} - e^{ik}| = 2 |sin((j - k)/2)|
        let ints: Vec<Vec<f64>> = (1..=40).map(|k| vec![k as f64]).collect();
        for (eps, want) in [(0.1, 1usize), (0.2, 2)] {
            let r = normality_check(&e, &ints, &g, eps).unwrap();
            let mut best = 1;
            for s in 1..=40i64 {
                let mut cl = vec![s];
                for j in 1..=40i64 {
                    if j != s && cl.iter().all(|&m| 2.0 * (((j - m) as f64) / 2.0).sin().abs() <= eps) {
                        cl.push(j);
                    }
                }
                best = best.max(cl.len());
            }
            assert_eq!(r.indices.len(), best);
            assert_eq!(best, want);
            assert!(r.cauchy_epsilon <= eps);
        }
        let r = normality_check(&e, &[vec![3.0]], &g, 0.1).unwrap();
        assert_eq!(r.indices, vec![0]);
    }
}
