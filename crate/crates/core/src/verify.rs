//! Runs the expected-property list of a corpus entry.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::approx::{bohr_coefficient, haraux_derivative_tail};
use crate::corpus::{corpus_get, stepanov_g_window_integral, zeta_minima, CorpusEntry, ExpectedProperty};
use crate::error::{MetapError, Result};
use crate::funcspace::{
    evaluate, gevrey_psi_max, haraux_window_tail, periodicity_residual, semi_anti_derivative_tail, trigamma, value_norm,
    zeta, Domain, FunctionDescriptor, Multiplier, SeriesFamily, Value, Window, C64,
};
use crate::gennorms::{stepanov_seminorm, ScanOptions, SeminormSpec};
use crate::pseudometrics::{distance_value, MetricFamily, PseudometricSpec};
use crate::quad::adaptive;

/// Outcome of one expected property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub id: String,
    pub operation: String,
    pub claim: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
    /// Quadratures that stopped before meeting their tolerance.
    pub unconverged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub entry: String,
    pub properties: Vec<PropertyOutcome>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn unconverged(&self) -> usize {
        self.properties.iter().map(|p| p.unconverged).sum()
    }
}

/// `measured <= bound` unless stated otherwise.
struct Check {
    measured: f64,
    bound: f64,
    passed: bool,
    unconverged: usize,
}

fn at_most(measured: f64, bound: f64) -> Check {
    Check { measured, bound, passed: measured <= bound, unconverged: 0 }
}

fn sup_spec(a: f64, b: f64, density: f64) -> Result<PseudometricSpec> {
    PseudometricSpec::new(MetricFamily::sup(), Window::interval(a, b)?, density)
}

/// Max of `|f|` at the midpoints of `n` equal cells of `[a, b]`.
fn scan_max(f: &FunctionDescriptor, a: f64, b: f64, n: usize) -> Result<f64> {
    let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![a + (b - a) * (i as f64 + 0.5) / n as f64]).collect();
    Ok(evaluate(f, &pts)?.iter().map(value_norm).fold(0.0, f64::max))
}

pub fn verify(name: &str) -> Result<VerifyReport> {
    let entry = corpus_get(name, None)?;
    let mut properties = Vec::with_capacity(entry.expected.len());
    for p in &entry.expected {
        let c = check(&entry, p)?;
        properties.push(PropertyOutcome {
            id: p.id.clone(),
            operation: p.operation.clone(),
            claim: p.claim.clone(),
            measured: c.measured,
            bound: c.bound,
            passed: c.passed,
            unconverged: c.unconverged,
        });
    }
    let passed = properties.iter().all(|p| p.passed);
    Ok(VerifyReport { entry: name.into(), properties, passed })
}

fn check(e: &CorpusEntry, p: &ExpectedProperty) -> Result<Check> {
    let f = &e.descriptor;
    let tol = p.tolerance;
    match (e.name.as_str(), p.id.as_str()) {
        (_, "tau_zero") => tau_zero(f),
        ("semi-anti" | "semi-anti-real", "sup_bound") => {
            let bound = e.family.expect("series").sup_bound(e.trunc.expect("series"));
            Ok(at_most(scan_max(f, -500.0, 500.0, 1000)?, bound + tol))
        }
        (_, "partial_anti_periodic") => {
            let mut worst = 0.0f64;
            for n in 1..=3usize {
                let omega = PI * (1..=n).map(|m| (2 * m + 1) as f64).product::<f64>();
                let r = periodicity_residual(&e.partial(n)?, &[omega], &Multiplier::real(-1.0)?, &sup_spec(0.0, 50.0, 32.0)?)?;
                worst = worst.max(r);
            }
            Ok(at_most(worst, tol))
        }
        ("semi-anti", "tail_bound") => tail_check(e, &[2, 4], 0.0, 200.0, 8.0, |n| trigamma(n as f64 + 1.0), tol),
        ("semi-anti", "bv1_tail") => {
            let spec = PseudometricSpec::new(MetricFamily::BvpComposite { p: 1.0 }, Window::interval(0.0, 20.0)?, 32.0)?;
            worst_excess(&[2, 4], |n| Ok((distance_value(&spec, f, &e.partial(n)?)?, trigamma(n as f64 + 1.0) + 2.0 * semi_anti_derivative_tail(n) + tol)))
        }
        ("semi-anti", "bohr_coefficient") => {
            let a = bohr_coefficient(f, &[1.0 / 3.0], 1e4)?;
            let b = bohr_coefficient(f, &[0.5], 1e4)?;
            let err = (a.value[0] - C64::new(1.0, 0.0)).norm().max(b.value[0].norm());
            Ok(at_most(err, tol))
        }
        ("haraux", "zero_at_origin") => Ok(at_most(f.eval1(0.0).norm(), tol)),
        ("haraux", "partial_periodic") => {
            let mut worst = 0.0f64;
            for n in [3usize, 5] {
                let omega = 2f64.powi(n as i32) * 2.0 * PI;
                let r = periodicity_residual(&e.partial(n)?, &[omega], &Multiplier::one(), &sup_spec(0.0, 50.0, 32.0)?)?;
                worst = worst.max(r);
            }
            Ok(at_most(worst, tol))
        }
        ("haraux", "slow_v1_tail") => {
            let spec = PseudometricSpec::new(MetricFamily::BvpSlow { p: 1.0 }, Window::interval(0.0, 100.0)?, 16.0)?;
            worst_excess(&[5, 10], |n| Ok((distance_value(&spec, f, &e.partial(n)?)?, haraux_derivative_tail(n) + tol)))
        }
        ("haraux", "window_sup_tail") => {
            let r = 100.0;
            let d = distance_value(&sup_spec(-r, r, 16.0)?, f, &e.partial(10)?)?;
            Ok(at_most(d, haraux_window_tail(10, r) + tol))
        }
        ("gevrey", "sup_bound") => {
            let SeriesFamily::Gevrey { s } = e.family.expect("series") else { unreachable!() };
            Ok(at_most(scan_max(f, -500.0, 500.0, 1000)?, gevrey_psi_max(s) + tol))
        }
        ("gevrey", "block_periodic") => {
            let mut worst = 0.0f64;
            for n in 1..=3usize {
                worst = worst.max(block_residual(&corpus_get("gevrey-block", Some(n))?.descriptor, n)?);
            }
            Ok(at_most(worst, tol))
        }
        ("gevrey-block", "block_periodic") => Ok(at_most(block_residual(f, 1)?, tol)),
        ("gevrey", "tail_bound") => {
            let SeriesFamily::Gevrey { s } = e.family.expect("series") else { unreachable!() };
            tail_check(e, &[2, 4], 0.0, 256.0, 32.0, |n| (n as f64 + 1.0).powf(-0.25) * gevrey_psi_max(s), tol)
        }
        ("stepanov-sin", "sup_bound") => {
            let m = scan_max(f, -500.0, 500.0, 1000)?;
            let zmin = (0..1000).map(|i| zeta(-500.0 + i as f64)).fold(f64::INFINITY, f64::min);
            Ok(Check { measured: m, bound: 1.0 + tol, passed: m <= 1.0 + tol && zmin > 0.0, unconverged: 0 })
        }
        ("stepanov-sin", "window_bounded") => {
            let s = crate::gennorms::stepanov_bound_scan(f, 1.0, 2.0 * PI, &[10.0, 100.0], &ScanOptions::default())?;
            let m = s.maxima.iter().copied().fold(0.0, f64::max);
            let bad = s.unconverged_cells.last().copied().unwrap_or(0);
            Ok(Check { unconverged: bad, ..at_most(m, 2.0 * PI * (1.0 + tol)) })
        }
        ("stepanov-g", "peaks_located") => {
            let minima = zeta_minima(1e5);
            let qs: Vec<u64> = minima.iter().map(|m| m.q).collect();
            let worst = minima.iter().map(|m| crate::corpus::zeta_prime(m.t).abs()).fold(0.0, f64::max);
            let expected = [1u64, 5, 29, 169, 985, 5741];
            Ok(Check { measured: worst, bound: tol, passed: worst <= tol && qs == expected, unconverged: 0 })
        }
        ("stepanov-g", "peak_integrals_grow") => peak_growth(),
        ("stepanov-g", "quadrature_matches_oracle") => quadrature_vs_oracle(f, tol),
        ("sign-pair", "sublevel_domination") => sublevel_domination(e, tol),
        (name, id) => Err(MetapError::Unsupported(format!("no check for `{id}` on `{name}`"))),
    }
}

fn worst_excess(ns: &[usize], mut run: impl FnMut(usize) -> Result<(f64, f64)>) -> Result<Check> {
    let mut out: Option<Check> = None;
    for &n in ns {
        let (m, b) = run(n)?;
        let c = at_most(m, b);
        let worse = match &out {
            None => true,
            Some(o) => (c.measured - c.bound) > (o.measured - o.bound),
        };
        let all = out.as_ref().is_none_or(|o| o.passed) && c.passed;
        if worse {
            out = Some(c);
        }
        if let Some(o) = out.as_mut() {
            o.passed = all;
        }
    }
    Ok(out.expect("non-empty list"))
}

fn tail_check(
    e: &CorpusEntry,
    ns: &[usize],
    a: f64,
    b: f64,
    density: f64,
    bound: impl Fn(usize) -> f64,
    tol: f64,
) -> Result<Check> {
    let spec = sup_spec(a, b, density)?;
    worst_excess(ns, |n| Ok((distance_value(&spec, &e.descriptor, &e.partial(n)?)?, bound(n) + tol)))
}

fn block_residual(f: &FunctionDescriptor, n: usize) -> Result<f64> {
    let omega = 2f64.powi(n as i32 + 1);
    periodicity_residual(f, &[omega], &Multiplier::one(), &sup_spec(0.0, 64.0, 32.0)?)
}

fn tau_zero(f: &FunctionDescriptor) -> Result<Check> {
    let mut worst = 0.0f64;
    for fam in MetricFamily::catalogue() {
        let spec = PseudometricSpec::new(fam, Window::interval(0.0, 20.0)?, 16.0)?;
        worst = worst.max(periodicity_residual(f, &[0.0], &Multiplier::one(), &spec)?);
    }
    Ok(at_most(worst, 1e-12))
}

/// Ratio of the largest peak window to the median window over `[0, T]`,
/// by the exact variation formula; must grow across decades.
fn peak_growth() -> Result<Check> {
    let minima = zeta_minima(1e5);
    let peaks: Vec<(f64, f64)> =
        minima.iter().map(|m| (m.t, stepanov_g_window_integral(m.t - PI, m.t + PI))).collect();
    let increasing = peaks.windows(2).all(|w| w[1].1 > w[0].1);
    let mut ratios = Vec::new();
    for t in [1e2, 1e3, 1e4, 1e5] {
        let top = peaks.iter().filter(|p| p.0 <= t).map(|p| p.1).fold(0.0, f64::max);
        let mut windows: Vec<f64> = (0..64)
            .map(|k| {
                let a = t * k as f64 / 64.0;
                stepanov_g_window_integral(a, a + 2.0 * PI)
            })
            .collect();
        windows.sort_by(f64::total_cmp);
        let median = 0.5 * (windows[31] + windows[32]);
        ratios.push(top / median);
    }
    let growth = ratios.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    Ok(Check { measured: growth, bound: 1.0, passed: increasing && growth > 1.0, unconverged: 0 })
}

fn quadrature_vs_oracle(f: &FunctionDescriptor, tol: f64) -> Result<Check> {
    let opts = ScanOptions::default().quad;
    let q29 = zeta_minima(200.0).into_iter().find(|m| m.q == 29).map(|m| m.t - PI).unwrap_or(88.0);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for a in [0.0, 10.0, 50.0, q29, 200.0, 1000.0] {
        let cell = 2.0 * PI / 8.0;
        let mut total = 0.0;
        for k in 0..8 {
            let lo = a + k as f64 * cell;
            let r = adaptive(|x: f64| f.eval1(x).norm(), lo, lo + cell, &opts);
            total += r.value;
            if !r.converged {
                bad += 1;
            }
        }
        let exact = stepanov_g_window_integral(a, a + 2.0 * PI);
        worst = worst.max((total - exact).abs() / exact);
    }
    Ok(Check { unconverged: bad, ..at_most(worst, tol) })
}

fn sublevel_domination(e: &CorpusEntry, tol: f64) -> Result<Check> {
    let k = 20;
    let eps0 = trigamma(k as f64 + 1.0);
    let base = FunctionDescriptor::series(SeriesFamily::SemiAntiReal, e.trunc)?;
    let diff = e.partial(k)?.sub(&e.descriptor)?;
    let low = FunctionDescriptor::custom(
        "sublevel",
        Domain::Whole { dim: 1 },
        1,
        Some(1.0),
        Arc::new(move |t: &[f64], out: &mut Value| {
            let mut v = Value::new();
            base.eval_into(t, &mut v);
            out.clear();
            out.push(C64::new(if value_norm(&v) <= eps0 { 1.0 } else { 0.0 }, 0.0));
        }),
    );
    let spec = SeminormSpec::stepanov(1.0)?;
    let outer = Window::interval(0.0, 200.0)?;
    let lhs = stepanov_seminorm(&diff, &spec, &outer)?;
    let rhs = 2.0 * stepanov_seminorm(&low, &spec, &outer)?;
    Ok(at_most(lhs, rhs + tol))
}

/// Report as JSON with a trailing newline.
pub fn report_json(r: &VerifyReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_pair_and_gevrey_block_pass() {
        for name in ["sign-pair", "gevrey-block", "semi-anti-real"] {
            let r = verify(name).unwrap();
            assert!(r.passed, "{name}: {r:?}");
        }
    }

    #[test]
    fn unknown_entry_is_an_error() {
        assert!(matches!(verify("nope"), Err(MetapError::UnknownCorpus(_))));
    }

    #[test]
    fn worst_excess_keeps_all_pass_flag() {
        let c = worst_excess(&[1, 2], |n| Ok(if n == 1 { (2.0, 1.0) } else { (0.0, 1.0) })).unwrap();
        assert!(!c.passed);
        assert_eq!(c.measured, 2.0);
    }
}
