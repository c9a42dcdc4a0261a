//! Closed-form term generators for the built-in series and special functions.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use super::{pairwise_sum, C64};

/// Truncatable series with analytic tail bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SeriesFamily {
    /// `sum_m e^{it/(2m+1)} / m^2`
    SemiAnti,
    /// `sum_m cos(t/(2m+1)) / m^2`
    SemiAntiReal,
    /// `sum_m sin^2(t/2^m) / m`
    Haraux,
    /// `sum_k k^{-1/4} phi_{s,k}(t)` built from Gevrey bumps of order `s > 1`.
    Gevrey { s: f64 },
}

impl SeriesFamily {
    pub fn default_trunc(&self) -> usize {
        match self {
            SeriesFamily::SemiAnti | SeriesFamily::SemiAntiReal => 200,
            SeriesFamily::Haraux | SeriesFamily::Gevrey { .. } => 60,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SeriesFamily::SemiAnti => "semi-anti",
            SeriesFamily::SemiAntiReal => "semi-anti-real",
            SeriesFamily::Haraux => "haraux",
            SeriesFamily::Gevrey { .. } => "gevrey",
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, SeriesFamily::SemiAnti)
    }

    /// Partial sum over terms `1..=n` (pairwise summation).
    pub fn eval(&self, n: usize, t: f64) -> C64 {
        match *self {
            SeriesFamily::SemiAnti => pairwise_sum(n, &|k| {
                let m = (k + 1) as f64;
                C64::cis(t / (2.0 * m + 1.0)) / (m * m)
            }),
            SeriesFamily::SemiAntiReal => C64::new(
                pairwise_sum_real(n, &|k| {
                    let m = (k + 1) as f64;
                    (t / (2.0 * m + 1.0)).cos() / (m * m)
                }),
                0.0,
            ),
            SeriesFamily::Haraux => C64::new(
                pairwise_sum_real(n, &|k| {
                    let m = k + 1;
                    let s = libm_ldexp_sin(t, m);
                    s * s / m as f64
                }),
                0.0,
            ),
            SeriesFamily::Gevrey { s } => C64::new(gevrey_sum(s, n, t), 0.0),
        }
    }

    /// Bound on `sup_t |f(t) - f_n(t)|` for the infinite series; `+inf` when
    /// the sup-norm tail diverges.
    pub fn tail_bound(&self, n: usize) -> f64 {
        match *self {
            SeriesFamily::SemiAnti | SeriesFamily::SemiAntiReal => trigamma(n as f64 + 1.0),
            SeriesFamily::Haraux => f64::INFINITY,
            SeriesFamily::Gevrey { s } => (n as f64 + 1.0).powf(-0.25) * gevrey_psi_max(s),
        }
    }

    /// Bound on `sup_t |f_n(t)|`.
    pub fn sup_bound(&self, n: usize) -> f64 {
        match *self {
            SeriesFamily::SemiAnti | SeriesFamily::SemiAntiReal => {
                pairwise_sum_real(n, &|k| 1.0 / ((k + 1) as f64).powi(2))
            }
            SeriesFamily::Haraux => pairwise_sum_real(n, &|k| 1.0 / (k + 1) as f64),
            SeriesFamily::Gevrey { s } => {
                if n == 0 {
                    0.0
                } else {
                    gevrey_psi_max(s)
                }
            }
        }
    }

    /// Exact trigonometric form of the partial sum, when one exists.
    pub fn trig_terms(&self, n: usize) -> Option<Vec<(f64, C64)>> {
        match self {
            SeriesFamily::SemiAnti => Some(
                (1..=n)
                    .map(|m| (1.0 / (2 * m + 1) as f64, C64::new(1.0 / (m * m) as f64, 0.0)))
                    .collect(),
            ),
            SeriesFamily::SemiAntiReal => Some(
                (1..=n)
                    .flat_map(|m| {
                        let c = C64::new(0.5 / (m * m) as f64, 0.0);
                        let w = 1.0 / (2 * m + 1) as f64;
                        [(w, c), (-w, c)]
                    })
                    .collect(),
            ),
            SeriesFamily::Haraux => {
                let mut terms = vec![(0.0, C64::new(harmonic(n) / 2.0, 0.0))];
                for m in 1..=n {
                    let w = 2f64.powi(1 - m as i32);
                    let c = C64::new(-0.25 / m as f64, 0.0);
                    terms.push((w, c));
                    terms.push((-w, c));
                }
                Some(terms)
            }
            SeriesFamily::Gevrey { .. } => None,
        }
    }

    /// Declared frequency family, in canonical order, capped at `budget`.
    pub fn frequencies(&self, n: usize, budget: usize) -> Vec<f64> {
        match self {
            SeriesFamily::SemiAnti => (1..=n).map(|m| 1.0 / (2 * m + 1) as f64).take(budget).collect(),
            SeriesFamily::SemiAntiReal => (1..=n)
                .flat_map(|m| {
                    let w = 1.0 / (2 * m + 1) as f64;
                    [w, -w]
                })
                .take(budget)
                .collect(),
            SeriesFamily::Haraux => std::iter::once(0.0)
                .chain((1..=n).flat_map(|m| {
                    let w = 2f64.powi(1 - m as i32);
                    [w, -w]
                }))
                .take(budget)
                .collect(),
            SeriesFamily::Gevrey { .. } => {
                // block k has period 2^{k+1}; harmonics j * pi / 2^k
                let mut out = vec![0.0];
                let mut j = 1usize;
                while out.len() < budget {
                    for k in 1..=n.min(8) {
                        for sign in [1.0, -1.0] {
                            let w = sign * j as f64 * std::f64::consts::PI / 2f64.powi(k as i32);
                            if !out.iter().any(|x| (x - w).abs() < 1e-15) && out.len() < budget {
                                out.push(w);
                            }
                        }
                    }
                    j += 1;
                }
                out.truncate(budget);
                out
            }
        }
    }
}

/// Non-truncatable closed-form functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `zeta(t) = 2 + cos t + cos(sqrt2 t)`
    Zeta,
    /// `sin(1/zeta(t))`
    StepanovSin,
    /// `d/dt sin(1/zeta(t))`
    StepanovG,
    /// A single Gevrey block `phi_{s,n}`, of period `2^{n+1}`.
    GevreyBlock { s: f64, n: u32 },
}

impl ClosedForm {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ClosedForm::Zeta => zeta(t),
            ClosedForm::StepanovSin => (1.0 / zeta(t)).sin(),
            ClosedForm::StepanovG => {
                let z = zeta(t);
                (t.sin() + SQRT_2 * (SQRT_2 * t).sin()) / (z * z) * (1.0 / z).cos()
            }
            ClosedForm::GevreyBlock { s, n } => gevrey_block(s, n, t),
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match *self {
            ClosedForm::Zeta => 4.0,
            ClosedForm::StepanovSin => 1.0,
            ClosedForm::StepanovG => f64::INFINITY,
            ClosedForm::GevreyBlock { s, .. } => gevrey_psi_max(s),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClosedForm::Zeta => "zeta",
            ClosedForm::StepanovSin => "stepanov-sin",
            ClosedForm::StepanovG => "stepanov-g",
            ClosedForm::GevreyBlock { .. } => "gevrey-block",
        }
    }

    pub fn frequencies(&self, budget: usize) -> Vec<f64> {
        match *self {
            ClosedForm::GevreyBlock { n, .. } => {
                let base = std::f64::consts::PI / 2f64.powi(n as i32);
                std::iter::once(0.0)
                    .chain((1..).flat_map(|j| [j as f64 * base, -(j as f64) * base]))
                    .take(budget)
                    .collect()
            }
            _ => {
                // quasi-periodic module j + k sqrt2, ordered by |j| + |k|
                let mut out = vec![0.0];
                let mut r = 1i64;
                while out.len() < budget && r < 64 {
                    for j in -r..=r {
                        let k = r - j.abs();
                        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
                            let w = j as f64 + kk as f64 * SQRT_2;
                            if !out.iter().any(|x| (x - w).abs() < 1e-12) {
                                out.push(w);
                            }
                        }
                    }
                    r += 1;
                }
                out.truncate(budget);
                out
            }
        }
    }
}

/// `2 + cos t + cos(sqrt2 t)` written as a sum of squares to avoid cancellation
/// near its near-zeros.
#[inline]
pub fn zeta(t: f64) -> f64 {
    let a = (0.5 * t).cos();
    let b = (FRAC_1_SQRT_2 * t).cos();
    2.0 * (a * a + b * b)
}

#[inline]
fn libm_ldexp_sin(t: f64, m: usize) -> f64 {
    let scale = if m < 1023 { 2f64.powi(-(m as i32)) } else { 0.0 };
    (t * scale).sin()
}

/// `g_s(x) = exp(-x^{1/(1-s)})` for `x > 0`, zero otherwise.
#[inline]
pub fn gevrey_g(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if s == 2.0 {
        (-1.0 / x).exp()
    } else {
        (-x.powf(1.0 / (1.0 - s))).exp()
    }
}

/// `psi_s(x) = g_s(x) g_s(1 - x)`, supported on `[0, 1]`.
#[inline]
pub fn gevrey_psi(s: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        gevrey_g(s, x) * gevrey_g(s, 1.0 - x)
    }
}

/// `sup psi_s = psi_s(1/2) = exp(-2 * 2^{1/(s-1)})`.
pub fn gevrey_psi_max(s: f64) -> f64 {
    (-2.0 * 2f64.powf(1.0 / (s - 1.0))).exp()
}

/// Splits `t` into its integer part and the 2-adic valuation of that part.
#[inline]
fn floor_valuation(t: f64) -> Option<(f64, u32)> {
    let fl = t.floor();
    if !(fl.abs() < 9.0e15) || fl == 0.0 {
        return None;
    }
    Some((fl, (fl as i64).trailing_zeros()))
}

pub fn gevrey_block(s: f64, n: u32, t: f64) -> f64 {
    match floor_valuation(t) {
        Some((fl, v)) if v == n => gevrey_psi(s, t - fl),
        _ => 0.0,
    }
}

/// Only the block whose index equals the valuation of `floor(t)` is non-zero.
pub fn gevrey_sum(s: f64, n: usize, t: f64) -> f64 {
    match floor_valuation(t) {
        Some((fl, v)) if v >= 1 && (v as usize) <= n => (v as f64).powf(-0.25) * gevrey_psi(s, t - fl),
        _ => 0.0,
    }
}

fn pairwise_sum_real(n: usize, term: &(dyn Fn(usize) -> f64 + Sync)) -> f64 {
    if n <= 8 {
        let mut s = 0.0;
        for k in 0..n {
            s += term(k);
        }
        return s;
    }
    fn rec(lo: usize, hi: usize, term: &(dyn Fn(usize) -> f64 + Sync)) -> f64 {
        if hi - lo <= 8 {
            let mut s = 0.0;
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

pub fn harmonic(n: usize) -> f64 {
    pairwise_sum_real(n, &|k| 1.0 / (k + 1) as f64)
}

/// Trigamma function for `x > 0`: `sum_{k>=0} 1/(x+k)^2`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        + 0.5 * r2
        + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0))));
    acc + series
}

/// Digamma function for `x > 0`.
pub fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r2 = 1.0 / (x * x);
    let series = x.ln() - 0.5 / x
        - r2 * (1.0 / 12.0 - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 / 132.0))));
    acc + series
}

/// `sum_{m>n} 1 / (m^2 (2m+1))` via partial fractions.
pub fn semi_anti_derivative_tail(n: usize) -> f64 {
    let x = n as f64 + 1.0;
    trigamma(x) + 2.0 * (digamma(x) - digamma(x + 0.5))
}

/// `sum_{m>n} 1/m * min(1, (r/2^m)^2)`: bound on the haraux tail over `|t| <= r`.
pub fn haraux_window_tail(n: usize, r: f64) -> f64 {
    let mut s = 0.0;
    let mut m = n + 1;
    loop {
        let q = r * 2f64.powi(-(m as i32));
        if q < 1.0 {
            // remaining terms r^2/(m 4^m) form a geometric tail with ratio <= 1/4
            let head = q * q / m as f64;
            return s + head * 4.0 / 3.0;
        }
        s += 1.0 / m as f64;
        m += 1;
    }
}
