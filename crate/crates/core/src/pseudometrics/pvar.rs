use crate::error::{invalid, Result};
use crate::funcspace::{value_norm, Value, C64};

/// `max_i best(i)` for `best(i) = max_{j<i} best(j) + dist(i, j)^p`, `best(0) = 0`.
///
/// Returns the `p`-th power of the variation; callers take the root.
#[allow(clippy::needless_range_loop)]
pub fn p_variation_pow_by(n: usize, p: f64, dist: impl Fn(usize, usize) -> f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![0.0f64; n];
    let mut top = 0.0f64;
    for i in 1..n {
        let mut b = 0.0f64;
        for j in 0..i {
            let d = dist(i, j);
            let v = best[j] + if p == 1.0 { d } else { d.powf(p) };
            if v > b {
                b = v;
            }
        }
        best[i] = b;
        if b > top {
            top = b;
        }
    }
    top
}

/// Exact p-variation over all sub-partitions of the sample points.
pub fn p_variation(samples: &[(f64, C64)], p: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(invalid("p-variation needs at least two samples"));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be a finite real >= 1, got {p}")));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("sample abscissae must be strictly increasing"));
    }
    let top = p_variation_pow_by(samples.len(), p, |i, j| (samples[i].1 - samples[j].1).norm());
    Ok(top.powf(1.0 / p))
}

/// p-variation of vector samples (Euclidean increments), no validation.
pub fn p_variation_values(values: &[Value], p: f64) -> f64 {
    if p == 1.0 {
        let mut s = 0.0;
        for w in values.windows(2) {
            s += increment(&w[1], &w[0]);
        }
        return s;
    }
    p_variation_pow_by(values.len(), p, |i, j| increment(&values[i], &values[j])).powf(1.0 / p)
}

#[inline]
pub(crate) fn increment(a: &Value, b: &Value) -> f64 {
    if a.len() == 1 {
        (a[0] - b[0]).norm()
    } else {
        let mut d = a.clone();
        for (x, y) in d.iter_mut().zip(b.iter()) {
            *x -= y;
        }
        value_norm(&d)
    }
}
