use serde::{Deserialize, Serialize};

use super::{pairwise_sum, zero_value, Value, C64};
use crate::error::{invalid, Result};

/// One term `coef * e^{i<freq, t>}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: Vec<f64>,
    pub coef: Value,
}

/// Finite sum of exponentials with pairwise distinct frequency vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    dim: usize,
    codim: usize,
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    /// Builds a polynomial, merging terms with bitwise-equal frequencies in
    /// order of first appearance.
    pub fn new(dim: usize, codim: usize, terms: Vec<TrigTerm>) -> Result<Self> {
        if dim == 0 || codim == 0 {
            return Err(invalid("trigonometric polynomial needs dim >= 1 and codim >= 1"));
        }
        let mut merged: Vec<TrigTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.freq.len() != dim || t.coef.len() != codim {
                return Err(invalid(format!(
                    "term shape ({}, {}) does not match ({dim}, {codim})",
                    t.freq.len(),
                    t.coef.len()
                )));
            }
            if t.freq.iter().any(|x| !x.is_finite()) || t.coef.iter().any(|z| !z.is_finite()) {
                return Err(invalid("non-finite frequency or coefficient"));
            }
            let key = |f: &[f64]| f.iter().map(|x| (x + 0.0).to_bits()).collect::<Vec<_>>();
            let k = key(&t.freq);
            match merged.iter_mut().find(|m| key(&m.freq) == k) {
                Some(m) => {
                    for (a, b) in m.coef.iter_mut().zip(t.coef.iter()) {
                        *a += b;
                    }
                }
                None => merged.push(t),
            }
        }
        Ok(TrigPolynomial { dim, codim, terms: merged })
    }

    /// Scalar one-dimensional polynomial from `(frequency, coefficient)` pairs.
    pub fn scalar(terms: &[(f64, C64)]) -> Result<Self> {
        Self::new(
            1,
            1,
            terms
                .iter()
                .map(|&(f, c)| TrigTerm { freq: vec![f], coef: smallvec::smallvec![c] })
                .collect(),
        )
    }

    pub fn zero(dim: usize, codim: usize) -> Self {
        TrigPolynomial { dim, codim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.terms.iter().map(|t| t.freq.clone()).collect()
    }

    #[inline]
    fn phase(freq: &[f64], t: &[f64]) -> f64 {
        freq.iter().zip(t).map(|(l, x)| l * x).sum()
    }

    pub fn eval_into(&self, t: &[f64], out: &mut Value) {
        out.clear();
        if self.codim == 1 {
            let s = pairwise_sum(self.terms.len(), &|k| {
                let term = &self.terms[k];
                term.coef[0] * C64::cis(Self::phase(&term.freq, t))
            });
            out.push(s);
            return;
        }
        let cis: Vec<C64> = self.terms.iter().map(|tm| C64::cis(Self::phase(&tm.freq, t))).collect();
        for j in 0..self.codim {
            out.push(pairwise_sum(self.terms.len(), &|k| self.terms[k].coef[j] * cis[k]));
        }
    }

    /// Exact translation: `c -> c * e^{i<freq, tau>}`.
    pub fn translate(&self, tau: &[f64]) -> Self {
        self.map_coefs(|tm| C64::cis(Self::phase(&tm.freq, tau)))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_coefs(|_| c)
    }

    /// Multiplies each coefficient by `factor(term)`.
    pub fn map_coefs(&self, factor: impl Fn(&TrigTerm) -> C64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|tm| {
                let f = factor(tm);
                TrigTerm { freq: tm.freq.clone(), coef: tm.coef.iter().map(|z| z * f).collect() }
            })
            .collect();
        TrigPolynomial { dim: self.dim, codim: self.codim, terms }
    }

    /// Shifts every frequency by `freq`.
    pub fn modulate(&self, freq: &[f64]) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|tm| TrigTerm {
                freq: tm.freq.iter().zip(freq).map(|(a, b)| a + b).collect(),
                coef: tm.coef.clone(),
            })
            .collect();
        Self::new(self.dim, self.codim, terms)
    }

    /// Sum of coefficient norms, an upper bound for the sup norm.
    pub fn coef_norm_sum(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }

    /// Concatenates the terms of `self` and `c * other`.
    pub fn add_scaled(&self, other: &Self, c: C64) -> Result<Self> {
        if self.dim != other.dim || self.codim != other.codim {
            return Err(invalid("trigonometric polynomials of different shapes"));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.scale(c).terms);
        Self::new(self.dim, self.codim, terms)
    }

    pub fn coefficient_of(&self, freq: &[f64]) -> Value {
        self.terms
            .iter()
            .find(|t| t.freq == freq)
            .map(|t| t.coef.clone())
            .unwrap_or_else(|| zero_value(self.codim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn equal_frequencies_merge() {
        let p = TrigPolynomial::scalar(&[(1.0, C64::new(1.0, 0.0)), (2.0, C64::new(0.5, 0.0)), (1.0, C64::new(0.0, 1.0))])
            .unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[0].coef[0], C64::new(1.0, 1.0));
    }

    #[test]
    fn translation_by_pi_flips_unit_frequency() {
        let p = TrigPolynomial::scalar(&[(1.0, C64::new(1.0, 0.0))]).unwrap().translate(&[PI]);
        let c = p.terms()[0].coef[0];
        assert!((c - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vector_valued_evaluation() {
        let p = TrigPolynomial::new(
            2,
            2,
            vec![TrigTerm {
                freq: vec![1.0, 2.0],
                coef: smallvec::smallvec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)],
            }],
        )
        .unwrap();
        let mut v = Value::new();
        p.eval_into(&[0.5, 0.25], &mut v);
        let e = C64::cis(1.0);
        assert!((v[0] - e).norm() < 1e-15);
        assert!((v[1] - C64::new(0.0, 2.0) * e).norm() < 1e-15);
    }
}
