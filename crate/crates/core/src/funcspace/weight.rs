use serde::{Deserialize, Serialize};

use super::scalar::interp_linear;
use crate::error::{invalid, Result};

/// Strictly positive weights `nu` on the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "weight", rename_all = "snake_case")]
pub enum WeightFunction {
    Constant { c: f64 },
    /// `(1 + |x|)^b`
    PowerRadial { b: f64 },
    /// `|t|^{-a}`, defined for `t != 0`.
    PowerTime { a: f64 },
    /// Piecewise-linear in the first coordinate, constant outside the nodes.
    Table { xs: Vec<f64>, ys: Vec<f64> },
    /// Equal to 1 except at finitely many `points`, where it takes `values`.
    Spikes { points: Vec<f64>, values: Vec<f64> },
}

impl Default for WeightFunction {
    fn default() -> Self {
        WeightFunction::Constant { c: 1.0 }
    }
}

impl WeightFunction {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            WeightFunction::Constant { c } => *c > 0.0 && c.is_finite(),
            WeightFunction::PowerRadial { b } => b.is_finite(),
            WeightFunction::PowerTime { a } => a.is_finite() && *a >= 0.0,
            WeightFunction::Table { xs, ys } => {
                xs.len() >= 2
                    && xs.len() == ys.len()
                    && xs.windows(2).all(|w| w[1] > w[0])
                    && ys.iter().all(|y| *y > 0.0 && y.is_finite())
            }
            WeightFunction::Spikes { points, values } => {
                points.len() == values.len() && values.iter().all(|v| *v > 0.0 && v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("weight {self:?} is not strictly positive and finite")))
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WeightFunction::Constant { c } => *c,
            WeightFunction::PowerRadial { b } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                (1.0 + r).powf(*b)
            }
            WeightFunction::PowerTime { a } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                r.powf(-*a)
            }
            WeightFunction::Table { xs, ys } => interp_linear(xs, ys, x[0]),
            WeightFunction::Spikes { points, values } => points
                .iter()
                .position(|p| *p == x[0])
                .map(|k| values[k])
                .unwrap_or(1.0),
        }
    }

    /// Isolated points a sampling grid must include to see the weight's sup.
    pub fn atoms(&self) -> &[f64] {
        match self {
            WeightFunction::Spikes { points, .. } => points,
            _ => &[],
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, WeightFunction::Constant { c } if *c == 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_positive() {
        let ws = [
            WeightFunction::one(),
            WeightFunction::PowerRadial { b: -0.5 },
            WeightFunction::PowerRadial { b: 2.0 },
            WeightFunction::Table { xs: vec![0.0, 1.0], ys: vec![1.0, 3.0] },
            WeightFunction::Spikes { points: vec![4.25], values: vec![2.0] },
        ];
        for w in &ws {
            w.validate().unwrap();
            for k in -20..20 {
                assert!(w.eval(&[k as f64 * 0.37]) > 0.0);
            }
        }
        assert!(WeightFunction::Constant { c: 0.0 }.validate().is_err());
    }

    #[test]
    fn spikes_hit_exact_points() {
        let w = WeightFunction::Spikes { points: vec![4.25], values: vec![2.0] };
        assert_eq!(w.eval(&[4.25]), 2.0);
        assert_eq!(w.eval(&[4.2500001]), 1.0);
    }
}
