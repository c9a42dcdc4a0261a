use serde::{Deserialize, Serialize};

use super::{Value, C64};
use crate::error::{invalid, Result};

/// Pointwise scalar maps. `Abs`, `Power` and `MonotoneTable` act on the
/// Euclidean modulus and produce a scalar; `Sign` and `Arctan` act on the real
/// part of each component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum ScalarMapFamily {
    Identity,
    Abs,
    Power { alpha: f64 },
    Sign,
    Arctan,
    /// Piecewise-linear interpolation through `(xs, ys)`, constant outside.
    MonotoneTable { xs: Vec<f64>, ys: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarMap {
    pub family: ScalarMapFamily,
    pub lipschitz: Option<f64>,
    pub monotone: bool,
}

impl ScalarMap {
    pub fn identity() -> Self {
        ScalarMap { family: ScalarMapFamily::Identity, lipschitz: Some(1.0), monotone: true }
    }
    pub fn abs() -> Self {
        ScalarMap { family: ScalarMapFamily::Abs, lipschitz: Some(1.0), monotone: true }
    }
    pub fn sign() -> Self {
        ScalarMap { family: ScalarMapFamily::Sign, lipschitz: None, monotone: true }
    }
    pub fn arctan() -> Self {
        ScalarMap { family: ScalarMapFamily::Arctan, lipschitz: Some(1.0), monotone: true }
    }
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("power exponent must be positive, got {alpha}")));
        }
        let lipschitz = (alpha == 1.0).then_some(1.0);
        Ok(ScalarMap { family: ScalarMapFamily::Power { alpha }, lipschitz, monotone: true })
    }
    pub fn table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(invalid("table needs >= 2 nodes and matching lengths"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("table abscissae must be strictly increasing"));
        }
        let inc = ys.windows(2).all(|w| w[1] >= w[0]);
        let dec = ys.windows(2).all(|w| w[1] <= w[0]);
        let slope = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max);
        Ok(ScalarMap {
            family: ScalarMapFamily::MonotoneTable { xs, ys },
            lipschitz: Some(slope),
            monotone: inc || dec,
        })
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(Self::identity()),
            "abs" => Ok(Self::abs()),
            "sign" => Ok(Self::sign()),
            "arctan" => Ok(Self::arctan()),
            other => match other.strip_prefix("power:") {
                Some(a) => Self::power(a.parse().map_err(|_| invalid(format!("bad exponent `{a}`")))?),
                None => Err(invalid(format!("unknown scalar map `{other}`"))),
            },
        }
    }

    /// True when the output is the scalar image of the modulus.
    pub fn acts_on_modulus(&self) -> bool {
        matches!(
            self.family,
            ScalarMapFamily::Abs | ScalarMapFamily::Power { .. } | ScalarMapFamily::MonotoneTable { .. }
        )
    }

    pub fn output_dim(&self, input_dim: usize) -> usize {
        if self.acts_on_modulus() {
            1
        } else {
            input_dim
        }
    }

    /// The map on real numbers.
    pub fn apply_real(&self, x: f64) -> f64 {
        match &self.family {
            ScalarMapFamily::Identity => x,
            ScalarMapFamily::Abs => x.abs(),
            ScalarMapFamily::Power { alpha } => x.abs().powf(*alpha),
            ScalarMapFamily::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            ScalarMapFamily::Arctan => x.atan(),
            ScalarMapFamily::MonotoneTable { xs, ys } => interp(xs, ys, x),
        }
    }

    pub fn apply(&self, v: &Value, out: &mut Value) {
        out.clear();
        match &self.family {
            ScalarMapFamily::Identity => out.extend(v.iter().copied()),
            ScalarMapFamily::Sign | ScalarMapFamily::Arctan => {
                out.extend(v.iter().map(|z| C64::new(self.apply_real(z.re), 0.0)))
            }
            _ => {
                let m = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                out.push(C64::new(self.apply_real(m), 0.0));
            }
        }
    }

    /// Checks the comparator requirements: monotone and `phi(0) = 0`.
    pub fn validate_comparator(&self) -> Result<()> {
        if !self.monotone {
            return Err(invalid("comparator must be monotone"));
        }
        if self.apply_real(0.0) != 0.0 {
            return Err(invalid("comparator must vanish at zero"));
        }
        if matches!(self.family, ScalarMapFamily::Sign) {
            return Err(invalid("sign is not admissible as a comparator"));
        }
        Ok(())
    }

    /// Largest `|h(x) - h(y)| / |x - y|` over the sampled pairs.
    pub fn measured_lipschitz(&self, samples: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for (i, &x) in samples.iter().enumerate() {
            for &y in &samples[i + 1..] {
                if x != y {
                    best = best.max((self.apply_real(x) - self.apply_real(y)).abs() / (x - y).abs());
                }
            }
        }
        best
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&a| a <= x) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + w * (ys[k + 1] - ys[k])
}

pub(crate) fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    interp(xs, ys, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn declared_lipschitz_holds(x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let maps = [
                ScalarMap::identity(),
                ScalarMap::abs(),
                ScalarMap::arctan(),
                ScalarMap::power(1.0).unwrap(),
                ScalarMap::table(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 2.5]).unwrap(),
            ];
            for m in &maps {
                let l = m.lipschitz.unwrap();
                prop_assert!((m.apply_real(x) - m.apply_real(y)).abs() <= l * (x - y).abs() * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn sign_and_abs_conventions() {
        let v: Value = smallvec::smallvec![C64::new(-0.3, 0.4)];
        let mut out = Value::new();
        ScalarMap::abs().apply(&v, &mut out);
        assert!((out[0].re - 0.5).abs() < 1e-16);
        ScalarMap::sign().apply(&v, &mut out);
        assert_eq!(out[0], C64::new(-1.0, 0.0));
    }

    #[test]
    fn comparator_validation() {
        assert!(ScalarMap::identity().validate_comparator().is_ok());
        assert!(ScalarMap::power(2.0).unwrap().validate_comparator().is_ok());
        assert!(ScalarMap::sign().validate_comparator().is_err());
        assert!(ScalarMap::table(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap().validate_comparator().is_err());
    }
}
