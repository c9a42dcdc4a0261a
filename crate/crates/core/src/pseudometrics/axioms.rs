use serde::{Deserialize, Serialize};

use super::{distance_value, norm_value, PseudometricSpec};
use crate::error::{invalid, Result};
use crate::funcspace::{compose_scalar, FunctionDescriptor, ScalarMap, C64};

/// Tolerance for the identity and triangle checks.
pub const AXIOM_TOL: f64 = 1e-10;
/// Measured constants above this are treated as unbounded.
pub const CONSTANT_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomEntry {
    pub name: String,
    pub passed: bool,
    /// Residual or the smallest constant consistent with the samples.
    pub constant: f64,
    pub witness: String,
}

/// Sample-based axiom report. A pass means "consistent on samples", never "proved".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub family: String,
    pub samples: usize,
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn entry(&self, name: &str) -> Option<&AxiomEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn sum_of(fs: &[&FunctionDescriptor], scale: f64) -> Result<FunctionDescriptor> {
    FunctionDescriptor::linear_combination(fs.iter().map(|f| (real(scale), (*f).clone())).collect())
}

/// Functions `w` with `0 <= w <= g` for a non-negative `g`.
fn dominated(g: &FunctionDescriptor) -> Result<Vec<(String, FunctionDescriptor)>> {
    let cap = ScalarMap::table(vec![0.0, 0.5, 1e300], vec![0.0, 0.5, 0.5])?;
    Ok(vec![
        ("g".into(), g.clone()),
        ("g/2".into(), g.scale(real(0.5))),
        ("g/4".into(), g.scale(real(0.25))),
        ("arctan(g)".into(), compose_scalar(g, &ScalarMap::arctan())),
        ("min(g,1/2)".into(), compose_scalar(g, &cap)),
    ])
}

struct Worst {
    value: f64,
    witness: String,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, witness: "none".into() }
    }
    fn offer(&mut self, v: f64, w: impl FnOnce() -> String) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.witness = w();
        }
    }
}

/// Checks pseudometric axioms, (C0)-(C3) and continuity of scalar
/// multiplication at zero on the given samples. Norms are `||f|| = d(|f|, 0)`.
pub fn check_space_axioms(spec: &PseudometricSpec, samples: &[FunctionDescriptor]) -> Result<AxiomReport> {
    if samples.len() < 3 {
        return Err(invalid("axiom checks need at least three sample functions"));
    }
    let n = samples.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = distance_value(spec, &samples[i], &samples[j])?;
        }
    }
    let mut entries = Vec::new();

    let mut id = Worst::new();
    let mut sym = Worst::new();
    let mut tri = Worst::new();
    for i in 0..n {
        id.offer(dist[i][i], || format!("d(f{i}, f{i})"));
        for j in 0..n {
            let asym = if dist[i][j] == dist[j][i] { 0.0 } else { (dist[i][j] - dist[j][i]).abs().max(f64::MIN_POSITIVE) };
            sym.offer(asym, || format!("d(f{i}, f{j}) != d(f{j}, f{i})"));
            for k in 0..n {
                let r = dist[i][k] - dist[i][j] - dist[j][k];
                tri.offer(r, || format!("d(f{i}, f{k}) > d(f{i}, f{j}) + d(f{j}, f{k})"));
            }
        }
    }
    entries.push(AxiomEntry { name: "identity".into(), passed: id.value <= AXIOM_TOL, constant: id.value, witness: id.witness });
    entries.push(AxiomEntry { name: "symmetry".into(), passed: sym.value == 0.0, constant: sym.value, witness: sym.witness });
    entries.push(AxiomEntry { name: "triangle".into(), passed: tri.value <= AXIOM_TOL, constant: tri.value, witness: tri.witness });

    let abs: Vec<FunctionDescriptor> = samples.iter().map(|f| compose_scalar(f, &ScalarMap::abs())).collect();
    let norms: Vec<f64> = abs.iter().map(|f| norm_value(spec, f)).collect::<Result<_>>()?;

    // (C0): 0 <= w <= g  =>  ||w|| <= e ||g||
    let mut c0 = Worst::new();
    for (i, g) in abs.iter().enumerate() {
        if norms[i] == 0.0 {
            continue;
        }
        for (label, w) in dominated(g)? {
            let r = norm_value(spec, &w)? / norms[i];
            c0.offer(r, || format!("w = {label} for |f{i}|"));
        }
    }
    entries.push(bounded("C0", c0));

    // (C1): ||d' f|| <= d (1 + d') ||f||
    let mut c1 = Worst::new();
    for (i, f) in abs.iter().enumerate() {
        if norms[i] == 0.0 {
            continue;
        }
        for dp in [0.0, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e6] {
            let r = norm_value(spec, &f.scale(real(dp)))? / ((1.0 + dp) * norms[i]);
            c1.offer(r, || format!("d' = {dp} on |f{i}|"));
        }
    }
    entries.push(bounded("C1", c1));

    // ||eps * 1|| -> 0 as eps -> 0
    let one = FunctionDescriptor::trig(crate::funcspace::TrigPolynomial::new(
        samples[0].dim(),
        1,
        vec![crate::funcspace::TrigTerm { freq: vec![0.0; samples[0].dim()], coef: smallvec::smallvec![real(1.0)] }],
    )?);
    let eps_norms: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-4, 1e-6, 1e-8]
        .iter()
        .map(|&e| Ok((e, norm_value(spec, &one.scale(real(e)))?)))
        .collect::<Result<_>>()?;
    let last = eps_norms.last().map(|x| x.1).unwrap_or(0.0);
    entries.push(AxiomEntry {
        name: "scaling_continuity".into(),
        passed: last <= 1e-6,
        constant: last,
        witness: format!("||eps * 1|| at eps = {:?}", eps_norms),
    });

    // (C2): 0 <= w <= d'(f + g)  =>  ||w|| <= e (1 + d') (||f|| + ||g||)
    let mut c2 = Worst::new();
    for i in 0..n {
        for j in i + 1..n {
            let base = norms[i] + norms[j];
            if base == 0.0 {
                continue;
            }
            for dp in [0.5, 2.0] {
                for (label, w) in dominated(&sum_of(&[&abs[i], &abs[j]], dp)?)? {
                    let r = norm_value(spec, &w)? / ((1.0 + dp) * base);
                    c2.offer(r, || format!("w = {label}, d' = {dp}, pair (f{i}, f{j})"));
                }
            }
        }
    }
    entries.push(bounded("C2", c2));

    // (C3): the three-function analogue
    let mut c3 = Worst::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let base = norms[i] + norms[j] + norms[k];
                if base == 0.0 {
                    continue;
                }
                let dp = 1.0;
                for (label, w) in dominated(&sum_of(&[&abs[i], &abs[j], &abs[k]], dp)?)? {
                    let r = norm_value(spec, &w)? / ((1.0 + dp) * base);
                    c3.offer(r, || format!("w = {label}, triple (f{i}, f{j}, f{k})"));
                }
            }
        }
    }
    entries.push(bounded("C3", c3));

    Ok(AxiomReport { family: spec.family.name().into(), samples: n, entries })
}

fn bounded(name: &str, w: Worst) -> AxiomEntry {
    AxiomEntry { name: name.into(), passed: w.value.is_finite() && w.value <= CONSTANT_CAP, constant: w.value, witness: w.witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Window;
    use crate::pseudometrics::MetricFamily;

    fn trio() -> Vec<FunctionDescriptor> {
        vec![FunctionDescriptor::sin(), FunctionDescriptor::cos(), FunctionDescriptor::constant(real(1.0))]
    }

    #[test]
    fn sup_norm_passes_everything() {
        let spec = PseudometricSpec::new(MetricFamily::sup(), Window::interval(0.0, 10.0).unwrap(), 32.0).unwrap();
        let r = check_space_axioms(&spec, &trio()).unwrap();
        assert!(r.all_passed(), "{r:?}");
        let c1 = r.entry("C1").unwrap().constant;
        assert!(c1 <= 1.0 && c1 > 0.99, "{c1}");
    }

    #[test]
    fn discrete_metric_breaks_scaling_continuity() {
        let spec = PseudometricSpec::new(MetricFamily::DiscreteUnit, Window::interval(0.0, 10.0).unwrap(), 8.0).unwrap();
        let r = check_space_axioms(&spec, &trio()).unwrap();
        assert!(r.entry("triangle").unwrap().passed);
        assert!(r.entry("C1").unwrap().passed);
        let sc = r.entry("scaling_continuity").unwrap();
        assert!(!sc.passed);
        assert_eq!(sc.constant, 1.0);
        let two_f = trio()[0].scale(real(2.0));
        let zero = FunctionDescriptor::zero();
        assert_eq!(distance_value(&spec, &two_f, &zero).unwrap(), distance_value(&spec, &trio()[0], &zero).unwrap());
    }

    #[test]
    fn needs_three_samples() {
        let spec = PseudometricSpec::new(MetricFamily::sup(), Window::interval(0.0, 1.0).unwrap(), 8.0).unwrap();
        assert!(check_space_axioms(&spec, &trio()[..2]).is_err());
    }
}
