//! Uniform sample grids over boxes.

use crate::error::{invalid, Result};
use crate::funcspace::Window;

/// Uniform nodes `a + i*h`, `i = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisGrid {
    pub a: f64,
    pub h: f64,
    pub n: usize,
}

impl AxisGrid {
    /// Covers `[a, b]` with `ceil((b - a) * density)` cells of equal width.
    pub fn covering(a: f64, b: f64, density: f64) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(invalid(format!("grid density must be positive, got {density}")));
        }
        if !(b >= a) {
            return Err(invalid(format!("empty interval [{a}, {b}]")));
        }
        if b == a {
            return Ok(AxisGrid { a, h: 0.0, n: 1 });
        }
        let cells = ((b - a) * density).ceil().max(1.0) as usize;
        Ok(AxisGrid { a, h: (b - a) / cells as f64, n: cells + 1 })
    }

    /// Nodes at spacing exactly `1/k` starting at `a`, with `cells` cells.
    pub fn with_step(a: f64, k: usize, cells: usize) -> Self {
        AxisGrid { a, h: 1.0 / k as f64, n: cells + 1 }
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if self.n < 2 {
            1.0
        } else if i == 0 || i + 1 == self.n {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

/// Tensor product of axis grids, enumerated with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorGrid {
    pub axes: Vec<AxisGrid>,
}

impl TensorGrid {
    pub fn covering(window: &Window, density: f64) -> Result<Self> {
        let axes = window
            .lo
            .iter()
            .zip(&window.hi)
            .map(|(&a, &b)| AxisGrid::covering(a, b, density))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorGrid { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coarsest spacing over the axes.
    pub fn spacing(&self) -> f64 {
        self.axes.iter().map(|a| a.h).fold(0.0, f64::max)
    }

    fn split(&self, mut flat: usize, idx: &mut [usize]) {
        for (k, ax) in self.axes.iter().enumerate().rev() {
            idx[k] = flat % ax.n;
            flat /= ax.n;
        }
    }

    pub fn point(&self, flat: usize, out: &mut Vec<f64>) {
        let mut idx = vec![0; self.dim()];
        self.split(flat, &mut idx);
        out.clear();
        out.extend(self.axes.iter().zip(&idx).map(|(ax, &i)| ax.node(i)));
    }

    /// Product trapezoid weight of a flat index.
    pub fn weight(&self, flat: usize) -> f64 {
        let mut idx = vec![0; self.dim()];
        self.split(flat, &mut idx);
        self.axes.iter().zip(&idx).map(|(ax, &i)| ax.weight(i)).product()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut p = Vec::new();
        (0..self.len())
            .map(|k| {
                self.point(k, &mut p);
                p.clone()
            })
            .collect()
    }
}

/// Geometric grid `t0 * r^k`, `k = 0..count`.
pub fn geometric_grid(t0: f64, r: f64, count: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0) || !(r > 1.0) {
        return Err(invalid(format!("geometric grid needs t0 > 0 and r > 1, got {t0}, {r}")));
    }
    Ok((0..count).map(|k| t0 * r.powi(k as i32)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_hits_both_ends() {
        let g = AxisGrid::covering(-1.0, 2.0, 10.0).unwrap();
        assert_eq!(g.n, 31);
        assert_eq!(g.node(0), -1.0);
        assert!((g.node(30) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_weights_sum_to_volume() {
        let w = Window::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        let g = TensorGrid::covering(&w, 4.0).unwrap();
        let s: f64 = (0..g.len()).map(|k| g.weight(k)).sum();
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_defaults() {
        let g = geometric_grid(10.0, 2.0, 12).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g[11], 20480.0);
    }
}
