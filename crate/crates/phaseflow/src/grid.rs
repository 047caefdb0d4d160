//! Uniform tensor grids on a box and nodal fields.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[0, L_0] × … × [0, L_{d-1}]`, `d ∈ {1, 2}`.
///
/// Nodes are numbered row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    extents: Vec<f64>,
    nodes: Vec<usize>,
}

impl Grid {
    pub fn new(extents: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let d = extents.len();
        if !(1..=2).contains(&d) || nodes.len() != d {
            return Err(Error::InvalidParameter(format!(
                "grid needs 1 or 2 axes with matching extents and node counts, got {} and {}",
                extents.len(),
                nodes.len()
            )));
        }
        if let Some(l) = extents.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "grid extent must be positive, got {l}"
            )));
        }
        if let Some(n) = nodes.iter().find(|n| **n < 3) {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 nodes per axis, got {n}"
            )));
        }
        Ok(Grid { extents, nodes })
    }

    pub fn line(length: f64, nodes: usize) -> Result<Self> {
        Grid::new(vec![length], vec![nodes])
    }

    pub fn rect(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Grid::new(vec![lx, ly], vec![nx, ny])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / (self.nodes[axis] - 1) as f64
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// |Ω|.
    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Index step between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.nodes[axis + 1..].iter().product()
    }

    /// Per-axis indices of a node.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.dim() {
            1 => [idx, 0],
            _ => [idx / self.nodes[1], idx % self.nodes[1]],
        }
    }

    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 2];
        for (axis, xa) in x.iter_mut().enumerate().take(self.dim()) {
            // Mirror the last node exactly onto the extent.
            *xa = if m[axis] == self.nodes[axis] - 1 {
                self.extents[axis]
            } else {
                m[axis] as f64 * self.spacing(axis)
            };
        }
        x
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        (0..self.dim()).any(|a| m[a] == 0 || m[a] == self.nodes[a] - 1)
    }

    /// Tensor trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.len())
            .map(|idx| {
                let m = self.multi_index(idx);
                (0..self.dim())
                    .map(|a| {
                        let h = self.spacing(a);
                        if m[a] == 0 || m[a] == self.nodes[a] - 1 {
                            0.5 * h
                        } else {
                            h
                        }
                    })
                    .product()
            })
            .collect()
    }

    /// Lumped boundary measure: `Σ_i b_i v_i` approximates `∫_Γ v`.
    ///
    /// In 1D the two end nodes carry weight 1. In 2D each edge contributes
    /// trapezoid weights along itself, so corners collect from two edges.
    pub fn boundary_weights(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.len()];
        match self.dim() {
            1 => {
                b[0] = 1.0;
                b[self.nodes[0] - 1] = 1.0;
            }
            _ => {
                for idx in 0..self.len() {
                    let m = self.multi_index(idx);
                    for a in 0..2 {
                        let other = 1 - a;
                        if m[a] == 0 || m[a] == self.nodes[a] - 1 {
                            let h = self.spacing(other);
                            let end = m[other] == 0 || m[other] == self.nodes[other] - 1;
                            b[idx] += if end { 0.5 * h } else { h };
                        }
                    }
                }
            }
        }
        b
    }

    /// Neighbour indices `(minus, plus)` of `idx` along `axis`, if present.
    pub fn neighbours(&self, idx: usize, axis: usize) -> (Option<usize>, Option<usize>) {
        let m = self.multi_index(idx)[axis];
        let s = self.stride(axis);
        let minus = (m > 0).then(|| idx - s);
        let plus = (m + 1 < self.nodes[axis]).then(|| idx + s);
        (minus, plus)
    }
}

/// Nodal values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("field value {v} is not finite")));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![c; n],
        }
    }

    /// Samples `f(x, y)` at every node (`y = 0` in 1D).
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.coords(i);
                f(x, y)
            })
            .collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &Field) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Trapezoidal quadrature `∫_Ω f` (tensorized in 2D).
pub fn integrate(grid: &Grid, values: &[f64]) -> f64 {
    grid.weights().iter().zip(values).map(|(w, v)| w * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::line(1.0, 2).is_err());
        assert!(Grid::line(0.0, 5).is_err());
        assert!(Grid::new(vec![1.0; 3], vec![4; 3]).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = Arc::new(Grid::line(2.0, 17).unwrap());
        assert!((integrate(&g, Field::constant(g.clone(), 3.0).values()) - 6.0).abs() < 1e-14);

        for n in [3, 8, 101] {
            let g = Arc::new(Grid::line(1.0, n).unwrap());
            let f = Field::from_fn(g.clone(), |x, _| x);
            assert!((integrate(&g, f.values()) - 0.5).abs() < 1e-14);
        }

        let g = Arc::new(Grid::line(1.0, 101).unwrap());
        let f = Field::from_fn(g.clone(), |x, _| x * x);
        assert!((integrate(&g, f.values()) - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn integrate_affine_exactly_in_2d() {
        let g = Arc::new(Grid::rect(2.0, 3.0, 5, 7).unwrap());
        let f = Field::from_fn(g.clone(), |x, y| 1.0 + 2.0 * x - y);
        // ∫∫ 1 + 2x - y = 6 + 2·(2·3) - (2·4.5) = 9
        assert!((integrate(&g, f.values()) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_weights_measure_perimeter() {
        let g = Grid::rect(2.0, 3.0, 5, 7).unwrap();
        let total: f64 = g.boundary_weights().iter().sum();
        assert!((total - 10.0).abs() < 1e-12);
        let g = Grid::line(1.0, 9).unwrap();
        assert_eq!(g.boundary_weights().iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn coordinates_are_row_major() {
        let g = Grid::rect(1.0, 2.0, 3, 5).unwrap();
        assert_eq!(g.coords(0), [0.0, 0.0]);
        assert_eq!(g.coords(4), [0.0, 2.0]);
        assert_eq!(g.coords(5), [0.5, 0.0]);
        assert_eq!(g.stride(0), 5);
        assert_eq!(g.stride(1), 1);
    }
}
