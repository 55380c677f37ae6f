use serde::{Deserialize, Serialize};

use super::FieldError;
use crate::algebra::MAX_N;

/// Tensor-product grid over the box `Π [a_i, b_i] ⊂ R^{n+1}`.
///
/// Nodes are numbered row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    n: usize,
    extents: Vec<usize>,
    lows: Vec<f64>,
    highs: Vec<f64>,
    spacings: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    n: usize,
    extents: Vec<usize>,
    lows: Vec<f64>,
    highs: Vec<f64>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = FieldError;
    fn try_from(s: GridSpec) -> Result<Grid, FieldError> {
        Grid::new(s.n, s.extents, s.lows, s.highs)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> GridSpec {
        GridSpec {
            n: g.n,
            extents: g.extents,
            lows: g.lows,
            highs: g.highs,
        }
    }
}

impl Grid {
    pub fn new(n: usize, extents: Vec<usize>, lows: Vec<f64>, highs: Vec<f64>) -> Result<Grid, FieldError> {
        if n == 0 || n > MAX_N {
            return Err(FieldError::InvalidGrid(format!("n = {n} outside 1..={MAX_N}")));
        }
        let axes = n + 1;
        if extents.len() != axes || lows.len() != axes || highs.len() != axes {
            return Err(FieldError::InvalidGrid(format!(
                "expected {axes} axes, got extents {}, lows {}, highs {}",
                extents.len(),
                lows.len(),
                highs.len()
            )));
        }
        let mut spacings = Vec::with_capacity(axes);
        for i in 0..axes {
            if extents[i] < 3 {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {i} has {} nodes; at least 3 are needed",
                    extents[i]
                )));
            }
            let h = (highs[i] - lows[i]) / (extents[i] - 1) as f64;
            if !(h.is_finite() && h > 0.0) {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {i} interval [{}, {}] gives spacing {h}",
                    lows[i], highs[i]
                )));
            }
            spacings.push(h);
        }
        let mut strides = vec![1usize; axes];
        for i in (0..axes - 1).rev() {
            strides[i] = strides[i + 1]
                .checked_mul(extents[i + 1])
                .ok_or_else(|| FieldError::InvalidGrid("node count overflows".into()))?;
        }
        let len = strides[0]
            .checked_mul(extents[0])
            .ok_or_else(|| FieldError::InvalidGrid("node count overflows".into()))?;
        Ok(Grid {
            n,
            extents,
            lows,
            highs,
            spacings,
            strides,
            len,
        })
    }

    /// Same extent and interval on every axis.
    pub fn cube(n: usize, nodes: usize, low: f64, high: f64) -> Result<Grid, FieldError> {
        Grid::new(n, vec![nodes; n + 1], vec![low; n + 1], vec![high; n + 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn axes(&self) -> usize {
        self.n + 1
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Coefficients per node, `2^n`.
    pub fn width(&self) -> usize {
        1 << self.n
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn lows(&self) -> &[f64] {
        &self.lows
    }

    pub fn highs(&self) -> &[f64] {
        &self.highs
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Index of `node` along `axis`.
    #[inline]
    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.extents[axis]
    }

    pub fn node(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Writes the coordinates of `node` into `x` (length `n + 1`).
    #[inline]
    pub fn coords_into(&self, node: usize, x: &mut [f64]) {
        for (axis, xi) in x.iter_mut().enumerate() {
            *xi = self.lows[axis] + self.axis_index(node, axis) as f64 * self.spacings[axis];
        }
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.axes()];
        self.coords_into(node, &mut x);
        x
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        (0..self.axes()).any(|axis| {
            let i = self.axis_index(node, axis);
            i == 0 || i + 1 == self.extents[axis]
        })
    }

    /// Trapezoid weight: `Π h_i`, halved once per axis on which the node is
    /// an end point.
    pub fn quadrature_weight(&self, node: usize) -> f64 {
        let mut w = 1.0;
        for axis in 0..self.axes() {
            let i = self.axis_index(node, axis);
            w *= self.spacings[axis];
            if i == 0 || i + 1 == self.extents[axis] {
                w *= 0.5;
            }
        }
        w
    }

    /// Box volume `Π (b_i - a_i)`.
    pub fn volume(&self) -> f64 {
        self.lows.iter().zip(&self.highs).map(|(a, b)| b - a).product()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lows.iter().zip(&self.highs))
            .all(|(xi, (a, b))| *a <= *xi && *xi <= *b)
    }

    /// The grid with every axis refined to `2(N - 1) + 1` nodes.
    pub fn refined(&self) -> Grid {
        let extents = self.extents.iter().map(|&e| 2 * (e - 1) + 1).collect();
        Grid::new(self.n, extents, self.lows.clone(), self.highs.clone()).expect("refinement of a valid grid")
    }

    /// Largest spacing.
    pub fn max_spacing(&self) -> f64 {
        self.spacings.iter().cloned().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = Grid::new(2, vec![3, 4, 5], vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(g.len(), 60);
        let k = g.node(&[2, 1, 3]);
        assert_eq!(k, 2 * 20 + 5 + 3);
        assert_eq!((0..3).map(|a| g.axis_index(k, a)).collect::<Vec<_>>(), vec![2, 1, 3]);
        assert_eq!(g.coords(k), vec![1.0, 1.0 / 3.0, 0.75]);
    }

    #[test]
    fn validation() {
        assert!(Grid::new(1, vec![2, 3], vec![0.0; 2], vec![1.0; 2]).is_err());
        assert!(Grid::new(1, vec![3, 3], vec![0.0; 2], vec![0.0, 1.0]).is_err());
        assert!(Grid::new(1, vec![3], vec![0.0], vec![1.0]).is_err());
        assert!(Grid::new(13, vec![3; 14], vec![0.0; 14], vec![1.0; 14]).is_err());
    }

    #[test]
    fn trapezoid_weights_sum_to_volume() {
        let g = Grid::new(2, vec![5, 3, 4], vec![-1.0, 0.0, 0.0], vec![1.0, 2.0, 3.0]).unwrap();
        let total: f64 = (0..g.len()).map(|k| g.quadrature_weight(k)).sum();
        assert!((total - g.volume()).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip_validates() {
        let g = Grid::cube(1, 5, -1.0, 1.0).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<Grid>(&s).unwrap(), g);
        assert!(serde_json::from_str::<Grid>(r#"{"n":1,"extents":[2,2],"lows":[0,0],"highs":[1,1]}"#).is_err());
    }
}
