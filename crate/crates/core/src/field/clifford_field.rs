use rayon::prelude::*;

use super::{FieldError, Grid};
use crate::algebra::Multivector;

/// Algebra-valued samples at every grid node, stored node-major and
/// blade-minor: the coefficient of `e_A` at node `k` is `values[k * 2^n + A]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordField {
    grid: Grid,
    values: Vec<f64>,
}

impl CliffordField {
    pub fn zeros(grid: &Grid) -> CliffordField {
        CliffordField {
            values: vec![0.0; grid.len() * grid.width()],
            grid: grid.clone(),
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<CliffordField, FieldError> {
        let expected = grid.len() * grid.width();
        if values.len() != expected {
            return Err(FieldError::ValueCount {
                expected,
                got: values.len(),
            });
        }
        Ok(CliffordField {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples `f(x, out)` at every node; `out` starts zeroed.
    pub fn from_fn<F>(grid: &Grid, f: F) -> CliffordField
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let width = grid.width();
        let mut values = vec![0.0; grid.len() * width];
        values.par_chunks_mut(width).enumerate().for_each_init(
            || vec![0.0; grid.axes()],
            |x, (k, out)| {
                grid.coords_into(k, x);
                f(x, out);
            },
        );
        CliffordField {
            grid: grid.clone(),
            values,
        }
    }

    /// `g(x) · e_A` for a scalar profile `g`.
    pub fn from_scalar_fn<F>(grid: &Grid, mask: usize, g: F) -> CliffordField
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        CliffordField::from_fn(grid, |x, out| out[mask] = g(x))
    }

    /// The same multivector at every node.
    pub fn constant(grid: &Grid, value: &Multivector<f64>) -> Result<CliffordField, FieldError> {
        if value.n() != grid.n() {
            return Err(FieldError::DimensionMismatch {
                field: grid.n(),
                other: value.n(),
            });
        }
        Ok(CliffordField::from_fn(grid, |_, out| out.copy_from_slice(value.coeffs())))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn width(&self) -> usize {
        self.grid.width()
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

    /// Coefficients at node `k`.
    pub fn at(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.values[k * w..(k + 1) * w]
    }

    pub fn multivector(&self, k: usize) -> Multivector<f64> {
        Multivector::from_coeffs(self.n(), self.at(k).to_vec()).expect("width matches n")
    }

    pub fn check_finite(&self) -> Result<(), FieldError> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(FieldError::NonFinite { node: i / self.width() }),
            None => Ok(()),
        }
    }

    pub fn check_same_grid(&self, other: &CliffordField) -> Result<(), FieldError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(FieldError::GridMismatch)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> CliffordField {
        CliffordField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s · other`
    pub fn add_scaled(&self, s: f64, other: &CliffordField) -> Result<CliffordField, FieldError> {
        self.check_same_grid(other)?;
        Ok(CliffordField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CliffordField) -> Result<CliffordField, FieldError> {
        self.add_scaled(-1.0, other)
    }

    /// Keeps only the `e_A` component.
    pub fn component(&self, mask: usize) -> CliffordField {
        let w = self.width();
        let mut values = vec![0.0; self.values.len()];
        for (k, v) in self.values.chunks(w).enumerate() {
            values[k * w + mask] = v[mask];
        }
        CliffordField {
            grid: self.grid.clone(),
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_layout() {
        let g = Grid::cube(1, 3, 0.0, 1.0).unwrap();
        let f = CliffordField::from_fn(&g, |x, out| {
            out[0] = x[0];
            out[1] = x[1];
        });
        assert_eq!(f.at(5), &[0.5, 1.0]);
        assert_eq!(f.values().len(), 18);
    }

    #[test]
    fn value_count_checked() {
        let g = Grid::cube(1, 3, 0.0, 1.0).unwrap();
        assert!(CliffordField::from_values(&g, vec![0.0; 17]).is_err());
    }

    #[test]
    fn non_finite_detected() {
        let g = Grid::cube(1, 3, 0.0, 1.0).unwrap();
        let mut f = CliffordField::zeros(&g);
        f.values_mut()[7] = f64::NAN;
        assert!(matches!(f.check_finite(), Err(FieldError::NonFinite { node: 3 })));
    }
}
