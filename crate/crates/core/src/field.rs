use crate::error::{bail, Result};
use crate::grid::{Grid, Point};

/// Real values sampled at the cell centers of a [`Grid`].
///
/// Values are stored for every cell of the extent; cells outside the open
/// set are kept at zero so that zero-extension is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: &Grid, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|c| {
                if grid.is_member(c) {
                    f(grid.center(c))
                } else {
                    0.0
                }
            })
            .collect();
        ScalarField { values }
    }

    /// Wraps raw values; they must be finite on member cells.
    pub fn from_values(grid: &Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            bail!(
                Argument,
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.len()
            );
        }
        for (c, v) in values.iter_mut().enumerate() {
            if !grid.is_member(c) {
                *v = 0.0;
            } else if !v.is_finite() {
                bail!(Numeric, "field value {v} at cell {c}");
            }
        }
        Ok(ScalarField { values })
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField::from_fn(grid, |_| c)
    }

    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            values: vec![0.0; grid.len()],
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// Same field with every cell outside `cells` set to zero.
    pub fn restricted(&self, cells: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for &c in cells {
            values[c] = self.values[c];
        }
        ScalarField { values }
    }

    /// Largest absolute value over member cells.
    pub fn sup_norm(&self, grid: &Grid) -> f64 {
        grid.members()
            .iter()
            .map(|&c| self.values[c].abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero_on(&self, cells: &[usize]) -> bool {
        cells.iter().all(|&c| self.values[c] == 0.0)
    }

    /// Checks the weight invariant: strictly positive and finite on members.
    pub fn ensure_positive(&self, grid: &Grid, what: &str) -> Result<()> {
        for &c in grid.members() {
            let v = self.values[c];
            if !(v > 0.0 && v.is_finite()) {
                let p = grid.center(c);
                bail!(
                    Domain,
                    "{what} must be positive on the open set; value {v} at {:?}",
                    &p.0[..grid.dim()]
                );
            }
        }
        Ok(())
    }

    pub fn ensure_finite(&self, grid: &Grid) -> Result<()> {
        for &c in grid.members() {
            if !self.values[c].is_finite() {
                bail!(Numeric, "field value {} at cell {c}", self.values[c]);
            }
        }
        Ok(())
    }

    /// Pointwise reciprocal of a weight.
    pub fn reciprocal(&self, grid: &Grid) -> Result<Self> {
        self.ensure_positive(grid, "weight")?;
        let mut values = vec![0.0; self.values.len()];
        for &c in grid.members() {
            values[c] = 1.0 / self.values[c];
        }
        Ok(ScalarField { values })
    }

    /// Value at the member cell containing `p`.
    pub fn value_at(&self, grid: &Grid, p: Point) -> Result<f64> {
        Ok(self.values[grid.member_cell(p)?])
    }
}
