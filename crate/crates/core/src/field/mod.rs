//! Grids, sampled fields and the discrete calculus every other module builds on.

mod diff;
mod grid;
pub mod io;
mod mask;
mod quadrature;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use diff::{
    diff_axis, divergence, gradient, laplacian, wirtinger_dz, wirtinger_dzbar,
};
pub use grid::Grid;
pub use mask::{degenerate_points, Mask};
pub use quadrature::{integrate_form, path_integrate, PathIntegral};

/// Sample type of a field: anything a finite difference can act on.
pub trait Sample:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn magnitude(self) -> f64;
}

impl Sample for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Sample for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Values sampled on a [`Grid`] in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: Sample> Field<T> {
    pub fn from_values(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> T) -> Self {
        let values = grid.points().map(|x| f(&x)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn constant(grid: &Grid, value: T) -> Self {
        Self { grid: grid.clone(), values: vec![value; grid.len()] }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, T::default())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, index: &[usize]) -> T {
        self.values[self.grid.flat_index(index)]
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<U: Sample, V: Sample>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Field<V>> {
        self.same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn same_grid<U>(&self, other: &Field<U>) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// Largest magnitude over the field, ignoring NaN sentinels.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.magnitude())
            .filter(|m| !m.is_nan())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise distance to `other`, ignoring NaN sentinels.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }
}

impl ScalarField {
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a / b)
    }

    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| Complex64::new(v, 0.0))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl ComplexField {
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a / b)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn re(&self) -> ScalarField {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> ScalarField {
        self.map(|v| v.im)
    }

    /// `max|Re| <= tol * (1 + max|Im|)`.
    pub fn is_imaginary(&self, tol: f64) -> bool {
        self.re().max_abs() <= tol * (1.0 + self.im().max_abs())
    }

    /// The complex coordinate `z = x1 + i x2` on a planar grid.
    pub fn z(grid: &Grid) -> Result<Self> {
        grid.check_dim(2)?;
        Ok(Self::from_fn(grid, |x| Complex64::new(x[0], x[1])))
    }
}
