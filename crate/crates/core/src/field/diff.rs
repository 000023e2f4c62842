//! Second-order finite differences.
//!
//! Interior points use the central stencil `(f[i+1] - f[i-1]) / 2h`. At the
//! two ends of a grid line the derivative is the cubic extrapolation of the
//! four nearest central differences, which as a one-sided stencil reads
//! `(-4 f[0] + 6 f[1] - 5 f[3] + 4 f[4] - f[5]) / 2h`. Its error matches the
//! central error `h² f'''/6` up to `O(h⁴)`, so the truncation error is smooth
//! up to the boundary and derivatives of derived fields stay second order
//! there. Lines with fewer than six points fall back to
//! `(-3 f[0] + 4 f[1] - f[2]) / 2h`. Every stencil is exact on quadratics.

use num_complex::Complex64;

use super::{ComplexField, Field, Grid, Sample, ScalarField};
use crate::error::{Error, Result};

/// Partial derivative along `axis`.
pub fn diff_axis<T: Sample>(field: &Field<T>, axis: usize) -> Field<T> {
    let grid = field.grid();
    assert!(axis < grid.dim(), "axis {axis} out of range");
    let n = grid.shape()[axis];
    let stride = grid.stride(axis);
    let inv = 1.0 / (2.0 * grid.spacing()[axis]);
    let f = field.values();
    let values = (0..grid.len())
        .map(|p| {
            let i = (p / stride) % n;
            let at = |k: isize| f[p.wrapping_add_signed(k * stride as isize)];
            // offsets from f[i] keep constants exact
            let dt = |k: isize| at(k) - at(0);
            let d = if i == 0 && n >= 6 {
                dt(1) * 6.0 - dt(3) * 5.0 + dt(4) * 4.0 - dt(5)
            } else if i == n - 1 && n >= 6 {
                dt(-3) * 5.0 - dt(-1) * 6.0 - dt(-4) * 4.0 + dt(-5)
            } else if i == 0 {
                dt(1) * 4.0 - dt(2)
            } else if i == n - 1 {
                dt(-2) - dt(-1) * 4.0
            } else {
                f[p + stride] - f[p - stride]
            };
            d * inv
        })
        .collect();
    Field::from_values(grid.clone(), values).expect("same grid")
}

/// `∂_z F = (∂_1 F - i ∂_2 F) / 2`.
pub fn wirtinger_dz(field: &ComplexField) -> Result<ComplexField> {
    field.grid().check_dim(2)?;
    let d1 = diff_axis(field, 0);
    let d2 = diff_axis(field, 1);
    d1.zip_with(&d2, |a, b| Complex64::new(0.5 * (a.re + b.im), 0.5 * (a.im - b.re)))
}

/// `∂_z̄ F = (∂_1 F + i ∂_2 F) / 2`.
pub fn wirtinger_dzbar(field: &ComplexField) -> Result<ComplexField> {
    field.grid().check_dim(2)?;
    let d1 = diff_axis(field, 0);
    let d2 = diff_axis(field, 1);
    d1.zip_with(&d2, |a, b| Complex64::new(0.5 * (a.re - b.im), 0.5 * (a.im + b.re)))
}

pub fn gradient(field: &ScalarField) -> Vec<ScalarField> {
    (0..field.grid().dim()).map(|k| diff_axis(field, k)).collect()
}

/// `Σ_k ∂_k V_k`.
pub fn divergence(components: &[ScalarField]) -> Result<ScalarField> {
    let first = components.first().ok_or(Error::Precondition("empty vector field".into()))?;
    let grid: &Grid = first.grid();
    if components.len() != grid.dim() {
        return Err(Error::Dimension { expected: grid.dim(), found: components.len() });
    }
    let mut acc = ScalarField::zeros(grid);
    for (k, c) in components.iter().enumerate() {
        c.same_grid(first)?;
        acc = acc.add(&diff_axis(c, k))?;
    }
    Ok(acc)
}

/// Discrete Laplacian, composed as divergence of the gradient.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    divergence(&gradient(field)).expect("gradient components share a grid")
}
