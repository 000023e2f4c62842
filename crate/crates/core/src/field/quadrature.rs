//! Reconstruction of a potential from its differential by composite trapezoid
//! quadrature along grid lines.

use num_complex::Complex64;

use super::{ComplexField, Field, Sample};
use crate::error::{Error, Result};

/// A potential recovered by quadrature together with its path-independence
/// defect.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIntegral<T> {
    pub field: Field<T>,
    /// Largest difference between the canonical path (x1 first, then x2) and
    /// the alternate path (x2 first, then x1).
    pub defect: f64,
}

/// Cumulative trapezoid along one grid line, zero at index `base`.
fn cumulative<T: Sample>(line: &[T], base: usize, h: f64) -> Vec<T> {
    let mut out = vec![T::default(); line.len()];
    for i in base + 1..line.len() {
        out[i] = out[i - 1] + (line[i - 1] + line[i]) * (0.5 * h);
    }
    for i in (0..base).rev() {
        out[i] = out[i + 1] - (line[i] + line[i + 1]) * (0.5 * h);
    }
    out
}

/// Integrates the planar 1-form `g1 dx1 + g2 dx2` from `base`.
///
/// The result is `W` with `W(base) = 0`, obtained along the axis-ordered path
/// from `base`: first along `x1` on the row of `base`, then along `x2`.
pub fn integrate_form<T: Sample>(
    g1: &Field<T>,
    g2: &Field<T>,
    base: &[usize],
) -> Result<PathIntegral<T>> {
    let grid = g1.grid();
    grid.check_dim(2)?;
    g1.same_grid(g2)?;
    grid.check_index(base)?;
    let (n1, n2) = (grid.shape()[0], grid.shape()[1]);
    let (h1, h2) = (grid.spacing()[0], grid.spacing()[1]);
    let (b1, b2) = (base[0], base[1]);
    let (a, b) = (g1.values(), g2.values());
    let at = |i: usize, j: usize| i * n2 + j;

    // canonical: along x1 on row b2, then along x2 in every column
    let row: Vec<T> = (0..n1).map(|i| a[at(i, b2)]).collect();
    let row_cum = cumulative(&row, b1, h1);
    let mut canonical = vec![T::default(); grid.len()];
    for i in 0..n1 {
        let col: Vec<T> = (0..n2).map(|j| b[at(i, j)]).collect();
        for (j, c) in cumulative(&col, b2, h2).into_iter().enumerate() {
            canonical[at(i, j)] = row_cum[i] + c;
        }
    }

    // alternate: along x2 on column b1, then along x1 in every row
    let col: Vec<T> = (0..n2).map(|j| b[at(b1, j)]).collect();
    let col_cum = cumulative(&col, b2, h2);
    let mut defect: f64 = 0.0;
    for j in 0..n2 {
        let line: Vec<T> = (0..n1).map(|i| a[at(i, j)]).collect();
        for (i, r) in cumulative(&line, b1, h1).into_iter().enumerate() {
            let d = (col_cum[j] + r - canonical[at(i, j)]).magnitude();
            if d.is_nan() {
                continue;
            }
            defect = defect.max(d);
        }
    }

    Ok(PathIntegral { field: Field::from_values(grid.clone(), canonical)?, defect })
}

/// Recovers `W` with `∂_z W = p` and `∂_z̄ W = q`, normalised by `W(base) = 0`.
///
/// Uses `dW = (p + q) dx1 + i (p - q) dx2`.
pub fn path_integrate(
    p: &ComplexField,
    q: &ComplexField,
    base: &[usize],
) -> Result<PathIntegral<Complex64>> {
    if p.grid().dim() != 2 {
        return Err(Error::Dimension { expected: 2, found: p.grid().dim() });
    }
    let i = Complex64::i();
    let g1 = p.zip_with(q, |a, b| a + b)?;
    let g2 = p.zip_with(q, |a, b| i * (a - b))?;
    integrate_form(&g1, &g2, base)
}
