use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform rectangular sampling of a box in `d` dimensions.
///
/// Points are stored in row-major order: the last axis varies fastest. In two
/// dimensions axis 0 is `x1` and axis 1 is `x2`, and the complex coordinate of
/// a point is `z = x1 + i x2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let d = shape.len();
        if d == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if origin.len() != d || spacing.len() != d {
            return Err(Error::InvalidGrid(format!(
                "origin ({}), spacing ({}) and shape ({d}) disagree on dimension",
                origin.len(),
                spacing.len()
            )));
        }
        if let Some(h) = spacing.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidGrid(format!("spacing {h} is not strictly positive")));
        }
        if let Some(o) = origin.iter().find(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid(format!("origin component {o} is not finite")));
        }
        if let Some(n) = shape.iter().find(|n| **n < 3) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 3 points, got {n}"
            )));
        }
        Ok(Self { origin, spacing, shape })
    }

    /// Grid covering the box `[lo, hi]` with `shape[k]` points along axis `k`,
    /// endpoints included.
    pub fn uniform_box(lo: &[f64], hi: &[f64], shape: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != shape.len() {
            return Err(Error::InvalidGrid("box corners and shape disagree on dimension".into()));
        }
        let spacing = lo
            .iter()
            .zip(hi)
            .zip(shape)
            .map(|((a, b), &n)| (b - a) / (n.max(2) - 1) as f64)
            .collect();
        Self::new(lo.to_vec(), spacing, shape.to_vec())
    }

    /// `[0,1]^d` with `n` points per axis.
    pub fn unit_cube(d: usize, n: usize) -> Result<Self> {
        Self::uniform_box(&vec![0.0; d], &vec![1.0; d], &vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Representative spacing used in tolerances: the largest `h_k`.
    pub fn h(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    /// Volume of one grid cell, `h_1 * ... * h_d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Flat offset between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dim());
        index
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            index[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        index
    }

    /// Index of the flat point `flat` along `axis`.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.shape[axis]
    }

    /// Coordinate `axis` of the flat point `flat`.
    pub fn coord(&self, flat: usize, axis: usize) -> f64 {
        self.origin[axis] + self.axis_index(flat, axis) as f64 * self.spacing[axis]
    }

    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .enumerate()
            .map(|(k, &i)| self.origin[k] + i as f64 * self.spacing[k])
            .collect()
    }

    /// Coordinates of every point, in storage order.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |p| (0..self.dim()).map(|k| self.coord(p, k)).collect())
    }

    /// Dyadic refinement covering the same box: `n -> 2(n-1)+1` points per axis.
    pub fn refined(&self) -> Grid {
        Grid {
            origin: self.origin.clone(),
            spacing: self.spacing.iter().map(|h| h / 2.0).collect(),
            shape: self.shape.iter().map(|n| 2 * (n - 1) + 1).collect(),
        }
    }

    /// The corner with all indices zero.
    pub fn corner(&self) -> Vec<usize> {
        vec![0; self.dim()]
    }

    /// `true` when the point is at distance at least `margin` (in cells) from
    /// every face of the box. The margin is clamped so that every axis keeps
    /// at least one admissible index.
    pub fn is_inside(&self, flat: usize, margin: usize) -> bool {
        (0..self.dim()).all(|k| {
            let m = margin.min((self.shape[k] - 1) / 2);
            let i = self.axis_index(flat, k);
            i >= m && i + m < self.shape[k]
        })
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::Dimension { expected, found: self.dim() })
        }
    }

    pub(crate) fn check_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dim() || index.iter().zip(&self.shape).any(|(i, n)| i >= n) {
            return Err(Error::InvalidGrid(format!("index {index:?} outside shape {:?}", self.shape)));
        }
        Ok(self.flat_index(index))
    }
}
