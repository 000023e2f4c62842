//! Conductivities and the handling of degenerate points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{degenerate_points, Mask, ScalarField};

/// A positive conductivity field with its observed bounds.
///
/// Masked points carry NaN sentinels; every other point is strictly positive
/// and lies in `[sigma0, sigma1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conductivity {
    sigma: ScalarField,
    sigma0: f64,
    sigma1: f64,
    mask: Option<Mask>,
}

impl Conductivity {
    /// Wraps a field that must be strictly positive everywhere.
    pub fn new(sigma: ScalarField) -> Result<Self> {
        Self::with_mask(sigma, None)
    }

    /// Wraps a field whose masked points are ignored (and set to NaN).
    pub fn with_mask(sigma: ScalarField, mask: Option<Mask>) -> Result<Self> {
        let mask = mask.filter(|m| !m.is_empty());
        let sigma = apply_mask(&sigma, mask.as_ref());
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (p, &v) in sigma.values().iter().enumerate() {
            if mask.as_ref().is_some_and(|m| m.contains(p)) {
                continue;
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Positivity { index: p, value: v });
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(Self { sigma, sigma0: lo, sigma1: hi, mask })
    }

    /// Treats NaN samples as masked points.
    pub fn from_sentinels(sigma: ScalarField) -> Result<Self> {
        let mask = Mask::from_nan(&sigma);
        Self::with_mask(sigma, Some(mask))
    }

    pub fn field(&self) -> &ScalarField {
        &self.sigma
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn mask(&self) -> Option<&Mask> {
        self.mask.as_ref()
    }

    pub fn is_degenerate(&self) -> bool {
        self.mask.is_some()
    }

    pub fn sqrt(&self) -> ScalarField {
        self.sigma.map(f64::sqrt)
    }

    pub fn inverse(&self) -> ScalarField {
        self.sigma.map(|s| 1.0 / s)
    }
}

/// What to do where a divisor (ω, a seed solution, `w`) vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularMode {
    /// Refuse to divide by a field that vanishes or changes sign on the grid.
    #[default]
    Reject,
    /// Mask points where `|divisor| <= rel_threshold * max|divisor|` and every
    /// edge across which it changes sign.
    Mask { rel_threshold: f64 },
}

impl SingularMode {
    /// Default threshold used by the CLI's `--singular-mode`.
    pub const DEFAULT_THRESHOLD: f64 = 0.05;

    pub fn masking() -> Self {
        SingularMode::Mask { rel_threshold: Self::DEFAULT_THRESHOLD }
    }

    /// Inspects `divisor`. In reject mode returns `Err(index)` at the first
    /// degenerate point; in mask mode returns the mask (or `None` if empty).
    pub fn inspect(&self, divisor: &ScalarField) -> std::result::Result<Option<Mask>, usize> {
        match *self {
            SingularMode::Reject => {
                let m = degenerate_points(divisor, 1e-12);
                match m.flags().iter().position(|f| *f) {
                    Some(p) => Err(p),
                    None => Ok(None),
                }
            }
            SingularMode::Mask { rel_threshold } => {
                let m = degenerate_points(divisor, rel_threshold);
                Ok(if m.is_empty() { None } else { Some(m) })
            }
        }
    }

    /// As [`inspect`](Self::inspect), mapping a rejection to
    /// [`Error::ZeroDivisor`].
    pub fn divisor_mask(&self, divisor: &ScalarField) -> Result<Option<Mask>> {
        self.inspect(divisor).map_err(|index| Error::ZeroDivisor { index })
    }
}

/// Union of optional masks.
pub fn merge_masks(a: Option<&Mask>, b: Option<&Mask>) -> Option<Mask> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.union(b)),
        (Some(a), None) => Some(a.clone()),
        (None, Some(b)) => Some(b.clone()),
        (None, None) => None,
    }
}

/// Replaces masked samples with NaN.
pub fn apply_mask(field: &ScalarField, mask: Option<&Mask>) -> ScalarField {
    match mask {
        None => field.clone(),
        Some(m) => {
            let values = field
                .values()
                .iter()
                .enumerate()
                .map(|(p, &v)| if m.contains(p) { f64::NAN } else { v })
                .collect();
            ScalarField::from_values(field.grid().clone(), values).expect("same grid")
        }
    }
}
