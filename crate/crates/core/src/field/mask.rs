use super::{Grid, ScalarField};

/// Grid points excluded from verification because a transform degenerates
/// there (zeros of a divisor, poles of a coefficient).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    flags: Vec<bool>,
}

impl Mask {
    pub fn empty(grid: &Grid) -> Self {
        Self { flags: vec![false; grid.len()] }
    }

    pub fn from_flags(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    /// Points whose value is NaN.
    pub fn from_nan(field: &ScalarField) -> Self {
        Self { flags: field.values().iter().map(|v| v.is_nan()).collect() }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.flags[flat]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn union(&self, other: &Mask) -> Mask {
        Mask { flags: self.flags.iter().zip(&other.flags).map(|(a, b)| *a || *b).collect() }
    }

    /// Every point within Chebyshev distance `halo` of a masked point.
    pub fn dilate(&self, grid: &Grid, halo: usize) -> Mask {
        let mut out = self.clone();
        for axis in 0..grid.dim() {
            let stride = grid.stride(axis);
            let n = grid.shape()[axis];
            let src = out.flags.clone();
            for p in 0..src.len() {
                if !src[p] {
                    continue;
                }
                let i = (p / stride) % n;
                for s in 1..=halo {
                    if i >= s {
                        out.flags[p - s * stride] = true;
                    }
                    if i + s < n {
                        out.flags[p + s * stride] = true;
                    }
                }
            }
        }
        out
    }
}

/// Points where `field` is numerically degenerate: non-finite values, values
/// with `|x| <= rel_threshold * max|x|`, and both ends of every grid edge across
/// which the field changes sign.
pub fn degenerate_points(field: &ScalarField, rel_threshold: f64) -> Mask {
    let grid = field.grid();
    let v = field.values();
    let cut = rel_threshold * field.max_abs();
    let mut flags: Vec<bool> = v.iter().map(|x| !x.is_finite() || x.abs() <= cut).collect();
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        let n = grid.shape()[axis];
        for p in 0..v.len() {
            if (p / stride) % n + 1 < n && v[p] * v[p + stride] < 0.0 {
                flags[p] = true;
                flags[p + stride] = true;
            }
        }
    }
    Mask { flags }
}
