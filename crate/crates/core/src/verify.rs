//! Residuals and convergence orders.
//!
//! Every equation tag maps to the literal discrete transcription of its PDE,
//! built from the same second-order stencils as [`crate::field`]. A residual is
//! measured on the *evaluation region*: grid points at least two cells away
//! from the boundary and at least two cells away from any masked point.
//! A derivative composed twice reaches two cells, so those are the rows where
//! a masked sentinel or a boundary stencil can leak into the residual.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    divergence, gradient, laplacian, wirtinger_dz, wirtinger_dzbar, ComplexField, Field,
    Grid, Mask, Sample, ScalarField,
};

/// Distance, in cells, kept from the boundary and from masked points.
pub const HALO: usize = 2;

/// Multiplier of `h²` in the default tolerance.
pub const TOLERANCE_FACTOR: f64 = 50.0;

/// Norms below `FLOOR * max(1, scale)` are indistinguishable from rounding.
pub const FLOOR: f64 = 1e-9;

/// `50 h² max(1, scale)`.
pub fn default_tolerance(h: f64, scale: f64) -> f64 {
    TOLERANCE_FACTOR * h * h * scale.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquationId {
    /// `div(σ ∇u) = 0`
    #[serde(rename = "hc1")]
    Hc1,
    /// `div(σ⁻¹ ∇v) = 0`
    #[serde(rename = "conj1.3")]
    Conj13,
    /// `∂_z̄ ψ = q ψ̄`
    #[serde(rename = "gan1")]
    Gan1,
    /// `∂_z̄ ψ⁺ = -q̄ ψ̄⁺`
    #[serde(rename = "gan2")]
    Gan2,
    /// `∂_z̄ ψ̃ = q̃ conj(ψ̃)`
    #[serde(rename = "gan3")]
    Gan3,
    /// `∂_z̄ ψ̃⁺ = -conj(q̃) conj(ψ̃⁺)`
    #[serde(rename = "gan4")]
    Gan4,
    /// `div(σ̃ ∇ũ) = 0`
    #[serde(rename = "hcm1")]
    Hcm1,
    /// `div(σ̃⁻¹ ∇ṽ) = 0`
    #[serde(rename = "hcm1bis")]
    Hcm1bis,
    /// `-Δψ + Q ψ = 0`
    #[serde(rename = "sch2")]
    Sch2,
    /// `-div(σ ∇u) + q u = 0`
    #[serde(rename = "ga2")]
    Ga2,
    /// `div(σ ∇u) = 0` in any dimension
    #[serde(rename = "mdhc2")]
    Mdhc2,
    /// `Δu = 0`
    #[serde(rename = "harmonic")]
    Harmonic,
    /// `∂_z̄ q = ∂_z q̄`
    #[serde(rename = "compat")]
    Compat,
}

impl EquationId {
    pub const ALL: [EquationId; 13] = [
        EquationId::Hc1,
        EquationId::Conj13,
        EquationId::Gan1,
        EquationId::Gan2,
        EquationId::Gan3,
        EquationId::Gan4,
        EquationId::Hcm1,
        EquationId::Hcm1bis,
        EquationId::Sch2,
        EquationId::Ga2,
        EquationId::Mdhc2,
        EquationId::Harmonic,
        EquationId::Compat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EquationId::Hc1 => "hc1",
            EquationId::Conj13 => "conj1.3",
            EquationId::Gan1 => "gan1",
            EquationId::Gan2 => "gan2",
            EquationId::Gan3 => "gan3",
            EquationId::Gan4 => "gan4",
            EquationId::Hcm1 => "hcm1",
            EquationId::Hcm1bis => "hcm1bis",
            EquationId::Sch2 => "sch2",
            EquationId::Ga2 => "ga2",
            EquationId::Mdhc2 => "mdhc2",
            EquationId::Harmonic => "harmonic",
            EquationId::Compat => "compat",
        }
    }

    /// Names of the inputs the residual reads, in positional order.
    pub fn signature(self) -> &'static [&'static str] {
        use EquationId::*;
        match self {
            Hc1 | Hcm1 | Mdhc2 => &["sigma", "u"],
            Conj13 | Hcm1bis => &["sigma", "v"],
            Gan1 | Gan3 => &["q", "psi"],
            Gan2 | Gan4 => &["q", "psi_plus"],
            Sch2 => &["potential", "psi_real"],
            Ga2 => &["sigma", "u", "potential"],
            Harmonic => &["u"],
            Compat => &["q"],
        }
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EquationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EquationId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Signature(format!("unknown equation id {s:?}")))
    }
}

/// Named fields fed to a residual. Only the fields in the equation's
/// [`signature`](EquationId::signature) are read.
#[derive(Debug, Clone, Default)]
pub struct ResidualInputs {
    pub sigma: Option<ScalarField>,
    pub u: Option<ScalarField>,
    pub v: Option<ScalarField>,
    pub q: Option<ComplexField>,
    pub psi: Option<ComplexField>,
    pub psi_plus: Option<ComplexField>,
    /// Zero-order coefficient: `Q` for `sch2`, `q` for `ga2`.
    pub potential: Option<ScalarField>,
    /// Real solution of the Schrödinger equation for `sch2`.
    pub psi_real: Option<ScalarField>,
    pub mask: Option<Mask>,
}

impl ResidualInputs {
    pub fn conductivity(sigma: &ScalarField, u: &ScalarField) -> Self {
        Self { sigma: Some(sigma.clone()), u: Some(u.clone()), ..Self::default() }
    }

    pub fn conjugate(sigma: &ScalarField, v: &ScalarField) -> Self {
        Self { sigma: Some(sigma.clone()), v: Some(v.clone()), ..Self::default() }
    }

    pub fn gaf(q: &ComplexField, psi: &ComplexField) -> Self {
        Self { q: Some(q.clone()), psi: Some(psi.clone()), ..Self::default() }
    }

    pub fn gaf_conjugate(q: &ComplexField, psi_plus: &ComplexField) -> Self {
        Self { q: Some(q.clone()), psi_plus: Some(psi_plus.clone()), ..Self::default() }
    }

    pub fn with_mask(mut self, mask: Option<Mask>) -> Self {
        self.mask = mask;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation_id: EquationId,
    pub norm_max: f64,
    /// Cell-weighted discrete L2 norm.
    pub norm_l2: f64,
    pub h: f64,
    pub masked_fraction: f64,
    /// Largest input magnitude over the evaluation region.
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A residual field before reduction to norms.
enum Residual {
    Real(ScalarField),
    Complex(ComplexField),
}

fn take<'a, T>(slot: &'a Option<T>, eq: EquationId, name: &str) -> Result<&'a T> {
    slot.as_ref()
        .ok_or_else(|| Error::Signature(format!("{eq} needs input {name:?}")))
}

fn sigma_grad(sigma: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
    let flux = gradient(u)
        .iter()
        .map(|d| sigma.mul(d))
        .collect::<Result<Vec<_>>>()?;
    divergence(&flux)
}

/// `div(σ ∇u)` with the shared stencils.
pub fn conductivity_operator(sigma: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
    sigma.same_grid(u)?;
    sigma_grad(sigma, u)
}

fn gaf_residual(q: &ComplexField, psi: &ComplexField, sign: f64, conj_q: bool) -> Result<ComplexField> {
    q.same_grid(psi)?;
    let d = wirtinger_dzbar(psi)?;
    let coef = if conj_q { q.conj() } else { q.clone() };
    let rhs = coef.zip_with(psi, |a, b| a * b.conj() * sign)?;
    d.sub(&rhs)
}

fn residual_field(eq: EquationId, x: &ResidualInputs) -> Result<(Residual, Vec<f64>)> {
    use EquationId::*;
    let out = match eq {
        Hc1 | Hcm1 | Mdhc2 => {
            let (s, u) = (take(&x.sigma, eq, "sigma")?, take(&x.u, eq, "u")?);
            (Residual::Real(conductivity_operator(s, u)?), vec![s.values(), u.values()].concat())
        }
        Conj13 | Hcm1bis => {
            let (s, v) = (take(&x.sigma, eq, "sigma")?, take(&x.v, eq, "v")?);
            let inv = s.map(|a| 1.0 / a);
            (Residual::Real(conductivity_operator(&inv, v)?), vec![s.values(), v.values()].concat())
        }
        Gan1 | Gan3 => {
            let (q, p) = (take(&x.q, eq, "q")?, take(&x.psi, eq, "psi")?);
            let mags = mags(&[q, p]);
            (Residual::Complex(gaf_residual(q, p, 1.0, false)?), mags)
        }
        Gan2 | Gan4 => {
            let (q, p) = (take(&x.q, eq, "q")?, take(&x.psi_plus, eq, "psi_plus")?);
            let mags = mags(&[q, p]);
            (Residual::Complex(gaf_residual(q, p, -1.0, true)?), mags)
        }
        Sch2 => {
            let (pot, psi) = (take(&x.potential, eq, "potential")?, take(&x.psi_real, eq, "psi_real")?);
            let r = pot.mul(psi)?.sub(&laplacian(psi))?;
            (Residual::Real(r), vec![pot.values(), psi.values()].concat())
        }
        Ga2 => {
            let s = take(&x.sigma, eq, "sigma")?;
            let u = take(&x.u, eq, "u")?;
            let pot = take(&x.potential, eq, "potential")?;
            let r = pot.mul(u)?.sub(&conductivity_operator(s, u)?)?;
            (Residual::Real(r), vec![s.values(), u.values(), pot.values()].concat())
        }
        Harmonic => {
            let u = take(&x.u, eq, "u")?;
            (Residual::Real(laplacian(u)), u.values().to_vec())
        }
        Compat => {
            let q = take(&x.q, eq, "q")?;
            let r = wirtinger_dzbar(q)?.sub(&wirtinger_dz(&q.conj())?)?;
            (Residual::Complex(r), mags(&[q]))
        }
    };
    Ok(out)
}

fn mags(fields: &[&ComplexField]) -> Vec<f64> {
    fields.iter().flat_map(|f| f.values().iter().map(|v| v.norm())).collect()
}

/// Points where verification is meaningful: away from the boundary and from
/// the dilated mask.
pub fn evaluation_region(grid: &Grid, mask: Option<&Mask>) -> Vec<bool> {
    let excluded = mask.map(|m| m.dilate(grid, HALO));
    (0..grid.len())
        .map(|p| grid.is_inside(p, HALO) && !excluded.as_ref().is_some_and(|m| m.contains(p)))
        .collect()
}

/// Largest magnitude of `field` over the evaluation region.
pub fn region_max<T: Sample>(field: &Field<T>, mask: Option<&Mask>) -> f64 {
    let region = evaluation_region(field.grid(), mask);
    field
        .values()
        .iter()
        .zip(&region)
        .filter(|(_, r)| **r)
        .map(|(v, _)| v.magnitude())
        .fold(0.0, f64::max)
}

/// Computes the residual of `eq` with the default tolerance.
pub fn residual(eq: EquationId, inputs: &ResidualInputs) -> Result<ResidualReport> {
    residual_scaled(eq, inputs, 1.0)
}

/// As [`residual`], with the default tolerance multiplied by `tolerance_scale`.
pub fn residual_scaled(
    eq: EquationId,
    inputs: &ResidualInputs,
    tolerance_scale: f64,
) -> Result<ResidualReport> {
    let (field, input_values) = residual_field(eq, inputs)?;
    let (grid, values): (Grid, Vec<f64>) = match field {
        Residual::Real(f) => (f.grid().clone(), f.values().iter().map(|v| v.abs()).collect()),
        Residual::Complex(f) => (f.grid().clone(), f.values().iter().map(|v| v.norm()).collect()),
    };
    reduce(eq, &grid, &values, &input_values, inputs.mask.as_ref(), tolerance_scale)
}

/// Reduces an arbitrary residual field to a report. `inputs` set the scale
/// and their non-finite samples are masked, as for [`residual`].
pub fn report_for(
    eq: EquationId,
    residual: &ScalarField,
    inputs: &[&ScalarField],
    mask: Option<&Mask>,
) -> Result<ResidualReport> {
    let values: Vec<f64> = residual.values().iter().map(|v| v.abs()).collect();
    let mut input_values = Vec::with_capacity(inputs.len() * values.len());
    for f in inputs {
        residual.same_grid(f)?;
        input_values.extend_from_slice(f.values());
    }
    reduce(eq, residual.grid(), &values, &input_values, mask, 1.0)
}

fn reduce(
    eq: EquationId,
    grid: &Grid,
    values: &[f64],
    input_values: &[f64],
    mask: Option<&Mask>,
    tolerance_scale: f64,
) -> Result<ResidualReport> {
    if let Some(m) = mask {
        if m.len() != grid.len() {
            return Err(Error::Signature("mask does not match the grid".into()));
        }
    }
    // non-finite inputs are degenerate points
    let n_inputs = input_values.len() / grid.len();
    let nan_mask = Mask::from_flags(
        (0..grid.len())
            .map(|p| (0..n_inputs).any(|k| !input_values[k * grid.len() + p].is_finite()))
            .collect(),
    );
    let mask = match mask {
        Some(m) => m.union(&nan_mask),
        None => nan_mask,
    };
    let region = evaluation_region(grid, Some(&mask));

    let mut norm_max: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut scale: f64 = 0.0;
    for p in (0..grid.len()).filter(|&p| region[p]) {
        let r = values[p];
        // a NaN residual inside the region is a failure, not a skip
        norm_max = if r.is_nan() { f64::INFINITY } else { norm_max.max(r) };
        sum_sq += r * r;
        for k in 0..n_inputs {
            scale = scale.max(input_values[k * grid.len() + p].abs());
        }
    }
    let h = grid.h();
    let tolerance = default_tolerance(h, scale) * tolerance_scale;
    Ok(ResidualReport {
        equation_id: eq,
        norm_max,
        norm_l2: (sum_sq * grid.cell_volume()).sqrt(),
        h,
        masked_fraction: mask.count() as f64 / grid.len() as f64,
        scale,
        tolerance,
        pass: norm_max <= tolerance,
    })
}

/// Max-norm of a complex residual over the evaluation region.
pub(crate) fn region_norm(field: &ComplexField, mask: Option<&Mask>) -> f64 {
    let mut m = Mask::from_flags(field.values().iter().map(|v| v.is_nan()).collect());
    if let Some(extra) = mask {
        m = m.union(extra);
    }
    region_max(field, Some(&m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub equation_id: EquationId,
    /// Strictly decreasing.
    pub spacings: Vec<f64>,
    pub norms: Vec<f64>,
    /// Least-squares slope of `log(norm)` against `log(h)`.
    pub estimated_order: f64,
    /// Every norm sits at the rounding floor, so the slope carries no
    /// information about the discretisation.
    pub floor_limited: bool,
}

impl ConvergenceReport {
    pub fn from_norms(eq: EquationId, spacings: Vec<f64>, norms: Vec<f64>, scale: f64) -> Self {
        let floor = FLOOR * scale.max(1.0);
        let floor_limited = norms.iter().all(|&n| n <= floor);
        let clamped: Vec<f64> = norms.iter().map(|n| n.max(1e-300)).collect();
        Self {
            equation_id: eq,
            estimated_order: estimate_order(&spacings, &clamped),
            spacings,
            norms: clamped,
            floor_limited,
        }
    }

    /// Order at least `min_order`, or every norm already at the rounding floor.
    pub fn meets_order(&self, min_order: f64) -> bool {
        self.floor_limited || self.estimated_order >= min_order
    }
}

/// Least-squares slope of `log(norm)` against `log(h)`.
pub fn estimate_order(spacings: &[f64], norms: &[f64]) -> f64 {
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Runs `eq` on `levels` dyadic refinements of `base`, building the inputs
/// for each level with `generator`.
pub fn convergence_study(
    eq: EquationId,
    base: &Grid,
    levels: usize,
    mut generator: impl FnMut(&Grid) -> Result<ResidualInputs>,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::Precondition("a convergence study needs at least 3 levels".into()));
    }
    let mut grid = base.clone();
    let (mut spacings, mut norms, mut scale) = (vec![], vec![], 0.0f64);
    for _ in 0..levels {
        let report = residual(eq, &generator(&grid)?)?;
        spacings.push(report.h);
        norms.push(report.norm_max);
        scale = scale.max(report.scale);
        grid = grid.refined();
    }
    Ok(ConvergenceReport::from_norms(eq, spacings, norms, scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid {
        Grid::unit_cube(2, n).unwrap()
    }

    #[test]
    fn linear_potential_passes() {
        let g = unit(33);
        let s = ScalarField::constant(&g, 1.0);
        let u = ScalarField::from_fn(&g, |x| x[0]);
        let r = residual(EquationId::Hc1, &ResidualInputs::conductivity(&s, &u)).unwrap();
        assert!(r.norm_max <= 1e-12 && r.pass);
    }

    #[test]
    fn quadratic_potential_fails() {
        let g = unit(33);
        let s = ScalarField::constant(&g, 1.0);
        let u = ScalarField::from_fn(&g, |x| x[0] * x[0]);
        let r = residual(EquationId::Hc1, &ResidualInputs::conductivity(&s, &u)).unwrap();
        assert!((r.norm_max - 2.0).abs() < 1e-9);
        assert!(!r.pass);
    }

    #[test]
    fn transformed_potential_passes_on_fine_grid() {
        // σ̃ = (x1+2)², ũ = x2/(x1+2); analytically σ̃ ∇ũ = (-x2, x1+2), divergence 0
        let g = unit(129);
        let s = ScalarField::from_fn(&g, |x| (x[0] + 2.0).powi(2));
        let u = ScalarField::from_fn(&g, |x| x[1] / (x[0] + 2.0));
        let r = residual(EquationId::Hcm1, &ResidualInputs::conductivity(&s, &u)).unwrap();
        assert!(r.pass, "{r:?}");
        // analytic flux is linear, so the residual is pure truncation of ∇ũ
        let flux = [ScalarField::from_fn(&g, |x| -x[1]), ScalarField::from_fn(&g, |x| x[0] + 2.0)];
        assert!(divergence(&flux).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn missing_inputs_are_signature_errors() {
        let g = unit(9);
        let s = ScalarField::constant(&g, 1.0);
        let inputs = ResidualInputs { sigma: Some(s), ..Default::default() };
        assert!(matches!(residual(EquationId::Hc1, &inputs), Err(Error::Signature(_))));
        assert!(matches!(residual(EquationId::Gan1, &inputs), Err(Error::Signature(_))));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let s = ScalarField::constant(&unit(9), 1.0);
        let u = ScalarField::constant(&unit(11), 1.0);
        assert!(residual(EquationId::Hc1, &ResidualInputs::conductivity(&s, &u)).is_err());
    }

    #[test]
    fn ids_round_trip_through_strings_and_json() {
        for eq in EquationId::ALL {
            assert_eq!(eq.as_str().parse::<EquationId>().unwrap(), eq);
            let js = serde_json::to_string(&eq).unwrap();
            assert_eq!(js, format!("\"{}\"", eq.as_str()));
        }
        assert!("hc9".parse::<EquationId>().is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let g = unit(65);
        let s = ScalarField::from_fn(&g, |x| (-2.0 * x[0]).exp());
        let u = ScalarField::from_fn(&g, |x| (2.0 * x[0]).exp() * x[1]);
        let a = residual(EquationId::Hc1, &ResidualInputs::conductivity(&s, &u)).unwrap();
        let b = residual(EquationId::Hc1, &ResidualInputs::conductivity(&s, &u)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn enlarging_the_mask_never_increases_the_norm() {
        let g = unit(33);
        let s = ScalarField::constant(&g, 1.0);
        let u = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() * x[1] * x[1]);
        let mut prev = f64::INFINITY;
        for radius in 0..6 {
            let flags = (0..g.len())
                .map(|p| {
                    let i = g.multi_index(p);
                    i[0].abs_diff(16) <= radius && i[1].abs_diff(16) <= radius && radius > 0
                })
                .collect();
            let inputs = ResidualInputs::conductivity(&s, &u).with_mask(Some(Mask::from_flags(flags)));
            let r = residual(EquationId::Hc1, &inputs).unwrap();
            assert!(r.norm_max <= prev);
            assert!((0.0..=1.0).contains(&r.masked_fraction));
            prev = r.norm_max;
        }
    }

    #[test]
    fn order_estimate_recovers_known_slope() {
        let hs = [0.1, 0.05, 0.025];
        let norms: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((estimate_order(&hs, &norms) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_family_is_floor_limited() {
        let report = convergence_study(EquationId::Hc1, &unit(17), 3, |g| {
            let s = ScalarField::constant(g, 1.0);
            let u = ScalarField::from_fn(g, |x| x[0] * x[1]);
            Ok(ResidualInputs::conductivity(&s, &u))
        })
        .unwrap();
        assert!(report.floor_limited);
        assert!(report.spacings.windows(2).all(|w| w[1] < w[0]));
        assert!(report.norms.iter().all(|n| *n > 0.0));
    }

    #[test]
    fn smooth_family_converges_at_second_order() {
        let report = convergence_study(EquationId::Hc1, &unit(17), 4, |g| {
            // e^{a x1} cos x2 with a² - 2a - 1 = 0 solves div(e^{-2x1} ∇u) = 0
            let a = 1.0 + 2f64.sqrt();
            let s = ScalarField::from_fn(g, |x| (-2.0 * x[0]).exp());
            let u = ScalarField::from_fn(g, |x| (a * x[0]).exp() * x[1].cos());
            Ok(ResidualInputs::conductivity(&s, &u))
        })
        .unwrap();
        assert!(!report.floor_limited);
        assert!(report.estimated_order >= 1.9, "{report:?}");
    }

    #[test]
    fn too_few_levels_is_an_error() {
        assert!(convergence_study(EquationId::Hc1, &unit(9), 2, |_| unreachable!()).is_err());
    }
}
