//! Generalized analytic functions `∂_z̄ ψ = q ψ̄`, their conjugates, the
//! imaginary potential `ω_{ψ,ψ⁺}` and the Moutard transform built on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{path_integrate, wirtinger_dz, wirtinger_dzbar, ComplexField, Mask, ScalarField};
use crate::sigma::{apply_mask, merge_masks, Conductivity, SingularMode};
use crate::verify::{default_tolerance, region_max, region_norm, residual, EquationId, ResidualInputs};

/// A coefficient `q` together with its measured compatibility defect
/// `max |∂_z̄ q - ∂_z q̄|` over the evaluation region.
#[derive(Debug, Clone, PartialEq)]
pub struct GafCoefficient {
    q: ComplexField,
    compat_defect: f64,
    mask: Option<Mask>,
}

impl GafCoefficient {
    pub fn new(q: ComplexField) -> Result<Self> {
        Self::with_mask(q, None)
    }

    /// Masked points are set to NaN and ignored by the defect.
    pub fn with_mask(q: ComplexField, mask: Option<Mask>) -> Result<Self> {
        q.grid().check_dim(2)?;
        let mask = mask.filter(|m| !m.is_empty());
        let q = match &mask {
            Some(m) => {
                let nan = Complex64::new(f64::NAN, f64::NAN);
                let values = q.values().iter().enumerate().map(|(p, &v)| if m.contains(p) { nan } else { v });
                ComplexField::from_values(q.grid().clone(), values.collect())?
            }
            None => q,
        };
        let r = wirtinger_dzbar(&q)?.sub(&wirtinger_dz(&q.conj())?)?;
        let compat_defect = region_norm(&r, mask.as_ref());
        Ok(Self { q, compat_defect, mask })
    }

    pub fn zero(grid: &crate::Grid) -> Result<Self> {
        Self::new(ComplexField::zeros(grid))
    }

    pub fn q(&self) -> &ComplexField {
        &self.q
    }

    pub fn compat_defect(&self) -> f64 {
        self.compat_defect
    }

    pub fn mask(&self) -> Option<&Mask> {
        self.mask.as_ref()
    }

    /// `50 h² max(1, max|q|)` over the evaluation region.
    pub fn compat_tolerance(&self) -> f64 {
        default_tolerance(self.q.grid().h(), region_max(&self.q, self.mask.as_ref()))
    }

    /// Whether `q = -½ ∂_z log σ` for some positive σ, up to discretisation.
    pub fn is_conductivity_type(&self) -> bool {
        self.compat_defect <= self.compat_tolerance()
    }
}

/// `q = -½ ∂_z log σ`.
pub fn sigma_to_q(sigma: &Conductivity) -> Result<GafCoefficient> {
    let log = sigma.field().map(f64::ln).to_complex();
    let q = wirtinger_dz(&log)?.scale(-0.5);
    GafCoefficient::with_mask(q, sigma.mask().cloned())
}

/// `σ = σ(base) exp(-2 Re W)` with `∂_z W = q`, `∂_z̄ W = q̄`, `W(base) = 0`.
pub fn q_to_sigma(q: &GafCoefficient, base: &[usize], sigma_base: f64) -> Result<Conductivity> {
    if !(sigma_base > 0.0 && sigma_base.is_finite()) {
        return Err(Error::Positivity { index: 0, value: sigma_base });
    }
    if !q.is_conductivity_type() {
        return Err(Error::NotConductivityType { defect: q.compat_defect, tolerance: q.compat_tolerance() });
    }
    let w = path_integrate(&q.q, &q.q.conj(), base)?;
    let sigma = w.field.map(|v| sigma_base * (-2.0 * v.re).exp());
    Conductivity::with_mask(sigma, q.mask.clone())
}

/// Residual of `∂_z̄ ψ = q ψ̄` over the evaluation region.
pub fn check_gaf(psi: &ComplexField, q: &GafCoefficient) -> Result<f64> {
    let inputs = ResidualInputs::gaf(&q.q, psi).with_mask(q.mask.clone());
    Ok(residual(EquationId::Gan1, &inputs)?.norm_max)
}

/// Residual of `∂_z̄ ψ⁺ = -q̄ ψ̄⁺` over the evaluation region.
pub fn check_gaf_conjugate(psi_plus: &ComplexField, q: &GafCoefficient) -> Result<f64> {
    let inputs = ResidualInputs::gaf_conjugate(&q.q, psi_plus).with_mask(q.mask.clone());
    Ok(residual(EquationId::Gan2, &inputs)?.norm_max)
}

/// `(ψ₁, ψ₂) ↦ (ψ₊, ψ₋)` with `ψ₊ = ½(ψ₁ + ψ̄₂)`, `ψ₋ = (ψ₁ - ψ̄₂)/2i`.
pub fn dirac_split(psi1: &ComplexField, psi2: &ComplexField) -> Result<(ComplexField, ComplexField)> {
    let plus = psi1.zip_with(psi2, |a, b| (a + b.conj()) * 0.5)?;
    let minus = psi1.zip_with(psi2, |a, b| {
        let d = a - b.conj();
        Complex64::new(0.5 * d.im, -0.5 * d.re)
    })?;
    Ok((plus, minus))
}

/// Inverse of [`dirac_split`]: `ψ₁ = ψ₊ + iψ₋`, `ψ₂ = ψ̄₊ + i ψ̄₋`.
pub fn dirac_join(plus: &ComplexField, minus: &ComplexField) -> Result<(ComplexField, ComplexField)> {
    let i = Complex64::i();
    let psi1 = plus.zip_with(minus, |a, b| a + i * b)?;
    let psi2 = plus.zip_with(minus, |a, b| a.conj() + i * b.conj())?;
    Ok((psi1, psi2))
}

/// How the pure-imaginary integration constant of `ω` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMode {
    /// `ω(base) = 0`.
    #[default]
    Raw,
    /// Adds `i (1 + max|Im ω₀|)`, so `Im ω ≥ 1` everywhere.
    Nonvanishing,
    /// Adds `i c`.
    Constant(f64),
}

/// `ω_{ψ,ψ⁺}` with `∂_z ω = ψψ⁺` and `∂_z̄ ω = -conj(ψψ⁺)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaPotential {
    /// Purely imaginary samples.
    pub omega: ComplexField,
    /// Imaginary part of the constant added to the quadrature.
    pub constant: f64,
    /// Path-independence defect of the quadrature.
    pub defect: f64,
    /// Names of the two factors, for reports.
    pub pair: (String, String),
}

impl OmegaPotential {
    /// `Im ω`, the real field `ω / i`.
    pub fn imag(&self) -> ScalarField {
        self.omega.im()
    }

    pub fn with_pair(mut self, psi: &str, psi_plus: &str) -> Self {
        self.pair = (psi.to_string(), psi_plus.to_string());
        self
    }

    /// Smallest `|ω|` over unmasked points.
    pub fn min_abs(&self) -> f64 {
        self.omega.values().iter().map(|v| v.norm()).filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min)
    }
}

/// Builds `ω_{ψ,ψ⁺}` with the default tolerance on the path defect.
pub fn omega(
    psi: &ComplexField,
    psi_plus: &ComplexField,
    mode: OmegaMode,
    base: &[usize],
) -> Result<OmegaPotential> {
    omega_with_tolerance(psi, psi_plus, mode, base, None)
}

/// As [`omega`]; `tolerance` overrides `50 h² (max|Im ω₀| + max|ψψ⁺|)`
/// as the bound on the path defect.
pub fn omega_with_tolerance(
    psi: &ComplexField,
    psi_plus: &ComplexField,
    mode: OmegaMode,
    base: &[usize],
    tolerance: Option<f64>,
) -> Result<OmegaPotential> {
    let product = psi.mul(psi_plus)?;
    let w = path_integrate(&product, &product.map(|v| -v.conj()), base)?;
    let raw = w.field;
    let tol_imag = 1e-12 * (1.0 + raw.im().max_abs());
    if raw.re().max_abs() > tol_imag {
        return Err(Error::Compatibility { what: "Re ω", defect: raw.re().max_abs(), tolerance: tol_imag });
    }
    let tolerance =
        tolerance.unwrap_or_else(|| default_tolerance(psi.grid().h(), raw.im().max_abs() + product.max_abs()));
    if w.defect > tolerance {
        return Err(Error::Compatibility { what: "ω path defect", defect: w.defect, tolerance });
    }
    let constant = match mode {
        OmegaMode::Raw => 0.0,
        OmegaMode::Nonvanishing => 1.0 + raw.im().max_abs(),
        OmegaMode::Constant(c) => c,
    };
    let omega = raw.map(|v| Complex64::new(0.0, v.im + constant));
    Ok(OmegaPotential { omega, constant, defect: w.defect, pair: ("psi".into(), "psi_plus".into()) })
}

/// The data of a Moutard transform: a fixed pair `(f, f⁺)` and `ω_{f,f⁺}`.
#[derive(Debug, Clone)]
pub struct Moutard {
    pub f: ComplexField,
    pub f_plus: ComplexField,
    pub omega_ff: OmegaPotential,
    pub base: Vec<usize>,
    /// Zeros of `ω_{f,f⁺}` when built in mask mode.
    pub mask: Option<Mask>,
}

impl Moutard {
    pub fn new(
        f: &ComplexField,
        f_plus: &ComplexField,
        mode: OmegaMode,
        base: &[usize],
        singular: SingularMode,
    ) -> Result<Self> {
        let omega_ff = omega(f, f_plus, mode, base)?.with_pair("f", "f_plus");
        Self::from_omega(f, f_plus, omega_ff, base, singular)
    }

    /// Uses a precomputed `ω_{f,f⁺}`.
    pub fn from_omega(
        f: &ComplexField,
        f_plus: &ComplexField,
        omega_ff: OmegaPotential,
        base: &[usize],
        singular: SingularMode,
    ) -> Result<Self> {
        f.same_grid(f_plus)?;
        f.same_grid(&omega_ff.omega)?;
        let mask = singular
            .inspect(&omega_ff.imag())
            .map_err(|index| Error::SingularOmega { index })?;
        Ok(Self { f: f.clone(), f_plus: f_plus.clone(), omega_ff, base: base.to_vec(), mask })
    }

    /// `q̃ = q + f conj(f⁺) / ω_{f,f⁺}`.
    pub fn q_tilde(&self, q: &GafCoefficient) -> Result<GafCoefficient> {
        let num = self.f.zip_with(&self.f_plus, |a, b| a * b.conj())?;
        let shift = num.div(&self.omega_ff.omega)?;
        let mask = merge_masks(q.mask(), self.mask.as_ref());
        GafCoefficient::with_mask(q.q().add(&shift)?, mask)
    }

    /// `ψ̃ = ψ - (ω_{ψ,f⁺} / ω_{f,f⁺}) f` with `ω_{ψ,f⁺}` normalised by `mode`.
    pub fn psi_with(&self, psi: &ComplexField, mode: OmegaMode) -> Result<ComplexField> {
        let w = omega(psi, &self.f_plus, mode, &self.base)?;
        self.apply(psi, &w.omega, &self.f)
    }

    /// `ψ̃⁺ = ψ⁺ - (ω_{f,ψ⁺} / ω_{f,f⁺}) f⁺` with `ω_{f,ψ⁺}` normalised by `mode`.
    pub fn psi_plus_with(&self, psi_plus: &ComplexField, mode: OmegaMode) -> Result<ComplexField> {
        let w = omega(&self.f, psi_plus, mode, &self.base)?;
        self.apply(psi_plus, &w.omega, &self.f_plus)
    }

    /// [`psi_with`](Self::psi_with) with `ω_{ψ,f⁺}(base) = 0`.
    pub fn psi(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.psi_with(psi, OmegaMode::Raw)
    }

    /// [`psi_plus_with`](Self::psi_plus_with) with `ω_{f,ψ⁺}(base) = 0`.
    pub fn psi_plus(&self, psi_plus: &ComplexField) -> Result<ComplexField> {
        self.psi_plus_with(psi_plus, OmegaMode::Raw)
    }

    fn apply(&self, x: &ComplexField, w: &ComplexField, factor: &ComplexField) -> Result<ComplexField> {
        let ratio = w.div(&self.omega_ff.omega)?;
        let out = x.sub(&ratio.mul(factor)?)?;
        Ok(mask_complex(out, self.mask.as_ref()))
    }
}

fn mask_complex(field: ComplexField, mask: Option<&Mask>) -> ComplexField {
    match mask {
        None => field,
        Some(m) => {
            let re = apply_mask(&field.re(), Some(m));
            let im = apply_mask(&field.im(), Some(m));
            re.zip_with(&im, Complex64::new).expect("same grid")
        }
    }
}

/// `q̃ = q + f conj(f⁺) / ω`, refusing (or masking) zeros of `ω`.
pub fn moutard_q(
    q: &GafCoefficient,
    f: &ComplexField,
    f_plus: &ComplexField,
    w: &OmegaPotential,
    singular: SingularMode,
) -> Result<GafCoefficient> {
    Moutard::from_omega(f, f_plus, w.clone(), &[0, 0], singular)?.q_tilde(q)
}

/// `ψ̃ = ψ - (ω_{ψ,f⁺} / ω_{f,f⁺}) f`, with `ω_{ψ,f⁺}(base) = 0`.
pub fn moutard_psi(
    psi: &ComplexField,
    f: &ComplexField,
    f_plus: &ComplexField,
    w_ff: &OmegaPotential,
    base: &[usize],
    singular: SingularMode,
) -> Result<ComplexField> {
    Moutard::from_omega(f, f_plus, w_ff.clone(), base, singular)?.psi(psi)
}

/// `ψ̃⁺ = ψ⁺ - (ω_{f,ψ⁺} / ω_{f,f⁺}) f⁺`, with `ω_{f,ψ⁺}(base) = 0`.
pub fn moutard_psi_plus(
    psi_plus: &ComplexField,
    f: &ComplexField,
    f_plus: &ComplexField,
    w_ff: &OmegaPotential,
    base: &[usize],
    singular: SingularMode,
) -> Result<ComplexField> {
    Moutard::from_omega(f, f_plus, w_ff.clone(), base, singular)?.psi_plus(psi_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(n: usize) -> Grid {
        Grid::unit_cube(2, n).unwrap()
    }

    fn sigma(g: &Grid, f: impl Fn(&[f64]) -> f64) -> Conductivity {
        Conductivity::new(ScalarField::from_fn(g, f)).unwrap()
    }

    fn cf(g: &Grid, f: impl Fn(f64, f64) -> Complex64) -> ComplexField {
        ComplexField::from_fn(g, |x| f(x[0], x[1]))
    }

    #[test]
    fn sigma_to_q_examples() {
        let g = unit(17);
        let q = sigma_to_q(&sigma(&g, |_| 1.0)).unwrap();
        assert_eq!(q.q().max_abs(), 0.0);
        let q = sigma_to_q(&sigma(&g, |x| (-2.0 * x[0]).exp())).unwrap();
        assert!(q.q().max_diff(&ComplexField::constant(&g, c(0.5, 0.0))).unwrap() <= 1e-12);
        let q = sigma_to_q(&sigma(&g, |x| (x[0] * x[0] + x[1] * x[1]).exp())).unwrap();
        let exact = cf(&g, |a, b| c(-0.5 * a, 0.5 * b));
        assert!(q.q().max_diff(&exact).unwrap() <= 1e-12);
        assert!(q.is_conductivity_type());
    }

    #[test]
    fn q_to_sigma_examples() {
        let g = unit(17);
        let half = GafCoefficient::new(ComplexField::constant(&g, c(0.5, 0.0))).unwrap();
        let s = q_to_sigma(&half, &[0, 0], 1.0).unwrap();
        let exact = ScalarField::from_fn(&g, |x| (-2.0 * x[0]).exp());
        assert!(s.field().max_diff(&exact).unwrap() <= 1e-12);

        let zero = GafCoefficient::zero(&g).unwrap();
        let s = q_to_sigma(&zero, &[4, 7], 2.5).unwrap();
        assert!(s.field().values().iter().all(|v| *v == 2.5));

        let g = unit(129);
        let q = GafCoefficient::new(cf(&g, |a, b| c(-0.5 * a, 0.5 * b))).unwrap();
        let s = q_to_sigma(&q, &[0, 0], 1.0).unwrap();
        let exact = ScalarField::from_fn(&g, |x| (x[0] * x[0] + x[1] * x[1]).exp());
        assert!(s.field().max_diff(&exact).unwrap() <= 1e-8);
    }

    #[test]
    fn non_conductivity_coefficients_are_refused() {
        // q = i x1: ∂_z̄ q = i/2, ∂_z q̄ = -i/2
        let g = unit(17);
        let q = GafCoefficient::new(cf(&g, |a, _| c(0.0, a))).unwrap();
        assert!((q.compat_defect() - 1.0).abs() < 1e-12);
        assert!(matches!(q_to_sigma(&q, &[0, 0], 1.0), Err(Error::NotConductivityType { .. })));
        let ok = GafCoefficient::zero(&g).unwrap();
        assert!(matches!(q_to_sigma(&ok, &[0, 0], 0.0), Err(Error::Positivity { .. })));
    }

    #[test]
    fn check_gaf_examples() {
        let g = unit(33);
        let zero = GafCoefficient::zero(&g).unwrap();
        let z = ComplexField::z(&g).unwrap();
        assert!(check_gaf(&z, &zero).unwrap() <= 1e-12);
        assert!((check_gaf(&z.conj(), &zero).unwrap() - 1.0).abs() <= 1e-12);

        // σ = e^{-2x1}, u = e^{x1(1+√2)} cos x2 solves div(σ∇u) = 0
        let a = 1.0 + 2f64.sqrt();
        let mut errs = vec![];
        for n in [33, 65, 129] {
            let g = unit(n);
            let s = sigma(&g, |x| (-2.0 * x[0]).exp());
            let u = ScalarField::from_fn(&g, |x| (a * x[0]).exp() * x[1].cos());
            let psi = wirtinger_dz(&u.to_complex()).unwrap().mul(&s.sqrt().to_complex()).unwrap();
            let r = check_gaf(&psi, &sigma_to_q(&s).unwrap()).unwrap();
            assert!(r <= default_tolerance(g.h(), psi.max_abs()), "{r}");
            errs.push(r);
        }
        assert!(errs[0] / errs[2] > 3.7 * 3.7);
    }

    #[test]
    fn dirac_examples() {
        let g = unit(5);
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        let zero = ComplexField::zeros(&g);
        let (p, m) = dirac_split(&one, &zero).unwrap();
        assert!(p.values().iter().all(|v| *v == c(0.5, 0.0)));
        assert!(m.values().iter().all(|v| *v == c(0.0, -0.5)));
        let (a, b) = dirac_join(&p, &m).unwrap();
        assert_eq!((a, b), (one, zero.clone()));
        let (p, m) = dirac_split(&zero, &zero).unwrap();
        assert_eq!(p.max_abs() + m.max_abs(), 0.0);
        assert_eq!(dirac_split(&zero, &ComplexField::zeros(&unit(6))), Err(Error::GridMismatch));
    }

    proptest! {
        #[test]
        fn dirac_round_trip(vals in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 33 * 33)) {
            let g = unit(33);
            let a = ComplexField::from_values(g.clone(), vals.iter().map(|t| c(t.0, t.1)).collect()).unwrap();
            let b = ComplexField::from_values(g, vals.iter().map(|t| c(t.2, t.3)).collect()).unwrap();
            let (p, m) = dirac_split(&a, &b).unwrap();
            let (a2, b2) = dirac_join(&p, &m).unwrap();
            prop_assert!(a2.max_diff(&a).unwrap() <= 1e-15);
            prop_assert!(b2.max_diff(&b).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn omega_examples() {
        let g = unit(17);
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        let i = ComplexField::constant(&g, c(0.0, 1.0));
        let w = omega(&one, &i, OmegaMode::Raw, &[0, 0]).unwrap();
        assert!(w.omega.max_diff(&cf(&g, |a, _| c(0.0, 2.0 * a))).unwrap() <= 1e-12);
        assert_eq!(w.constant, 0.0);
        let w = omega(&one, &one, OmegaMode::Raw, &[0, 0]).unwrap();
        assert!(w.omega.max_diff(&cf(&g, |_, b| c(0.0, 2.0 * b))).unwrap() <= 1e-12);

        let g = unit(65);
        let z = ComplexField::z(&g).unwrap();
        let i = ComplexField::constant(&g, c(0.0, 1.0));
        let w = omega(&z, &i, OmegaMode::Nonvanishing, &[0, 0]).unwrap();
        assert!(w.min_abs() > 0.0);
        assert!(w.defect <= default_tolerance(g.h(), 1.0));
        assert_eq!(w.constant, 2.0);
        let exact = cf(&g, |a, b| c(0.0, a * a - b * b + 2.0));
        assert!(w.omega.max_diff(&exact).unwrap() <= 1e-12);
        assert!(w.omega.re().max_abs() == 0.0);
    }

    #[test]
    fn non_conjugate_pair_is_a_compatibility_error() {
        let g = unit(33);
        let zb = ComplexField::z(&g).unwrap().conj();
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        assert!(matches!(omega(&zb, &one, OmegaMode::Raw, &[0, 0]), Err(Error::Compatibility { .. })));
    }

    #[test]
    fn moutard_q_examples() {
        let g = unit(33);
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        let i = ComplexField::constant(&g, c(0.0, 1.0));
        let c0 = 0.75;
        let w = omega(&one, &i, OmegaMode::Constant(c0), &[0, 0]).unwrap();
        let zero = GafCoefficient::zero(&g).unwrap();
        let qt = moutard_q(&zero, &one, &i, &w, SingularMode::Reject).unwrap();
        let exact = cf(&g, |a, _| c(-1.0 / (2.0 * a + c0), 0.0));
        assert!(qt.q().max_diff(&exact).unwrap() <= 1e-12);

        // f ≡ 0: identity, bit for bit
        let q = GafCoefficient::new(cf(&g, |a, b| c(a, -b))).unwrap();
        let f0 = ComplexField::zeros(&g);
        let m = Moutard::new(&f0, &i, OmegaMode::Nonvanishing, &[0, 0], SingularMode::Reject).unwrap();
        assert_eq!(m.q_tilde(&q).unwrap().q(), q.q());
        let psi = ComplexField::z(&g).unwrap();
        assert_eq!(m.psi(&psi).unwrap(), psi);

        // zero of ω inside the grid
        let w0 = omega(&one, &i, OmegaMode::Constant(-1.0), &[0, 0]).unwrap();
        assert!(matches!(moutard_q(&zero, &one, &i, &w0, SingularMode::Reject), Err(Error::SingularOmega { .. })));
        let masked = moutard_q(&zero, &one, &i, &w0, SingularMode::masking()).unwrap();
        assert!(masked.mask().is_some());
        assert!(masked.q().values()[g.flat_index(&[16, 3])].re.is_nan());
    }

    #[test]
    fn moutard_q_matches_transformed_conductivity() {
        // σ = e^{-2x1}, f from u1 = e^{2x1}: f = e^{x1}; f⁺ = i e^{x1};
        // ω = i(e^{2x1} - 1 + c0); σ̃ = -σ ω²
        let g = unit(65);
        let s = sigma(&g, |x| (-2.0 * x[0]).exp());
        let q = sigma_to_q(&s).unwrap();
        let f = cf(&g, |a, _| c(a.exp(), 0.0));
        let fp = cf(&g, |a, _| c(0.0, a.exp()));
        let m = Moutard::new(&f, &fp, OmegaMode::Nonvanishing, &[0, 0], SingularMode::Reject).unwrap();
        let c0 = m.omega_ff.constant;
        let st = sigma(&g, |x| (-2.0 * x[0]).exp() * ((2.0 * x[0]).exp() - 1.0 + c0).powi(2));
        let qt = m.q_tilde(&q).unwrap();
        let d = qt.q().max_diff(sigma_to_q(&st).unwrap().q()).unwrap();
        assert!(d <= default_tolerance(g.h(), 1.0), "{d}");
        assert!(qt.is_conductivity_type());
    }

    #[test]
    fn moutard_psi_examples() {
        let g = unit(33);
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        let i = ComplexField::constant(&g, c(0.0, 1.0));
        let m = Moutard::new(&one, &i, OmegaMode::Nonvanishing, &[0, 0], SingularMode::Reject).unwrap();
        let c0 = m.omega_ff.constant;
        let kernel = m.psi_with(&one, OmegaMode::Constant(c0)).unwrap();
        assert!(kernel.max_abs() <= 1e-15);

        let pt = m.psi(&one).unwrap();
        let exact = cf(&g, |a, _| c(c0 / (2.0 * a + c0), 0.0));
        assert!(pt.max_diff(&exact).unwrap() <= 1e-12);
        let qt = m.q_tilde(&GafCoefficient::zero(&g).unwrap()).unwrap();
        assert!(check_gaf(&pt, &qt).unwrap() <= default_tolerance(g.h(), 1.0));

        // ψ⁺ = 1: ψ̃⁺ = 1 - 2i x2 / (2x1 + c0)
        let ppt = m.psi_plus(&one).unwrap();
        let exact = cf(&g, |a, b| c(1.0, -2.0 * b / (2.0 * a + c0)));
        assert!(ppt.max_diff(&exact).unwrap() <= 1e-12);
        assert!(check_gaf_conjugate(&ppt, &qt).unwrap() <= default_tolerance(g.h(), 1.0));
    }

    #[test]
    fn transformed_gaf_residual_converges() {
        // σ = e^{-2x1}: ψ = -i e^{-x1}/2 (u = x2), f = e^{x1} (u1 = e^{2x1}), f⁺ = i e^{x1},
        // ψ⁺ = e^{x1} ∂_z v with v = e^{b x1} cos x2, b² + 2b - 1 = 0
        let b = 2f64.sqrt() - 1.0;
        let mut hs = vec![];
        let mut rs = vec![];
        let mut rps = vec![];
        for n in [65, 129, 257] {
            let g = unit(n);
            let s = sigma(&g, |x| (-2.0 * x[0]).exp());
            let q = sigma_to_q(&s).unwrap();
            let f = cf(&g, |a, _| c(a.exp(), 0.0));
            let fp = cf(&g, |a, _| c(0.0, a.exp()));
            let psi = cf(&g, |a, _| c(0.0, -0.5 * (-a).exp()));
            let psi_plus = cf(&g, |x1, x2| c(b * x2.cos(), x2.sin()) * (0.5 * ((1.0 + b) * x1).exp()));
            assert!(check_gaf_conjugate(&psi_plus, &q).unwrap() <= default_tolerance(g.h(), 3.0));
            let m = Moutard::new(&f, &fp, OmegaMode::Nonvanishing, &[0, 0], SingularMode::Reject).unwrap();
            let qt = m.q_tilde(&q).unwrap();
            let r = check_gaf(&m.psi(&psi).unwrap(), &qt).unwrap();
            let rp = check_gaf_conjugate(&m.psi_plus(&psi_plus).unwrap(), &qt).unwrap();
            assert!(r <= default_tolerance(g.h(), 3.0) && rp <= default_tolerance(g.h(), 3.0));
            hs.push(g.h());
            rs.push(r);
            rps.push(rp);
        }
        assert!(crate::verify::estimate_order(&hs, &rs) >= 1.9, "{rs:?}");
        assert!(crate::verify::estimate_order(&hs, &rps) >= 1.9, "{rps:?}");
    }
}
