//! The planar conductivity equation `div(σ ∇u) = 0` through its
//! generalized-analytic reduction: potentials, currents, stream functions and
//! the two Moutard transforms `M_I` and `M_R`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gradient, integrate_form, wirtinger_dz, ComplexField, Mask, ScalarField};
use crate::gaf::{omega, sigma_to_q, GafCoefficient, Moutard, OmegaMode, OmegaPotential};
use crate::multidim::{theorem3_transform, NdTransform};
use crate::sigma::{apply_mask, merge_masks, Conductivity, SingularMode};
use crate::verify::{residual_scaled, EquationId, ResidualInputs, ResidualReport};

/// Which special conjugate solution drives a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `f⁺ = √σ`; seeds are solutions `v₁` of the conjugate equation.
    R,
    /// `f⁺ = i/√σ`; seeds are solutions `u₁` of the conductivity equation.
    I,
}

/// `√σ` for [`Variant::R`], `i/√σ` for [`Variant::I`].
pub fn special_fplus(sigma: &Conductivity, variant: Variant) -> ComplexField {
    let root = sigma.sqrt();
    match variant {
        Variant::R => root.to_complex(),
        Variant::I => root.map(|s| Complex64::new(0.0, 1.0 / s)),
    }
}

/// `ψ = √σ ∂_z u`.
pub fn u_to_psi(u: &ScalarField, sigma: &Conductivity) -> Result<ComplexField> {
    let du = wirtinger_dz(&u.to_complex())?;
    du.zip_with(&sigma.sqrt(), |d, r| d * r)
}

/// `ψ = i σ^{-1/2} ∂_z v`, the same function seen from the stream function.
pub fn v_to_psi(v: &ScalarField, sigma: &Conductivity) -> Result<ComplexField> {
    let dv = wirtinger_dz(&v.to_complex())?;
    dv.zip_with(&sigma.sqrt(), |d, r| Complex64::new(-d.im / r, d.re / r))
}

/// `ψ⁺ = √σ u + i v / √σ` for a potential `u` and its stream function `v`.
/// This solves the conjugate equation `∂_z̄ ψ⁺ = -q̄ ψ̄⁺`; `(1, 0)` and
/// `(0, 1)` give the two special solutions.
pub fn pair_to_psi_plus(u: &ScalarField, v: &ScalarField, sigma: &Conductivity) -> Result<ComplexField> {
    let root = sigma.sqrt();
    let re = root.mul(u)?;
    let im = v.div(&root)?;
    re.zip_with(&im, Complex64::new)
}

fn im_omega(psi: &ComplexField, f_plus: &ComplexField, base: &[usize], value: f64) -> Result<ScalarField> {
    Ok(omega(psi, f_plus, OmegaMode::Raw, base)?.imag().map(|x| x + value))
}

/// `u = -i ω_{ψ, i/√σ} + value`, zero-based at `base`.
pub fn psi_to_u(psi: &ComplexField, sigma: &Conductivity, base: &[usize], value: f64) -> Result<ScalarField> {
    im_omega(psi, &special_fplus(sigma, Variant::I), base, value)
}

/// `v = -i ω_{ψ, √σ} + value`, zero-based at `base`.
pub fn psi_to_v(psi: &ComplexField, sigma: &Conductivity, base: &[usize], value: f64) -> Result<ScalarField> {
    im_omega(psi, &special_fplus(sigma, Variant::R), base, value)
}

/// Current density `I = σ ∇u`.
pub fn current(sigma: &Conductivity, u: &ScalarField) -> Result<[ScalarField; 2]> {
    sigma.field().grid().check_dim(2)?;
    let g = gradient(u);
    Ok([sigma.field().mul(&g[0])?, sigma.field().mul(&g[1])?])
}

/// A conductivity with a potential and, optionally, its stream function.
#[derive(Debug, Clone)]
pub struct ConductivitySolution {
    pub sigma: Conductivity,
    pub u: ScalarField,
    pub v: Option<ScalarField>,
    pub current: Option<[ScalarField; 2]>,
    pub residual_u: ResidualReport,
    pub residual_v: Option<ResidualReport>,
}

impl ConductivitySolution {
    /// Measures `div(σ ∇u)` at the default tolerance.
    pub fn new(sigma: Conductivity, u: ScalarField) -> Result<Self> {
        let inputs = ResidualInputs::conductivity(sigma.field(), &u).with_mask(sigma.mask().cloned());
        let residual_u = residual_scaled(EquationId::Hc1, &inputs, 1.0)?;
        Ok(Self { sigma, u, v: None, current: None, residual_u, residual_v: None })
    }

    /// Adds `v`, `I` and the conjugate-equation residual.
    pub fn with_stream(self, base: &[usize], value: f64) -> Result<Self> {
        let v = stream_function(&self, base, value)?;
        self.with_v(v)
    }

    /// A potential together with a stream function computed elsewhere.
    pub fn pair(sigma: Conductivity, u: ScalarField, v: ScalarField) -> Result<Self> {
        Self::new(sigma, u)?.with_v(v)
    }

    fn with_v(mut self, v: ScalarField) -> Result<Self> {
        let inputs = ResidualInputs::conjugate(self.sigma.field(), &v).with_mask(self.sigma.mask().cloned());
        self.residual_v = Some(residual_scaled(EquationId::Conj13, &inputs, 1.0)?);
        self.current = Some(current(&self.sigma, &self.u)?);
        self.v = Some(v);
        Ok(self)
    }

    /// Both residuals within tolerance.
    pub fn passes(&self) -> bool {
        self.residual_u.pass && self.residual_v.as_ref().is_none_or(|r| r.pass)
    }
}

/// Stream function of `sol.u`: `∂_2 v = I_1`, `∂_1 v = -I_2`, with
/// `v(base) = value`.
pub fn stream_function(sol: &ConductivitySolution, base: &[usize], value: f64) -> Result<ScalarField> {
    psi_to_v(&u_to_psi(&sol.u, &sol.sigma)?, &sol.sigma, base, value)
}

/// Potential of the stream function `v` of `div(σ⁻¹ ∇v) = 0`: the `u` with
/// `∂_2 v = σ ∂_1 u`, `∂_1 v = -σ ∂_2 u` and `u(base) = value`.
pub fn dual_potential(v: &ScalarField, sigma: &Conductivity, base: &[usize], value: f64) -> Result<ScalarField> {
    psi_to_u(&v_to_psi(v, sigma)?, sigma, base, value)
}

/// How `ω_{f,f⁺}` is normalised in a planar transform.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaChoice {
    Raw,
    #[default]
    Nonvanishing,
    Constant(f64),
    /// `ω = i · seed`, which is the quadrature up to its constant.
    Seed,
}

/// A seed solution and the choices that fix a transform.
#[derive(Debug, Clone)]
pub struct TransformPlan2D {
    pub variant: Variant,
    /// `u₁` for [`Variant::I`], `v₁` for [`Variant::R`].
    pub seed: ScalarField,
    pub omega: OmegaChoice,
    pub base: Vec<usize>,
    pub singular: SingularMode,
    /// Multiplies the default tolerance of the seed check.
    pub tolerance_scale: f64,
}

impl TransformPlan2D {
    pub fn new(variant: Variant, seed: ScalarField) -> Self {
        Self {
            variant,
            seed,
            omega: OmegaChoice::default(),
            base: vec![0, 0],
            singular: SingularMode::Reject,
            tolerance_scale: 1.0,
        }
    }

    pub fn with_omega(mut self, omega: OmegaChoice) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_base(mut self, base: &[usize]) -> Self {
        self.base = base.to_vec();
        self
    }

    pub fn with_singular(mut self, singular: SingularMode) -> Self {
        self.singular = singular;
        self
    }
}

/// The GAF solution generated by the seed: `√σ ∂_z u₁` or `i σ^{-1/2} ∂_z v₁`.
pub fn seed_f(sigma: &Conductivity, plan: &TransformPlan2D) -> Result<ComplexField> {
    match plan.variant {
        Variant::I => u_to_psi(&plan.seed, sigma),
        Variant::R => v_to_psi(&plan.seed, sigma),
    }
}

/// Result of a planar Moutard transform.
#[derive(Debug, Clone)]
pub struct Theorem1Output {
    pub variant: Variant,
    pub sigma_tilde: Conductivity,
    pub q: GafCoefficient,
    pub q_tilde: GafCoefficient,
    pub moutard: Moutard,
}

impl Theorem1Output {
    /// `-i ω_{f,f⁺}`, the seed as the transform actually used it.
    pub fn seed_potential(&self) -> ScalarField {
        self.moutard.omega_ff.imag()
    }

    /// Transforms a solution `ψ` of the original GAF equation.
    pub fn psi_tilde(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.moutard.psi(psi)
    }
}

/// `σ̃ = -σ ω²` for `I` and `σ̃ = -σ / ω²` for `R`, together with `q̃`.
pub fn theorem1_transform(sigma: &Conductivity, plan: &TransformPlan2D) -> Result<Theorem1Output> {
    let eq = match plan.variant {
        Variant::I => EquationId::Hc1,
        Variant::R => EquationId::Conj13,
    };
    let inputs = ResidualInputs { sigma: Some(sigma.field().clone()), ..Default::default() };
    let inputs = match plan.variant {
        Variant::I => ResidualInputs { u: Some(plan.seed.clone()), ..inputs },
        Variant::R => ResidualInputs { v: Some(plan.seed.clone()), ..inputs },
    }
    .with_mask(sigma.mask().cloned());
    let check = residual_scaled(eq, &inputs, plan.tolerance_scale)?;
    if !check.pass {
        return Err(Error::Precondition(format!(
            "seed does not solve {eq}: residual {:.3e} > {:.3e}",
            check.norm_max, check.tolerance
        )));
    }

    let f = seed_f(sigma, plan)?;
    let f_plus = special_fplus(sigma, plan.variant);
    let w = match plan.omega {
        OmegaChoice::Raw => omega(&f, &f_plus, OmegaMode::Raw, &plan.base)?,
        OmegaChoice::Nonvanishing => omega(&f, &f_plus, OmegaMode::Nonvanishing, &plan.base)?,
        OmegaChoice::Constant(c) => omega(&f, &f_plus, OmegaMode::Constant(c), &plan.base)?,
        OmegaChoice::Seed => {
            let quad = omega(&f, &f_plus, OmegaMode::Raw, &plan.base)?;
            OmegaPotential {
                omega: plan.seed.map(|s| Complex64::new(0.0, s)),
                constant: plan.seed.values()[f.grid().flat_index(&plan.base)],
                ..quad
            }
        }
    }
    .with_pair("f", "f_plus");
    let moutard = Moutard::from_omega(&f, &f_plus, w, &plan.base, plan.singular)?;
    let s = moutard.omega_ff.imag();
    let raw = match plan.variant {
        Variant::I => sigma.field().zip_with(&s, |a, b| a * (b * b))?,
        Variant::R => sigma.field().zip_with(&s, |a, b| a / (b * b))?,
    };
    let mask = merge_masks(sigma.mask(), moutard.mask.as_ref());
    let sigma_tilde = Conductivity::with_mask(raw, mask)?;
    let q = sigma_to_q(sigma)?;
    let q_tilde = moutard.q_tilde(&q)?;
    Ok(Theorem1Output { variant: plan.variant, sigma_tilde, q, q_tilde, moutard })
}

/// `ũ = -i ω_{ψ̃, i/√σ̃}` and `ṽ = -i ω_{ψ̃, √σ̃}`, both zero at `base`.
pub fn theorem1_recover(
    sigma_tilde: &Conductivity,
    psi_tilde: &ComplexField,
    base: &[usize],
) -> Result<(ScalarField, ScalarField)> {
    Ok((psi_to_u(psi_tilde, sigma_tilde, base, 0.0)?, psi_to_v(psi_tilde, sigma_tilde, base, 0.0)?))
}

fn divide(x: &ScalarField, d: &ScalarField, mask: Option<&Mask>) -> Result<ScalarField> {
    Ok(apply_mask(&x.div(d)?, mask))
}

/// `M_I`: `(σ, u) ↦ (u₁² σ, u / u₁)`.
pub fn theorem2_mi(
    sigma: &Conductivity,
    u1: &ScalarField,
    u: &ScalarField,
    singular: SingularMode,
) -> Result<(Conductivity, ScalarField)> {
    let mask = merge_masks(sigma.mask(), singular.divisor_mask(u1)?.as_ref());
    let st = sigma.field().zip_with(u1, |a, b| a * (b * b))?;
    Ok((Conductivity::with_mask(st, mask.clone())?, divide(u, u1, mask.as_ref())?))
}

/// `M_R`: `(σ, v) ↦ (σ / v₁², v / v₁)`.
pub fn theorem2_mr(
    sigma: &Conductivity,
    v1: &ScalarField,
    v: &ScalarField,
    singular: SingularMode,
) -> Result<(Conductivity, ScalarField)> {
    let mask = merge_masks(sigma.mask(), singular.divisor_mask(v1)?.as_ref());
    let st = sigma.field().zip_with(v1, |a, b| a / (b * b))?;
    Ok((Conductivity::with_mask(st, mask.clone())?, divide(v, v1, mask.as_ref())?))
}

fn require_harmonic(name: &str, f: &ScalarField) -> Result<()> {
    let r = residual_scaled(EquationId::Harmonic, &ResidualInputs { u: Some(f.clone()), ..Default::default() }, 1.0)?;
    if r.pass {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} is not harmonic: |Δ{name}| = {:.3e} > {:.3e}", r.norm_max, r.tolerance)))
    }
}

/// `u = -∫ (w ∂₂φ - φ ∂₂w) dx₁ - (w ∂₁φ - φ ∂₁w) dx₂ + c` from `base`.
pub fn example2_potential(w: &ScalarField, phi: &ScalarField, base: &[usize], c: f64) -> Result<ScalarField> {
    w.same_grid(phi)?;
    w.grid().check_dim(2)?;
    let (dw, dphi) = (gradient(w), gradient(phi));
    let wedge = |k: usize| -> Result<ScalarField> { w.mul(&dphi[k])?.sub(&phi.mul(&dw[k])?) };
    let g1 = wedge(1)?.scale(-1.0);
    let g2 = wedge(0)?;
    Ok(integrate_form(&g1, &g2, base)?.field.map(|x| x + c))
}

/// A solution of `div(w⁻² ∇u) = 0` built from harmonic `w`, `φ`.
pub fn example2_solution(
    w: &ScalarField,
    phi: &ScalarField,
    base: &[usize],
    c: f64,
    singular: SingularMode,
) -> Result<ConductivitySolution> {
    require_harmonic("w", w)?;
    require_harmonic("phi", phi)?;
    let mask = singular.divisor_mask(w)?;
    let sigma = Conductivity::with_mask(w.map(|x| 1.0 / (x * x)), mask)?;
    let u = example2_potential(w, phi, base, c)?;
    ConductivitySolution::new(sigma, u)
}

/// `σ = w⁻² u₁²` and `U = u / u₁`, where `u₁`, `u` are potentials of the
/// second example for `(φ₁, c₁)` and `(φ, c)`.
#[allow(clippy::too_many_arguments)]
pub fn example3_solution(
    w: &ScalarField,
    phi1: &ScalarField,
    c1: f64,
    phi: &ScalarField,
    c: f64,
    base: &[usize],
    singular: SingularMode,
) -> Result<ConductivitySolution> {
    let first = example2_solution(w, phi1, base, c1, singular)?;
    require_harmonic("phi", phi)?;
    let u = example2_potential(w, phi, base, c)?;
    let (sigma, big_u) = theorem2_mi(&first.sigma, &first.u, &u, singular)?;
    ConductivitySolution::new(sigma, big_u)
}

/// `σ = w²`, `u = φ/w` for harmonic `w`, `φ`.
pub fn example1_solution(w: &ScalarField, phi: &ScalarField, singular: SingularMode) -> Result<ConductivitySolution> {
    require_harmonic("w", w)?;
    require_harmonic("phi", phi)?;
    let one = Conductivity::new(ScalarField::constant(w.grid(), 1.0))?;
    let t = NdTransform::new(one, w.clone(), singular)?;
    let (sigma, u) = theorem3_transform(&t, phi)?;
    ConductivitySolution::new(sigma, u)
}

/// One step of [`alternating_chain`].
#[derive(Debug, Clone)]
pub struct ChainStage {
    pub variant: Variant,
    /// `v₁` for [`Variant::R`], `u₁` for [`Variant::I`].
    pub seed: ScalarField,
    pub solutions: Vec<ConductivitySolution>,
}

/// Applies `depth` transforms alternating `M_R` and `M_I`, starting with
/// `M_R`. Each step is seeded by the first carried solution, shifted by
/// `offset`: its stream function for `M_R`, its potential for `M_I`. Every
/// solution is mapped algebraically and its partner (potential after `M_R`,
/// stream function after `M_I`) is rebuilt by quadrature from `base`.
///
/// The carried solutions must come with stream functions. Quadrature does not
/// cross masked points, so chains are only meaningful without a mask.
pub fn alternating_chain(
    start: &[ConductivitySolution],
    depth: usize,
    offset: f64,
    base: &[usize],
    singular: SingularMode,
) -> Result<Vec<ChainStage>> {
    let Some(first) = start.first() else {
        return Err(Error::Precondition("an alternating chain needs at least one solution".into()));
    };
    let mut sigma = first.sigma.clone();
    let mut pairs = start
        .iter()
        .map(|s| {
            let v = s.v.clone().ok_or_else(|| Error::Precondition("chain solutions need stream functions".into()))?;
            Ok((s.u.clone(), v))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stages = Vec::with_capacity(depth);
    for k in 0..depth {
        let variant = if k % 2 == 0 { Variant::R } else { Variant::I };
        let (seed, solutions) = match variant {
            Variant::R => {
                let v1 = pairs[0].1.map(|x| x + offset);
                let mut out = vec![];
                let mut next = None;
                for (_, v) in &pairs {
                    let (s, vt) = theorem2_mr(&sigma, &v1, v, singular)?;
                    let ut = dual_potential(&vt, &s, base, 0.0)?;
                    out.push((ut, vt));
                    next = Some(s);
                }
                sigma = next.expect("at least one solution");
                (v1, out)
            }
            Variant::I => {
                let u1 = pairs[0].0.map(|x| x + offset);
                let mut out = vec![];
                let mut next = None;
                for (u, _) in &pairs {
                    let (s, ut) = theorem2_mi(&sigma, &u1, u, singular)?;
                    let vt = psi_to_v(&u_to_psi(&ut, &s)?, &s, base, 0.0)?;
                    out.push((ut, vt));
                    next = Some(s);
                }
                sigma = next.expect("at least one solution");
                (u1, out)
            }
        };
        pairs = solutions;
        let solutions = pairs
            .iter()
            .map(|(u, v)| ConductivitySolution::pair(sigma.clone(), u.clone(), v.clone()))
            .collect::<Result<Vec<_>>>()?;
        stages.push(ChainStage { variant, seed, solutions });
    }
    Ok(stages)
}
