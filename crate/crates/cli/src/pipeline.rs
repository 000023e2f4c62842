//! Executes a pipeline config and writes its artifacts.
//!
//! Output layout, relative to the config's `output` directory:
//!
//! ```text
//! 00_initial/sigma.field, u0.field, v0.field, ...
//! 01_moutard2d/seed.field, q.field, omega.field, sigma.field, q_tilde.field, psi0.field, ...
//! reports/hc1_0.json, conj1.3_0.json, compat.json, ...
//! manifest.json
//! ```
//!
//! The manifest records every file written, which file holds the final
//! value of each state entry, and the verification summary. `--check-only`
//! reads the final state back from it and verifies again.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use moutard_core::field::io;
use moutard_core::gaf::{sigma_to_q, OmegaMode};
use moutard_core::multidim::{generalized_residual, generalized_transform, schrodinger_q, NdTransform};
use moutard_core::planar::{
    pair_to_psi_plus, psi_to_u, psi_to_v, theorem1_transform, u_to_psi, v_to_psi, TransformPlan2D, Variant,
};
use moutard_core::sigma::apply_mask;
use moutard_core::verify::{residual_scaled, EquationId, ResidualInputs, ResidualReport};
use moutard_core::{ComplexField, Conductivity, Grid, ScalarField, SingularMode};

use crate::config::{parse_singular, validate, FieldSpec, LoadedConfig, SeedSpec, Step, DEFAULT_MAX_DEPTH};
use crate::error::CliError;
use crate::expr::Expr;

pub const MANIFEST: &str = "manifest.json";

/// Command-line overrides; `None` keeps the config's value.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub tolerance_scale: Option<f64>,
    pub singular: Option<SingularMode>,
    pub max_depth: Option<usize>,
    /// Threads for verification; all cores by default.
    pub jobs: Option<usize>,
    pub check_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub equation: EquationId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<usize>,
    pub file: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub solutions: usize,
    pub steps: Vec<String>,
    pub files: Vec<String>,
    /// State entry (`sigma`, `u0`, `psi_plus1`, `q_tilde`, ...) to the file
    /// holding its final value.
    pub state: BTreeMap<String, String>,
    pub reports: Vec<ReportEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub manifest: Manifest,
    pub reports: Vec<ResidualReport>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.manifest.pass
    }

    /// Paths of the failing reports.
    pub fn failures(&self) -> Vec<PathBuf> {
        self.manifest.reports.iter().filter(|r| !r.pass).map(|r| self.output.join(&r.file)).collect()
    }
}

/// One carried solution. Planar transforms keep the transformed GAF
/// solutions `ψ̃`, `ψ̃⁺` next to the recovered potentials.
#[derive(Debug, Clone, Default)]
struct Carried {
    u: Option<ScalarField>,
    v: Option<ScalarField>,
    psi: Option<ComplexField>,
    psi_plus: Option<ComplexField>,
}

impl Carried {
    /// `√σ ∂_z u`, or the same from the stream function.
    fn psi_from_potentials(&self, sigma: &Conductivity) -> moutard_core::Result<ComplexField> {
        match (&self.u, &self.v) {
            (Some(u), _) => u_to_psi(u, sigma),
            (None, Some(v)) => v_to_psi(v, sigma),
            (None, None) => unreachable!("validated: every solution has u or v"),
        }
    }
}

struct State {
    grid: Grid,
    sigma: Conductivity,
    solutions: Vec<Carried>,
    /// Zero-order coefficient after a generalized step.
    potential: Option<ScalarField>,
    /// `q̃` of the last planar transform; cleared by steps that change σ
    /// any other way.
    q_tilde: Option<ComplexField>,
    base: Vec<usize>,
    singular: SingularMode,
    tolerance_scale: f64,
}

struct Writer {
    root: PathBuf,
    files: Vec<String>,
    state: BTreeMap<String, String>,
}

impl Writer {
    fn put(&mut self, rel: String, text: String) -> Result<(), CliError> {
        let path = self.root.join(&rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.push(rel);
        Ok(())
    }

    fn real(&mut self, dir: &str, name: &str, f: &ScalarField) -> Result<String, CliError> {
        let rel = format!("{dir}/{name}.field");
        self.put(rel.clone(), io::write_real(f))?;
        Ok(rel)
    }

    fn complex(&mut self, dir: &str, name: &str, f: &ComplexField) -> Result<String, CliError> {
        let rel = format!("{dir}/{name}.field");
        self.put(rel.clone(), io::write_complex(f))?;
        Ok(rel)
    }

    /// Writes a state entry and records it as the latest value.
    fn state_real(&mut self, dir: &str, name: &str, f: &ScalarField) -> Result<(), CliError> {
        let rel = self.real(dir, name, f)?;
        self.state.insert(name.to_string(), rel);
        Ok(())
    }

    fn state_complex(&mut self, dir: &str, name: &str, f: &ComplexField) -> Result<(), CliError> {
        let rel = self.complex(dir, name, f)?;
        self.state.insert(name.to_string(), rel);
        Ok(())
    }

    fn forget(&mut self, name: &str) {
        self.state.remove(name);
    }

    /// Writes the carried solutions and drops stale entries.
    fn solutions(&mut self, dir: &str, solutions: &[Carried]) -> Result<(), CliError> {
        for (k, c) in solutions.iter().enumerate() {
            let entries: [(String, Option<&ScalarField>); 2] = [(format!("u{k}"), c.u.as_ref()), (format!("v{k}"), c.v.as_ref())];
            for (name, f) in entries {
                match f {
                    Some(f) => self.state_real(dir, &name, f)?,
                    None => self.forget(&name),
                }
            }
            let entries: [(String, Option<&ComplexField>); 2] =
                [(format!("psi{k}"), c.psi.as_ref()), (format!("psi_plus{k}"), c.psi_plus.as_ref())];
            for (name, f) in entries {
                match f {
                    Some(f) => self.state_complex(dir, &name, f)?,
                    None => self.forget(&name),
                }
            }
        }
        Ok(())
    }
}

fn load_field(spec: &FieldSpec, grid: &Grid, loaded: &LoadedConfig, what: &str) -> Result<ScalarField, CliError> {
    match spec {
        FieldSpec::Expr(src) => {
            let e = Expr::parse(src, grid.dim()).map_err(|e| CliError::Config(format!("{what}: {e}")))?;
            Ok(e.sample(grid))
        }
        FieldSpec::File { file } => {
            let f = read_field(&loaded.resolve(file))?.into_real().map_err(|e| CliError::core(what, e))?;
            if f.grid() != grid {
                return Err(CliError::Config(format!("{what}: {file} is sampled on a different grid")));
            }
            Ok(f)
        }
    }
}

fn read_field(path: &Path) -> Result<io::AnyField, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    io::read(&text).map_err(|e| CliError::core(path.display().to_string(), e))
}

fn value_at(f: &ScalarField, base: &[usize]) -> f64 {
    f.values()[f.grid().flat_index(base)]
}

/// Runs `loaded`, or with `check_only` verifies the outputs of an earlier run.
pub fn run(loaded: &LoadedConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let config = &loaded.config;
    let max_depth = opts.max_depth.or(config.max_depth).unwrap_or(DEFAULT_MAX_DEPTH);
    let grid = validate(config, max_depth)?;
    let singular = match (opts.singular, &config.singular_mode) {
        (Some(m), _) => m,
        (None, Some(s)) => parse_singular(s)?,
        (None, None) => SingularMode::Reject,
    };
    let tolerance_scale = opts.tolerance_scale.or(config.tolerance_scale).unwrap_or(1.0);
    if !(tolerance_scale > 0.0) {
        return Err(CliError::Config(format!("tolerance scale must be positive, got {tolerance_scale}")));
    }
    let base = config.base.clone().unwrap_or_else(|| grid.corner());
    let output = loaded.output_dir();

    if opts.check_only {
        return check_only(config.verify.as_slice(), &output, grid, base, singular, tolerance_scale, opts.jobs);
    }

    let sigma = load_field(&config.sigma, &grid, loaded, "sigma")?;
    let sigma = Conductivity::from_sentinels(sigma).map_err(|e| CliError::core("sigma", e))?;
    let mut solutions = Vec::with_capacity(config.solutions.len());
    for (k, s) in config.solutions.iter().enumerate() {
        let load = |spec: &Option<FieldSpec>, name: &str| {
            spec.as_ref().map(|f| load_field(f, &grid, loaded, &format!("solution {k} {name}"))).transpose()
        };
        solutions.push(Carried { u: load(&s.u, "u")?, v: load(&s.v, "v")?, ..Default::default() });
    }
    let mut state =
        State { grid, sigma, solutions, potential: None, q_tilde: None, base, singular, tolerance_scale };

    let mut w = Writer { root: output.clone(), files: Vec::new(), state: BTreeMap::new() };
    let dir = "00_initial";
    w.state_real(dir, "sigma", &masked_sigma(&state.sigma))?;
    w.solutions(dir, &state.solutions)?;
    let mut steps = vec![dir.to_string()];

    for (i, step) in config.steps.iter().enumerate() {
        let dir = format!("{:02}_{}", i + 1, step.name());
        let wrap = |source| CliError::Step { index: i, name: step.name(), source };
        apply_step(&mut state, &mut w, &dir, step, loaded).map_err(|e| match e {
            StepError::Core(e) => wrap(e),
            StepError::Cli(e) => e,
        })?;
        steps.push(dir);
    }

    let (entries, reports) = verify_all(&state, &config.verify, opts.jobs)?;
    for (entry, report) in entries.iter().zip(&reports) {
        let text = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
        w.put(entry.file.clone(), text)?;
    }
    let manifest = Manifest {
        solutions: state.solutions.len(),
        steps,
        files: w.files.clone(),
        state: w.state.clone(),
        pass: entries.iter().all(|e| e.pass),
        reports: entries,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = output.join(MANIFEST);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(RunOutcome { output, manifest, reports })
}

fn masked_sigma(sigma: &Conductivity) -> ScalarField {
    apply_mask(sigma.field(), sigma.mask())
}

enum StepError {
    Core(moutard_core::Error),
    Cli(CliError),
}

impl From<moutard_core::Error> for StepError {
    fn from(e: moutard_core::Error) -> Self {
        StepError::Core(e)
    }
}

impl From<CliError> for StepError {
    fn from(e: CliError) -> Self {
        StepError::Cli(e)
    }
}

fn apply_step(state: &mut State, w: &mut Writer, dir: &str, step: &Step, loaded: &LoadedConfig) -> Result<(), StepError> {
    let grid = state.grid.clone();
    let load = |spec: &FieldSpec, what: &str| load_field(spec, &grid, loaded, &format!("{} {what}", step.name()));
    match step {
        Step::Moutard2d { variant, seed, omega_mode, base } => {
            let base = base.clone().unwrap_or_else(|| state.base.clone());
            let seed = match seed {
                SeedSpec::Field(f) => load(f, "seed")?,
                SeedSpec::Solution { solution, offset } => {
                    let c = &state.solutions[*solution];
                    let (f, name) = match variant {
                        Variant::I => (&c.u, "potential"),
                        Variant::R => (&c.v, "stream function"),
                    };
                    let f = f.as_ref().ok_or_else(|| {
                        moutard_core::Error::Precondition(format!("seed solution {solution} has no {name}"))
                    })?;
                    f.map(|x| x + offset)
                }
            };
            let mut plan =
                TransformPlan2D::new(*variant, seed).with_omega(*omega_mode).with_base(&base).with_singular(state.singular);
            plan.tolerance_scale = state.tolerance_scale;
            let out = theorem1_transform(&state.sigma, &plan)?;
            let s = out.seed_potential();
            let sb = value_at(&s, &base);

            let mut next = Vec::with_capacity(state.solutions.len());
            for c in &state.solutions {
                // ω_{ψ,f⁺} is i u for M_I and i v for M_R; its constant
                // selects which solution ψ̃ is, so it must match the potential
                let own = match variant {
                    Variant::I => &c.u,
                    Variant::R => &c.v,
                };
                let own_base = own.as_ref().map_or(0.0, |f| value_at(f, &base));
                let psi = c.psi_from_potentials(&state.sigma)?;
                let psi_t = out.moutard.psi_with(&psi, OmegaMode::Constant(own_base))?;
                let psi_plus = match (&c.u, &c.v) {
                    (Some(u), Some(v)) => Some(out.moutard.psi_plus(&pair_to_psi_plus(u, v, &state.sigma)?)?),
                    _ => None,
                };
                // that potential maps to its quotient by the seed; the
                // partner starts at 0
                let (ub, vb) = match variant {
                    Variant::I => (own_base / sb, 0.0),
                    Variant::R => (0.0, own_base / sb),
                };
                let u = psi_to_u(&psi_t, &out.sigma_tilde, &base, ub)?;
                let v = psi_to_v(&psi_t, &out.sigma_tilde, &base, vb)?;
                next.push(Carried { u: Some(u), v: Some(v), psi: Some(psi_t), psi_plus });
            }

            w.real(dir, "seed", &plan.seed)?;
            w.complex(dir, "q", out.q.q())?;
            w.complex(dir, "omega", &out.moutard.omega_ff.omega)?;
            w.state_real(dir, "sigma", &masked_sigma(&out.sigma_tilde))?;
            w.state_complex(dir, "q_tilde", out.q_tilde.q())?;
            w.solutions(dir, &next)?;
            state.sigma = out.sigma_tilde.clone();
            state.q_tilde = Some(out.q_tilde.q().clone());
            state.solutions = next;
        }
        Step::Theorem3 { w: wspec } => {
            let wf = load(wspec, "w")?;
            let t = NdTransform::new(state.sigma.clone(), wf.clone(), state.singular)?;
            let sigma = t.sigma_tilde()?;
            let mut next = Vec::with_capacity(state.solutions.len());
            for c in &state.solutions {
                let u = c.u.as_ref().map(|u| t.apply(u)).transpose()?;
                next.push(Carried { u, ..Default::default() });
            }
            // a potential p seen by u becomes w²p, as in the generalized map
            // with a seed of zero potential
            if let Some(p) = &state.potential {
                let p = apply_mask(&wf.zip_with(p, |w, p| w * w * p)?, sigma.mask());
                w.state_real(dir, "potential", &p)?;
                state.potential = Some(p);
            }
            w.real(dir, "w", &wf)?;
            w.state_real(dir, "sigma", &masked_sigma(&sigma))?;
            w.forget("q_tilde");
            w.solutions(dir, &next)?;
            state.sigma = sigma;
            state.q_tilde = None;
            state.solutions = next;
        }
        Step::Generalized { q1, q2, w: wspec } => {
            let q1 = load(q1, "q1")?;
            let q2 = load(q2, "q2")?;
            let wf = load(wspec, "w")?;
            let check = generalized_residual(&state.sigma, &q2, &wf)?;
            if !check.pass {
                return Err(moutard_core::Error::Precondition(format!(
                    "w does not solve the equation with potential q2: residual {:.3e} > {:.3e}",
                    check.norm_max, check.tolerance
                ))
                .into());
            }
            let (sigma, _, q) = generalized_transform(&state.sigma, &q1, &q2, &wf, &wf, state.singular)?;
            let mut next = Vec::with_capacity(state.solutions.len());
            for c in &state.solutions {
                let u = match &c.u {
                    Some(u) => Some(generalized_transform(&state.sigma, &q1, &q2, &wf, u, state.singular)?.1),
                    None => None,
                };
                next.push(Carried { u, ..Default::default() });
            }
            w.real(dir, "w", &wf)?;
            w.real(dir, "q1", &q1)?;
            w.real(dir, "q2", &q2)?;
            w.state_real(dir, "sigma", &masked_sigma(&sigma))?;
            w.state_real(dir, "potential", &q)?;
            w.forget("q_tilde");
            w.solutions(dir, &next)?;
            state.sigma = sigma;
            state.potential = Some(q);
            state.q_tilde = None;
            state.solutions = next;
        }
        Step::SchrodingerReduce {} => {
            let data = schrodinger_q(&state.sigma);
            w.real(dir, "schrodinger_q", &data.q)?;
            for (k, c) in state.solutions.iter().enumerate() {
                if let Some(u) = &c.u {
                    w.real(dir, &format!("zero_energy{k}"), &data.substitute(u)?)?;
                }
            }
        }
        Step::StreamFunction { value } => {
            for (k, c) in state.solutions.iter_mut().enumerate() {
                if let Some(u) = &c.u {
                    let v = psi_to_v(&u_to_psi(u, &state.sigma)?, &state.sigma, &state.base, *value)?;
                    w.state_real(dir, &format!("v{k}"), &v)?;
                    c.v = Some(v);
                }
            }
        }
        Step::RecoverUV { base, u_values, v_values } => {
            let base = base.clone().unwrap_or_else(|| state.base.clone());
            for (k, c) in state.solutions.iter_mut().enumerate() {
                let psi = match &c.psi {
                    Some(p) => p.clone(),
                    None => c.psi_from_potentials(&state.sigma)?,
                };
                let current = |f: &Option<ScalarField>| f.as_ref().map_or(0.0, |f| value_at(f, &base));
                let ub = u_values.as_ref().map_or_else(|| current(&c.u), |v| v[k]);
                let vb = v_values.as_ref().map_or_else(|| current(&c.v), |v| v[k]);
                let u = psi_to_u(&psi, &state.sigma, &base, ub)?;
                let v = psi_to_v(&psi, &state.sigma, &base, vb)?;
                w.state_real(dir, &format!("u{k}"), &u)?;
                w.state_real(dir, &format!("v{k}"), &v)?;
                c.u = Some(u);
                c.v = Some(v);
            }
        }
    }
    Ok(())
}

/// The inputs of `eq` for solution `k` (`None` for `compat`).
fn inputs_for(state: &State, eq: EquationId, k: Option<usize>) -> Result<ResidualInputs, CliError> {
    use EquationId::*;
    let sigma = &state.sigma;
    let what = match k {
        Some(k) => format!("verify {eq} for solution {k}"),
        None => format!("verify {eq}"),
    };
    let missing = |name: &str| CliError::Config(format!("{what}: no {name} in the final state"));
    let core = |e| CliError::core(what.clone(), e);
    let c = k.map(|k| &state.solutions[k]);
    let u = || c.and_then(|c| c.u.as_ref()).ok_or_else(|| missing("potential u"));
    let v = || c.and_then(|c| c.v.as_ref()).ok_or_else(|| missing("stream function v"));
    let inputs = match eq {
        Hc1 | Hcm1 | Mdhc2 => ResidualInputs::conductivity(sigma.field(), u()?),
        Conj13 | Hcm1bis => ResidualInputs::conjugate(sigma.field(), v()?),
        Gan1 => {
            let q = sigma_to_q(sigma).map_err(core)?;
            let psi = c.expect("per solution").psi_from_potentials(sigma).map_err(core)?;
            ResidualInputs::gaf(q.q(), &psi)
        }
        Gan2 => {
            let q = sigma_to_q(sigma).map_err(core)?;
            let psi_plus = pair_to_psi_plus(u()?, v()?, sigma).map_err(core)?;
            ResidualInputs::gaf_conjugate(q.q(), &psi_plus)
        }
        Gan3 => {
            let q = state.q_tilde.as_ref().ok_or_else(|| missing("transformed coefficient q_tilde"))?;
            let psi = c.and_then(|c| c.psi.as_ref()).ok_or_else(|| missing("transformed psi"))?;
            ResidualInputs::gaf(q, psi)
        }
        Gan4 => {
            let q = state.q_tilde.as_ref().ok_or_else(|| missing("transformed coefficient q_tilde"))?;
            let pp = c.and_then(|c| c.psi_plus.as_ref()).ok_or_else(|| missing("transformed psi_plus"))?;
            ResidualInputs::gaf_conjugate(q, pp)
        }
        Sch2 => {
            let data = schrodinger_q(sigma);
            ResidualInputs {
                psi_real: Some(data.substitute(u()?).map_err(core)?),
                potential: Some(data.q),
                ..Default::default()
            }
        }
        Ga2 => ResidualInputs {
            sigma: Some(sigma.field().clone()),
            u: Some(u()?.clone()),
            potential: Some(state.potential.clone().unwrap_or_else(|| ScalarField::zeros(&state.grid))),
            ..Default::default()
        },
        Harmonic => ResidualInputs { u: Some(u()?.clone()), ..Default::default() },
        Compat => ResidualInputs { q: Some(sigma_to_q(sigma).map_err(core)?.q().clone()), ..Default::default() },
    };
    Ok(inputs.with_mask(sigma.mask().cloned()))
}

fn verify_all(
    state: &State,
    verify: &[EquationId],
    jobs: Option<usize>,
) -> Result<(Vec<ReportEntry>, Vec<ResidualReport>), CliError> {
    let mut tasks = Vec::new();
    for &eq in verify {
        if eq == EquationId::Compat {
            tasks.push((eq, None));
        } else {
            tasks.extend((0..state.solutions.len()).map(|k| (eq, Some(k))));
        }
    }
    let work = || {
        tasks
            .par_iter()
            .map(|&(eq, k)| {
                let inputs = inputs_for(state, eq, k)?;
                residual_scaled(eq, &inputs, state.tolerance_scale).map_err(|e| CliError::core(format!("verify {eq}"), e))
            })
            .collect::<Result<Vec<_>, _>>()
    };
    let reports = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("--jobs {n}: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let entries = tasks
        .iter()
        .zip(&reports)
        .map(|(&(equation, solution), r)| ReportEntry {
            equation,
            solution,
            file: match solution {
                Some(k) => format!("reports/{equation}_{k}.json"),
                None => format!("reports/{equation}.json"),
            },
            pass: r.pass,
        })
        .collect();
    Ok((entries, reports))
}

fn check_only(
    verify: &[EquationId],
    output: &Path,
    grid: Grid,
    base: Vec<usize>,
    singular: SingularMode,
    tolerance_scale: f64,
    jobs: Option<usize>,
) -> Result<RunOutcome, CliError> {
    let path = output.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let load = |name: &str| -> Result<Option<io::AnyField>, CliError> {
        let Some(rel) = manifest.state.get(name) else { return Ok(None) };
        let f = read_field(&output.join(rel))?;
        if f.grid() != &grid {
            return Err(CliError::Config(format!("{rel} is sampled on a different grid than the config")));
        }
        Ok(Some(f))
    };
    let real = |name: &str| -> Result<Option<ScalarField>, CliError> {
        load(name)?.map(|f| f.into_real().map_err(|e| CliError::core(name, e))).transpose()
    };
    let complex = |name: &str| -> Result<Option<ComplexField>, CliError> { Ok(load(name)?.map(io::AnyField::into_complex)) };

    let sigma = real("sigma")?.ok_or_else(|| CliError::Config(format!("{}: no sigma entry", path.display())))?;
    let sigma = Conductivity::from_sentinels(sigma).map_err(|e| CliError::core("sigma", e))?;
    let mut solutions = Vec::with_capacity(manifest.solutions);
    for k in 0..manifest.solutions {
        solutions.push(Carried {
            u: real(&format!("u{k}"))?,
            v: real(&format!("v{k}"))?,
            psi: complex(&format!("psi{k}"))?,
            psi_plus: complex(&format!("psi_plus{k}"))?,
        });
    }
    let state = State {
        potential: real("potential")?,
        q_tilde: complex("q_tilde")?,
        grid,
        sigma,
        solutions,
        base,
        singular,
        tolerance_scale,
    };
    let (entries, reports) = verify_all(&state, verify, jobs)?;
    manifest.pass = entries.iter().all(|e| e.pass);
    manifest.reports = entries;
    Ok(RunOutcome { output: output.to_path_buf(), manifest, reports })
}
