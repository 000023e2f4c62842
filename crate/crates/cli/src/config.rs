//! Pipeline configuration files.
//!
//! A config is a JSON document. Field specs are either an expression string
//! (see [`crate::expr`]) or `{"file": "path"}` naming a field file; paths are
//! relative to the config's directory.
//!
//! ```json
//! {
//!   "grid": { "dim": 2, "origin": [0, 0], "spacing": [0.0078125, 0.0078125], "shape": [129, 129] },
//!   "sigma": "1",
//!   "solutions": [{ "v": "x2" }],
//!   "steps": [
//!     { "moutard2d": { "variant": "R", "seed": "2 + x1", "omega_mode": "seed" } }
//!   ],
//!   "verify": ["hc1", "conj1.3"],
//!   "output": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use moutard_core::planar::{OmegaChoice, Variant};
use moutard_core::verify::EquationId;
use moutard_core::{Grid, SingularMode};

use crate::error::CliError;
use crate::expr::Expr;

/// Transform steps allowed in one pipeline unless overridden.
pub const DEFAULT_MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub grid: GridSpec,
    pub sigma: FieldSpec,
    #[serde(default)]
    pub solutions: Vec<SolutionSpec>,
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default)]
    pub verify: Vec<EquationId>,
    pub output: String,
    /// Grid index where integration constants are fixed; the first corner
    /// by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<usize>>,
    /// `"reject"`, `"mask"` or `"mask:<threshold>"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub shape: Vec<usize>,
}

impl GridSpec {
    /// `[0, 1]^dim` with `n` points per axis.
    pub fn unit(dim: usize, n: usize) -> Self {
        let h = 1.0 / (n as f64 - 1.0);
        Self { dim, origin: vec![0.0; dim], spacing: vec![h; dim], shape: vec![n; dim] }
    }

    pub fn build(&self) -> Result<Grid, CliError> {
        if self.origin.len() != self.dim || self.spacing.len() != self.dim || self.shape.len() != self.dim {
            return Err(CliError::Config(format!("grid: origin, spacing and shape must all have {} entries", self.dim)));
        }
        Grid::new(self.origin.clone(), self.spacing.clone(), self.shape.clone())
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Expr(String),
    File {
        file: String,
    },
}

impl FieldSpec {
    pub fn expr(src: &str) -> Self {
        FieldSpec::Expr(src.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<FieldSpec>,
}

/// Seed of a planar transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Field(FieldSpec),
    /// A carried solution plus a constant: its potential for `M_I`, its
    /// stream function for `M_R`.
    Solution {
        solution: usize,
        #[serde(default)]
        offset: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Moutard2d {
        variant: Variant,
        seed: SeedSpec,
        #[serde(default)]
        omega_mode: OmegaChoice,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Vec<usize>>,
    },
    Theorem3 {
        w: FieldSpec,
    },
    Generalized {
        q1: FieldSpec,
        q2: FieldSpec,
        w: FieldSpec,
    },
    SchrodingerReduce {},
    StreamFunction {
        #[serde(default)]
        value: f64,
    },
    #[serde(rename = "recover_u_v")]
    RecoverUV {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Vec<usize>>,
        /// Values of the potentials at `base`; the current values by default.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u_values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v_values: Option<Vec<f64>>,
    },
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::Moutard2d { .. } => "moutard2d",
            Step::Theorem3 { .. } => "theorem3",
            Step::Generalized { .. } => "generalized",
            Step::SchrodingerReduce {} => "schrodinger_reduce",
            Step::StreamFunction { .. } => "stream_function",
            Step::RecoverUV { .. } => "recover_u_v",
        }
    }

    /// Steps that change the conductivity count towards the depth limit.
    pub fn is_transform(&self) -> bool {
        matches!(self, Step::Moutard2d { .. } | Step::Theorem3 { .. } | Step::Generalized { .. })
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, Step::Moutard2d { .. } | Step::StreamFunction { .. } | Step::RecoverUV { .. })
    }
}

/// Parses `"reject"`, `"mask"` or `"mask:<threshold>"`.
pub fn parse_singular(s: &str) -> Result<SingularMode, CliError> {
    match s.split_once(':') {
        None if s == "reject" => Ok(SingularMode::Reject),
        None if s == "mask" => Ok(SingularMode::masking()),
        Some(("mask", t)) => match t.parse::<f64>() {
            Ok(t) if t > 0.0 && t < 1.0 => Ok(SingularMode::Mask { rel_threshold: t }),
            _ => Err(CliError::Config(format!("singular mode threshold {t:?} must lie in (0, 1)"))),
        },
        _ => Err(CliError::Config(format!("unknown singular mode {s:?}"))),
    }
}

/// A config together with the directory its paths are relative to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    pub dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, dir })
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output)
    }
}

/// Static checks that need no computation: grid, expressions, step types
/// against the dimension, depth and solution indices.
pub fn validate(config: &PipelineConfig, max_depth: usize) -> Result<Grid, CliError> {
    let grid = config.grid.build()?;
    let dim = grid.dim();
    let check = |what: &str, spec: &FieldSpec| -> Result<(), CliError> {
        if let FieldSpec::Expr(src) = spec {
            Expr::parse(src, dim).map_err(|e| CliError::Config(format!("{what}: {e}")))?;
        }
        Ok(())
    };
    check("sigma", &config.sigma)?;
    for (k, s) in config.solutions.iter().enumerate() {
        if s.u.is_none() && s.v.is_none() {
            return Err(CliError::Config(format!("solution {k}: needs u or v")));
        }
        if let Some(u) = &s.u {
            check(&format!("solution {k} u"), u)?;
        }
        if let Some(v) = &s.v {
            check(&format!("solution {k} v"), v)?;
        }
    }
    let depth = config.steps.iter().filter(|s| s.is_transform()).count();
    if depth > max_depth {
        return Err(CliError::Config(format!("pipeline has {depth} transform steps, more than the maximum depth {max_depth}")));
    }
    for base in config.base.iter() {
        check_index(&grid, base, "base")?;
    }
    for (i, step) in config.steps.iter().enumerate() {
        let at = |msg: String| CliError::Config(format!("step {i} ({}): {msg}", step.name()));
        if step.is_planar() && dim != 2 {
            return Err(at(format!("needs a 2-dimensional grid, got dimension {dim}")));
        }
        let check = |what: &str, spec: &FieldSpec| check(&format!("step {i} ({}) {what}", step.name()), spec);
        match step {
            Step::Moutard2d { seed, base, .. } => {
                match seed {
                    SeedSpec::Field(f) => check("seed", f)?,
                    SeedSpec::Solution { solution, .. } => {
                        if *solution >= config.solutions.len() {
                            return Err(at(format!("seed refers to solution {solution}, but only {} are given", config.solutions.len())));
                        }
                    }
                }
                if let Some(b) = base {
                    check_index(&grid, b, "base").map_err(|e| at(e.to_string()))?;
                }
            }
            Step::Theorem3 { w } => check("w", w)?,
            Step::Generalized { q1, q2, w } => {
                check("q1", q1)?;
                check("q2", q2)?;
                check("w", w)?;
            }
            Step::RecoverUV { base, u_values, v_values } => {
                if let Some(b) = base {
                    check_index(&grid, b, "base").map_err(|e| at(e.to_string()))?;
                }
                for (name, values) in [("u_values", u_values), ("v_values", v_values)] {
                    if values.as_ref().is_some_and(|v| v.len() != config.solutions.len()) {
                        return Err(at(format!("{name} needs one value per solution")));
                    }
                }
            }
            Step::SchrodingerReduce {} | Step::StreamFunction { .. } => {}
        }
    }
    for eq in &config.verify {
        let planar = matches!(
            eq,
            EquationId::Gan1 | EquationId::Gan2 | EquationId::Gan3 | EquationId::Gan4 | EquationId::Compat
        );
        if planar && dim != 2 {
            return Err(CliError::Config(format!("verify {eq}: needs a 2-dimensional grid")));
        }
    }
    Ok(grid)
}

fn check_index(grid: &Grid, index: &[usize], what: &str) -> Result<(), CliError> {
    if index.len() != grid.dim() || index.iter().zip(grid.shape()).any(|(i, n)| i >= n) {
        return Err(CliError::Config(format!("{what} {index:?} is not a grid index")));
    }
    Ok(())
}
